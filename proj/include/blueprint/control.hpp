#pragma once

#include <string>
#include <vector>

#include "blueprint/core.hpp"
#include "blueprint/formats.hpp"
#include "blueprint/model_clients.hpp"

namespace blueprint {

enum class Q1Selection { first_in_plan_order, longest_answer };

struct ControlConfig {
  double drop_threshold = 0.5;  // token-F1 floor for answerability
  Q1Selection q1_selection = Q1Selection::first_in_plan_order;

  void validate() const;
};

// Keeps the pairs whose questions the QA model can answer from the input
// itself (token F1 against the planned answer at least drop_threshold).
// Order-preserving subsequence of the input plan.
Blueprint drop_unanswerable(const Blueprint& blueprint, const Document& document,
                            ModelBackend& qa_client, const ControlConfig& config,
                            int workers = 1);

// Reduces every non-empty per-sentence plan to a single pair.
std::vector<SentenceBlueprint> truncate_q1(const std::vector<SentenceBlueprint>& sentence_blueprints,
                                           const ControlConfig& config);

// Decoder prompt that forces an edited plan. For the iterative variant the
// prompt covers one step; pass the sentences generated so far as context.
std::string apply_plan_edit(const Blueprint& edited_blueprint, Variant variant,
                            const FormatConfig& config,
                            const std::vector<std::string>& context_sentences = {});

}  // namespace blueprint
