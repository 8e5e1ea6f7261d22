#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blueprint/core.hpp"

namespace blueprint {

enum class Variant { e2e, multitask_summary, multitask_questions, iterative };
enum class PlanOrder { answer_question, question_answer };

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& s);

struct FormatConfig {
  std::string plan_marker = "Plan:";
  std::string summary_marker = "Summary:";
  std::string questions_marker = "Questions:";
  std::string context_marker = "Context:";
  std::string next_sentence_marker = "Next Sentence:";
  std::string gen_summary_prefix = "Generate Summary:";
  std::string gen_questions_prefix = "Generate Questions:";
  std::string pair_separator = "; ";
  std::string end_plan_token = "[END_PLAN]";
  std::string end_sentence_token = "[END]";
  PlanOrder plan_order = PlanOrder::answer_question;

  void validate() const;
};

// One training/inference record. loss_mask_prefix_len counts the characters
// of target_text excluded from the loss (the context prefix of iterative
// instances; 0 elsewhere).
struct TargetInstance {
  std::string input_text;
  std::string target_text;
  std::size_t loss_mask_prefix_len = 0;
  Variant variant = Variant::e2e;
  std::optional<int> step_index;
};

// A decoded model output brought back into structured form. Recoverable
// irregularities (odd field counts, length mismatches, missing pieces) are
// reported as flags instead of errors.
struct ParsedOutput {
  Blueprint blueprint;
  std::string summary_text;
  std::vector<std::string> flags;
};

struct IterativeStep {
  std::vector<QAPair> pairs;
  std::string sentence;
  bool is_end = false;
  std::vector<std::string> flags;
};

// Content fields are protected against embedded marker strings by doubling
// the marker's colon on write and undoing it on read.
std::string escape_markers(const std::string& content, const FormatConfig& config);
std::string unescape_markers(const std::string& content, const FormatConfig& config);

// "Plan: a1; q1; ...; am; qm Summary: <s>" over the concatenated sources.
TargetInstance serialize_e2e(const AnnotatedExample& example, const FormatConfig& config);
ParsedOutput parse_e2e(const std::string& text, const FormatConfig& config);

// Twin instances: "Generate Summary:" -> answer plan + summary and
// "Generate Questions:" -> answer plan + questions.
std::pair<TargetInstance, TargetInstance> serialize_multitask(const AnnotatedExample& example,
                                                              const FormatConfig& config);
ParsedOutput parse_multitask(const std::string& summary_decode,
                             const std::string& questions_decode, const FormatConfig& config);

// n+1 instances: per-sentence context/plan/next-sentence steps plus the
// end-token terminator. The context prefix is excluded from the loss.
std::vector<TargetInstance> serialize_iterative(const AnnotatedExample& example,
                                                const FormatConfig& config);
IterativeStep parse_iterative_step(const std::string& decode, const FormatConfig& config);
ParsedOutput assemble_iterative(const std::vector<IterativeStep>& steps);

// Plan body text for prompt construction; answers_only drops the questions.
std::string plan_body_text(const std::vector<QAPair>& pairs, const FormatConfig& config,
                           bool answers_only = false);

}  // namespace blueprint
