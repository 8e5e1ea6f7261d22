#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "blueprint/candidates.hpp"
#include "blueprint/core.hpp"
#include "blueprint/model_clients.hpp"
#include "blueprint/propsplit.hpp"

namespace blueprint {

enum class RoundtripMode { normalized_exact, f1_threshold };
enum class SortMode { first_occurrence, answer_span, random_shuffle };
enum class CoverageUnit { question_plus_answer_tokens, answer_tokens_only };

struct AnnotateConfig {
  RoundtripMode roundtrip_mode = RoundtripMode::normalized_exact;
  double roundtrip_f1_threshold = 0.5;  // used in f1_threshold mode
  CoverageUnit coverage_unit = CoverageUnit::question_plus_answer_tokens;
  SortMode sort_mode = SortMode::first_occurrence;
  std::uint64_t random_seed = 0;  // used in random_shuffle mode
  bool enable_rheme = true;
  bool enable_coverage = true;

  void validate() const;
};

struct AnnotateClients {
  const CandidateBackend* candidates = nullptr;
  ModelBackend* model = nullptr;
};

// One QA pair per candidate. A pair whose QG call fails transport is
// dropped with a warning on stderr.
std::vector<QAPair> overgenerate(const Summary& summary,
                                 const std::vector<AnswerCandidate>& cands,
                                 ModelBackend& qg_client, int workers = 1);

// Keeps a pair only when the QA model, asked the pair's question over the
// summary, produces the answer the question was generated from. Transport
// errors fail the whole batch.
std::vector<QAPair> roundtrip_filter(const std::vector<QAPair>& pairs, const Summary& summary,
                                     ModelBackend& qa_client, const AnnotateConfig& config,
                                     int workers = 1);

// At most one pair per proposition: the one whose answer span ends
// rightmost, ties to the longest answer, then the lowest input index.
std::vector<QAPair> rheme_select(const std::vector<QAPair>& pairs,
                                 const std::vector<Proposition>& propositions);

// Greedy lexical-coverage selection over the summary's token bag; see the
// implementation notes for the scoring and removal rules.
std::vector<QAPair> coverage_select(const std::vector<QAPair>& pairs, const Summary& summary,
                                    const AnnotateConfig& config);

Blueprint sort_blueprint(std::vector<QAPair> pairs, const Summary& summary,
                         const AnnotateConfig& config);

// Assigns each pair to the sentence containing its answer span start
// (falling back to the first occurrence of the answer string). Every
// sentence gets an entry, possibly empty.
std::vector<SentenceBlueprint> align_to_sentences(const Blueprint& blueprint,
                                                  const Summary& summary);

// candidates -> overgenerate -> round trip -> (rheme) -> (coverage) -> sort.
AnnotatedExample annotate_example(
    Document document, Summary summary, const AnnotateClients& clients,
    const SplitConfig& split_config, const AnnotateConfig& annotate_config,
    const std::optional<std::vector<Proposition>>& override_propositions = std::nullopt,
    int workers = 1);

}  // namespace blueprint
