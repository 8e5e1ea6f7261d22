#pragma once

#include <array>
#include <string>
#include <vector>

#include "blueprint/core.hpp"
#include "blueprint/model_clients.hpp"

namespace blueprint {

struct FaithfulnessConfig {
  std::size_t max_premise_chars = 4000;  // split budget for long inputs
  double threshold = 0.5;                // strict > binarization

  void validate() const;
};

// Token-level F1 over normalized token multisets. Both sides empty scores
// 1.0, exactly one empty scores 0.0.
double token_f1(const std::string& predicted, const std::string& gold);

struct PerQuestionScore {
  std::string question;
  std::string gold_answer;
  std::string predicted_answer;
  double f1 = 0.0;
};

struct QaScore {
  double mean_f1 = 0.0;
  std::vector<PerQuestionScore> per_question;
};

// Asks every blueprint question against the given text and averages the
// token F1 of the QA model's answers. With the reference blueprint this is
// informativeness; with the predicted blueprint, grounding. A no-answer
// response scores as an empty prediction.
QaScore qa_based_score(const std::string& summary_text, const Blueprint& blueprint,
                       ModelBackend& qa_client, int workers = 1);

struct FaithfulnessScore {
  double score = 0.0;
  std::vector<int> per_sentence;  // binary labels
};

// Mean per-sentence entailment of the summary by the input, probabilities
// binarized at the threshold (strictly greater). Long inputs are chunked
// at sentence boundaries and the per-chunk maximum is used.
FaithfulnessScore faithfulness(const Document& document, const Summary& summary,
                               ModelBackend& nli_client, const FaithfulnessConfig& config,
                               int workers = 1);

// Summary-level Rouge-L: newlines bound sentences, per-reference-sentence
// union LCS hits feed an F1 with precision over candidate tokens and
// recall over reference tokens.
double rouge_lsum(const std::string& candidate, const std::string& reference);

// Blueprints are linearized as one flat "question answer" token sequence,
// keeping pair order, then compared with rouge_lsum. Reordering pairs
// lowers the score.
double blueprint_rouge(const Blueprint& predicted, const Blueprint& reference);

// Fraction of target n-gram positions whose n-gram never occurs in the
// source. A target shorter than n yields 0.
double novel_ngrams(const std::string& source_text, const std::string& target_text, int n);

struct StatsInput {
  std::vector<std::string> sources;
  std::string summary;
  std::vector<QAPair> pairs;
};

struct DatasetStats {
  std::size_t examples = 0;
  double docs_per_example = 0.0;
  double source_words = 0.0;
  double source_sentences = 0.0;
  double words_per_doc = 0.0;
  double target_words = 0.0;
  double target_sentences = 0.0;
  std::array<double, 4> novel = {0, 0, 0, 0};  // n = 1..4
  double qa_pairs_per_blueprint = 0.0;
  double target_plus_blueprint_words = 0.0;
};

DatasetStats dataset_stats(const std::vector<StatsInput>& corpus);

std::size_t count_words(const std::string& text);

}  // namespace blueprint
