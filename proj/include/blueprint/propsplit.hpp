#pragma once

#include <string>
#include <vector>

#include "blueprint/core.hpp"

namespace blueprint {

// Lexical boundary rules for splitting sentences into propositions.
struct SplitConfig {
  std::vector<std::string> punctuation_tokens = {".", ",", ";"};
  std::vector<std::string> coordination_tokens = {"and", "but", "or"};
  std::vector<std::string> relative_pronouns = {"that", "who",  "which", "where",
                                                "when", "whose", "whom"};
  std::vector<std::string> prepositions = {"at",   "by", "from",   "for",      "in", "on",
                                           "to",   "with", "of",   "during",   "following"};
  int min_words = 3;
  int max_words = 12;

  void validate() const;
};

// Hierarchical greedy split of one sentence. Tier order: punctuation, then
// coordination/relative pronouns, then prepositions. A chunk splits at the
// leftmost eligible boundary only while it exceeds max_words and both sides
// keep at least min_words content words. Punctuation stays with the left
// chunk; a leading coordination/relative token is dropped from the emitted
// proposition text (spans stay content-only, so text == slice(span)).
std::vector<Proposition> split_propositions(const std::string& sentence_text,
                                            const SplitConfig& config);

// split_propositions over every sentence, spans in summary coordinates.
std::vector<Proposition> split_summary(const Summary& summary, const SplitConfig& config);

}  // namespace blueprint
