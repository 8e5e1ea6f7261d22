#pragma once

#include <string>
#include <vector>

#include "blueprint/core.hpp"

namespace blueprint {

enum class CandidateKind { noun_phrase, named_entity, number_or_date };

std::string to_string(CandidateKind kind);
CandidateKind candidate_kind_from_string(const std::string& s);

// An answer candidate: a noun phrase, named entity or number/date span.
struct AnswerCandidate {
  std::string text;
  CharSpan span;
  CandidateKind kind = CandidateKind::noun_phrase;
};

class CandidateBackend {
 public:
  virtual ~CandidateBackend() = default;
  // Throws TransportError when a remote annotator is unreachable.
  virtual std::vector<AnswerCandidate> candidates(const Summary& summary) const = 0;
};

// Offline fallback. Extracts capitalized-token runs away from sentence
// starts (plus their nested sub-runs), determiner-led noun runs detected
// with a closed-class word list, numeric tokens and "NUM to NUM" ranges.
class HeuristicCandidateBackend : public CandidateBackend {
 public:
  std::vector<AnswerCandidate> candidates(const Summary& summary) const override;
};

// Deduplicates by span and orders by (start, end). Overlapping and nested
// candidates are all retained.
std::vector<AnswerCandidate> extract_candidates(const Summary& summary,
                                                const CandidateBackend& backend);

}  // namespace blueprint
