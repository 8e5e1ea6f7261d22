#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "blueprint/candidates.hpp"
#include "blueprint/errors.hpp"

#include "support/shelby.hpp"

using namespace blueprint;

namespace {

bool has_text(const std::vector<AnswerCandidate>& cands, const std::string& text) {
  return std::any_of(cands.begin(), cands.end(),
                     [&](const AnswerCandidate& c) { return c.text == text; });
}

const AnswerCandidate& by_text(const std::vector<AnswerCandidate>& cands,
                               const std::string& text) {
  for (const AnswerCandidate& c : cands)
    if (c.text == text) return c;
  throw std::logic_error("candidate not found: " + text);
}

}  // namespace

TEST_CASE("capitalized runs off the sentence start") {
  HeuristicCandidateBackend backend;
  Summary s = Summary::from_text("built by Shelby American from");
  std::vector<AnswerCandidate> cands = extract_candidates(s, backend);
  CHECK(has_text(cands, "Shelby American"));
  CHECK(by_text(cands, "Shelby American").kind == CandidateKind::named_entity);
}

TEST_CASE("numeric tokens and ranges") {
  HeuristicCandidateBackend backend;
  std::vector<AnswerCandidate> year =
      extract_candidates(Summary::from_text("in 2005,"), backend);
  REQUIRE(year.size() == 1);
  CHECK(year[0].text == "2005");
  CHECK(year[0].kind == CandidateKind::number_or_date);

  std::vector<AnswerCandidate> range =
      extract_candidates(Summary::from_text("from 1965 to 1968"), backend);
  CHECK(has_text(range, "1965 to 1968"));
  CHECK(by_text(range, "1965 to 1968").kind == CandidateKind::number_or_date);
  CHECK(has_text(range, "1965"));
  CHECK(has_text(range, "1968"));
}

TEST_CASE("closed-class-only runs produce nothing") {
  HeuristicCandidateBackend backend;
  CHECK(extract_candidates(Summary::from_text("the the"), backend).empty());
}

TEST_CASE("empty summary yields no candidates") {
  HeuristicCandidateBackend backend;
  CHECK(extract_candidates(Summary::from_text(""), backend).empty());
}

TEST_CASE("nested sub-runs are all retained") {
  HeuristicCandidateBackend backend;
  Summary s = Summary::from_text("It was built by Shelby American Motors yesterday.");
  std::vector<AnswerCandidate> cands = extract_candidates(s, backend);
  CHECK(has_text(cands, "Shelby"));
  CHECK(has_text(cands, "American"));
  CHECK(has_text(cands, "Shelby American"));
  CHECK(has_text(cands, "American Motors"));
  CHECK(has_text(cands, "Shelby American Motors"));
}

TEST_CASE("determiner-led noun runs") {
  HeuristicCandidateBackend backend;
  Summary s = shelby::summary();
  std::vector<AnswerCandidate> cands = extract_candidates(s, backend);
  CHECK(has_text(cands, "The Shelby Mustang"));
  CHECK(has_text(cands, "a high performance variant"));
  CHECK(has_text(cands, "the Ford Mustang"));
  CHECK(has_text(cands, "the Shelby nameplate"));
  CHECK(has_text(cands, "a new high-performance model"));
}

TEST_CASE("spans match the summary text, are ordered and deduplicated") {
  HeuristicCandidateBackend backend;
  Summary s = shelby::summary();
  std::vector<AnswerCandidate> first = extract_candidates(s, backend);
  std::vector<AnswerCandidate> second = extract_candidates(s, backend);
  REQUIRE(first.size() == second.size());  // deterministic
  for (std::size_t i = 0; i < first.size(); ++i) {
    const AnswerCandidate& c = first[i];
    CHECK(s.text.substr(c.span.start, c.span.length()) == c.text);
    CHECK(second[i].text == c.text);
    if (i > 0) {
      bool ordered = first[i - 1].span.start < c.span.start ||
                     (first[i - 1].span.start == c.span.start &&
                      first[i - 1].span.end < c.span.end);
      CHECK(ordered);
    }
  }
}

TEST_CASE("extract_candidates rejects spans that disagree with the text") {
  struct Broken : CandidateBackend {
    std::vector<AnswerCandidate> candidates(const Summary&) const override {
      return {{"wrong", {0, 5}, CandidateKind::noun_phrase}};
    }
  };
  Summary s = Summary::from_text("right words only");
  CHECK_THROWS_AS(extract_candidates(s, Broken{}), ConfigError);
}
