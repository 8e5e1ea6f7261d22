#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blueprint {

// Half-open character range into an enclosing text.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool contains(const CharSpan& other) const {
    return start <= other.start && other.end <= end;
  }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct SourceText {
  std::string id;
  std::string text;
};

// Model input d: one or more source texts plus an optional query.
struct Document {
  std::string id;
  std::optional<std::string> query;
  std::vector<SourceText> sources;

  // Query first when present, then the source texts, single-space joined.
  std::string joined_text() const;
};

// Output text with sentence segmentation. Sentence spans are trimmed,
// non-overlapping, ascending and cover every non-whitespace character.
struct Summary {
  std::string text;
  std::vector<CharSpan> sentences;

  std::string sentence_text(std::size_t i) const {
    const CharSpan& s = sentences.at(i);
    return text.substr(s.start, s.length());
  }
  static Summary from_text(std::string text);
};

struct QAPair {
  std::string question;
  std::string answer;
  // Span the question was generated from, when known.
  std::optional<CharSpan> answer_span;
  // First occurrence of the answer string in the summary; set by sorting.
  std::optional<std::size_t> sort_key;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

// The plan b: an ordered list of question-answer pairs.
struct Blueprint {
  std::vector<QAPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  friend bool operator==(const Blueprint&, const Blueprint&) = default;
};

// Sub-sentential unit carrying a single claim; text equals the summary
// slice at span.
struct Proposition {
  CharSpan span;
  std::string text;
};

struct SentenceBlueprint {
  std::size_t sentence_index = 0;
  std::vector<QAPair> pairs;
};

struct AnnotatedExample {
  Document document;
  Summary summary;
  Blueprint blueprint;
  std::vector<SentenceBlueprint> sentence_blueprints;
  std::vector<Proposition> propositions;
};

using TokenCounts = std::map<std::string, int>;

// Reading-comprehension style normalization: lowercase, strip punctuation
// (hyphens survive inside words), drop English articles, split on whitespace.
std::vector<std::string> normalize_answer(const std::string& text);

// Same stripping, but articles are kept and counts are returned.
TokenCounts bag_tokens(const std::string& text);
std::vector<std::string> simple_tokens(const std::string& text);

// Rule-based sentence splitting on . ! ? followed by whitespace and an
// uppercase or numeric character, with a small abbreviation guard list.
std::vector<CharSpan> split_sentences(const std::string& text);

// First occurrence of `needle` in `haystack` at whole-token boundaries
// (neighbouring characters must not be alphanumeric).
std::optional<std::size_t> find_token_occurrence(const std::string& haystack,
                                                 const std::string& needle);

int count_tokens(const TokenCounts& bag);
TokenCounts intersect(const TokenCounts& a, const TokenCounts& b);

}  // namespace blueprint
