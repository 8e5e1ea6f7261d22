#include "blueprint/candidates.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "blueprint/errors.hpp"

namespace blueprint {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit_c(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

struct Word {
  std::size_t start;
  std::size_t end;  // core end: trailing punctuation excluded
};

std::vector<Word> words_in(const std::string& text, std::size_t lo, std::size_t hi) {
  std::vector<Word> out;
  std::size_t i = lo;
  while (i < hi) {
    while (i < hi && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < hi && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::size_t e = j;
      while (e > i && !is_alnum(text[e - 1])) --e;  // shed trailing punctuation
      if (e > i) out.push_back({i, e});
    }
    i = j;
  }
  return out;
}

std::string lower_core(const std::string& text, const Word& w) {
  std::string out;
  for (std::size_t i = w.start; i < w.end; ++i) {
    char c = text[i];
    if (is_alnum(c) || c == '-')
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool starts_upper(const std::string& text, const Word& w) {
  return std::isupper(static_cast<unsigned char>(text[w.start])) != 0;
}

bool is_number(const std::string& text, const Word& w) {
  bool any = false;
  for (std::size_t i = w.start; i < w.end; ++i) {
    if (is_digit_c(text[i])) any = true;
    else if (text[i] != ',' && text[i] != '.') return false;
  }
  return any;
}

// Determiners plus function words that terminate a determiner-led noun run.
const std::array<const char*, 39> kClosedClass = {
    "a",    "an",   "the",  "this",  "that",  "these", "those", "his",  "her",
    "its",  "their", "our",  "your",  "my",    "is",    "are",   "was",  "were",
    "be",   "been", "has",  "have",  "had",   "of",    "in",    "on",   "at",
    "by",   "to",   "from", "with",  "for",   "and",   "but",   "or",   "which",
    "who",  "as",   "not"};

bool closed_class(const std::string& tok) {
  for (const char* w : kClosedClass)
    if (tok == w) return true;
  return false;
}

bool is_determiner(const std::string& tok) {
  return tok == "a" || tok == "an" || tok == "the" || tok == "this" ||
         tok == "that" || tok == "these" || tok == "those";
}

struct SpanLess {
  bool operator()(const CharSpan& a, const CharSpan& b) const {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  }
};

}  // namespace

std::string to_string(CandidateKind kind) {
  switch (kind) {
    case CandidateKind::noun_phrase: return "noun_phrase";
    case CandidateKind::named_entity: return "named_entity";
    case CandidateKind::number_or_date: return "number_or_date";
  }
  return "noun_phrase";
}

CandidateKind candidate_kind_from_string(const std::string& s) {
  if (s == "named_entity") return CandidateKind::named_entity;
  if (s == "number_or_date") return CandidateKind::number_or_date;
  if (s == "noun_phrase") return CandidateKind::noun_phrase;
  throw ConfigError("unknown candidate kind: " + s);
}

std::vector<AnswerCandidate> HeuristicCandidateBackend::candidates(
    const Summary& summary) const {
  const std::string& text = summary.text;
  std::set<CharSpan, SpanLess> seen;
  std::vector<AnswerCandidate> out;
  auto emit = [&](std::size_t s, std::size_t e, CandidateKind kind) {
    CharSpan span{s, e};
    if (seen.insert(span).second)
      out.push_back({text.substr(s, e - s), span, kind});
  };

  for (const CharSpan& sent : summary.sentences) {
    std::vector<Word> toks = words_in(text, sent.start, sent.end);

    // Capitalized runs off the sentence start, with nested sub-runs.
    std::size_t k = 0;
    while (k < toks.size()) {
      if (!starts_upper(text, toks[k]) || is_number(text, toks[k])) { ++k; continue; }
      std::size_t run_begin = k;
      while (k < toks.size() && starts_upper(text, toks[k]) && !is_number(text, toks[k])) ++k;
      std::size_t begin = run_begin == 0 ? run_begin + 1 : run_begin;  // skip sentence-initial word
      if (begin >= k) continue;
      for (std::size_t i = begin; i < k; ++i)
        for (std::size_t j = i; j < k; ++j)
          emit(toks[i].start, toks[j].end, CandidateKind::named_entity);
    }

    // Determiner-led runs: determiner followed by non-closed-class words.
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      if (!is_determiner(lower_core(text, toks[i]))) continue;
      std::size_t j = i + 1;
      while (j < toks.size() && !closed_class(lower_core(text, toks[j])) &&
             !is_number(text, toks[j]))
        ++j;
      if (j > i + 1) {
        emit(toks[i].start, toks[j - 1].end, CandidateKind::noun_phrase);
        // A punctuation mark glued to an inner word ends the phrase.
      }
    }

    // Numbers and "NUM to NUM" ranges.
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (!is_number(text, toks[i])) continue;
      emit(toks[i].start, toks[i].end, CandidateKind::number_or_date);
      if (i + 2 < toks.size() && lower_core(text, toks[i + 1]) == "to" &&
          is_number(text, toks[i + 2]))
        emit(toks[i].start, toks[i + 2].end, CandidateKind::number_or_date);
    }
  }

  std::sort(out.begin(), out.end(), [](const AnswerCandidate& a, const AnswerCandidate& b) {
    return SpanLess{}(a.span, b.span);
  });
  return out;
}

std::vector<AnswerCandidate> extract_candidates(const Summary& summary,
                                                const CandidateBackend& backend) {
  std::vector<AnswerCandidate> cands = backend.candidates(summary);
  std::stable_sort(cands.begin(), cands.end(),
                   [](const AnswerCandidate& a, const AnswerCandidate& b) {
                     return SpanLess{}(a.span, b.span);
                   });
  std::vector<AnswerCandidate> out;
  std::set<CharSpan, SpanLess> seen;
  for (AnswerCandidate& c : cands) {
    if (c.span.end > summary.text.size() || c.span.start >= c.span.end)
      throw ConfigError("candidate span out of range");
    if (summary.text.compare(c.span.start, c.span.length(), c.text) != 0)
      throw ConfigError("candidate text does not match its span");
    if (seen.insert(c.span).second) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace blueprint
