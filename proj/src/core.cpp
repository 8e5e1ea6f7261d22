#include "blueprint/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "blueprint/errors.hpp"

namespace blueprint {

namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_upper_or_digit(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isupper(u) != 0 || std::isdigit(u) != 0;
}

// Lowercases and removes punctuation. A hyphen stays when it joins two
// alphanumeric characters, so "high-performance" remains one token.
std::string strip_token(const std::string& tok) {
  std::string out;
  out.reserve(tok.size());
  for (std::size_t i = 0; i < tok.size(); ++i) {
    char c = tok[i];
    if (is_alnum(c)) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (c == '-' && i > 0 && i + 1 < tok.size() && is_alnum(tok[i - 1]) &&
               is_alnum(tok[i + 1])) {
      out.push_back('-');
    }
  }
  return out;
}

bool is_article(const std::string& tok) {
  return tok == "a" || tok == "an" || tok == "the";
}

// Words that commonly precede an abbreviating period. Deliberately short;
// single capitals ("A.", initials) are split on purpose.
const std::array<const char*, 16> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "st", "vs", "etc",
    "inc", "ltd", "co", "jr", "sr", "no", "fig", "al"};

bool is_abbreviation(const std::string& word) {
  std::string lower;
  for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (const char* a : kAbbreviations)
    if (lower == a) return true;
  return false;
}

}  // namespace

std::string Document::joined_text() const {
  std::string out;
  if (query && !query->empty()) out = *query;
  for (const SourceText& s : sources) {
    if (!out.empty()) out += ' ';
    out += s.text;
  }
  return out;
}

Summary Summary::from_text(std::string text) {
  Summary s;
  s.sentences = split_sentences(text);
  s.text = std::move(text);
  return s;
}

std::vector<std::string> normalize_answer(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ws(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_ws(text[j])) ++j;
    if (j > i) {
      std::string tok = strip_token(text.substr(i, j - i));
      if (!tok.empty() && !is_article(tok)) out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

std::vector<std::string> simple_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ws(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_ws(text[j])) ++j;
    if (j > i) {
      std::string tok = strip_token(text.substr(i, j - i));
      if (!tok.empty()) out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

TokenCounts bag_tokens(const std::string& text) {
  TokenCounts bag;
  for (std::string& tok : simple_tokens(text)) ++bag[tok];
  return bag;
}

std::vector<CharSpan> split_sentences(const std::string& text) {
  std::vector<CharSpan> spans;
  std::size_t begin = 0;
  auto flush = [&](std::size_t end) {
    while (begin < end && is_ws(text[begin])) ++begin;
    std::size_t e = end;
    while (e > begin && is_ws(text[e - 1])) --e;
    if (e > begin) spans.push_back({begin, e});
    begin = end;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    // Allow closing quotes/brackets between the terminator and the space.
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == ')')) ++j;
    if (j >= text.size()) continue;  // trailing terminator: flushed below
    if (!is_ws(text[j])) continue;
    std::size_t k = j;
    while (k < text.size() && is_ws(text[k])) ++k;
    if (k >= text.size() || !is_upper_or_digit(text[k])) continue;
    if (c == '.') {
      // Back up over the word holding the period.
      std::size_t w = i;
      while (w > begin && is_alnum(text[w - 1])) --w;
      if (is_abbreviation(text.substr(w, i - w))) continue;
    }
    flush(j);
  }
  flush(text.size());
  return spans;
}

std::optional<std::size_t> find_token_occurrence(const std::string& haystack,
                                                 const std::string& needle) {
  if (needle.empty()) return std::nullopt;
  std::size_t from = 0;
  while (true) {
    std::size_t pos = haystack.find(needle, from);
    if (pos == std::string::npos) return std::nullopt;
    bool pre_ok = pos == 0 || !is_alnum(haystack[pos - 1]);
    std::size_t after = pos + needle.size();
    bool post_ok = after >= haystack.size() || !is_alnum(haystack[after]);
    if (pre_ok && post_ok) return pos;
    from = pos + 1;
  }
}

int count_tokens(const TokenCounts& bag) {
  int n = 0;
  for (const auto& [tok, c] : bag) n += c;
  return n;
}

TokenCounts intersect(const TokenCounts& a, const TokenCounts& b) {
  TokenCounts out;
  for (const auto& [tok, c] : a) {
    auto it = b.find(tok);
    if (it != b.end()) out[tok] = std::min(c, it->second);
  }
  return out;
}

}  // namespace blueprint
