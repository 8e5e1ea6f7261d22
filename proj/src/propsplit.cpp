#include "blueprint/propsplit.hpp"

#include <algorithm>
#include <cctype>

#include "blueprint/errors.hpp"

namespace blueprint {

namespace {

struct Word {
  std::size_t start;
  std::size_t end;
};

std::vector<Word> words_in(const std::string& text, std::size_t lo, std::size_t hi) {
  std::vector<Word> out;
  std::size_t i = lo;
  while (i < hi) {
    while (i < hi && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < hi && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.push_back({i, j});
    i = j;
  }
  return out;
}

// Word core: alnum and inner hyphens, lowercased. "1968," -> "1968".
std::string word_core(const std::string& text, const Word& w) {
  std::string out;
  for (std::size_t i = w.start; i < w.end; ++i) {
    char c = text[i];
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    else if (c == '-')
      out.push_back('-');
  }
  return out;
}

bool contains(const std::vector<std::string>& list, const std::string& tok) {
  return std::find(list.begin(), list.end(), tok) != list.end();
}

struct Splitter {
  const std::string& text;
  const SplitConfig& cfg;

  bool is_connector(const std::string& tok) const {
    return contains(cfg.coordination_tokens, tok) || contains(cfg.relative_pronouns, tok);
  }

  bool is_content(const std::string& tok) const {
    if (tok.empty()) return false;
    if (tok == "a" || tok == "an" || tok == "the") return false;
    return !is_connector(tok) && !contains(cfg.prepositions, tok);
  }

  int content_count(const std::vector<Word>& toks, std::size_t lo, std::size_t hi) const {
    int n = 0;
    for (std::size_t k = lo; k < hi; ++k)
      if (is_content(word_core(text, toks[k]))) ++n;
    return n;
  }

  bool ends_with_boundary_punct(const Word& w) const {
    std::string last(1, text[w.end - 1]);
    return contains(cfg.punctuation_tokens, last);
  }

  void split_chunk(std::size_t lo, std::size_t hi, std::vector<CharSpan>& out) const {
    std::vector<Word> toks = words_in(text, lo, hi);
    if (toks.size() <= static_cast<std::size_t>(cfg.max_words)) {
      out.push_back({lo, hi});
      return;
    }
    // Tier 1: punctuation attached to a word (not chunk-final).
    for (std::size_t k = 0; k + 1 < toks.size(); ++k) {
      if (!ends_with_boundary_punct(toks[k])) continue;
      if (content_count(toks, 0, k + 1) < cfg.min_words) continue;
      if (content_count(toks, k + 1, toks.size()) < cfg.min_words) continue;
      split_chunk(lo, toks[k].end, out);
      split_chunk(toks[k + 1].start, hi, out);
      return;
    }
    // Tier 2: coordination and relative pronouns, split before the token.
    // Tier 3: prepositions, same shape.
    for (int tier = 0; tier < 2; ++tier) {
      for (std::size_t k = 1; k + 1 < toks.size(); ++k) {
        std::string w = word_core(text, toks[k]);
        bool hit = tier == 0 ? is_connector(w) : contains(cfg.prepositions, w);
        if (!hit) continue;
        if (content_count(toks, 0, k) < cfg.min_words) continue;
        if (content_count(toks, k, toks.size()) < cfg.min_words) continue;
        split_chunk(lo, toks[k - 1].end, out);
        split_chunk(toks[k].start, hi, out);
        return;
      }
    }
    out.push_back({lo, hi});  // no eligible boundary
  }

  // Drop leading coordination/relative tokens from the emitted span. If that
  // would empty the proposition, keep the chunk untouched.
  CharSpan strip_leading_connectors(const CharSpan& span) const {
    std::vector<Word> toks = words_in(text, span.start, span.end);
    std::size_t k = 0;
    while (k < toks.size() && is_connector(word_core(text, toks[k]))) ++k;
    if (k == 0 || k >= toks.size()) return span;
    return {toks[k].start, span.end};
  }
};

}  // namespace

void SplitConfig::validate() const {
  if (min_words < 1) throw ConfigError("split: min_words must be >= 1");
  if (max_words < min_words) throw ConfigError("split: max_words must be >= min_words");
  if (punctuation_tokens.empty() || coordination_tokens.empty() ||
      relative_pronouns.empty() || prepositions.empty())
    throw ConfigError("split: boundary token lists must be non-empty");
}

std::vector<Proposition> split_propositions(const std::string& sentence_text,
                                            const SplitConfig& config) {
  Splitter sp{sentence_text, config};
  std::vector<CharSpan> chunks;
  std::vector<Word> all = words_in(sentence_text, 0, sentence_text.size());
  if (all.empty()) return {};
  sp.split_chunk(all.front().start, all.back().end, chunks);

  std::vector<Proposition> props;
  props.reserve(chunks.size());
  for (const CharSpan& c : chunks) {
    CharSpan s = sp.strip_leading_connectors(c);
    props.push_back({s, sentence_text.substr(s.start, s.length())});
  }
  return props;
}

std::vector<Proposition> split_summary(const Summary& summary, const SplitConfig& config) {
  std::vector<Proposition> out;
  for (const CharSpan& sent : summary.sentences) {
    std::string sentence = summary.text.substr(sent.start, sent.length());
    for (Proposition& p : split_propositions(sentence, config)) {
      CharSpan shifted{p.span.start + sent.start, p.span.end + sent.start};
      out.push_back({shifted, std::move(p.text)});
    }
  }
  return out;
}

}  // namespace blueprint
