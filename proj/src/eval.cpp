#include "blueprint/eval.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "blueprint/concurrency.hpp"
#include "blueprint/errors.hpp"

namespace blueprint {

namespace {

using Tokens = std::vector<std::string>;

std::vector<Tokens> rouge_sentences(const std::string& text) {
  std::vector<Tokens> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line = nl == std::string::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    Tokens toks = simple_tokens(line);
    if (!toks.empty()) out.push_back(std::move(toks));
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

// Positions in `ref` of the canonical longest common subsequence with
// `cand`: maximal length, earliest reference indices, each matched to the
// earliest available candidate token.
std::vector<std::size_t> lcs_positions(const Tokens& ref, const Tokens& cand) {
  std::size_t n = ref.size(), m = cand.size();
  // lengths[i][j] = LCS length of ref[i:], cand[j:]
  std::vector<std::vector<int>> len(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      len[i][j] = ref[i] == cand[j] ? len[i + 1][j + 1] + 1
                                    : std::max(len[i + 1][j], len[i][j + 1]);
  std::vector<std::size_t> positions;
  std::size_t i = 0, j = 0;
  while (i < n && j < m && len[i][j] > 0) {
    if (ref[i] == cand[j] && len[i][j] == len[i + 1][j + 1] + 1) {
      positions.push_back(i);
      ++i;
      ++j;
    } else if (len[i][j + 1] == len[i][j]) {
      ++j;  // keep ref[i] in play for a later candidate token
    } else {
      ++i;
    }
  }
  return positions;
}

}  // namespace

void FaithfulnessConfig::validate() const {
  if (max_premise_chars == 0) throw ConfigError("faithfulness: max_premise_chars must be > 0");
}

double token_f1(const std::string& predicted, const std::string& gold) {
  std::vector<std::string> p = normalize_answer(predicted);
  std::vector<std::string> g = normalize_answer(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const std::string& t : p) ++counts[t];
  int overlap = 0;
  for (const std::string& t : g) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
  double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

QaScore qa_based_score(const std::string& summary_text, const Blueprint& blueprint,
                       ModelBackend& qa_client, int workers) {
  if (blueprint.empty()) throw EvalError("empty blueprint");
  QaScore out;
  out.per_question.resize(blueprint.size());
  std::vector<std::exception_ptr> errors =
      run_indexed(blueprint.size(), workers, [&](std::size_t i) {
        const QAPair& pair = blueprint.pairs[i];
        QaResponse r = answer_question(pair.question, summary_text, qa_client);
        PerQuestionScore& s = out.per_question[i];
        s.question = pair.question;
        s.gold_answer = pair.answer;
        s.predicted_answer = r.no_answer ? std::string() : r.answer;
        s.f1 = token_f1(s.predicted_answer, s.gold_answer);
      });
  for (std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  double sum = 0.0;
  for (const PerQuestionScore& s : out.per_question) sum += s.f1;
  out.mean_f1 = sum / static_cast<double>(out.per_question.size());
  return out;
}

FaithfulnessScore faithfulness(const Document& document, const Summary& summary,
                               ModelBackend& nli_client, const FaithfulnessConfig& config,
                               int workers) {
  config.validate();
  if (summary.sentences.empty()) throw EvalError("summary has no sentences");

  // Chunk the premise at sentence boundaries under the character budget;
  // a single oversized sentence is hard-split.
  std::string premise = document.joined_text();
  std::vector<std::string> chunks;
  if (premise.size() <= config.max_premise_chars) {
    chunks.push_back(premise);
  } else {
    std::string current;
    auto flush = [&] {
      if (!current.empty()) chunks.push_back(std::move(current));
      current.clear();
    };
    for (const CharSpan& span : split_sentences(premise)) {
      std::string sentence = premise.substr(span.start, span.length());
      if (sentence.size() > config.max_premise_chars) {
        flush();
        for (std::size_t off = 0; off < sentence.size(); off += config.max_premise_chars)
          chunks.push_back(sentence.substr(off, config.max_premise_chars));
        continue;
      }
      if (!current.empty() && current.size() + 1 + sentence.size() > config.max_premise_chars)
        flush();
      if (!current.empty()) current += ' ';
      current += sentence;
    }
    flush();
    if (chunks.empty()) chunks.push_back(premise.substr(0, config.max_premise_chars));
  }

  std::size_t n = summary.sentences.size();
  std::vector<double> probs(n, 0.0);
  std::vector<std::exception_ptr> errors = run_indexed(n, workers, [&](std::size_t i) {
    std::string hypothesis = summary.sentence_text(i);
    double best = 0.0;
    for (const std::string& chunk : chunks)
      best = std::max(best, entail_prob(chunk, hypothesis, nli_client));
    probs[i] = best;
  });
  for (std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  FaithfulnessScore out;
  out.per_sentence.reserve(n);
  int positives = 0;
  for (double p : probs) {
    int label = p > config.threshold ? 1 : 0;
    positives += label;
    out.per_sentence.push_back(label);
  }
  out.score = static_cast<double>(positives) / static_cast<double>(n);
  return out;
}

double rouge_lsum(const std::string& candidate, const std::string& reference) {
  std::vector<Tokens> cand = rouge_sentences(candidate);
  std::vector<Tokens> ref = rouge_sentences(reference);
  std::size_t cand_total = 0, ref_total = 0;
  for (const Tokens& s : cand) cand_total += s.size();
  for (const Tokens& s : ref) ref_total += s.size();
  if (cand_total == 0 && ref_total == 0) return 1.0;
  if (cand_total == 0 || ref_total == 0) return 0.0;

  std::size_t hits = 0;
  for (const Tokens& r : ref) {
    std::set<std::size_t> matched;
    for (const Tokens& c : cand)
      for (std::size_t pos : lcs_positions(r, c)) matched.insert(pos);
    hits += matched.size();
  }
  if (hits == 0) return 0.0;
  double precision = static_cast<double>(hits) / static_cast<double>(cand_total);
  double recall = static_cast<double>(hits) / static_cast<double>(ref_total);
  return 2.0 * precision * recall / (precision + recall);
}

// Blueprints flatten to a single "q1 a1 q2 a2 ..." line. One line per pair
// would let the per-sentence union LCS match reordered pairs at full credit;
// a flat sequence keeps the score sensitive to plan order.
double blueprint_rouge(const Blueprint& predicted, const Blueprint& reference) {
  auto linearize = [](const Blueprint& bp) {
    std::string out;
    for (const QAPair& p : bp.pairs) {
      if (!out.empty() && !p.question.empty()) out += ' ';
      out += p.question;
      if (!out.empty() && !p.answer.empty()) out += ' ';
      out += p.answer;
    }
    return out;
  };
  return rouge_lsum(linearize(predicted), linearize(reference));
}

double novel_ngrams(const std::string& source_text, const std::string& target_text, int n) {
  if (n < 1) throw EvalError("n must be >= 1");
  std::vector<std::string> source = simple_tokens(source_text);
  std::vector<std::string> target = simple_tokens(target_text);
  if (target.size() < static_cast<std::size_t>(n)) return 0.0;

  auto gram = [n](const std::vector<std::string>& toks, std::size_t i) {
    std::string g;
    for (int k = 0; k < n; ++k) {
      if (k > 0) g += ' ';
      g += toks[i + static_cast<std::size_t>(k)];
    }
    return g;
  };
  std::set<std::string> seen;
  if (source.size() >= static_cast<std::size_t>(n))
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= source.size(); ++i)
      seen.insert(gram(source, i));

  std::size_t total = target.size() - static_cast<std::size_t>(n) + 1;
  std::size_t novel = 0;
  for (std::size_t i = 0; i < total; ++i)
    if (!seen.count(gram(target, i))) ++novel;
  return static_cast<double>(novel) / static_cast<double>(total);
}

std::size_t count_words(const std::string& text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : text) {
    bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!ws && !in_word) ++count;
    in_word = !ws;
  }
  return count;
}

DatasetStats dataset_stats(const std::vector<StatsInput>& corpus) {
  if (corpus.empty()) throw EvalError("empty corpus");
  DatasetStats stats;
  stats.examples = corpus.size();
  double inv = 1.0 / static_cast<double>(corpus.size());

  for (const StatsInput& ex : corpus) {
    double docs = static_cast<double>(ex.sources.size());
    std::size_t words = 0, sentences = 0;
    std::string joined;
    for (const std::string& s : ex.sources) {
      words += count_words(s);
      sentences += split_sentences(s).size();
      if (!joined.empty()) joined += ' ';
      joined += s;
    }
    stats.docs_per_example += docs * inv;
    stats.source_words += static_cast<double>(words) * inv;
    stats.source_sentences += static_cast<double>(sentences) * inv;
    if (docs > 0) stats.words_per_doc += static_cast<double>(words) / docs * inv;

    std::size_t target_words = count_words(ex.summary);
    stats.target_words += static_cast<double>(target_words) * inv;
    stats.target_sentences += static_cast<double>(split_sentences(ex.summary).size()) * inv;
    for (int n = 1; n <= 4; ++n)
      stats.novel[static_cast<std::size_t>(n - 1)] += novel_ngrams(joined, ex.summary, n) * inv;

    stats.qa_pairs_per_blueprint += static_cast<double>(ex.pairs.size()) * inv;
    std::size_t blueprint_words = 0;
    for (const QAPair& p : ex.pairs)
      blueprint_words += count_words(p.question) + count_words(p.answer);
    stats.target_plus_blueprint_words +=
        static_cast<double>(target_words + blueprint_words) * inv;
  }
  return stats;
}

}  // namespace blueprint
