#include "blueprint/annotate.hpp"

#include <algorithm>
#include <iostream>
#include <limits>

#include "blueprint/concurrency.hpp"
#include "blueprint/errors.hpp"
#include "blueprint/eval.hpp"

namespace blueprint {

namespace {

constexpr std::size_t kNoKey = std::numeric_limits<std::size_t>::max();

// splitmix64: tiny, portable generator so shuffles reproduce everywhere.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::size_t below(std::size_t bound) { return static_cast<std::size_t>(next() % bound); }
};

std::size_t sort_position(const QAPair& pair, const Summary& summary) {
  if (auto pos = find_token_occurrence(summary.text, pair.answer)) return *pos;
  if (pair.answer_span) return pair.answer_span->start;
  return kNoKey;
}

std::size_t span_start_or_max(const QAPair& pair) {
  return pair.answer_span ? pair.answer_span->start : kNoKey;
}

}  // namespace

void AnnotateConfig::validate() const {
  if (roundtrip_mode == RoundtripMode::f1_threshold &&
      (roundtrip_f1_threshold <= 0.0 || roundtrip_f1_threshold > 1.0))
    throw ConfigError("annotate: round-trip F1 threshold must be in (0,1]");
}

std::vector<QAPair> overgenerate(const Summary& summary,
                                 const std::vector<AnswerCandidate>& cands,
                                 ModelBackend& qg_client, int workers) {
  for (const AnswerCandidate& c : cands)
    if (c.span.end > summary.text.size() ||
        summary.text.compare(c.span.start, c.span.length(), c.text) != 0)
      throw ConfigError("candidate span does not match summary text: " + c.text);

  std::vector<std::optional<QAPair>> slots(cands.size());
  std::vector<std::exception_ptr> errors =
      run_indexed(cands.size(), workers, [&](std::size_t i) {
        QAPair pair;
        pair.answer = cands[i].text;
        pair.answer_span = cands[i].span;
        pair.question = generate_question(cands[i].text, summary.text, qg_client);
        slots[i] = std::move(pair);
      });

  std::vector<QAPair> out;
  out.reserve(cands.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const TransportError& e) {
        std::cerr << "warning: dropping candidate \"" << cands[i].text
                  << "\": " << e.what() << "\n";
        continue;
      }
      // anything else is a real bug or config problem
    }
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

std::vector<QAPair> roundtrip_filter(const std::vector<QAPair>& pairs, const Summary& summary,
                                     ModelBackend& qa_client, const AnnotateConfig& config,
                                     int workers) {
  std::vector<QaResponse> responses(pairs.size());
  std::vector<std::exception_ptr> errors =
      run_indexed(pairs.size(), workers, [&](std::size_t i) {
        responses[i] = answer_question(pairs[i].question, summary.text, qa_client);
      });
  for (std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);  // round trip is not skippable

  std::vector<QAPair> kept;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const QaResponse& r = responses[i];
    if (r.no_answer) continue;
    bool match = false;
    if (config.roundtrip_mode == RoundtripMode::normalized_exact)
      match = normalize_answer(r.answer) == normalize_answer(pairs[i].answer);
    else
      match = token_f1(r.answer, pairs[i].answer) >= config.roundtrip_f1_threshold;
    if (match) kept.push_back(pairs[i]);
  }
  return kept;
}

std::vector<QAPair> rheme_select(const std::vector<QAPair>& pairs,
                                 const std::vector<Proposition>& propositions) {
  std::vector<QAPair> out;
  for (const Proposition& prop : propositions) {
    std::size_t best = pairs.size();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!pairs[i].answer_span || !prop.span.contains(*pairs[i].answer_span)) continue;
      if (best == pairs.size()) {
        best = i;
        continue;
      }
      const CharSpan& cur = *pairs[i].answer_span;
      const CharSpan& top = *pairs[best].answer_span;
      if (cur.end != top.end) {
        if (cur.end > top.end) best = i;
      } else if (pairs[i].answer.size() > pairs[best].answer.size()) {
        best = i;  // same end: keep the longest answer
      }
    }
    if (best != pairs.size()) out.push_back(pairs[best]);
  }
  return out;
}

// Greedy coverage. Each round scores every remaining pair by how many of
// its answer tokens are still uncovered in the residual bag and picks the
// best one; the picked pair then covers every occurrence of its question
// and answer token types (answer types only under answer_tokens_only).
// Ranking ties fall to the pair whose answer is least redundant (highest
// covered fraction), then the earlier answer span, then the lower index.
// Pairs whose answers add nothing by their turn are discarded, which is
// what removes restatement-style questions: their token types have been
// covered by the questions of the picked pairs.
std::vector<QAPair> coverage_select(const std::vector<QAPair>& pairs, const Summary& summary,
                                    const AnnotateConfig& config) {
  TokenCounts bag = bag_tokens(summary.text);

  struct Entry {
    std::size_t index;
    TokenCounts answer;
    int answer_total;
  };
  std::vector<Entry> pool;
  pool.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    TokenCounts a = bag_tokens(pairs[i].answer);
    int total = count_tokens(a);
    pool.push_back({i, std::move(a), total});
  }

  std::vector<bool> picked(pairs.size(), false);
  while (!bag.empty() && !pool.empty()) {
    std::size_t best = pool.size();
    int best_ov = 0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      int ov = count_tokens(intersect(pool[k].answer, bag));
      if (ov == 0) continue;
      if (best == pool.size()) {
        best = k;
        best_ov = ov;
        continue;
      }
      const Entry& cand = pool[k];
      const Entry& top = pool[best];
      if (ov != best_ov) {
        if (ov > best_ov) { best = k; best_ov = ov; }
        continue;
      }
      // ov/total compared exactly as cross products
      long lhs = static_cast<long>(ov) * top.answer_total;
      long rhs = static_cast<long>(best_ov) * cand.answer_total;
      if (lhs != rhs) {
        if (lhs > rhs) { best = k; best_ov = ov; }
        continue;
      }
      if (span_start_or_max(pairs[cand.index]) < span_start_or_max(pairs[top.index])) {
        best = k;
        best_ov = ov;
      }
    }
    if (best == pool.size()) break;  // best overlap is zero

    const QAPair& chosen = pairs[pool[best].index];
    picked[pool[best].index] = true;
    TokenCounts covered = bag_tokens(chosen.answer);
    if (config.coverage_unit == CoverageUnit::question_plus_answer_tokens)
      for (const auto& [tok, n] : bag_tokens(chosen.question)) covered[tok] += n;
    for (const auto& [tok, n] : covered) bag.erase(tok);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }

  std::vector<QAPair> out;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (picked[i]) out.push_back(pairs[i]);
  return out;
}

Blueprint sort_blueprint(std::vector<QAPair> pairs, const Summary& summary,
                         const AnnotateConfig& config) {
  switch (config.sort_mode) {
    case SortMode::first_occurrence: {
      std::vector<std::size_t> keys(pairs.size());
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        keys[i] = sort_position(pairs[i], summary);
        if (keys[i] != kNoKey) pairs[i].sort_key = keys[i];
      }
      std::vector<std::size_t> order(pairs.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
      Blueprint bp;
      for (std::size_t i : order) bp.pairs.push_back(std::move(pairs[i]));
      return bp;
    }
    case SortMode::answer_span:
      std::stable_sort(pairs.begin(), pairs.end(), [](const QAPair& a, const QAPair& b) {
        return span_start_or_max(a) < span_start_or_max(b);
      });
      return {std::move(pairs)};
    case SortMode::random_shuffle: {
      SplitMix64 rng{config.random_seed};
      for (std::size_t i = pairs.size(); i > 1; --i)
        std::swap(pairs[i - 1], pairs[rng.below(i)]);
      return {std::move(pairs)};
    }
  }
  return {std::move(pairs)};
}

std::vector<SentenceBlueprint> align_to_sentences(const Blueprint& blueprint,
                                                  const Summary& summary) {
  std::vector<SentenceBlueprint> out(summary.sentences.size());
  for (std::size_t s = 0; s < out.size(); ++s) out[s].sentence_index = s;
  if (out.empty()) return out;

  auto sentence_of = [&](std::size_t pos) {
    for (std::size_t s = 0; s < summary.sentences.size(); ++s)
      if (pos < summary.sentences[s].end) return s;
    return summary.sentences.size() - 1;
  };

  for (const QAPair& pair : blueprint.pairs) {
    std::size_t pos;
    if (pair.answer_span)
      pos = pair.answer_span->start;
    else if (auto found = find_token_occurrence(summary.text, pair.answer))
      pos = *found;
    else
      pos = 0;
    out[sentence_of(pos)].pairs.push_back(pair);
  }
  return out;
}

AnnotatedExample annotate_example(
    Document document, Summary summary, const AnnotateClients& clients,
    const SplitConfig& split_config, const AnnotateConfig& annotate_config,
    const std::optional<std::vector<Proposition>>& override_propositions, int workers) {
  split_config.validate();
  annotate_config.validate();

  AnnotatedExample ex;
  ex.propositions =
      override_propositions ? *override_propositions : split_summary(summary, split_config);

  std::vector<AnswerCandidate> cands = extract_candidates(summary, *clients.candidates);
  std::vector<QAPair> pairs = overgenerate(summary, cands, *clients.model, workers);
  pairs = roundtrip_filter(pairs, summary, *clients.model, annotate_config, workers);
  if (annotate_config.enable_rheme) pairs = rheme_select(pairs, ex.propositions);
  if (annotate_config.enable_coverage)
    pairs = coverage_select(pairs, summary, annotate_config);

  ex.blueprint = sort_blueprint(std::move(pairs), summary, annotate_config);
  ex.sentence_blueprints = align_to_sentences(ex.blueprint, summary);
  ex.document = std::move(document);
  ex.summary = std::move(summary);
  return ex;
}

}  // namespace blueprint
