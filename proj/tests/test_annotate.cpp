#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "blueprint/annotate.hpp"
#include "blueprint/errors.hpp"

#include "support/shelby.hpp"

using namespace blueprint;

namespace {

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::vector<QAPair> chain_to_rheme(const AnnotateConfig& config) {
  MockBackend mock = shelby::mock_backend();
  Summary summary = shelby::summary();
  std::vector<QAPair> pairs =
      roundtrip_filter(shelby::overgenerated_pairs(), summary, mock, config);
  return rheme_select(pairs, shelby::propositions());
}

}  // namespace

TEST_CASE("overgenerate pairs candidates with generated questions") {
  MockBackend mock = shelby::mock_backend();
  Summary summary = shelby::summary();
  std::vector<QAPair> pairs = overgenerate(summary, shelby::candidates(), mock);
  REQUIRE(pairs.size() == 18);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].question == shelby::kPairs[i].question);
    CHECK(pairs[i].answer == shelby::kPairs[i].answer);
    REQUIRE(pairs[i].answer_span.has_value());
    CHECK(summary.text.substr(pairs[i].answer_span->start, pairs[i].answer.size()) ==
          pairs[i].answer);
  }
  CHECK(overgenerate(summary, {}, mock).empty());
}

TEST_CASE("overgenerate drops pairs whose QG call fails") {
  MockBackend mock;
  mock.add_qg_failure("Ford", "Ford wins.");
  Summary summary = Summary::from_text("Ford wins.");
  std::vector<AnswerCandidate> cands = {{"Ford", {0, 4}, CandidateKind::named_entity}};
  CHECK(overgenerate(summary, cands, mock).empty());
}

TEST_CASE("round trip removes the two inconsistent pairs") {
  MockBackend mock = shelby::mock_backend();
  Summary summary = shelby::summary();
  std::vector<QAPair> kept =
      roundtrip_filter(shelby::overgenerated_pairs(), summary, mock, shelby::chain_config());
  CHECK(shelby::numbers_of(kept) == shelby::kRoundtripSurvivors);
  CHECK(kept.size() == 16);
}

TEST_CASE("round trip keeps self-consistent pairs and honours no_answer") {
  MockBackend mock;
  Summary summary = Summary::from_text("Ford wins races.");
  mock.add_qa("Who wins?", summary.text, {"Ford", 1.0, false});
  std::vector<QAPair> pairs = {{"Who wins?", "Ford", std::nullopt, std::nullopt},
                               {"Unknown?", "Ford", std::nullopt, std::nullopt}};
  std::vector<QAPair> kept = roundtrip_filter(pairs, summary, mock, {});
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].question == "Who wins?");
}

TEST_CASE("round trip exact mode rejects longer restatements") {
  MockBackend mock;
  Summary summary = shelby::summary();
  const std::string q13 = shelby::kPairs[12].question;
  mock.add_qa(q13, summary.text,
              {"the introduction of the fifth generation Ford Mustang", 0.9, false});
  std::vector<QAPair> pairs = {{q13, "the introduction", std::nullopt, std::nullopt}};
  CHECK(roundtrip_filter(pairs, summary, mock, {}).empty());
}

TEST_CASE("round trip transport errors fail the batch") {
  MockBackend mock;
  Summary summary = Summary::from_text("Ford wins.");
  mock.add_qa_failure("Who wins?", summary.text);
  std::vector<QAPair> pairs = {{"Who wins?", "Ford", std::nullopt, std::nullopt}};
  CHECK_THROWS_AS(roundtrip_filter(pairs, summary, mock, {}), TransportError);
}

TEST_CASE("rheme keeps the rightmost answer per proposition") {
  std::vector<QAPair> survivors = chain_to_rheme(shelby::chain_config());
  CHECK(shelby::numbers_of(survivors) == shelby::kRhemeSurvivors);

  // Within the first proposition the longest of the tied answers wins.
  CHECK(survivors[0].answer == "the Ford Mustang");
}

TEST_CASE("rheme skips propositions without answers and pairs outside any") {
  Summary summary = Summary::from_text("Alpha beta. Gamma delta.");
  std::vector<Proposition> props = {{{0, 11}, "Alpha beta."}, {{12, 24}, "Gamma delta."}};
  QAPair inside{"q1", "beta", CharSpan{6, 10}, std::nullopt};
  QAPair straddling{"q2", "beta. Gamma", CharSpan{6, 17}, std::nullopt};
  std::vector<QAPair> out = rheme_select({inside, straddling}, props);
  REQUIRE(out.size() == 1);
  CHECK(out[0].question == "q1");
}

TEST_CASE("coverage removes the two redundant pairs") {
  std::vector<QAPair> kept =
      coverage_select(chain_to_rheme(shelby::chain_config()), shelby::summary(), {});
  CHECK(shelby::numbers_of(kept) == shelby::kCoverageSurvivors);
}

TEST_CASE("coverage with answer-only removal keeps the redundant pairs") {
  // Without question-token removal the restatement pairs never lose their
  // answer tokens, which is why question_plus_answer_tokens is the default.
  AnnotateConfig config = shelby::chain_config();
  config.coverage_unit = CoverageUnit::answer_tokens_only;
  std::vector<QAPair> kept =
      coverage_select(chain_to_rheme(config), shelby::summary(), config);
  CHECK(shelby::numbers_of(kept) == std::vector<int>{5, 8, 9, 16, 18});
}

TEST_CASE("coverage keeps a single overlapping pair") {
  Summary summary = Summary::from_text("Ford wins races.");
  std::vector<QAPair> pairs = {{"Who wins?", "Ford", CharSpan{0, 4}, std::nullopt}};
  CHECK(coverage_select(pairs, summary, {}).size() == 1);
}

TEST_CASE("coverage keeps exactly one of two identical pairs") {
  Summary summary = Summary::from_text("Ford wins races.");
  QAPair pair{"Who wins?", "Ford", CharSpan{0, 4}, std::nullopt};
  std::vector<QAPair> kept = coverage_select({pair, pair}, summary, {});
  CHECK(kept.size() == 1);
}

TEST_CASE("coverage terminates and is an order-preserving filter") {
  std::mt19937 rng(41);
  static const char* words[] = {"ford", "wins", "races", "fast", "cars", "in", "may"};
  for (int iter = 0; iter < 100; ++iter) {
    std::uniform_int_distribution<int> pick(0, 6);
    std::string text;
    for (int i = 0; i < 12; ++i) text += std::string(i ? " " : "") + words[pick(rng)];
    Summary summary = Summary::from_text(text + ".");
    std::vector<QAPair> pairs;
    std::uniform_int_distribution<int> m(0, 6);
    int count = m(rng);
    for (int i = 0; i < count; ++i) {
      std::string answer = words[pick(rng)];
      pairs.push_back({"what is " + std::string(words[pick(rng)]) + "?", answer,
                       std::nullopt, std::nullopt});
    }
    std::vector<QAPair> kept = coverage_select(pairs, summary, {});
    CHECK(kept.size() <= pairs.size());
    std::size_t cursor = 0;
    for (const QAPair& k : kept) {
      while (cursor < pairs.size() && !(pairs[cursor] == k)) ++cursor;
      CHECK(cursor < pairs.size());
      ++cursor;
    }
  }
}

TEST_CASE("first-occurrence sort matches the reference plan order") {
  AnnotateConfig config = shelby::chain_config();
  std::vector<QAPair> kept =
      coverage_select(chain_to_rheme(config), shelby::summary(), config);
  Blueprint bp = sort_blueprint(kept, shelby::summary(), config);
  CHECK(shelby::numbers_of(bp.pairs) == shelby::kFinalOrder);
  std::size_t prev = 0;
  for (const QAPair& p : bp.pairs) {
    REQUIRE(p.sort_key.has_value());
    CHECK(*p.sort_key >= prev);
    prev = *p.sort_key;
  }
}

TEST_CASE("span sort orders by answer span start") {
  AnnotateConfig config = shelby::chain_config();
  config.sort_mode = SortMode::answer_span;
  std::vector<QAPair> kept =
      coverage_select(chain_to_rheme(config), shelby::summary(), config);
  Blueprint bp = sort_blueprint(kept, shelby::summary(), config);
  CHECK(shelby::numbers_of(bp.pairs) == std::vector<int>{9, 12, 16, 18});
}

TEST_CASE("single pair sorts are identity") {
  std::vector<QAPair> one = {{"q", "Ford", CharSpan{0, 4}, std::nullopt}};
  Blueprint bp = sort_blueprint(one, Summary::from_text("Ford wins."), {});
  REQUIRE(bp.size() == 1);
  CHECK(bp.pairs[0].question == "q");
}

TEST_CASE("random sort is reproducible and preserves the pair set") {
  AnnotateConfig config = shelby::chain_config();
  config.sort_mode = SortMode::random_shuffle;
  config.random_seed = 99;
  std::vector<QAPair> kept =
      coverage_select(chain_to_rheme(config), shelby::summary(), config);
  Blueprint a = sort_blueprint(kept, shelby::summary(), config);
  Blueprint b = sort_blueprint(kept, shelby::summary(), config);
  CHECK(a == b);
  CHECK(as_set(shelby::numbers_of(a.pairs)) == as_set(shelby::kCoverageSurvivors));
}

TEST_CASE("missing answers fall back to the span for sorting") {
  Summary summary = Summary::from_text("Ford wins races.");
  std::vector<QAPair> pairs = {{"q1", "absent words", CharSpan{5, 9}, std::nullopt},
                               {"q2", "Ford", CharSpan{0, 4}, std::nullopt}};
  Blueprint bp = sort_blueprint(pairs, summary, {});
  CHECK(bp.pairs[0].question == "q2");
  CHECK(bp.pairs[1].question == "q1");
}

TEST_CASE("sentence alignment distributes pairs by answer position") {
  AnnotateConfig config = shelby::chain_config();
  std::vector<QAPair> kept =
      coverage_select(chain_to_rheme(config), shelby::summary(), config);
  Blueprint bp = sort_blueprint(kept, shelby::summary(), config);
  std::vector<SentenceBlueprint> sbs = align_to_sentences(bp, shelby::summary());
  REQUIRE(sbs.size() == 2);
  CHECK(shelby::numbers_of(sbs[0].pairs) == std::vector<int>{12, 9});
  CHECK(shelby::numbers_of(sbs[1].pairs) == std::vector<int>{16, 18});

  std::size_t total = 0;
  for (const SentenceBlueprint& sb : sbs) total += sb.pairs.size();
  CHECK(total == bp.size());
}

TEST_CASE("alignment of an empty blueprint fills every sentence") {
  Summary summary = Summary::from_text("One. Two. Three.");
  std::vector<SentenceBlueprint> sbs = align_to_sentences(Blueprint{}, summary);
  REQUIRE(sbs.size() == 3);
  for (std::size_t i = 0; i < sbs.size(); ++i) {
    CHECK(sbs[i].sentence_index == i);
    CHECK(sbs[i].pairs.empty());
  }
}

TEST_CASE("one-sentence summaries collect every pair") {
  Summary summary = Summary::from_text("Ford wins races.");
  Blueprint bp{{{"q1", "Ford", CharSpan{0, 4}, std::nullopt},
                {"q2", "races", std::nullopt, std::nullopt}}};
  std::vector<SentenceBlueprint> sbs = align_to_sentences(bp, summary);
  REQUIRE(sbs.size() == 1);
  CHECK(sbs[0].pairs.size() == 2);
}

TEST_CASE("full pipeline reproduces the reference blueprint") {
  MockBackend mock = shelby::mock_backend();
  AnnotateClients clients{&mock.candidate_backend(), &mock};
  AnnotatedExample ex =
      annotate_example({}, shelby::summary(), clients, {}, shelby::chain_config(),
                       shelby::propositions());
  CHECK(shelby::numbers_of(ex.blueprint.pairs) == shelby::kFinalOrder);
  REQUIRE(ex.sentence_blueprints.size() == 2);
  CHECK(shelby::numbers_of(ex.sentence_blueprints[0].pairs) == std::vector<int>{12, 9});
}

TEST_CASE("ablation flags keep all round-trip survivors") {
  MockBackend mock = shelby::mock_backend();
  AnnotateClients clients{&mock.candidate_backend(), &mock};
  AnnotateConfig config = shelby::chain_config();
  config.enable_rheme = false;
  config.enable_coverage = false;
  AnnotatedExample ex = annotate_example({}, shelby::summary(), clients, {}, config,
                                         shelby::propositions());
  CHECK(as_set(shelby::numbers_of(ex.blueprint.pairs)) ==
        as_set(shelby::kRoundtripSurvivors));
  CHECK(ex.blueprint.size() == 16);
}

TEST_CASE("summaries without candidates annotate to an empty blueprint") {
  MockBackend mock;
  mock.add_candidates("Nothing here.", {});
  AnnotateClients clients{&mock.candidate_backend(), &mock};
  AnnotatedExample ex =
      annotate_example({}, Summary::from_text("Nothing here."), clients, {}, {});
  CHECK(ex.blueprint.empty());
  REQUIRE(ex.sentence_blueprints.size() == 1);
  CHECK(ex.sentence_blueprints[0].pairs.empty());
}

TEST_CASE("each filter stage only removes pairs") {
  MockBackend mock = shelby::mock_backend();
  Summary summary = shelby::summary();
  AnnotateConfig config = shelby::chain_config();
  std::vector<QAPair> rt =
      roundtrip_filter(shelby::overgenerated_pairs(), summary, mock, config);
  std::vector<QAPair> rh = rheme_select(rt, shelby::propositions());
  std::vector<QAPair> co = coverage_select(rh, summary, config);
  std::set<int> rt_set = as_set(shelby::numbers_of(rt));
  std::set<int> rh_set = as_set(shelby::numbers_of(rh));
  std::set<int> co_set = as_set(shelby::numbers_of(co));
  CHECK(std::includes(rt_set.begin(), rt_set.end(), rh_set.begin(), rh_set.end()));
  CHECK(std::includes(rh_set.begin(), rh_set.end(), co_set.begin(), co_set.end()));
}
