// Acceptance suite. Runs every gate criterion and prints one PASS/FAIL
// line per criterion; exits non-zero when any fails. argv[1] must be the
// CLI binary (wired through ctest).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "blueprint/annotate.hpp"
#include "blueprint/control.hpp"
#include "blueprint/errors.hpp"
#include "blueprint/eval.hpp"
#include "blueprint/formats.hpp"
#include "blueprint/pipeline.hpp"

#include "support/generators.hpp"
#include "support/rouge_oracle.hpp"
#include "support/shelby.hpp"

using namespace blueprint;
using nlohmann::json;

namespace {

int g_failures = 0;
std::string g_cli;
std::filesystem::path g_dir;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : " — ", detail.c_str());
  if (!ok) ++g_failures;
}

std::string file(const std::string& name) { return (g_dir / name).string(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  std::string cmd = g_cli + " " + args + " >" + file("cli.log") + " 2>&1";
  int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }

// --------------------------------------------------------------------------
// 1. Selection-chain golden test on the worked example.
// --------------------------------------------------------------------------
void criterion_filter_chain() {
  auto start = std::chrono::steady_clock::now();
  MockBackend mock = shelby::mock_backend();
  Summary summary = shelby::summary();
  AnnotateConfig config = shelby::chain_config();

  std::vector<QAPair> rt =
      roundtrip_filter(shelby::overgenerated_pairs(), summary, mock, config);
  bool ok = shelby::numbers_of(rt) == shelby::kRoundtripSurvivors;

  std::vector<QAPair> rh = rheme_select(rt, shelby::propositions());
  ok = ok && shelby::numbers_of(rh) == shelby::kRhemeSurvivors;

  std::vector<QAPair> co = coverage_select(rh, summary, config);
  ok = ok && shelby::numbers_of(co) == shelby::kCoverageSurvivors;

  Blueprint bp = sort_blueprint(co, summary, config);
  ok = ok && shelby::numbers_of(bp.pairs) == shelby::kFinalOrder;

  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = ok && seconds < 1.0;
  report("filter chain golden (round trip / rheme / coverage / sort)", ok,
         "ran in " + std::to_string(seconds) + "s");
}

// --------------------------------------------------------------------------
// 2. Ablation flags: disabled selection stages and random sort order.
// --------------------------------------------------------------------------
void criterion_ablations() {
  MockBackend mock = shelby::mock_backend();
  AnnotateClients clients{&mock.candidate_backend(), &mock};

  AnnotateConfig config = shelby::chain_config();
  config.enable_rheme = false;
  config.enable_coverage = false;
  AnnotatedExample ex = annotate_example({}, shelby::summary(), clients, {}, config,
                                         shelby::propositions());
  bool ok = ex.blueprint.size() == 16 &&
            as_set(shelby::numbers_of(ex.blueprint.pairs)) ==
                as_set(shelby::kRoundtripSurvivors);

  AnnotateConfig sorted_config = shelby::chain_config();
  AnnotatedExample sorted = annotate_example({}, shelby::summary(), clients, {},
                                             sorted_config, shelby::propositions());
  std::vector<int> reference_order = shelby::numbers_of(sorted.blueprint.pairs);

  bool any_differs = false;
  for (std::uint64_t seed = 1; seed <= 20 && ok; ++seed) {
    AnnotateConfig random_config = shelby::chain_config();
    random_config.sort_mode = SortMode::random_shuffle;
    random_config.random_seed = seed;
    AnnotatedExample shuffled = annotate_example({}, shelby::summary(), clients, {},
                                                 random_config, shelby::propositions());
    std::vector<int> order = shelby::numbers_of(shuffled.blueprint.pairs);
    ok = ok && as_set(order) == as_set(reference_order);
    if (order != reference_order) any_differs = true;
  }
  ok = ok && any_differs;
  report("ablation flags (selection stages off, random sort)", ok);
}

// --------------------------------------------------------------------------
// 3. Serialization round-trips over generated examples.
// --------------------------------------------------------------------------
void criterion_round_trips() {
  std::mt19937 rng(20240817);
  std::size_t checked = 0;
  std::string detail;
  bool ok = true;
  for (int iter = 0; iter < 1000 && ok; ++iter) {
    AnnotatedExample ex = gen::example(rng);
    FormatConfig cfg;
    if (iter % 3 == 1) cfg.plan_order = PlanOrder::question_answer;

    auto pairs_equal = [](const Blueprint& a, const Blueprint& b) {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a.pairs[i].question != b.pairs[i].question ||
            a.pairs[i].answer != b.pairs[i].answer)
          return false;
      return true;
    };

    ParsedOutput e2e = parse_e2e(serialize_e2e(ex, cfg).target_text, cfg);
    ok = pairs_equal(e2e.blueprint, ex.blueprint) && e2e.summary_text == ex.summary.text;
    if (!ok) { detail = "e2e mismatch at case " + std::to_string(iter); break; }

    auto [summary_task, question_task] = serialize_multitask(ex, cfg);
    ParsedOutput multi =
        parse_multitask(summary_task.target_text, question_task.target_text, cfg);
    ok = pairs_equal(multi.blueprint, ex.blueprint) && multi.summary_text == ex.summary.text;
    if (!ok) { detail = "multitask mismatch at case " + std::to_string(iter); break; }

    std::vector<TargetInstance> targets = serialize_iterative(ex, cfg);
    ok = targets.size() == ex.summary.sentences.size() + 1;
    std::vector<IterativeStep> steps;
    for (const TargetInstance& t : targets) {
      ok = ok && t.target_text.substr(t.loss_mask_prefix_len).starts_with(cfg.plan_marker) &&
           t.target_text.substr(0, t.loss_mask_prefix_len)
               .starts_with(cfg.context_marker);
      steps.push_back(parse_iterative_step(t.target_text, cfg));
    }
    ParsedOutput assembled = assemble_iterative(steps);
    ok = ok && pairs_equal(assembled.blueprint, ex.blueprint) &&
         assembled.summary_text == ex.summary.text;
    if (!ok) { detail = "iterative mismatch at case " + std::to_string(iter); break; }
    ++checked;
  }
  report("serialization round-trips (1000 generated examples, all layouts)",
         ok && checked == 1000, detail);
}

// --------------------------------------------------------------------------
// 4. Metric oracles.
// --------------------------------------------------------------------------
void criterion_metric_oracles() {
  bool ok = std::abs(token_f1("1965 to 1968", "1968") - 0.5) <= 1e-9 &&
            std::abs(token_f1("the Ford Mustang", "Ford Mustang") - 1.0) <= 1e-9 &&
            token_f1("Shelby American", "Ford") == 0.0;

  Document doc;
  doc.sources = {{"s0", "input text"}};
  MockBackend nli;
  nli.add_nli("input text", "First claim.", 0.9);
  nli.add_nli("input text", "Second claim.", 0.3);
  nli.add_nli("input text", "Third claim.", 0.5);
  FaithfulnessScore two =
      faithfulness(doc, Summary::from_text("First claim. Second claim."), nli, {});
  ok = ok && two.score == 0.5 && two.per_sentence == std::vector<int>{1, 0};
  FaithfulnessScore boundary =
      faithfulness(doc, Summary::from_text("Third claim."), nli, {});
  ok = ok && boundary.per_sentence == std::vector<int>{0} && boundary.score == 0.0;

  // Exhaustive equivalence on a small sub-domain, then random sampling of
  // the full one (up to 3 sentences of up to 6 tokens).
  std::vector<std::string> lines;
  const char* alphabet[] = {"a", "b"};
  std::function<void(std::string, int)> build_line = [&](std::string acc, int left) {
    if (!acc.empty()) lines.push_back(acc);
    if (left == 0) return;
    for (const char* tok : alphabet)
      build_line(acc.empty() ? tok : acc + " " + tok, left - 1);
  };
  build_line("", 3);
  std::vector<std::string> small_texts;
  for (const std::string& a : lines) {
    small_texts.push_back(a);
    for (const std::string& b : lines) small_texts.push_back(a + "\n" + b);
  }
  bool rouge_ok = true;
  for (const std::string& cand : small_texts)
    for (const std::string& ref : small_texts)
      if (std::abs(rouge_lsum(cand, ref) - oracle::rouge_lsum(cand, ref)) > 1e-9)
        rouge_ok = false;

  std::mt19937 rng(99);
  const char* vocab[] = {"a", "b", "c"};
  auto random_text = [&] {
    std::uniform_int_distribution<int> sentences(1, 3), words(1, 6), pick(0, 2);
    std::string out;
    int s = sentences(rng);
    for (int i = 0; i < s; ++i) {
      if (i > 0) out += '\n';
      int w = words(rng);
      for (int k = 0; k < w; ++k) out += std::string(k ? " " : "") + vocab[pick(rng)];
    }
    return out;
  };
  for (int iter = 0; iter < 3000 && rouge_ok; ++iter) {
    std::string cand = random_text();
    std::string ref = random_text();
    if (std::abs(rouge_lsum(cand, ref) - oracle::rouge_lsum(cand, ref)) > 1e-9)
      rouge_ok = false;
  }
  ok = ok && rouge_ok;

  std::string source = "one two three four five six";
  for (int n = 1; n <= 4; ++n) ok = ok && novel_ngrams(source, source, n) == 0.0;

  report("metric oracles (token F1, faithfulness, rouge vs brute force, novel n-grams)",
         ok);
}

// --------------------------------------------------------------------------
// 5. Control transforms.
// --------------------------------------------------------------------------
void criterion_control() {
  bool ok = true;
  std::mt19937 rng(512);
  Document doc;
  doc.sources = {{"s0", "the input text"}};
  std::uniform_int_distribution<int> m(0, 8);
  std::uniform_int_distribution<int> coin(0, 2);
  for (int iter = 0; iter < 1000 && ok; ++iter) {
    MockBackend mock;
    Blueprint bp;
    int pairs = m(rng);
    for (int i = 0; i < pairs; ++i) {
      std::string q = "q" + std::to_string(i) + "?";
      std::string a = "answer " + std::to_string(i);
      bp.pairs.push_back({q, a, std::nullopt, std::nullopt});
      int fate = coin(rng);
      if (fate == 0)
        mock.add_qa(q, doc.joined_text(), {a, 0.9, false});
      else if (fate == 1)
        mock.add_qa(q, doc.joined_text(), {"unrelated words", 0.9, false});
    }
    Blueprint kept = drop_unanswerable(bp, doc, mock, {});
    std::size_t cursor = 0;
    for (const QAPair& k : kept.pairs) {
      while (cursor < bp.pairs.size() && !(bp.pairs[cursor] == k)) ++cursor;
      if (cursor >= bp.pairs.size()) { ok = false; break; }
      ++cursor;
    }
  }

  std::vector<SentenceBlueprint> sbs = {
      {0, {{"q1?", "a", std::nullopt, std::nullopt},
           {"q2?", "bb", std::nullopt, std::nullopt}}},
      {1, {}},
      {2, {{"q3?", "c", std::nullopt, std::nullopt}}},
  };
  for (const SentenceBlueprint& sb : truncate_q1(sbs, {}))
    ok = ok && sb.pairs.size() <= 1;

  FormatConfig cfg;
  Blueprint bulldog;
  bulldog.pairs = {{"What breed existed but is now extinct?", "Old English Bulldogs",
                    std::nullopt, std::nullopt},
                   {"What was the Old English Bulldog bred for?",
                    "Fighting in public arenas", std::nullopt, std::nullopt}};
  ParsedOutput bulldog_parsed = parse_e2e(apply_plan_edit(bulldog, Variant::e2e, cfg), cfg);
  ok = ok && bulldog_parsed.blueprint.size() == 2;
  for (std::size_t i = 0; ok && i < 2; ++i)
    ok = bulldog_parsed.blueprint.pairs[i].question == bulldog.pairs[i].question &&
         bulldog_parsed.blueprint.pairs[i].answer == bulldog.pairs[i].answer;

  Blueprint shortened;  // the nine-pair plan with pairs 3..9 removed
  shortened.pairs = {{"Hinduism is an Indian religion and what else?", "dharma",
                      std::nullopt, std::nullopt},
                     {"Hinduism is a way of what?", "life", std::nullopt, std::nullopt}};
  std::string prompt = apply_plan_edit(shortened, Variant::e2e, cfg);
  ParsedOutput hindu_parsed = parse_e2e(prompt, cfg);
  ok = ok && hindu_parsed.blueprint.size() == 2 &&
       hindu_parsed.blueprint.pairs[0].answer == "dharma" &&
       hindu_parsed.blueprint.pairs[1].answer == "life" &&
       prompt.find("Sanatana") == std::string::npos;

  report("control transforms (drop subsequence, q1 bound, plan-edit parse-back)", ok);
}

// --------------------------------------------------------------------------
// 6. End-to-end CLI determinism.
// --------------------------------------------------------------------------
void make_synthetic_corpus(const std::string& corpus_path, const std::string& fixtures_path) {
  static const char* names[] = {"Ford", "Shelby", "Mariner", "Atlas", "Nova"};
  static const char* verbs[] = {"built", "raced", "sold", "shipped", "tested"};
  static const char* nouns[] = {"cars", "engines", "parts", "models", "kits"};
  static const char* years[] = {"1965", "1968", "1970", "2005", "2011"};

  std::mt19937 rng(4096);
  std::uniform_int_distribution<int> pick5(0, 4);
  std::uniform_int_distribution<int> sentence_count(1, 3);
  std::uniform_int_distribution<int> source_count(1, 2);

  HeuristicCandidateBackend heuristic;
  std::ofstream corpus(corpus_path);
  json qa = json::array();
  for (int i = 0; i < 50; ++i) {
    CorpusRecord record;
    record.example_id = "ex" + std::to_string(i);
    int sources = source_count(rng);
    for (int s = 0; s < sources; ++s)
      record.sources.push_back(
          {"s" + std::to_string(s),
           std::string(names[pick5(rng)]) + " " + verbs[pick5(rng)] + " " +
               nouns[pick5(rng)] + " in " + years[pick5(rng)] + "."});
    int sentences = sentence_count(rng);
    std::string summary;
    for (int s = 0; s < sentences; ++s) {
      if (s > 0) summary += ' ';
      summary += std::string("The ") + names[pick5(rng)] + " team " + verbs[pick5(rng)] +
                 " by " + names[pick5(rng)] + " in " + years[pick5(rng)] + ".";
    }
    record.summary = summary;
    corpus << corpus_record_to_json(record) << "\n";

    // Echo fixtures: every candidate's default question answers itself.
    for (const AnswerCandidate& c : heuristic.candidates(Summary::from_text(summary)))
      qa.push_back({{"question", "What is " + c.text + "?"},
                    {"context", summary},
                    {"answer", c.text}});
  }
  std::ofstream fixtures(fixtures_path);
  fixtures << json{{"qa", qa}}.dump();
}

void criterion_cli_determinism() {
  auto start = std::chrono::steady_clock::now();
  make_synthetic_corpus(file("corpus.jsonl"), file("fixtures.json"));

  auto pipeline = [&](const std::string& tag, int workers) -> bool {
    std::string w = std::to_string(workers);
    std::string fixtures = " --mock-fixtures " + file("fixtures.json");
    if (run_cli("--workers " + w + fixtures + " annotate " + file("corpus.jsonl") + " " +
                file("annotated_" + tag + ".jsonl")) != 0)
      return false;
    if (run_cli("--workers " + w + " serialize " + file("annotated_" + tag + ".jsonl") +
                " " + file("targets_" + tag + ".jsonl") + " --variant e2e") != 0)
      return false;
    if (run_cli("--workers " + w + " parse " + file("targets_" + tag + ".jsonl") + " " +
                file("parsed_" + tag + ".jsonl") + " --variant e2e") != 0)
      return false;
    if (run_cli("--workers " + w + fixtures + " evaluate " + file("parsed_" + tag + ".jsonl") +
                " " + file("annotated_" + tag + ".jsonl") + " --reports " +
                file("reports_" + tag + ".jsonl") + " --aggregate " +
                file("aggregate_" + tag + ".json")) != 0)
      return false;
    return true;
  };

  bool ok = pipeline("a", 8) && pipeline("b", 8) && pipeline("c", 1);
  std::string detail;
  if (!ok) detail = "a pipeline stage exited non-zero (see " + file("cli.log") + ")";
  for (const char* stage : {"annotated", "targets", "parsed", "reports", "aggregate"}) {
    std::string ext = std::string(stage) == "aggregate" ? ".json" : ".jsonl";
    std::string a = slurp(file(std::string(stage) + "_a" + ext));
    ok = ok && !a.empty();
    ok = ok && a == slurp(file(std::string(stage) + "_b" + ext));
    ok = ok && a == slurp(file(std::string(stage) + "_c" + ext));
  }
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = ok && seconds < 30.0;
  report("CLI determinism (50 records, workers 8 vs 8 vs 1, byte-identical)", ok,
         detail.empty() ? "ran in " + std::to_string(seconds) + "s" : detail);
}

// --------------------------------------------------------------------------
// 7. Statistics.
// --------------------------------------------------------------------------
void criterion_statistics() {
  CorpusRecord known;
  known.example_id = "known";
  known.sources = {{"a", "one two three four five six seven eight nine ten"},
                   {"b", "uno dos tres cuatro cinco seis siete ocho nueve diez"}};
  known.summary = "Alpha beta gamma.";

  CorpusRecord planned;
  planned.example_id = "planned";
  planned.sources = {{"a", "only source here"}};
  planned.summary = shelby::kSummary;
  std::vector<QAPair> pairs;
  std::vector<QAPair> all = shelby::overgenerated_pairs();
  for (int number : shelby::kFinalOrder) pairs.push_back(all[number - 1]);
  planned.blueprint = pairs;

  write_corpus(file("stats_in.jsonl"), {known, planned});
  bool ok = run_cli("stats " + file("stats_in.jsonl") + " " + file("stats.json")) == 0;
  json stats = json::parse(slurp(file("stats.json")), nullptr, false);
  ok = ok && !stats.is_discarded();
  if (ok) {
    ok = ok && stats["examples"] == 2;
    ok = ok && stats["docs_per_example"] == 1.5;        // (2 + 1) / 2
    ok = ok && stats["source_words"] == 11.5;           // (20 + 3) / 2
    ok = ok && stats["words_per_doc"] == 6.5;           // (10 + 3) / 2
    ok = ok && stats["qa_pairs_per_blueprint"] == 2.0;  // (0 + 4) / 2
    ok = ok && stats["target_sentences"] == 1.5;        // (1 + 2) / 2
  }

  // A single-record corpus reports that record's own counts.
  write_corpus(file("stats_one.jsonl"), {planned});
  ok = ok && run_cli("stats " + file("stats_one.jsonl") + " " + file("stats_one.json")) == 0;
  json one = json::parse(slurp(file("stats_one.json")), nullptr, false);
  ok = ok && !one.is_discarded() && one["qa_pairs_per_blueprint"] == 4.0 &&
       one["docs_per_example"] == 1.0;

  // Empty corpora are a fatal error.
  std::ofstream(file("stats_empty.jsonl")).close();
  ok = ok && run_cli("stats " + file("stats_empty.jsonl") + " " + file("x.json")) == 1;

  report("statistics (hand-computed averages, reference record, empty corpus)", ok);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <cli-binary>\n", argv[0]);
    return 2;
  }
  g_cli = argv[1];
  g_dir = std::filesystem::temp_directory_path() / "blueprint_acceptance";
  std::filesystem::remove_all(g_dir);
  std::filesystem::create_directories(g_dir);

  criterion_filter_chain();
  criterion_ablations();
  criterion_round_trips();
  criterion_metric_oracles();
  criterion_control();
  criterion_cli_determinism();
  criterion_statistics();

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
