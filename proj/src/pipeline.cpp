#include "blueprint/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "blueprint/concurrency.hpp"
#include "blueprint/errors.hpp"

namespace blueprint {

using nlohmann::json;

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  return out;
}

// Collects per-record failures and writes them next to the output file.
class Sidecar {
 public:
  explicit Sidecar(std::string output_path) : path_(std::move(output_path) + ".errors.jsonl") {}

  void add(std::size_t line_no, const std::string& example_id, const std::string& error) {
    json e{{"line", line_no}, {"example_id", example_id}, {"error", error}};
    entries_.push_back(e.dump());
  }
  bool empty() const { return entries_.empty(); }

  int finish() const {
    if (entries_.empty()) {
      std::remove(path_.c_str());
      return kExitOk;
    }
    std::ofstream out = open_out(path_);
    for (const std::string& e : entries_) out << e << "\n";
    return kExitPartial;
  }

 private:
  std::string path_;
  std::vector<std::string> entries_;
};

json pair_to_json(const QAPair& pair) {
  json j{{"question", pair.question}, {"answer", pair.answer}};
  if (pair.answer_span) {
    j["start"] = pair.answer_span->start;
    j["end"] = pair.answer_span->end;
  }
  return j;
}

QAPair pair_from_json(const json& j) {
  QAPair p;
  p.question = j.value("question", std::string());
  p.answer = j.value("answer", std::string());
  if (j.contains("start") && j.contains("end"))
    p.answer_span = CharSpan{j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
  return p;
}

Blueprint record_blueprint(const CorpusRecord& record) {
  if (!record.blueprint) throw ConfigError("record has no blueprint: " + record.example_id);
  Blueprint bp;
  bp.pairs = *record.blueprint;
  for (const QAPair& p : bp.pairs) {
    if (!p.answer_span) continue;
    if (p.answer_span->start >= p.answer_span->end ||
        p.answer_span->end > record.summary.size() ||
        record.summary.compare(p.answer_span->start, p.answer_span->length(), p.answer) != 0)
      throw ConfigError("blueprint span does not match the answer text: " + p.answer);
  }
  return bp;
}

// Corpus ids must be unique; duplicates break downstream grouping.
class IdRegistry {
 public:
  void require_fresh(const std::string& id) {
    if (!seen_.insert(id).second) throw ConfigError("duplicate example_id: " + id);
  }

 private:
  std::set<std::string> seen_;
};

// Newlines bound sentences for Rouge; plain texts get the rule-based split.
std::string rouge_ready(const std::string& text) {
  if (text.find('\n') != std::string::npos) return text;
  std::string out;
  for (const CharSpan& s : split_sentences(text)) {
    if (!out.empty()) out += '\n';
    out += text.substr(s.start, s.length());
  }
  return out;
}

RoundtripMode roundtrip_mode_from_string(const std::string& s) {
  if (s == "normalized_exact") return RoundtripMode::normalized_exact;
  if (s == "f1_threshold") return RoundtripMode::f1_threshold;
  throw ConfigError("unknown roundtrip mode: " + s);
}

SortMode sort_mode_from_string(const std::string& s) {
  if (s == "first_occurrence") return SortMode::first_occurrence;
  if (s == "answer_span") return SortMode::answer_span;
  if (s == "random") return SortMode::random_shuffle;
  throw ConfigError("unknown sort mode: " + s);
}

CoverageUnit coverage_unit_from_string(const std::string& s) {
  if (s == "question_plus_answer_tokens") return CoverageUnit::question_plus_answer_tokens;
  if (s == "answer_tokens_only") return CoverageUnit::answer_tokens_only;
  throw ConfigError("unknown coverage unit: " + s);
}

ClientConfig client_config_from_json(const json& j, const ClientConfig& base) {
  ClientConfig c = base;
  c.endpoint = j.value("endpoint", c.endpoint);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.backoff_base_seconds = j.value("backoff_base_seconds", c.backoff_base_seconds);
  return c;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::string(v) : fallback;
}

}  // namespace

Document CorpusRecord::to_document() const {
  Document d;
  d.id = example_id;
  d.query = query;
  d.sources = sources;
  return d;
}

std::string corpus_record_to_json(const CorpusRecord& record) {
  json j;
  j["example_id"] = record.example_id;
  if (record.query) j["query"] = *record.query;
  json sources = json::array();
  for (const SourceText& s : record.sources)
    sources.push_back({{"id", s.id}, {"text", s.text}});
  j["sources"] = std::move(sources);
  j["summary"] = record.summary;
  if (record.propositions) {
    json props = json::array();
    for (const CharSpan& p : *record.propositions)
      props.push_back({{"start", p.start}, {"end", p.end}});
    j["propositions"] = std::move(props);
  }
  if (record.blueprint) {
    json pairs = json::array();
    for (const QAPair& p : *record.blueprint) pairs.push_back(pair_to_json(p));
    j["blueprint"] = std::move(pairs);
  }
  return j.dump();
}

CorpusRecord corpus_record_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON record: ") + e.what());
  }
  CorpusRecord r;
  r.example_id = j.at("example_id").get<std::string>();
  if (j.contains("query") && !j["query"].is_null())
    r.query = j["query"].get<std::string>();
  for (const json& s : j.value("sources", json::array()))
    r.sources.push_back({s.value("id", std::string()), s.at("text").get<std::string>()});
  r.summary = j.value("summary", std::string());
  if (j.contains("propositions")) {
    std::vector<CharSpan> props;
    for (const json& p : j["propositions"])
      props.push_back({p.at("start").get<std::size_t>(), p.at("end").get<std::size_t>()});
    r.propositions = std::move(props);
  }
  if (j.contains("blueprint")) {
    std::vector<QAPair> pairs;
    for (const json& p : j["blueprint"]) pairs.push_back(pair_from_json(p));
    r.blueprint = std::move(pairs);
  }
  return r;
}

std::vector<CorpusRecord> read_corpus(const std::string& path) {
  std::vector<CorpusRecord> out;
  IdRegistry ids;
  for (const std::string& line : read_lines(path)) {
    out.push_back(corpus_record_from_json(line));
    ids.require_fresh(out.back().example_id);
  }
  return out;
}

void write_corpus(const std::string& path, const std::vector<CorpusRecord>& records) {
  std::ofstream out = open_out(path);
  for (const CorpusRecord& r : records) out << corpus_record_to_json(r) << "\n";
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  return from_json_text(slurp(path));
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig c;
  c.workers = j.value("workers", c.workers);
  c.seed = j.value("seed", c.seed);

  if (j.contains("split")) {
    const json& s = j["split"];
    c.split.punctuation_tokens = s.value("punctuation_tokens", c.split.punctuation_tokens);
    c.split.coordination_tokens = s.value("coordination_tokens", c.split.coordination_tokens);
    c.split.relative_pronouns = s.value("relative_pronouns", c.split.relative_pronouns);
    c.split.prepositions = s.value("prepositions", c.split.prepositions);
    c.split.min_words = s.value("min_words", c.split.min_words);
    c.split.max_words = s.value("max_words", c.split.max_words);
  }
  if (j.contains("annotate")) {
    const json& a = j["annotate"];
    if (a.contains("roundtrip_mode"))
      c.annotate.roundtrip_mode = roundtrip_mode_from_string(a["roundtrip_mode"]);
    c.annotate.roundtrip_f1_threshold =
        a.value("roundtrip_f1_threshold", c.annotate.roundtrip_f1_threshold);
    if (a.contains("coverage_unit"))
      c.annotate.coverage_unit = coverage_unit_from_string(a["coverage_unit"]);
    if (a.contains("sort_mode")) c.annotate.sort_mode = sort_mode_from_string(a["sort_mode"]);
    c.annotate.enable_rheme = a.value("enable_rheme", c.annotate.enable_rheme);
    c.annotate.enable_coverage = a.value("enable_coverage", c.annotate.enable_coverage);
  }
  if (j.contains("format")) {
    const json& f = j["format"];
    c.format.plan_marker = f.value("plan_marker", c.format.plan_marker);
    c.format.summary_marker = f.value("summary_marker", c.format.summary_marker);
    c.format.questions_marker = f.value("questions_marker", c.format.questions_marker);
    c.format.context_marker = f.value("context_marker", c.format.context_marker);
    c.format.next_sentence_marker =
        f.value("next_sentence_marker", c.format.next_sentence_marker);
    c.format.gen_summary_prefix = f.value("gen_summary_prefix", c.format.gen_summary_prefix);
    c.format.gen_questions_prefix =
        f.value("gen_questions_prefix", c.format.gen_questions_prefix);
    c.format.pair_separator = f.value("pair_separator", c.format.pair_separator);
    c.format.end_plan_token = f.value("end_plan_token", c.format.end_plan_token);
    c.format.end_sentence_token = f.value("end_sentence_token", c.format.end_sentence_token);
    if (f.contains("plan_order")) {
      std::string order = f["plan_order"];
      if (order == "answer_question")
        c.format.plan_order = PlanOrder::answer_question;
      else if (order == "question_answer")
        c.format.plan_order = PlanOrder::question_answer;
      else
        throw ConfigError("unknown plan order: " + order);
    }
  }
  if (j.contains("control")) {
    const json& k = j["control"];
    c.control.drop_threshold = k.value("drop_threshold", c.control.drop_threshold);
    if (k.contains("q1_selection")) {
      std::string q1 = k["q1_selection"];
      if (q1 == "first_in_plan_order")
        c.control.q1_selection = Q1Selection::first_in_plan_order;
      else if (q1 == "longest_answer")
        c.control.q1_selection = Q1Selection::longest_answer;
      else
        throw ConfigError("unknown q1 selection: " + q1);
    }
  }
  if (j.contains("faithfulness")) {
    const json& f = j["faithfulness"];
    c.faithfulness.max_premise_chars =
        f.value("max_premise_chars", c.faithfulness.max_premise_chars);
    c.faithfulness.threshold = f.value("threshold", c.faithfulness.threshold);
  }
  if (j.contains("clients")) {
    const json& k = j["clients"];
    if (k.contains("qg")) c.qg_client = client_config_from_json(k["qg"], c.qg_client);
    if (k.contains("qa")) c.qa_client = client_config_from_json(k["qa"], c.qa_client);
    if (k.contains("nli")) c.nli_client = client_config_from_json(k["nli"], c.nli_client);
    if (k.contains("candidates"))
      c.candidates_client = client_config_from_json(k["candidates"], c.candidates_client);
  }
  c.mock_fixtures_path = j.value("mock_fixtures", c.mock_fixtures_path);
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  split.validate();
  annotate.validate();
  format.validate();
  control.validate();
  faithfulness.validate();
}

Clients::Clients(const RunConfig& config) {
  std::string qg_url = env_or("BLUEPRINT_QG_URL", config.qg_client.endpoint);
  std::string qa_url = env_or("BLUEPRINT_QA_URL", config.qa_client.endpoint);
  std::string nli_url = env_or("BLUEPRINT_NLI_URL", config.nli_client.endpoint);
  std::string cand_url = env_or("BLUEPRINT_CANDIDATES_URL", config.candidates_client.endpoint);

  if (!config.mock_fixtures_path.empty()) {
    mock_ = std::make_unique<MockBackend>(MockBackend::from_json_file(config.mock_fixtures_path));
    model_ = mock_.get();
    candidates_ = &mock_->candidate_backend();
    return;
  }
  if (!qg_url.empty() || !qa_url.empty() || !nli_url.empty()) {
    if (qg_url.empty() || qa_url.empty() || nli_url.empty())
      throw ConfigError("remote serving needs QG, QA and NLI endpoints");
    ClientConfig qg = config.qg_client;
    qg.endpoint = qg_url;
    ClientConfig qa = config.qa_client;
    qa.endpoint = qa_url;
    ClientConfig nli = config.nli_client;
    nli.endpoint = nli_url;
    http_ = std::make_unique<HttpModelBackend>(std::move(qg), std::move(qa), std::move(nli));
    model_ = http_.get();
    if (!cand_url.empty()) {
      ClientConfig cand = config.candidates_client;
      cand.endpoint = cand_url;
      http_candidates_ = std::make_unique<HttpCandidateBackend>(std::move(cand));
      candidates_ = http_candidates_.get();
    } else {
      candidates_ = &heuristic_;
    }
    return;
  }
  mock_ = std::make_unique<MockBackend>();
  model_ = mock_.get();
  candidates_ = &mock_->candidate_backend();
}

int cmd_annotate(const std::string& input_path, const std::string& output_path,
                 const RunConfig& config) {
  config.validate();
  std::vector<std::string> lines = read_lines(input_path);
  Clients clients(config);
  AnnotateClients ac{&clients.candidates(), &clients.model()};

  std::vector<std::string> outputs(lines.size());
  std::vector<std::string> failures(lines.size());
  std::vector<std::string> ids(lines.size());

  run_indexed(lines.size(), config.workers, [&](std::size_t i) {
    try {
      CorpusRecord record = corpus_record_from_json(lines[i]);
      ids[i] = record.example_id;
      Summary summary = Summary::from_text(record.summary);
      if (summary.sentences.empty()) throw ConfigError("record has an empty summary");

      std::optional<std::vector<Proposition>> props;
      if (record.propositions) {
        std::vector<Proposition> list;
        for (const CharSpan& span : *record.propositions) {
          if (span.start >= span.end || span.end > summary.text.size())
            throw ConfigError("proposition span out of range");
          list.push_back({span, summary.text.substr(span.start, span.length())});
        }
        props = std::move(list);
      }

      AnnotateConfig annotate_config = config.annotate;
      if (annotate_config.sort_mode == SortMode::random_shuffle)
        annotate_config.random_seed = config.seed ^ fnv1a64(record.example_id);

      AnnotatedExample ex = annotate_example(record.to_document(), std::move(summary), ac,
                                             config.split, annotate_config, props);
      record.blueprint = ex.blueprint.pairs;
      if (!record.propositions) {
        std::vector<CharSpan> spans;
        for (const Proposition& p : ex.propositions) spans.push_back(p.span);
        record.propositions = std::move(spans);
      }
      outputs[i] = corpus_record_to_json(record);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  IdRegistry id_check;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!failures[i].empty() || ids[i].empty()) continue;
    try {
      id_check.require_fresh(ids[i]);
    } catch (const ConfigError& e) {
      failures[i] = e.what();
    }
  }

  std::ofstream out = open_out(output_path);
  Sidecar sidecar(output_path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!failures[i].empty())
      sidecar.add(i + 1, ids[i], failures[i]);
    else
      out << outputs[i] << "\n";
  }
  return sidecar.finish();
}

namespace {

json instance_to_json(const std::string& example_id, const TargetInstance& inst) {
  json j;
  j["example_id"] = example_id;
  j["variant"] = to_string(inst.variant);
  j["input"] = inst.input_text;
  j["target"] = inst.target_text;
  j["loss_mask_prefix_len"] = inst.loss_mask_prefix_len;
  if (inst.step_index) j["step_index"] = *inst.step_index;
  return j;
}

AnnotatedExample example_from_record(const CorpusRecord& record) {
  AnnotatedExample ex;
  ex.document = record.to_document();
  ex.summary = Summary::from_text(record.summary);
  ex.blueprint = record_blueprint(record);
  ex.sentence_blueprints = align_to_sentences(ex.blueprint, ex.summary);
  return ex;
}

}  // namespace

int cmd_serialize(const std::string& input_path, const std::string& output_path,
                  const std::string& variant, const RunConfig& config) {
  config.validate();
  if (variant != "e2e" && variant != "multitask" && variant != "iterative")
    throw ConfigError("serialize: variant must be e2e, multitask or iterative");

  std::vector<std::string> lines = read_lines(input_path);
  std::ofstream out = open_out(output_path);
  Sidecar sidecar(output_path);
  IdRegistry id_check;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string id;
    try {
      CorpusRecord record = corpus_record_from_json(lines[i]);
      id = record.example_id;
      id_check.require_fresh(id);
      AnnotatedExample ex = example_from_record(record);
      if (variant == "e2e") {
        out << instance_to_json(id, serialize_e2e(ex, config.format)) << "\n";
      } else if (variant == "multitask") {
        auto [summary_task, question_task] = serialize_multitask(ex, config.format);
        out << instance_to_json(id, summary_task) << "\n";
        out << instance_to_json(id, question_task) << "\n";
      } else {
        for (const TargetInstance& inst : serialize_iterative(ex, config.format))
          out << instance_to_json(id, inst) << "\n";
      }
    } catch (const std::exception& e) {
      sidecar.add(i + 1, id, e.what());
    }
  }
  return sidecar.finish();
}

int cmd_parse(const std::string& input_path, const std::string& output_path,
              const std::string& variant, const RunConfig& config) {
  config.validate();
  if (variant != "e2e" && variant != "multitask" && variant != "iterative")
    throw ConfigError("parse: variant must be e2e, multitask or iterative");

  struct DecodeLine {
    std::size_t line_no;
    std::string variant;
    std::optional<int> step_index;
    std::string text;
  };
  // Grouped by example id, first-appearance order preserved.
  std::vector<std::string> order;
  std::map<std::string, std::vector<DecodeLine>> groups;

  std::vector<std::string> lines = read_lines(input_path);
  Sidecar sidecar(output_path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      json j = json::parse(lines[i]);
      DecodeLine d;
      d.line_no = i + 1;
      d.variant = j.value("variant", std::string());
      if (j.contains("step_index")) d.step_index = j["step_index"].get<int>();
      d.text = j.contains("target") ? j["target"].get<std::string>()
                                    : j.at("text").get<std::string>();
      std::string id = j.at("example_id").get<std::string>();
      if (!groups.count(id)) order.push_back(id);
      groups[id].push_back(std::move(d));
    } catch (const std::exception& e) {
      sidecar.add(i + 1, "", e.what());
    }
  }

  std::ofstream out = open_out(output_path);
  for (const std::string& id : order) {
    const std::vector<DecodeLine>& decodes = groups[id];
    try {
      ParsedOutput parsed;
      if (variant == "e2e") {
        parsed = parse_e2e(decodes.front().text, config.format);
      } else if (variant == "multitask") {
        std::string summary_decode, questions_decode;
        for (const DecodeLine& d : decodes) {
          if (d.variant == "multitask_questions")
            questions_decode = d.text;
          else
            summary_decode = d.text;
        }
        parsed = parse_multitask(summary_decode, questions_decode, config.format);
      } else {
        std::vector<DecodeLine> steps = decodes;
        std::stable_sort(steps.begin(), steps.end(), [](const DecodeLine& a, const DecodeLine& b) {
          return a.step_index.value_or(0) < b.step_index.value_or(0);
        });
        std::vector<IterativeStep> parsed_steps;
        for (const DecodeLine& d : steps)
          parsed_steps.push_back(parse_iterative_step(d.text, config.format));
        parsed = assemble_iterative(parsed_steps);
      }
      json j;
      j["example_id"] = id;
      j["summary"] = parsed.summary_text;
      json pairs = json::array();
      for (const QAPair& p : parsed.blueprint.pairs)
        pairs.push_back({{"question", p.question}, {"answer", p.answer}});
      j["blueprint"] = std::move(pairs);
      j["flags"] = parsed.flags;
      out << j.dump() << "\n";
    } catch (const std::exception& e) {
      sidecar.add(decodes.front().line_no, id, e.what());
    }
  }
  return sidecar.finish();
}

int cmd_control(const std::string& input_path, const std::string& output_path,
                const std::string& prompts_path, ControlMode mode,
                const std::string& edit_plan_path, const std::string& prompt_variant,
                const RunConfig& config) {
  config.validate();
  Variant variant = prompt_variant == "multitask"
                        ? Variant::multitask_summary
                        : variant_from_string(prompt_variant.empty() ? "e2e" : prompt_variant);

  // Edited plans: one list applied to every record, or a map keyed by id.
  std::optional<json> edit_plans;
  if (mode == ControlMode::edit) {
    if (edit_plan_path.empty()) throw ConfigError("control: --edit needs a plan file");
    edit_plans = json::parse(slurp(edit_plan_path));
  }

  Clients clients(config);
  std::vector<std::string> lines = read_lines(input_path);
  std::vector<std::string> record_lines(lines.size());
  std::vector<std::string> prompt_lines(lines.size());
  std::vector<std::string> failures(lines.size());
  std::vector<std::string> ids(lines.size());

  run_indexed(lines.size(), config.workers, [&](std::size_t i) {
    try {
      CorpusRecord record = corpus_record_from_json(lines[i]);
      ids[i] = record.example_id;
      const std::string& id = ids[i];
      Summary summary = Summary::from_text(record.summary);
      Blueprint bp = record_blueprint(record);

      Blueprint transformed;
      if (mode == ControlMode::drop) {
        transformed =
            drop_unanswerable(bp, record.to_document(), clients.model(), config.control);
      } else if (mode == ControlMode::q1) {
        std::vector<SentenceBlueprint> sbs =
            truncate_q1(align_to_sentences(bp, summary), config.control);
        for (const SentenceBlueprint& sb : sbs)
          for (const QAPair& p : sb.pairs) transformed.pairs.push_back(p);
      } else {
        const json& plans = *edit_plans;
        const json* plan = nullptr;
        if (plans.is_array())
          plan = &plans;
        else if (plans.contains(id))
          plan = &plans[id];
        else
          throw ConfigError("no edited plan for record " + id);
        for (const json& p : *plan)
          transformed.pairs.push_back(
              {p.at("question").get<std::string>(), p.at("answer").get<std::string>(),
               std::nullopt, std::nullopt});
      }

      record.blueprint = transformed.pairs;
      record_lines[i] = corpus_record_to_json(record);

      if (variant == Variant::iterative) {
        std::vector<SentenceBlueprint> sbs = align_to_sentences(transformed, summary);
        std::vector<std::string> context;
        for (std::size_t s = 0; s < sbs.size(); ++s) {
          Blueprint step{sbs[s].pairs};
          json j{{"example_id", id},
                 {"step_index", s},
                 {"input", record.to_document().joined_text()},
                 {"prompt", apply_plan_edit(step, variant, config.format, context)}};
          prompt_lines[i] += j.dump() + "\n";
          context.push_back(summary.sentence_text(s));
        }
      } else {
        json j{{"example_id", id},
               {"input", record.to_document().joined_text()},
               {"prompt", apply_plan_edit(transformed, variant, config.format)}};
        prompt_lines[i] = j.dump() + "\n";
      }
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  IdRegistry id_check;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!failures[i].empty() || ids[i].empty()) continue;
    try {
      id_check.require_fresh(ids[i]);
    } catch (const ConfigError& e) {
      failures[i] = e.what();
    }
  }

  std::ofstream out = open_out(output_path);
  std::ofstream prompts = open_out(prompts_path);
  Sidecar sidecar(output_path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!failures[i].empty()) {
      sidecar.add(i + 1, ids[i], failures[i]);
      continue;
    }
    out << record_lines[i] << "\n";
    prompts << prompt_lines[i];
  }
  return sidecar.finish();
}

int cmd_evaluate(const std::string& predictions_path, const std::string& references_path,
                 const std::string& reports_path, const std::string& aggregate_path,
                 const RunConfig& config) {
  config.validate();
  Clients clients(config);

  struct Prediction {
    std::string example_id;
    std::string summary;
    std::optional<Blueprint> blueprint;
  };
  std::vector<Prediction> predictions;
  for (const std::string& line : read_lines(predictions_path)) {
    json j = json::parse(line);
    Prediction p;
    p.example_id = j.at("example_id").get<std::string>();
    p.summary = j.value("summary", j.value("predicted_summary", std::string()));
    if (j.contains("blueprint")) {
      Blueprint bp;
      for (const json& q : j["blueprint"]) bp.pairs.push_back(pair_from_json(q));
      p.blueprint = std::move(bp);
    }
    predictions.push_back(std::move(p));
  }

  std::map<std::string, CorpusRecord> references;
  for (CorpusRecord& r : read_corpus(references_path))
    references[r.example_id] = std::move(r);

  std::vector<std::string> reports(predictions.size());
  std::vector<std::string> failures(predictions.size());
  struct Sums {
    double informativeness = 0, grounding = 0, faithfulness = 0;
    double rouge_summary = 0, rouge_blueprint = 0;
    double pooled_f1 = 0;
    std::size_t n = 0, grounded = 0, questions = 0;
  };
  std::vector<Sums> partial(predictions.size());

  run_indexed(predictions.size(), config.workers, [&](std::size_t i) {
    const Prediction& pred = predictions[i];
    try {
      auto ref_it = references.find(pred.example_id);
      if (ref_it == references.end())
        throw ConfigError("no reference for prediction id " + pred.example_id);
      const CorpusRecord& ref = ref_it->second;
      Blueprint ref_bp = record_blueprint(ref);
      if (ref_bp.empty()) throw EvalError("reference blueprint is empty");

      QaScore inform = qa_based_score(pred.summary, ref_bp, clients.model());
      std::optional<double> grounding;
      if (pred.blueprint && !pred.blueprint->empty())
        grounding = qa_based_score(pred.summary, *pred.blueprint, clients.model()).mean_f1;

      Summary pred_summary = Summary::from_text(pred.summary);
      FaithfulnessScore faith;
      if (!pred_summary.sentences.empty())
        faith = faithfulness(ref.to_document(), pred_summary, clients.model(),
                             config.faithfulness);

      double rouge_summary = rouge_lsum(rouge_ready(pred.summary), rouge_ready(ref.summary));
      double rouge_bp = 0.0;
      if (pred.blueprint) rouge_bp = blueprint_rouge(*pred.blueprint, ref_bp);

      json j;
      j["example_id"] = pred.example_id;
      j["informativeness"] = inform.mean_f1;
      if (grounding) j["grounding"] = *grounding;
      j["faithfulness"] = faith.score;
      j["faithfulness_labels"] = faith.per_sentence;
      j["rouge_lsum_summary"] = rouge_summary;
      j["rouge_lsum_blueprint"] = rouge_bp;
      json per_question = json::array();
      for (const PerQuestionScore& q : inform.per_question)
        per_question.push_back({{"question", q.question},
                                {"gold_answer", q.gold_answer},
                                {"predicted_answer", q.predicted_answer},
                                {"f1", q.f1}});
      j["per_question"] = std::move(per_question);
      reports[i] = j.dump();

      Sums& s = partial[i];
      s.informativeness = inform.mean_f1;
      s.faithfulness = faith.score;
      s.rouge_summary = rouge_summary;
      s.rouge_blueprint = rouge_bp;
      if (grounding) {
        s.grounding = *grounding;
        s.grounded = 1;
      }
      for (const PerQuestionScore& q : inform.per_question) s.pooled_f1 += q.f1;
      s.questions = inform.per_question.size();
      s.n = 1;
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  std::ofstream out = open_out(reports_path);
  Sidecar sidecar(reports_path);
  Sums total;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!failures[i].empty()) {
      sidecar.add(i + 1, predictions[i].example_id, failures[i]);
      continue;
    }
    out << reports[i] << "\n";
    total.informativeness += partial[i].informativeness;
    total.grounding += partial[i].grounding;
    total.faithfulness += partial[i].faithfulness;
    total.rouge_summary += partial[i].rouge_summary;
    total.rouge_blueprint += partial[i].rouge_blueprint;
    total.pooled_f1 += partial[i].pooled_f1;
    total.questions += partial[i].questions;
    total.grounded += partial[i].grounded;
    total.n += 1;
  }

  json agg;
  agg["examples"] = total.n;
  if (total.n > 0) {
    double n = static_cast<double>(total.n);
    agg["informativeness"] = total.informativeness / n;
    agg["faithfulness"] = total.faithfulness / n;
    agg["rouge_lsum_summary"] = total.rouge_summary / n;
    agg["rouge_lsum_blueprint"] = total.rouge_blueprint / n;
    if (total.grounded > 0)
      agg["grounding"] = total.grounding / static_cast<double>(total.grounded);
    if (total.questions > 0)
      agg["informativeness_pooled"] = total.pooled_f1 / static_cast<double>(total.questions);
  }
  std::ofstream agg_out = open_out(aggregate_path);
  agg_out << agg.dump(2) << "\n";
  return sidecar.finish();
}

int cmd_stats(const std::string& input_path, const std::string& output_path,
              const RunConfig& config) {
  config.validate();
  std::vector<CorpusRecord> records = read_corpus(input_path);
  std::vector<StatsInput> inputs;
  inputs.reserve(records.size());
  for (const CorpusRecord& r : records) {
    StatsInput in;
    for (const SourceText& s : r.sources) in.sources.push_back(s.text);
    in.summary = r.summary;
    if (r.blueprint) in.pairs = *r.blueprint;
    inputs.push_back(std::move(in));
  }
  DatasetStats stats = dataset_stats(inputs);

  json j;
  j["examples"] = stats.examples;
  j["docs_per_example"] = stats.docs_per_example;
  j["source_words"] = stats.source_words;
  j["source_sentences"] = stats.source_sentences;
  j["words_per_doc"] = stats.words_per_doc;
  j["target_words"] = stats.target_words;
  j["target_sentences"] = stats.target_sentences;
  j["novel_unigrams"] = stats.novel[0];
  j["novel_bigrams"] = stats.novel[1];
  j["novel_trigrams"] = stats.novel[2];
  j["novel_4grams"] = stats.novel[3];
  j["qa_pairs_per_blueprint"] = stats.qa_pairs_per_blueprint;
  j["target_plus_blueprint_words"] = stats.target_plus_blueprint_words;
  std::ofstream out = open_out(output_path);
  out << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace blueprint
