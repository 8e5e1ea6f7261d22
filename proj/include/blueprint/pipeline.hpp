#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blueprint/annotate.hpp"
#include "blueprint/control.hpp"
#include "blueprint/core.hpp"
#include "blueprint/eval.hpp"
#include "blueprint/formats.hpp"
#include "blueprint/model_clients.hpp"
#include "blueprint/propsplit.hpp"

namespace blueprint {

// One corpus line. Propositions and blueprint are optional inputs that
// annotation fills or downstream stages consume.
struct CorpusRecord {
  std::string example_id;
  std::optional<std::string> query;
  std::vector<SourceText> sources;
  std::string summary;
  std::optional<std::vector<CharSpan>> propositions;
  std::optional<std::vector<QAPair>> blueprint;

  Document to_document() const;
};

std::string corpus_record_to_json(const CorpusRecord& record);
CorpusRecord corpus_record_from_json(const std::string& line);

std::vector<CorpusRecord> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<CorpusRecord>& records);

enum class ControlMode { drop, q1, edit };

struct RunConfig {
  int workers = 1;
  std::uint64_t seed = 0;
  SplitConfig split;
  AnnotateConfig annotate;
  FormatConfig format;
  ControlConfig control;
  FaithfulnessConfig faithfulness;
  ClientConfig qg_client;
  ClientConfig qa_client;
  ClientConfig nli_client;
  ClientConfig candidates_client;
  std::string mock_fixtures_path;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  void validate() const;
};

// Owns whichever backends the configuration selects: explicit mock
// fixtures, HTTP endpoints (config or environment), or the defaults
// (empty mock plus the heuristic candidate extractor).
class Clients {
 public:
  explicit Clients(const RunConfig& config);

  ModelBackend& model() const { return *model_; }
  const CandidateBackend& candidates() const { return *candidates_; }

 private:
  std::unique_ptr<MockBackend> mock_;
  std::unique_ptr<HttpModelBackend> http_;
  std::unique_ptr<HttpCandidateBackend> http_candidates_;
  HeuristicCandidateBackend heuristic_;
  ModelBackend* model_ = nullptr;
  const CandidateBackend* candidates_ = nullptr;
};

// Exit codes shared by every subcommand: 0 all records ok, 2 partial
// failures (details in <output>.errors.jsonl), 1 fatal config/IO error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

int cmd_annotate(const std::string& input_path, const std::string& output_path,
                 const RunConfig& config);
int cmd_serialize(const std::string& input_path, const std::string& output_path,
                  const std::string& variant, const RunConfig& config);
int cmd_parse(const std::string& input_path, const std::string& output_path,
              const std::string& variant, const RunConfig& config);
int cmd_control(const std::string& input_path, const std::string& output_path,
                const std::string& prompts_path, ControlMode mode,
                const std::string& edit_plan_path, const std::string& prompt_variant,
                const RunConfig& config);
int cmd_evaluate(const std::string& predictions_path, const std::string& references_path,
                 const std::string& reports_path, const std::string& aggregate_path,
                 const RunConfig& config);
int cmd_stats(const std::string& input_path, const std::string& output_path,
              const RunConfig& config);

}  // namespace blueprint
