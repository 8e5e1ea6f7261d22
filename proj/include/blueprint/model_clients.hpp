#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blueprint/candidates.hpp"
#include "blueprint/core.hpp"

namespace blueprint {

struct QgRequest {
  std::string answer;
  std::string context;
};
struct QgResponse {
  std::string question;
};

struct QaRequest {
  std::string question;
  std::string context;
};
struct QaResponse {
  std::string answer;
  double score = 0.0;
  bool no_answer = false;
};

struct NliRequest {
  std::string premise;
  std::string hypothesis;
};
struct NliResponse {
  double entail_prob = 0.0;
};

struct ClientConfig {
  std::string endpoint;             // full URL, e.g. http://localhost:8080/qg
  double timeout_seconds = 10.0;
  int max_retries = 2;              // retries after the first attempt
  int max_in_flight = 4;
  double backoff_base_seconds = 0.05;

  void validate() const;
};

// One seam for the three learned components. Implementations must tolerate
// concurrent calls.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual QgResponse generate_question(const QgRequest& request) = 0;
  virtual QaResponse answer_question(const QaRequest& request) = 0;
  virtual NliResponse entail(const NliRequest& request) = 0;
};

// Pure lookup table with loud defaults: unknown QG falls back to
// "What is <answer>?", unknown QA reports no answer, NLI returns 1.0 only
// for an identical premise/hypothesis pair and 0.0 otherwise. Entries can
// be marked as failing to exercise transport-error paths.
class MockBackend : public ModelBackend {
 public:
  MockBackend() = default;

  static MockBackend from_json_file(const std::string& path);
  static MockBackend from_json_text(const std::string& text);

  void add_qg(const std::string& answer, const std::string& context, std::string question);
  void add_qa(const std::string& question, const std::string& context, QaResponse response);
  void add_nli(const std::string& premise, const std::string& hypothesis, double entail_prob);
  void add_qg_failure(const std::string& answer, const std::string& context);
  void add_qa_failure(const std::string& question, const std::string& context);

  // Candidate fixtures, keyed by summary text. Summaries without an entry
  // fall back to the heuristic extractor.
  void add_candidates(const std::string& summary_text, std::vector<AnswerCandidate> items);
  const CandidateBackend& candidate_backend() const { return candidate_backend_; }

  QgResponse generate_question(const QgRequest& request) override;
  QaResponse answer_question(const QaRequest& request) override;
  NliResponse entail(const NliRequest& request) override;

 private:
  using Key = std::pair<std::string, std::string>;

  class MockCandidates : public CandidateBackend {
   public:
    std::vector<AnswerCandidate> candidates(const Summary& summary) const override;
    std::map<std::string, std::vector<AnswerCandidate>> fixtures;
    HeuristicCandidateBackend fallback;
  };

  std::map<Key, std::string> qg_;
  std::map<Key, QaResponse> qa_;
  std::map<Key, double> nli_;
  std::map<Key, bool> qg_fail_;
  std::map<Key, bool> qa_fail_;
  MockCandidates candidate_backend_;
};

// Remote backend speaking JSON over HTTP POST. Bounds in-flight requests
// per endpoint and retries with exponential backoff.
class HttpModelBackend : public ModelBackend {
 public:
  HttpModelBackend(ClientConfig qg, ClientConfig qa, ClientConfig nli);
  ~HttpModelBackend() override;

  // Reads BLUEPRINT_QG_URL / BLUEPRINT_QA_URL / BLUEPRINT_NLI_URL.
  static HttpModelBackend from_environment(const ClientConfig& defaults = {});

  QgResponse generate_question(const QgRequest& request) override;
  QaResponse answer_question(const QaRequest& request) override;
  NliResponse entail(const NliRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Remote candidate annotator: POST {"text": ...} ->
// {"candidates": [{text, start, end, kind}]}.
class HttpCandidateBackend : public CandidateBackend {
 public:
  explicit HttpCandidateBackend(ClientConfig config);
  ~HttpCandidateBackend() override;

  std::vector<AnswerCandidate> candidates(const Summary& summary) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Convenience wrappers matching the call shapes used by the pipeline.
std::string generate_question(const std::string& answer, const std::string& context,
                              ModelBackend& client);
QaResponse answer_question(const std::string& question, const std::string& context,
                           ModelBackend& client);
double entail_prob(const std::string& premise, const std::string& hypothesis,
                   ModelBackend& client);

}  // namespace blueprint
