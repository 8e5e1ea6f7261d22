#include "blueprint/model_clients.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "blueprint/errors.hpp"

namespace blueprint {

using nlohmann::json;

void ClientConfig::validate() const {
  if (timeout_seconds <= 0) throw ConfigError("client: timeout must be > 0");
  if (max_in_flight < 1) throw ConfigError("client: max_in_flight must be >= 1");
  if (max_retries < 0) throw ConfigError("client: max_retries must be >= 0");
}

// ---------------------------------------------------------------------------
// Mock backend
// ---------------------------------------------------------------------------

void MockBackend::add_qg(const std::string& answer, const std::string& context,
                         std::string question) {
  qg_[{answer, context}] = std::move(question);
}

void MockBackend::add_qa(const std::string& question, const std::string& context,
                         QaResponse response) {
  qa_[{question, context}] = std::move(response);
}

void MockBackend::add_nli(const std::string& premise, const std::string& hypothesis,
                          double entail_prob) {
  nli_[{premise, hypothesis}] = entail_prob;
}

void MockBackend::add_qg_failure(const std::string& answer, const std::string& context) {
  qg_fail_[{answer, context}] = true;
}

void MockBackend::add_qa_failure(const std::string& question, const std::string& context) {
  qa_fail_[{question, context}] = true;
}

void MockBackend::add_candidates(const std::string& summary_text,
                                 std::vector<AnswerCandidate> items) {
  candidate_backend_.fixtures[summary_text] = std::move(items);
}

std::vector<AnswerCandidate> MockBackend::MockCandidates::candidates(
    const Summary& summary) const {
  auto it = fixtures.find(summary.text);
  if (it != fixtures.end()) return it->second;
  return fallback.candidates(summary);
}

QgResponse MockBackend::generate_question(const QgRequest& request) {
  Key key{request.answer, request.context};
  if (qg_fail_.count(key)) throw TransportError("mock qg failure for answer: " + request.answer);
  auto it = qg_.find(key);
  if (it != qg_.end()) return {it->second};
  return {"What is " + request.answer + "?"};
}

QaResponse MockBackend::answer_question(const QaRequest& request) {
  Key key{request.question, request.context};
  if (qa_fail_.count(key)) throw TransportError("mock qa failure for question: " + request.question);
  auto it = qa_.find(key);
  if (it != qa_.end()) return it->second;
  return {"", 0.0, true};
}

NliResponse MockBackend::entail(const NliRequest& request) {
  auto it = nli_.find({request.premise, request.hypothesis});
  if (it != nli_.end()) return {it->second};
  if (request.premise == request.hypothesis) return {1.0};
  return {0.0};
}

MockBackend MockBackend::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fixtures file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

MockBackend MockBackend::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("fixtures: invalid JSON: ") + e.what());
  }
  MockBackend mock;
  for (const json& e : root.value("qg", json::array())) {
    if (e.value("fail", false))
      mock.add_qg_failure(e.at("answer"), e.at("context"));
    else
      mock.add_qg(e.at("answer"), e.at("context"), e.at("question"));
  }
  for (const json& e : root.value("qa", json::array())) {
    if (e.value("fail", false)) {
      mock.add_qa_failure(e.at("question"), e.at("context"));
      continue;
    }
    QaResponse r;
    r.answer = e.value("answer", std::string());
    r.no_answer = e.value("no_answer", false);
    r.score = e.value("score", r.no_answer ? 0.0 : 1.0);
    mock.add_qa(e.at("question"), e.at("context"), std::move(r));
  }
  for (const json& e : root.value("nli", json::array()))
    mock.add_nli(e.at("premise"), e.at("hypothesis"), e.at("entail_prob").get<double>());
  for (const json& e : root.value("candidates", json::array())) {
    std::vector<AnswerCandidate> items;
    for (const json& c : e.at("items")) {
      AnswerCandidate cand;
      cand.text = c.at("text");
      cand.span = {c.at("start").get<std::size_t>(), c.at("end").get<std::size_t>()};
      cand.kind = candidate_kind_from_string(c.value("kind", "noun_phrase"));
      items.push_back(std::move(cand));
    }
    mock.add_candidates(e.at("text"), std::move(items));
  }
  return mock;
}

// ---------------------------------------------------------------------------
// HTTP backend
// ---------------------------------------------------------------------------

namespace {

struct ParsedUrl {
  std::string host_port;  // scheme://host:port
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint is not a URL: " + url);
  std::size_t path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, "/"};
  return {url.substr(0, path), url.substr(path)};
}

// Counting semaphore bounding concurrent requests per endpoint.
class InFlightGate {
 public:
  explicit InFlightGate(int limit) : available_(limit) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++available_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

class Endpoint {
 public:
  explicit Endpoint(ClientConfig config)
      : config_(std::move(config)), url_(parse_url(config_.endpoint)), gate_(config_.max_in_flight) {
    config_.validate();
  }

  json post(const json& body) {
    gate_.acquire();
    struct Release {
      InFlightGate& g;
      ~Release() { g.release(); }
    } release{gate_};

    std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        auto delay = std::chrono::duration<double>(config_.backoff_base_seconds *
                                                   static_cast<double>(1 << (attempt - 1)));
        std::this_thread::sleep_for(delay);
      }
      httplib::Client client(url_.host_port);
      client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
      client.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));
      httplib::Result res = client.Post(url_.path, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP status " + std::to_string(res->status);
        continue;
      }
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw MalformedResponse(config_.endpoint + ": response is not JSON: " + e.what());
      }
    }
    throw TransportError(config_.endpoint + ": " + last_error);
  }

 private:
  ClientConfig config_;
  ParsedUrl url_;
  InFlightGate gate_;
};

double require_probability(const json& value, const std::string& endpoint) {
  if (!value.is_number())
    throw MalformedResponse(endpoint + ": probability field is not a number");
  double p = value.get<double>();
  if (p < 0.0 || p > 1.0)
    throw MalformedResponse(endpoint + ": probability out of [0,1]");
  return p;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::string(v) : fallback;
}

}  // namespace

struct HttpModelBackend::Impl {
  Endpoint qg;
  Endpoint qa;
  Endpoint nli;
};

HttpModelBackend::HttpModelBackend(ClientConfig qg, ClientConfig qa, ClientConfig nli)
    : impl_(new Impl{Endpoint(std::move(qg)), Endpoint(std::move(qa)), Endpoint(std::move(nli))}) {}

HttpModelBackend::~HttpModelBackend() = default;

HttpModelBackend HttpModelBackend::from_environment(const ClientConfig& defaults) {
  auto with_url = [&](const char* var) {
    ClientConfig c = defaults;
    c.endpoint = env_or(var, c.endpoint);
    if (c.endpoint.empty())
      throw ConfigError(std::string("missing endpoint; set ") + var);
    return c;
  };
  return HttpModelBackend(with_url("BLUEPRINT_QG_URL"), with_url("BLUEPRINT_QA_URL"),
                          with_url("BLUEPRINT_NLI_URL"));
}

QgResponse HttpModelBackend::generate_question(const QgRequest& request) {
  json res = impl_->qg.post({{"answer", request.answer}, {"context", request.context}});
  if (!res.contains("question") || !res["question"].is_string() ||
      res["question"].get<std::string>().empty())
    throw MalformedResponse("qg: missing or empty question");
  return {res["question"].get<std::string>()};
}

QaResponse HttpModelBackend::answer_question(const QaRequest& request) {
  json res = impl_->qa.post({{"question", request.question}, {"context", request.context}});
  QaResponse out;
  if (!res.contains("answer") || !res["answer"].is_string())
    throw MalformedResponse("qa: missing answer");
  out.answer = res["answer"].get<std::string>();
  out.no_answer = res.value("no_answer", false);
  out.score = require_probability(res.value("score", json(0.0)), "qa");
  if (out.no_answer && !out.answer.empty())
    throw MalformedResponse("qa: no_answer with a non-empty answer");
  return out;
}

NliResponse HttpModelBackend::entail(const NliRequest& request) {
  json res = impl_->nli.post({{"premise", request.premise}, {"hypothesis", request.hypothesis}});
  if (!res.contains("entail_prob"))
    throw MalformedResponse("nli: missing entail_prob");
  return {require_probability(res["entail_prob"], "nli")};
}

struct HttpCandidateBackend::Impl {
  mutable Endpoint endpoint;
};

HttpCandidateBackend::HttpCandidateBackend(ClientConfig config)
    : impl_(new Impl{Endpoint(std::move(config))}) {}

HttpCandidateBackend::~HttpCandidateBackend() = default;

std::vector<AnswerCandidate> HttpCandidateBackend::candidates(const Summary& summary) const {
  json res = impl_->endpoint.post({{"text", summary.text}});
  if (!res.contains("candidates") || !res["candidates"].is_array())
    throw MalformedResponse("candidates: missing candidates array");
  std::vector<AnswerCandidate> out;
  for (const json& c : res["candidates"]) {
    AnswerCandidate cand;
    cand.text = c.at("text");
    cand.span = {c.at("start").get<std::size_t>(), c.at("end").get<std::size_t>()};
    cand.kind = candidate_kind_from_string(c.value("kind", "noun_phrase"));
    out.push_back(std::move(cand));
  }
  return out;
}

std::string generate_question(const std::string& answer, const std::string& context,
                              ModelBackend& client) {
  return client.generate_question({answer, context}).question;
}

QaResponse answer_question(const std::string& question, const std::string& context,
                           ModelBackend& client) {
  return client.answer_question({question, context});
}

double entail_prob(const std::string& premise, const std::string& hypothesis,
                   ModelBackend& client) {
  return client.entail({premise, hypothesis}).entail_prob;
}

}  // namespace blueprint
