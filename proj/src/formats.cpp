#include "blueprint/formats.hpp"

#include <algorithm>
#include <cctype>

#include "blueprint/errors.hpp"

namespace blueprint {

namespace {

std::vector<std::string> marker_list(const FormatConfig& cfg) {
  std::vector<std::string> markers = {
      cfg.plan_marker,        cfg.summary_marker,     cfg.questions_marker,
      cfg.context_marker,     cfg.next_sentence_marker, cfg.gen_summary_prefix,
      cfg.gen_questions_prefix};
  // Longest first so "Generate Summary:" wins over its "Summary:" suffix.
  std::sort(markers.begin(), markers.end(),
            [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  return markers;
}

// First occurrence of `marker` in text at or after `from` that is not an
// escaped occurrence (marker immediately followed by an extra colon).
std::size_t find_marker(const std::string& text, const std::string& marker, std::size_t from) {
  std::size_t pos = from;
  while (true) {
    pos = text.find(marker, pos);
    if (pos == std::string::npos) return std::string::npos;
    std::size_t after = pos + marker.size();
    if (after >= text.size() || text[after] != ':') return pos;
    pos = after;
  }
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& body, const std::string& separator) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t next = body.find(separator, pos);
    std::string field =
        next == std::string::npos ? body.substr(pos) : body.substr(pos, next - pos);
    fields.push_back(trim(field));
    if (next == std::string::npos) break;
    pos = next + separator.size();
  }
  while (!fields.empty() && fields.back().empty()) fields.pop_back();
  return fields;
}

// Appends " <content>" unless the content is empty.
void append_segment(std::string& out, const std::string& content) {
  if (!content.empty()) {
    out += ' ';
    out += content;
  }
}

std::string sentence_join(const Summary& summary, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) out += ' ';
    out += summary.sentence_text(i);
  }
  return out;
}

std::vector<QAPair> fields_to_pairs(const std::vector<std::string>& fields,
                                    PlanOrder order, std::vector<std::string>& flags) {
  std::vector<QAPair> pairs;
  for (std::size_t i = 0; i + 1 < fields.size(); i += 2) {
    QAPair p;
    if (order == PlanOrder::answer_question) {
      p.answer = fields[i];
      p.question = fields[i + 1];
    } else {
      p.question = fields[i];
      p.answer = fields[i + 1];
    }
    pairs.push_back(std::move(p));
  }
  if (fields.size() % 2 != 0) {
    QAPair p;
    if (order == PlanOrder::answer_question)
      p.answer = fields.back();
    else
      p.question = fields.back();
    pairs.push_back(std::move(p));
    flags.push_back("odd_field_count");
  }
  return pairs;
}

}  // namespace

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::e2e: return "e2e";
    case Variant::multitask_summary: return "multitask_summary";
    case Variant::multitask_questions: return "multitask_questions";
    case Variant::iterative: return "iterative";
  }
  return "e2e";
}

Variant variant_from_string(const std::string& s) {
  if (s == "e2e") return Variant::e2e;
  if (s == "multitask_summary") return Variant::multitask_summary;
  if (s == "multitask_questions") return Variant::multitask_questions;
  if (s == "iterative") return Variant::iterative;
  throw ConfigError("unknown variant: " + s);
}

void FormatConfig::validate() const {
  std::vector<std::string> markers = marker_list(*this);
  for (const std::string& m : markers)
    if (m.empty() || m.back() != ':')
      throw ConfigError("format: markers must be non-empty and end with a colon");
  for (std::size_t i = 0; i < markers.size(); ++i)
    for (std::size_t j = i + 1; j < markers.size(); ++j)
      if (markers[i] == markers[j]) throw ConfigError("format: markers must be distinct");
  if (pair_separator.empty()) throw ConfigError("format: pair separator must be non-empty");
  if (end_plan_token.empty() || end_sentence_token.empty() || end_plan_token == end_sentence_token)
    throw ConfigError("format: end tokens must be non-empty and distinct");
}

std::string escape_markers(const std::string& content, const FormatConfig& config) {
  std::vector<std::string> markers = marker_list(config);
  std::string out;
  out.reserve(content.size());
  std::size_t i = 0;
  while (i < content.size()) {
    bool matched = false;
    for (const std::string& m : markers) {
      if (content.compare(i, m.size(), m) == 0) {
        out += m;
        out += ':';
        i += m.size();
        matched = true;
        break;
      }
    }
    if (!matched) out += content[i++];
  }
  return out;
}

std::string unescape_markers(const std::string& content, const FormatConfig& config) {
  std::vector<std::string> markers = marker_list(config);
  std::string out;
  out.reserve(content.size());
  std::size_t i = 0;
  while (i < content.size()) {
    bool matched = false;
    for (const std::string& m : markers) {
      if (content.compare(i, m.size(), m) == 0 && i + m.size() < content.size() &&
          content[i + m.size()] == ':') {
        out += m;
        i += m.size() + 1;
        matched = true;
        break;
      }
    }
    if (!matched) out += content[i++];
  }
  return out;
}

std::string plan_body_text(const std::vector<QAPair>& pairs, const FormatConfig& config,
                           bool answers_only) {
  std::string body;
  for (const QAPair& p : pairs) {
    std::string first = config.plan_order == PlanOrder::answer_question ? p.answer : p.question;
    std::string second = config.plan_order == PlanOrder::answer_question ? p.question : p.answer;
    if (!body.empty()) body += config.pair_separator;
    if (answers_only) {
      body += escape_markers(p.answer, config);
    } else {
      body += escape_markers(first, config);
      body += config.pair_separator;
      body += escape_markers(second, config);
    }
  }
  return body;
}

TargetInstance serialize_e2e(const AnnotatedExample& example, const FormatConfig& config) {
  TargetInstance out;
  out.variant = Variant::e2e;
  out.input_text = example.document.joined_text();

  std::string target = config.plan_marker;
  append_segment(target, plan_body_text(example.blueprint.pairs, config));
  target += ' ';
  target += config.summary_marker;
  append_segment(target, escape_markers(example.summary.text, config));
  out.target_text = std::move(target);
  return out;
}

ParsedOutput parse_e2e(const std::string& text, const FormatConfig& config) {
  std::size_t plan = find_marker(text, config.plan_marker, 0);
  if (plan == std::string::npos) throw FormatError("missing plan marker");
  std::size_t body_start = plan + config.plan_marker.size();
  std::size_t summary = find_marker(text, config.summary_marker, body_start);
  if (summary == std::string::npos) throw FormatError("missing summary marker");

  ParsedOutput out;
  std::string body = trim(text.substr(body_start, summary - body_start));
  std::vector<std::string> fields;
  for (std::string& f : split_fields(body, config.pair_separator))
    fields.push_back(unescape_markers(f, config));
  out.blueprint.pairs = fields_to_pairs(fields, config.plan_order, out.flags);
  out.summary_text =
      unescape_markers(trim(text.substr(summary + config.summary_marker.size())), config);
  return out;
}

std::pair<TargetInstance, TargetInstance> serialize_multitask(const AnnotatedExample& example,
                                                              const FormatConfig& config) {
  std::string document = example.document.joined_text();

  TargetInstance summary_task;
  summary_task.variant = Variant::multitask_summary;
  summary_task.input_text = config.gen_summary_prefix;
  append_segment(summary_task.input_text, document);
  std::string target = config.plan_marker;
  append_segment(target, plan_body_text(example.blueprint.pairs, config, /*answers_only=*/true));
  target += ' ';
  target += config.summary_marker;
  append_segment(target, escape_markers(example.summary.text, config));
  summary_task.target_text = std::move(target);

  TargetInstance question_task;
  question_task.variant = Variant::multitask_questions;
  question_task.input_text = config.gen_questions_prefix;
  append_segment(question_task.input_text, document);
  target = config.plan_marker;
  append_segment(target, plan_body_text(example.blueprint.pairs, config, /*answers_only=*/true));
  target += ' ';
  target += config.questions_marker;
  std::string questions;
  for (const QAPair& p : example.blueprint.pairs) {
    if (!questions.empty()) questions += config.pair_separator;
    questions += escape_markers(p.question, config);
  }
  append_segment(target, questions);
  question_task.target_text = std::move(target);

  return {std::move(summary_task), std::move(question_task)};
}

ParsedOutput parse_multitask(const std::string& summary_decode,
                             const std::string& questions_decode, const FormatConfig& config) {
  // The summary decode carries the answer plan and the output text.
  std::size_t plan = find_marker(summary_decode, config.plan_marker, 0);
  if (plan == std::string::npos) throw FormatError("missing plan marker");
  std::size_t body_start = plan + config.plan_marker.size();
  std::size_t summary = find_marker(summary_decode, config.summary_marker, body_start);
  if (summary == std::string::npos) throw FormatError("missing summary marker");

  ParsedOutput out;
  std::vector<std::string> answers;
  for (std::string& f :
       split_fields(trim(summary_decode.substr(body_start, summary - body_start)),
                    config.pair_separator))
    answers.push_back(unescape_markers(f, config));
  out.summary_text = unescape_markers(
      trim(summary_decode.substr(summary + config.summary_marker.size())), config);

  // The questions decode contributes questions only; a decode without the
  // markers is flagged rather than rejected.
  std::vector<std::string> questions;
  std::size_t qplan = find_marker(questions_decode, config.plan_marker, 0);
  std::size_t qmark = qplan == std::string::npos
                          ? std::string::npos
                          : find_marker(questions_decode, config.questions_marker,
                                        qplan + config.plan_marker.size());
  if (qmark == std::string::npos) {
    if (!trim(questions_decode).empty()) out.flags.push_back("questions_decode_unparseable");
  } else {
    for (std::string& f :
         split_fields(trim(questions_decode.substr(qmark + config.questions_marker.size())),
                      config.pair_separator))
      questions.push_back(unescape_markers(f, config));
  }

  std::size_t n = std::min(answers.size(), questions.size());
  for (std::size_t i = 0; i < n; ++i)
    out.blueprint.pairs.push_back({questions[i], answers[i], std::nullopt, std::nullopt});
  if (answers.size() != questions.size()) {
    out.flags.push_back("length_mismatch");
    for (std::size_t i = n; i < answers.size(); ++i)
      out.blueprint.pairs.push_back({"", answers[i], std::nullopt, std::nullopt});
    for (std::size_t i = n; i < questions.size(); ++i)
      out.blueprint.pairs.push_back({questions[i], "", std::nullopt, std::nullopt});
  }
  return out;
}

std::vector<TargetInstance> serialize_iterative(const AnnotatedExample& example,
                                                const FormatConfig& config) {
  std::size_t n = example.summary.sentences.size();
  if (example.sentence_blueprints.size() != n)
    throw ConfigError("iterative: sentence blueprints must cover every sentence");
  for (std::size_t i = 0; i < n; ++i)
    if (example.sentence_blueprints[i].sentence_index != i)
      throw ConfigError("iterative: sentence blueprints must be ordered");

  std::string document = example.document.joined_text();
  std::vector<TargetInstance> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    TargetInstance inst;
    inst.variant = Variant::iterative;
    inst.step_index = static_cast<int>(i);
    inst.input_text = document;

    std::string target = config.context_marker;
    append_segment(target, escape_markers(sentence_join(example.summary, i), config));
    target += ' ';
    inst.loss_mask_prefix_len = target.size();

    target += config.plan_marker;
    if (i < n) {
      append_segment(target,
                     plan_body_text(example.sentence_blueprints[i].pairs, config));
      target += ' ';
      target += config.next_sentence_marker;
      append_segment(target, escape_markers(example.summary.sentence_text(i), config));
    } else {
      append_segment(target, config.end_plan_token);
      target += ' ';
      target += config.next_sentence_marker;
      append_segment(target, config.end_sentence_token);
    }
    inst.target_text = std::move(target);
    out.push_back(std::move(inst));
  }
  return out;
}

IterativeStep parse_iterative_step(const std::string& decode, const FormatConfig& config) {
  // Decodes echo the context prompt; only the segment after the last
  // context block carries the step's plan and sentence.
  std::size_t base = 0;
  std::size_t ctx = find_marker(decode, config.context_marker, 0);
  while (ctx != std::string::npos) {
    base = ctx + config.context_marker.size();
    ctx = find_marker(decode, config.context_marker, base);
  }
  std::size_t plan = find_marker(decode, config.plan_marker, base);
  if (plan == std::string::npos) throw FormatError("missing plan marker");
  std::size_t body_start = plan + config.plan_marker.size();
  std::size_t next = find_marker(decode, config.next_sentence_marker, body_start);
  if (next == std::string::npos) throw FormatError("missing next-sentence marker");

  IterativeStep step;
  std::string body = trim(decode.substr(body_start, next - body_start));
  std::string sentence = trim(decode.substr(next + config.next_sentence_marker.size()));
  if (body == config.end_plan_token || sentence == config.end_sentence_token) {
    step.is_end = true;
    return step;
  }
  std::vector<std::string> fields;
  for (std::string& f : split_fields(body, config.pair_separator))
    fields.push_back(unescape_markers(f, config));
  step.pairs = fields_to_pairs(fields, config.plan_order, step.flags);
  step.sentence = unescape_markers(sentence, config);
  if (step.sentence.empty()) step.flags.push_back("empty_sentence");
  return step;
}

ParsedOutput assemble_iterative(const std::vector<IterativeStep>& steps) {
  ParsedOutput out;
  bool terminated = false;
  for (const IterativeStep& step : steps) {
    if (step.is_end) {
      terminated = true;
      break;
    }
    for (const QAPair& p : step.pairs) out.blueprint.pairs.push_back(p);
    if (!step.sentence.empty()) {
      if (!out.summary_text.empty()) out.summary_text += ' ';
      out.summary_text += step.sentence;
    }
    for (const std::string& f : step.flags) out.flags.push_back(f);
  }
  if (!terminated) out.flags.push_back("missing_terminator");
  return out;
}

}  // namespace blueprint
