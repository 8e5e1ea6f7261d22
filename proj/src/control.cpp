#include "blueprint/control.hpp"

#include <algorithm>

#include "blueprint/concurrency.hpp"
#include "blueprint/errors.hpp"
#include "blueprint/eval.hpp"

namespace blueprint {

void ControlConfig::validate() const {
  if (drop_threshold < 0.0 || drop_threshold > 1.0)
    throw ConfigError("control: drop threshold must be in [0,1]");
}

Blueprint drop_unanswerable(const Blueprint& blueprint, const Document& document,
                            ModelBackend& qa_client, const ControlConfig& config,
                            int workers) {
  config.validate();
  std::string input = document.joined_text();
  std::vector<QaResponse> responses(blueprint.pairs.size());
  std::vector<std::exception_ptr> errors =
      run_indexed(blueprint.pairs.size(), workers, [&](std::size_t i) {
        responses[i] = answer_question(blueprint.pairs[i].question, input, qa_client);
      });
  for (std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  Blueprint out;
  for (std::size_t i = 0; i < blueprint.pairs.size(); ++i) {
    const QaResponse& r = responses[i];
    if (r.no_answer) continue;
    if (token_f1(r.answer, blueprint.pairs[i].answer) >= config.drop_threshold)
      out.pairs.push_back(blueprint.pairs[i]);
  }
  return out;
}

std::vector<SentenceBlueprint> truncate_q1(const std::vector<SentenceBlueprint>& sentence_blueprints,
                                           const ControlConfig& config) {
  std::vector<SentenceBlueprint> out;
  out.reserve(sentence_blueprints.size());
  for (const SentenceBlueprint& sb : sentence_blueprints) {
    SentenceBlueprint reduced;
    reduced.sentence_index = sb.sentence_index;
    if (!sb.pairs.empty()) {
      std::size_t keep = 0;
      if (config.q1_selection == Q1Selection::longest_answer) {
        for (std::size_t i = 1; i < sb.pairs.size(); ++i)
          if (sb.pairs[i].answer.size() > sb.pairs[keep].answer.size()) keep = i;
      }
      reduced.pairs.push_back(sb.pairs[keep]);
    }
    out.push_back(std::move(reduced));
  }
  return out;
}

std::string apply_plan_edit(const Blueprint& edited_blueprint, Variant variant,
                            const FormatConfig& config,
                            const std::vector<std::string>& context_sentences) {
  config.validate();
  std::string prompt;
  auto append = [&prompt](const std::string& piece) {
    if (!piece.empty()) {
      prompt += ' ';
      prompt += piece;
    }
  };

  switch (variant) {
    case Variant::e2e:
      prompt = config.plan_marker;
      append(plan_body_text(edited_blueprint.pairs, config));
      prompt += ' ';
      prompt += config.summary_marker;
      return prompt;
    case Variant::multitask_summary:
      prompt = config.plan_marker;
      append(plan_body_text(edited_blueprint.pairs, config, /*answers_only=*/true));
      prompt += ' ';
      prompt += config.summary_marker;
      return prompt;
    case Variant::multitask_questions:
      prompt = config.plan_marker;
      append(plan_body_text(edited_blueprint.pairs, config, /*answers_only=*/true));
      prompt += ' ';
      prompt += config.questions_marker;
      return prompt;
    case Variant::iterative: {
      prompt = config.context_marker;
      std::string context;
      for (const std::string& s : context_sentences) {
        if (!context.empty()) context += ' ';
        context += s;
      }
      append(escape_markers(context, config));
      prompt += ' ';
      prompt += config.plan_marker;
      append(plan_body_text(edited_blueprint.pairs, config));
      prompt += ' ';
      prompt += config.next_sentence_marker;
      return prompt;
    }
  }
  throw ConfigError("unsupported variant for plan editing");
}

}  // namespace blueprint
