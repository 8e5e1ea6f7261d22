#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "blueprint/errors.hpp"
#include "blueprint/pipeline.hpp"

using namespace blueprint;

int main(int argc, char** argv) {
  CLI::App app{"QA-blueprint dataset tooling: annotate corpora with "
               "question-answer plans, emit and parse model targets, apply "
               "plan transforms and score outputs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mock_fixtures;
  int workers = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--workers", workers, "worker thread count");
  app.add_option("--seed", seed, "random seed for shuffling modes")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--mock-fixtures", mock_fixtures, "JSON fixture file for the mock backends");

  std::string input, output, variant = "e2e";
  std::string prompts_path, edit_plan, references, reports, aggregate;
  bool drop = false, q1 = false;

  CLI::App* annotate = app.add_subcommand("annotate", "fill blueprints for a JSONL corpus");
  annotate->add_option("input", input)->required();
  annotate->add_option("output", output)->required();

  CLI::App* serialize = app.add_subcommand("serialize", "emit model targets");
  serialize->add_option("input", input)->required();
  serialize->add_option("output", output)->required();
  serialize->add_option("--variant", variant, "e2e, multitask or iterative");

  CLI::App* parse = app.add_subcommand("parse", "structure decoded model output");
  parse->add_option("input", input)->required();
  parse->add_option("output", output)->required();
  parse->add_option("--variant", variant, "e2e, multitask or iterative");

  CLI::App* control = app.add_subcommand("control", "transform blueprints and emit prompts");
  control->add_option("input", input)->required();
  control->add_option("output", output)->required();
  control->add_option("--prompts", prompts_path, "regeneration prompts output")->required();
  control->add_flag("--drop", drop, "drop pairs unanswerable from the input");
  control->add_flag("--q1", q1, "keep a single pair per sentence");
  control->add_option("--edit", edit_plan, "JSON file with edited plans");
  control->add_option("--variant", variant, "prompt layout: e2e, multitask or iterative");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score predictions against references");
  evaluate->add_option("predictions", input)->required();
  evaluate->add_option("references", references)->required();
  evaluate->add_option("--reports", reports, "per-example reports JSONL")->required();
  evaluate->add_option("--aggregate", aggregate, "corpus-level aggregate JSON")->required();

  CLI::App* stats = app.add_subcommand("stats", "corpus statistics");
  stats->add_option("input", input)->required();
  stats->add_option("output", output)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints the message or the requested help text
    return code == 0 ? 0 : kExitFatal;
  }

  try {
    RunConfig config =
        config_path.empty() ? RunConfig{} : RunConfig::from_json_file(config_path);
    if (workers > 0) config.workers = workers;
    if (seed_set) config.seed = seed;
    if (!mock_fixtures.empty()) config.mock_fixtures_path = mock_fixtures;

    if (annotate->parsed()) return cmd_annotate(input, output, config);
    if (serialize->parsed()) return cmd_serialize(input, output, variant, config);
    if (parse->parsed()) return cmd_parse(input, output, variant, config);
    if (control->parsed()) {
      int selected = (drop ? 1 : 0) + (q1 ? 1 : 0) + (edit_plan.empty() ? 0 : 1);
      if (selected != 1)
        throw ConfigError("control: choose exactly one of --drop, --q1, --edit");
      ControlMode mode = drop ? ControlMode::drop
                              : (q1 ? ControlMode::q1 : ControlMode::edit);
      return cmd_control(input, output, prompts_path, mode, edit_plan, variant, config);
    }
    if (evaluate->parsed())
      return cmd_evaluate(input, references, reports, aggregate, config);
    if (stats->parsed()) return cmd_stats(input, output, config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
