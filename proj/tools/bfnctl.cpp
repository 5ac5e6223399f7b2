#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "bfn/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bayesian Flow Network continual-learning experiment driver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string checkpoint_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t count = 1000;
  int steps = 100;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "seed override")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* run = app.add_subcommand("run-scenario",
                                     "run a continual-learning scenario");
  run->add_option("--config", config_path, "experiment config JSON")
      ->required();
  run->add_option("--out", out_path, "output directory override");
  add_seed(run);

  CLI::App* train = app.add_subcommand("train", "single-task training");
  train->add_option("--config", config_path, "experiment config JSON")
      ->required();
  train->add_option("--out", out_path, "output directory override");
  add_seed(train);

  CLI::App* gen = app.add_subcommand("generate", "sample from a checkpoint");
  gen->add_option("--checkpoint", checkpoint_path, "checkpoint path")
      ->required();
  gen->add_option("--count", count, "number of samples");
  gen->add_option("--out", out_path, "output CSV path")->required();
  gen->add_option("--steps", steps, "sampling steps");
  add_seed(gen);

  CLI::App* eval = app.add_subcommand("evaluate",
                                      "evaluate a checkpoint against a config");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint path")
      ->required();
  eval->add_option("--config", config_path, "experiment config JSON")
      ->required();
  eval->add_option("--out", out_path, "output directory override");

  std::string metrics_path;
  CLI::App* plots = app.add_subcommand("export-plots",
                                       "melt metrics JSON into long CSV");
  plots->add_option("--metrics", metrics_path, "metrics.json path")
      ->required();
  plots->add_option("--out", out_path, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::optional<std::uint64_t> seed_opt =
      seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt;
  const std::optional<std::string> out_opt =
      out_path.empty() ? std::nullopt : std::optional<std::string>(out_path);

  if (run->parsed()) return bfn::cmd_run_scenario(config_path, seed_opt, out_opt);
  if (train->parsed()) return bfn::cmd_train(config_path, seed_opt, out_opt);
  if (gen->parsed()) {
    return bfn::cmd_generate(checkpoint_path, count, out_path,
                             seed_set ? seed : 0, steps);
  }
  if (eval->parsed()) return bfn::cmd_evaluate(checkpoint_path, config_path, out_opt);
  if (plots->parsed()) return bfn::cmd_export_plots(metrics_path, out_path);
  return 2;
}
