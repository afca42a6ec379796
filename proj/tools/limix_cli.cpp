// Batch experiment driver for the lifelong infinite-mixture engine.
//
// Subcommands: train, compare, analyze, distill, sweep. Exit codes:
//   0 success, 2 config error, 3 numerical divergence, 4 missing artifact.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "limix/errors.hpp"
#include "limix/harness.hpp"

namespace {

limix::ExperimentConfig load_config(const std::string& path,
                                    const std::optional<std::uint64_t>& seed,
                                    const std::optional<std::string>& out) {
  auto cfg = limix::ExperimentConfig::from_file(path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.out_dir = *out;
  return cfg;
}

void report(const limix::RunArtifacts& artifacts, const std::string& out_dir) {
  std::cout << "wrote " << artifacts.files.size() << " file(s) to " << out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"limix: lifelong infinite mixture experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir_flag, checkpoints_dir, sweep_param = "gate.V";
  std::uint64_t seed_flag = 0;
  bool seed_set = false, out_set = false;
  std::vector<double> sweep_values;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (INI)")->required();
    cmd->add_option("--seed", seed_flag, "override [stream] seed")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--out", out_dir_flag, "override [output] dir")
        ->each([&](const std::string&) { out_set = true; });
  };

  auto* train = app.add_subcommand("train", "train the mixture over the stream");
  add_common(train);
  auto* compare = app.add_subcommand("compare", "LIMix vs GRM vs fresh-component control");
  add_common(compare);
  auto* analyze = app.add_subcommand("analyze", "risk/bound analysis of checkpoints");
  add_common(analyze);
  analyze->add_option("--checkpoints", checkpoints_dir, "directory with per-task checkpoints")
      ->required();
  auto* distill = app.add_subcommand("distill", "train the compressed Student model");
  add_common(distill);
  distill->add_option("--checkpoints", checkpoints_dir, "directory with per-task checkpoints")
      ->required();
  auto* sweep = app.add_subcommand("sweep", "hyperparameter sweep");
  add_common(sweep);
  sweep->add_option("--param", sweep_param, "gate.V or gate.a");
  sweep->add_option("--values", sweep_values, "sweep values")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto seed = seed_set ? std::optional<std::uint64_t>(seed_flag) : std::nullopt;
    const auto out = out_set ? std::optional<std::string>(out_dir_flag) : std::nullopt;
    const auto cfg = load_config(config_path, seed, out);
    limix::RunArtifacts artifacts;
    if (*train)
      artifacts = limix::run_train(cfg);
    else if (*compare)
      artifacts = limix::run_compare(cfg);
    else if (*analyze)
      artifacts = limix::run_analyze(cfg, checkpoints_dir);
    else if (*distill)
      artifacts = limix::run_distill(cfg, checkpoints_dir);
    else if (*sweep)
      artifacts = limix::run_sweep(cfg, sweep_param, sweep_values);
    report(artifacts, cfg.out_dir);
    return 0;
  } catch (const limix::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const limix::DivergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << "\n";
    return 3;
  } catch (const limix::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const limix::MissingArtifactError& e) {
    std::cerr << "missing artifact: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
