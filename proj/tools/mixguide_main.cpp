#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mixguide/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitOracleFailure = 2;
constexpr int kExitRuntimeFailure = 3;

mixguide::harness::ExperimentConfig load_config(const std::string& path,
                                                const std::string& out_override,
                                                bool seed_overridden,
                                                std::uint64_t seed_override) {
  auto config = mixguide::harness::ExperimentConfig::load(path);
  if (!out_override.empty()) config.out_dir = out_override;
  if (seed_overridden) config.seed = seed_override;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classifier-guided diffusion sampling lab on Gaussian mixtures"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_override;
  std::uint64_t seed_override = 0;
  app.add_option("--out", out_override, "Override the output directory");
  auto* seed_opt = app.add_option("--seed", seed_override, "Override the config seed");

  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "Run a sampling experiment from a config file");
  run_cmd->add_option("config", run_config, "Experiment config (JSON)")->required();

  std::uint64_t oracle_seed = 12345;
  int oracle_trials = 150;
  std::string oracle_json;
  auto* oracle_cmd = app.add_subcommand("oracles", "Run the oracle verification battery");
  oracle_cmd->add_option("--seed", oracle_seed, "Oracle seed");
  oracle_cmd->add_option("--trials", oracle_trials, "Trials per oracle");
  oracle_cmd->add_option("--json", oracle_json, "Write reports to this JSON file");

  std::string field_config;
  std::vector<double> grid_box;
  std::vector<int> grid_res{41, 41};
  int field_class = 0;
  std::string field_out = "field.csv";
  auto* field_cmd =
      app.add_subcommand("field", "Dump the guidance gradient field over a 2-D grid");
  field_cmd->add_option("config", field_config, "Experiment config (JSON)")->required();
  field_cmd->add_option("--grid", grid_box, "Bounding box: xmin xmax ymin ymax")
      ->expected(4)
      ->required();
  field_cmd->add_option("--res", grid_res, "Grid resolution: nx ny")->expected(2);
  field_cmd->add_option("--class", field_class, "Target class");
  field_cmd->add_option("--file", field_out, "Output CSV path");

  std::string cal_config;
  auto* cal_cmd = app.add_subcommand("calibrate", "Fine-tune the affine classifier");
  cal_cmd->add_option("config", cal_config, "Experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const auto config =
          load_config(run_config, out_override, !seed_opt->empty(), seed_override);
      const auto record = mixguide::harness::run(config);
      std::cout << "config_hash " << record.config_hash << "\n";
      std::cout << "rows " << record.results.size() << ", failed chains "
                << record.failed_chains << "/" << record.total_chains << ", wall "
                << record.wall_seconds << " s\n";
      if (record.failure_threshold_exceeded) {
        std::cerr << "error: failed-chain fraction exceeded max_failed_fraction\n";
        return kExitRuntimeFailure;
      }
      return kExitOk;
    }
    if (*oracle_cmd) {
      const bool ok =
          mixguide::harness::run_oracles(oracle_seed, oracle_trials, std::cout, oracle_json);
      return ok ? kExitOk : kExitOracleFailure;
    }
    if (*field_cmd) {
      const auto config =
          load_config(field_config, out_override, !seed_opt->empty(), seed_override);
      const auto gmm = mixguide::harness::load_mixture(config.mixture_file);
      const mixguide::AnalyticLogitModel model(gmm);
      mixguide::harness::FieldGrid grid;
      grid.x_min = grid_box[0];
      grid.x_max = grid_box[1];
      grid.y_min = grid_box[2];
      grid.y_max = grid_box[3];
      grid.nx = grid_res[0];
      grid.ny = grid_res[1];
      mixguide::harness::dump_gradient_field(model, config.guidance, grid, field_class,
                                             field_out);
      std::cout << "wrote " << field_out << "\n";
      return kExitOk;
    }
    if (*cal_cmd) {
      const auto config =
          load_config(cal_config, out_override, !seed_opt->empty(), seed_override);
      mixguide::harness::calibrate(config);
      std::cout << "wrote calibration outputs to " << config.out_dir << "\n";
      return kExitOk;
    }
  } catch (const mixguide::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntimeFailure;
  }
  return kExitOk;
}
