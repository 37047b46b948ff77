#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixguide/calibration.hpp"
#include "mixguide/engine.hpp"
#include "mixguide/metrics.hpp"
#include "mixguide/mixture.hpp"
#include "mixguide/oracles.hpp"

namespace mixguide::harness {

/// Thrown on malformed configuration; the message carries the field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

GaussianMixture load_mixture(const std::string& path);
GaussianMixture mixture_from_json(const nlohmann::json& j);
nlohmann::json mixture_to_json(const GaussianMixture& gmm);

AffineLogitModel load_affine(const std::string& path);
void save_affine(const AffineLogitModel& model, const std::string& path);

struct ScheduleConfig {
  int steps = 100;
  double beta_start = 1e-3;
  double beta_end = 0.2;
};

struct ClassifierConfig {
  enum class Type { analytic, affine, train };
  Type type = Type::analytic;
  std::string file;  // affine
  // train
  FinetuneOptions train_opts;
  int train_samples = 2000;
  int holdout_samples = 500;
  double temperature_scale = 1.0;
};

struct GuidanceConfig {
  std::vector<GuidanceKind> kinds{GuidanceKind::none};
  double tau1 = 1.0;
  double tau2 = 1.0;
  double alpha = 0.1;
  double epsilon = 0.1;
  double gamma = 1.0;
  double lambda_max = 0.2;
  double lambda_min = 0.05;
  std::optional<double> tilt;
  ChainRule chain_rule = ChainRule::identity;
};

/// One-at-a-time sweep axes applied on top of the base guidance config.
struct SweepConfig {
  std::vector<double> tilt;
  std::vector<double> alpha;
  std::vector<double> epsilon;

  bool empty() const { return tilt.empty() && alpha.empty() && epsilon.empty(); }
};

struct ExperimentConfig {
  std::string mixture_file;
  ClassifierConfig classifier;
  ScheduleConfig schedule;
  GuidanceConfig guidance;
  int chains = 1000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<int> classes{0};
  std::string out_dir;
  SweepConfig sweep;
  double max_failed_fraction = 0.0;

  /// Parses and validates; `base_dir` resolves relative file paths.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::string& base_dir);
  static ExperimentConfig load(const std::string& path);

  nlohmann::json canonical_json() const;
  std::string config_hash() const;  // fnv1a-64 of the canonical dump, hex
};

struct ResultRow {
  std::string kind;
  std::string sweep_axis;  // "none", "tilt", "alpha" or "epsilon"
  double sweep_value = 0.0;
  int target_class = 0;
  double frechet = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double mean_final_confidence = 0.0;
  int failed_chains = 0;
};

struct TrajectoryRow {
  std::string kind;
  std::string sweep_axis;
  double sweep_value = 0.0;
  int target_class = 0;
  int step = 0;  // 0-based position in the denoising trajectory
  metrics::StepAggregate aggregate;
};

struct RunRecord {
  std::string config_hash;
  std::vector<ResultRow> results;
  std::vector<TrajectoryRow> trajectories;
  int total_chains = 0;
  int failed_chains = 0;
  bool oracle_smoke_pass = true;
  bool failure_threshold_exceeded = false;
  double wall_seconds = 0.0;
};

/// Runs every (kind, sweep point, class) cell at the config seed and emits
/// results.csv, trajectories.csv, config.json and run_record.json into the
/// output directory. Outputs are byte-identical for identical config + seed.
RunRecord run(const ExperimentConfig& config);

struct FieldGrid {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  int nx = 1, ny = 1;
};

/// CSV of (x1, x2, g1, g2, per-class weights) for the first configured
/// guidance kind over a 2-D grid.
void dump_gradient_field(const LogitModel& model, const GuidanceConfig& guidance,
                         const FieldGrid& grid, int target_class, const std::string& path);

/// Fine-tuning entry: trains (or loads) the affine classifier per config,
/// reports accuracy/ECE on train and holdout splits, and writes the model
/// plus calibration.csv into the output directory.
RunRecord calibrate(const ExperimentConfig& config);

/// Runs the oracle battery, printing one line per report; returns true when
/// every report passed. Optionally writes the reports as JSON.
bool run_oracles(std::uint64_t seed, int trials, std::ostream& out,
                 const std::string& json_path = "");

}  // namespace mixguide::harness
