#include "mixguide/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

namespace mixguide::harness {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const nlohmann::json& require(const nlohmann::json& j, const std::string& key,
                              const std::string& path) {
  if (!j.contains(key)) fail(path + "." + key, "missing required field");
  return j.at(key);
}

double opt_number(const nlohmann::json& j, const std::string& key, double fallback,
                  const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_number()) fail(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

int opt_int(const nlohmann::json& j, const std::string& key, int fallback,
            const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_number_integer()) fail(path + "." + key, "expected an integer");
  return j.at(key).get<int>();
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path, "expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const size_t cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail(path, "ragged matrix rows");
    for (size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": invalid JSON (" + e.what() + ")");
  }
  return j;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return p;
  return (fs::path(base_dir) / path).string();
}

std::string chain_rule_name(ChainRule rule) {
  return rule == ChainRule::identity ? "identity" : "inv_sqrt_alphabar";
}

}  // namespace

GaussianMixture mixture_from_json(const nlohmann::json& j) {
  const Eigen::VectorXd weights = vector_from_json(require(j, "weights", "mixture"),
                                                   "mixture.weights");
  const auto& means_j = require(j, "means", "mixture");
  const auto& covs_j = require(j, "covariances", "mixture");
  if (!means_j.is_array() || !covs_j.is_array()) fail("mixture", "means/covariances must be arrays");
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
  for (size_t k = 0; k < means_j.size(); ++k)
    means.push_back(vector_from_json(means_j[k], "mixture.means"));
  for (size_t k = 0; k < covs_j.size(); ++k)
    covs.push_back(matrix_from_json(covs_j[k], "mixture.covariances"));
  try {
    return GaussianMixture(weights, std::move(means), std::move(covs));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("mixture: ") + e.what());
  }
}

GaussianMixture load_mixture(const std::string& path) {
  return mixture_from_json(load_json_file(path));
}

nlohmann::json mixture_to_json(const GaussianMixture& gmm) {
  nlohmann::json j;
  j["weights"] = vector_to_json(gmm.weights());
  j["means"] = nlohmann::json::array();
  j["covariances"] = nlohmann::json::array();
  for (int k = 0; k < gmm.num_components(); ++k) {
    j["means"].push_back(vector_to_json(gmm.mean(k)));
    j["covariances"].push_back(matrix_to_json(gmm.covariance(k)));
  }
  return j;
}

AffineLogitModel load_affine(const std::string& path) {
  const nlohmann::json j = load_json_file(path);
  const Eigen::MatrixXd w = matrix_from_json(require(j, "weight", "affine"), "affine.weight");
  const Eigen::VectorXd b = vector_from_json(require(j, "bias", "affine"), "affine.bias");
  try {
    return AffineLogitModel(w, b);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_affine(const AffineLogitModel& model, const std::string& path) {
  nlohmann::json j;
  j["weight"] = matrix_to_json(model.weight());
  j["bias"] = vector_to_json(model.bias());
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j,
                                             const std::string& base_dir) {
  ExperimentConfig cfg;
  const auto& mix = require(j, "mixture", "config");
  if (!mix.is_string()) fail("config.mixture", "expected a file path string");
  cfg.mixture_file = resolve(base_dir, mix.get<std::string>());
  if (!fs::exists(cfg.mixture_file))
    fail("config.mixture", "file does not exist: " + cfg.mixture_file);

  if (j.contains("classifier")) {
    const auto& c = j.at("classifier");
    const std::string type = require(c, "type", "config.classifier").get<std::string>();
    if (type == "analytic") {
      cfg.classifier.type = ClassifierConfig::Type::analytic;
    } else if (type == "affine") {
      cfg.classifier.type = ClassifierConfig::Type::affine;
      cfg.classifier.file =
          resolve(base_dir, require(c, "file", "config.classifier").get<std::string>());
      if (!fs::exists(cfg.classifier.file))
        fail("config.classifier.file", "file does not exist: " + cfg.classifier.file);
    } else if (type == "train") {
      cfg.classifier.type = ClassifierConfig::Type::train;
      auto& opts = cfg.classifier.train_opts;
      opts.epochs = opt_int(c, "epochs", opts.epochs, "config.classifier");
      opts.batch_size = opt_int(c, "batch_size", opts.batch_size, "config.classifier");
      opts.lambda = opt_number(c, "lambda", opts.lambda, "config.classifier");
      opts.beta = opt_number(c, "beta", opts.beta, "config.classifier");
      opts.lr = opt_number(c, "lr", opts.lr, "config.classifier");
      opts.seed = static_cast<std::uint64_t>(
          opt_int(c, "seed", static_cast<int>(opts.seed), "config.classifier"));
      cfg.classifier.train_samples =
          opt_int(c, "train_samples", cfg.classifier.train_samples, "config.classifier");
      cfg.classifier.holdout_samples =
          opt_int(c, "holdout_samples", cfg.classifier.holdout_samples, "config.classifier");
      cfg.classifier.temperature_scale = opt_number(
          c, "temperature_scale", cfg.classifier.temperature_scale, "config.classifier");
      if (cfg.classifier.train_samples < 1)
        fail("config.classifier.train_samples", "must be positive");
    } else {
      fail("config.classifier.type", "expected one of analytic|affine|train");
    }
  }

  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    cfg.schedule.steps = opt_int(s, "steps", cfg.schedule.steps, "config.schedule");
    cfg.schedule.beta_start =
        opt_number(s, "beta_start", cfg.schedule.beta_start, "config.schedule");
    cfg.schedule.beta_end = opt_number(s, "beta_end", cfg.schedule.beta_end, "config.schedule");
    if (cfg.schedule.steps < 1) fail("config.schedule.steps", "must be >= 1");
    if (!(cfg.schedule.beta_start > 0.0 && cfg.schedule.beta_start <= cfg.schedule.beta_end &&
          cfg.schedule.beta_end < 1.0))
      fail("config.schedule", "need 0 < beta_start <= beta_end < 1");
  }

  if (j.contains("guidance")) {
    const auto& g = j.at("guidance");
    if (g.contains("kinds")) {
      if (!g.at("kinds").is_array() || g.at("kinds").empty())
        fail("config.guidance.kinds", "expected a non-empty array");
      cfg.guidance.kinds.clear();
      for (const auto& k : g.at("kinds")) {
        try {
          cfg.guidance.kinds.push_back(guidance_kind_from_string(k.get<std::string>()));
        } catch (const std::invalid_argument& e) {
          fail("config.guidance.kinds", e.what());
        }
      }
    }
    cfg.guidance.tau1 = opt_number(g, "tau1", cfg.guidance.tau1, "config.guidance");
    cfg.guidance.tau2 = opt_number(g, "tau2", cfg.guidance.tau2, "config.guidance");
    cfg.guidance.alpha = opt_number(g, "alpha", cfg.guidance.alpha, "config.guidance");
    cfg.guidance.epsilon = opt_number(g, "epsilon", cfg.guidance.epsilon, "config.guidance");
    cfg.guidance.gamma = opt_number(g, "gamma", cfg.guidance.gamma, "config.guidance");
    cfg.guidance.lambda_max =
        opt_number(g, "lambda_max", cfg.guidance.lambda_max, "config.guidance");
    cfg.guidance.lambda_min =
        opt_number(g, "lambda_min", cfg.guidance.lambda_min, "config.guidance");
    if (g.contains("tilt") && !g.at("tilt").is_null()) {
      if (!g.at("tilt").is_number()) fail("config.guidance.tilt", "expected a number or null");
      cfg.guidance.tilt = g.at("tilt").get<double>();
    }
    if (g.contains("chain_rule")) {
      const std::string rule = g.at("chain_rule").get<std::string>();
      if (rule == "identity")
        cfg.guidance.chain_rule = ChainRule::identity;
      else if (rule == "inv_sqrt_alphabar")
        cfg.guidance.chain_rule = ChainRule::inv_sqrt_alphabar;
      else
        fail("config.guidance.chain_rule", "expected identity|inv_sqrt_alphabar");
    }
    if (!(cfg.guidance.tau1 > 0.0) || !(cfg.guidance.tau2 > 0.0))
      fail("config.guidance", "tau1 and tau2 must be positive");
    if (cfg.guidance.alpha < 0.0) fail("config.guidance.alpha", "must be nonnegative");
    if (!(cfg.guidance.epsilon >= 0.0 && cfg.guidance.epsilon <= 1.0))
      fail("config.guidance.epsilon", "must lie in [0, 1]");
    if (cfg.guidance.gamma < 0.0) fail("config.guidance.gamma", "must be nonnegative");
  }

  cfg.chains = opt_int(j, "chains", cfg.chains, "config");
  if (cfg.chains < 1) fail("config.chains", "must be >= 1");

  if (!j.contains("seed")) fail("config.seed", "missing required field");
  if (!j.at("seed").is_number_integer()) fail("config.seed", "expected an integer");
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.seed_set = true;

  if (j.contains("classes")) {
    if (!j.at("classes").is_array() || j.at("classes").empty())
      fail("config.classes", "expected a non-empty array of class indices");
    cfg.classes.clear();
    for (const auto& c : j.at("classes")) {
      if (!c.is_number_integer()) fail("config.classes", "expected integers");
      cfg.classes.push_back(c.get<int>());
    }
  }

  if (j.contains("out")) {
    if (!j.at("out").is_string()) fail("config.out", "expected a directory path string");
    cfg.out_dir = resolve(base_dir, j.at("out").get<std::string>());
  }

  if (j.contains("sweep") && !j.at("sweep").is_null()) {
    const auto& s = j.at("sweep");
    const auto read_axis = [&](const char* key) {
      std::vector<double> vals;
      if (!s.contains(key)) return vals;
      if (!s.at(key).is_array() || s.at(key).empty())
        fail(std::string("config.sweep.") + key, "sweep axes must be non-empty arrays");
      for (const auto& v : s.at(key)) vals.push_back(v.get<double>());
      return vals;
    };
    cfg.sweep.tilt = read_axis("tilt");
    cfg.sweep.alpha = read_axis("alpha");
    cfg.sweep.epsilon = read_axis("epsilon");
  }

  cfg.max_failed_fraction =
      opt_number(j, "max_failed_fraction", cfg.max_failed_fraction, "config");
  if (cfg.max_failed_fraction < 0.0 || cfg.max_failed_fraction > 1.0)
    fail("config.max_failed_fraction", "must lie in [0, 1]");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  const nlohmann::json j = load_json_file(path);
  return from_json(j, fs::path(path).parent_path().string());
}

nlohmann::json ExperimentConfig::canonical_json() const {
  nlohmann::json j;
  j["mixture"] = mixture_file;
  nlohmann::json c;
  switch (classifier.type) {
    case ClassifierConfig::Type::analytic:
      c["type"] = "analytic";
      break;
    case ClassifierConfig::Type::affine:
      c["type"] = "affine";
      c["file"] = classifier.file;
      break;
    case ClassifierConfig::Type::train:
      c["type"] = "train";
      c["epochs"] = classifier.train_opts.epochs;
      c["batch_size"] = classifier.train_opts.batch_size;
      c["lambda"] = classifier.train_opts.lambda;
      c["beta"] = classifier.train_opts.beta;
      c["lr"] = classifier.train_opts.lr;
      c["seed"] = classifier.train_opts.seed;
      c["train_samples"] = classifier.train_samples;
      c["holdout_samples"] = classifier.holdout_samples;
      c["temperature_scale"] = classifier.temperature_scale;
      break;
  }
  j["classifier"] = c;
  j["schedule"] = {{"steps", schedule.steps},
                   {"beta_start", schedule.beta_start},
                   {"beta_end", schedule.beta_end}};
  nlohmann::json kinds = nlohmann::json::array();
  for (const auto k : guidance.kinds) kinds.push_back(to_string(k));
  j["guidance"] = {{"kinds", kinds},
                   {"tau1", guidance.tau1},
                   {"tau2", guidance.tau2},
                   {"alpha", guidance.alpha},
                   {"epsilon", guidance.epsilon},
                   {"gamma", guidance.gamma},
                   {"lambda_max", guidance.lambda_max},
                   {"lambda_min", guidance.lambda_min},
                   {"chain_rule", chain_rule_name(guidance.chain_rule)}};
  if (guidance.tilt.has_value())
    j["guidance"]["tilt"] = *guidance.tilt;
  else
    j["guidance"]["tilt"] = nullptr;
  // The output directory is deliberately not part of the canonical form:
  // the hash identifies the experiment, not where its files land.
  j["chains"] = chains;
  j["seed"] = seed;
  j["classes"] = classes;
  nlohmann::json sweep_j;
  if (!sweep.tilt.empty()) sweep_j["tilt"] = sweep.tilt;
  if (!sweep.alpha.empty()) sweep_j["alpha"] = sweep.alpha;
  if (!sweep.epsilon.empty()) sweep_j["epsilon"] = sweep.epsilon;
  j["sweep"] = sweep_j;
  j["max_failed_fraction"] = max_failed_fraction;
  return j;
}

std::string ExperimentConfig::config_hash() const {
  std::ostringstream os;
  os << std::hex << fnv1a64(canonical_json().dump());
  return os.str();
}

namespace {

struct SweepPoint {
  std::string axis = "none";
  double value = 0.0;
};

std::vector<SweepPoint> sweep_points(const SweepConfig& sweep) {
  std::vector<SweepPoint> pts;
  for (const double v : sweep.tilt) pts.push_back({"tilt", v});
  for (const double v : sweep.alpha) pts.push_back({"alpha", v});
  for (const double v : sweep.epsilon) pts.push_back({"epsilon", v});
  if (pts.empty()) pts.push_back({});
  return pts;
}

GuidanceSpec make_spec(const GuidanceConfig& g, GuidanceKind kind, const SweepPoint& pt,
                       int steps) {
  GuidanceSpec spec;
  spec.kind = kind;
  spec.tau1 = g.tau1;
  spec.tau2 = g.tau2;
  spec.alpha_weight = g.alpha;
  spec.epsilon = g.epsilon;
  spec.tilt = g.tilt;
  spec.chain_rule = g.chain_rule;
  spec.lambda_schedule = linear_lambda_schedule(steps, g.lambda_max, g.lambda_min);
  spec.gamma_schedule = constant_gamma(g.gamma);
  if (pt.axis == "tilt") {
    spec.tilt = pt.value;
  } else if (pt.axis == "alpha") {
    spec.alpha_weight = pt.value;
  } else if (pt.axis == "epsilon") {
    spec.epsilon = pt.value;
  }
  return spec;
}

std::unique_ptr<LogitModel> build_classifier(const ExperimentConfig& cfg,
                                             const GaussianMixture& gmm) {
  switch (cfg.classifier.type) {
    case ClassifierConfig::Type::analytic:
      return std::make_unique<AnalyticLogitModel>(gmm);
    case ClassifierConfig::Type::affine:
      return std::make_unique<AffineLogitModel>(load_affine(cfg.classifier.file));
    case ClassifierConfig::Type::train: {
      const auto data = gmm.sample(cfg.classifier.train_samples, cfg.classifier.train_opts.seed);
      std::vector<Point> points;
      std::vector<int> labels;
      points.reserve(data.size());
      for (const auto& [x, k] : data) {
        points.push_back(x);
        labels.push_back(k);
      }
      const AffineLogitModel init(Eigen::MatrixXd::Zero(gmm.num_components(), gmm.dim()),
                                  Eigen::VectorXd::Zero(gmm.num_components()));
      AffineLogitModel trained =
          finetune_ece(init, points, labels, cfg.classifier.train_opts);
      if (cfg.classifier.temperature_scale != 1.0)
        trained = trained.scaled(cfg.classifier.temperature_scale);
      return std::make_unique<AffineLogitModel>(std::move(trained));
    }
  }
  throw ConfigError("config.classifier: unknown type");
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  out << "kind,sweep_axis,sweep_value,target_class,frechet,precision,recall,"
         "mean_final_confidence,failed_chains\n";
  for (const auto& r : rows) {
    out << r.kind << ',' << r.sweep_axis << ','
        << (r.sweep_axis == "none" ? std::string() : format_double(r.sweep_value)) << ','
        << r.target_class << ',' << format_double(r.frechet) << ','
        << format_double(r.precision) << ',' << format_double(r.recall) << ','
        << format_double(r.mean_final_confidence) << ',' << r.failed_chains << '\n';
  }
}

void write_trajectories_csv(const std::string& path, const std::vector<TrajectoryRow>& rows) {
  std::ofstream out(path);
  out << "kind,sweep_axis,sweep_value,target_class,step,mean_max_confidence,mean_entropy,"
         "top_quartile_confidence,mean_grad_norm\n";
  for (const auto& r : rows) {
    out << r.kind << ',' << r.sweep_axis << ','
        << (r.sweep_axis == "none" ? std::string() : format_double(r.sweep_value)) << ','
        << r.target_class << ',' << r.step << ','
        << format_double(r.aggregate.mean_max_confidence) << ','
        << format_double(r.aggregate.mean_entropy) << ','
        << format_double(r.aggregate.top_quartile_confidence) << ','
        << format_double(r.aggregate.mean_grad_norm) << '\n';
  }
}

}  // namespace

RunRecord run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.out_dir.empty()) throw ConfigError("config.out: output directory required");
  const GaussianMixture gmm = load_mixture(config.mixture_file);
  const auto model = build_classifier(config, gmm);
  for (const int y : config.classes)
    if (y < 0 || y >= model->num_classes())
      throw ConfigError("config.classes: class index out of range");
  const NoiseSchedule schedule = build_schedule(
      config.schedule.steps, config.schedule.beta_start, config.schedule.beta_end);

  RunRecord record;
  record.config_hash = config.config_hash();

  const metrics::GaussianSummary reference = metrics::mixture_summary(gmm);
  for (const auto kind : config.guidance.kinds) {
    for (const auto& pt : sweep_points(config.sweep)) {
      const GuidanceSpec spec = make_spec(config.guidance, kind, pt, schedule.steps);
      for (const int y : config.classes) {
        const SampleBatch batch =
            sample_guided(gmm, *model, spec, schedule, y, config.chains, config.seed);
        const auto finals = batch.final_points();
        const auto stats = metrics::trajectory_stats(batch);
        const auto pr = metrics::mode_precision_recall(finals, gmm, 3.0);

        ResultRow row;
        row.kind = to_string(kind);
        row.sweep_axis = pt.axis;
        row.sweep_value = pt.value;
        row.target_class = y;
        row.frechet = metrics::frechet_gaussian(metrics::summarize(finals), reference);
        row.precision = pr.precision;
        row.recall = pr.recall;
        row.mean_final_confidence = stats.back().mean_max_confidence;
        row.failed_chains = batch.num_failed();
        record.results.push_back(row);

        for (size_t s = 0; s < stats.size(); ++s) {
          TrajectoryRow tr;
          tr.kind = row.kind;
          tr.sweep_axis = row.sweep_axis;
          tr.sweep_value = row.sweep_value;
          tr.target_class = y;
          tr.step = static_cast<int>(s);
          tr.aggregate = stats[s];
          record.trajectories.push_back(tr);
        }

        record.total_chains += config.chains;
        record.failed_chains += batch.num_failed();
        const double frac = static_cast<double>(batch.num_failed()) / config.chains;
        if (frac > config.max_failed_fraction) record.failure_threshold_exceeded = true;
      }
    }
  }

  // Cheap oracle smoke so every run record carries a correctness signal.
  for (const auto& rep : oracles::run_all(config.seed, 5))
    record.oracle_smoke_pass = record.oracle_smoke_pass && rep.pass;

  fs::create_directories(config.out_dir);
  write_results_csv((fs::path(config.out_dir) / "results.csv").string(), record.results);
  write_trajectories_csv((fs::path(config.out_dir) / "trajectories.csv").string(),
                         record.trajectories);
  {
    std::ofstream out(fs::path(config.out_dir) / "config.json");
    out << config.canonical_json().dump(2) << "\n";
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  {
    nlohmann::json j{{"config_hash", record.config_hash},
                     {"rows", record.results.size()},
                     {"total_chains", record.total_chains},
                     {"failed_chains", record.failed_chains},
                     {"oracle_smoke_pass", record.oracle_smoke_pass},
                     {"failure_threshold_exceeded", record.failure_threshold_exceeded},
                     {"wall_seconds", record.wall_seconds}};
    std::ofstream out(fs::path(config.out_dir) / "run_record.json");
    out << j.dump(2) << "\n";
  }
  return record;
}

void dump_gradient_field(const LogitModel& model, const GuidanceConfig& guidance,
                         const FieldGrid& grid, int target_class, const std::string& path) {
  if (model.dim() != 2)
    throw std::invalid_argument("gradient field dumps require a 2-D setting");
  if (grid.nx < 1 || grid.ny < 1)
    throw std::invalid_argument("gradient field grid must have positive resolution");
  const GuidanceKind kind = guidance.kinds.empty() ? GuidanceKind::none : guidance.kinds[0];
  const TargetDistribution target =
      TargetDistribution::smoothed(model.num_classes(), target_class, guidance.epsilon);

  std::ofstream out(path);
  out << "x1,x2,g1,g2";
  for (int k = 0; k < model.num_classes(); ++k) out << ",w" << k;
  out << "\n";
  Point x(2);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      x[0] = grid.nx == 1 ? grid.x_min
                          : grid.x_min + (grid.x_max - grid.x_min) * ix / (grid.nx - 1);
      x[1] = grid.ny == 1 ? grid.y_min
                          : grid.y_min + (grid.y_max - grid.y_min) * iy / (grid.ny - 1);
      const GuidanceGradient g =
          guidance_grad(model, x, target_class, kind, guidance.tau1, guidance.tau2,
                        guidance.alpha, guidance.lambda_max, target);
      out << format_double(x[0]) << ',' << format_double(x[1]) << ','
          << format_double(g.value[0]) << ',' << format_double(g.value[1]);
      for (int k = 0; k < g.class_weights.size(); ++k)
        out << ',' << format_double(g.class_weights[k]);
      out << "\n";
    }
  }
}

RunRecord calibrate(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.classifier.type != ClassifierConfig::Type::train)
    throw ConfigError("config.classifier.type: calibrate requires type \"train\"");
  if (config.out_dir.empty()) throw ConfigError("config.out: output directory required");
  const GaussianMixture gmm = load_mixture(config.mixture_file);

  const auto split = [&](int n, std::uint64_t seed) {
    const auto data = gmm.sample(n, seed);
    std::pair<std::vector<Point>, std::vector<int>> out;
    for (const auto& [x, k] : data) {
      out.first.push_back(x);
      out.second.push_back(k);
    }
    return out;
  };
  const auto [train_x, train_y] = split(config.classifier.train_samples, config.seed);
  const auto [hold_x, hold_y] =
      split(config.classifier.holdout_samples, splitmix64(config.seed + 1));

  AffineLogitModel model(Eigen::MatrixXd::Zero(gmm.num_components(), gmm.dim()),
                         Eigen::VectorXd::Zero(gmm.num_components()));
  if (config.classifier.temperature_scale != 1.0)
    model = model.scaled(config.classifier.temperature_scale);
  const AffineLogitModel tuned =
      finetune_ece(model, train_x, train_y, config.classifier.train_opts);

  fs::create_directories(config.out_dir);
  save_affine(tuned, (fs::path(config.out_dir) / "affine_model.json").string());

  std::ofstream out(fs::path(config.out_dir) / "calibration.csv");
  out << "split,accuracy,binned_ece,smooth_ece\n";
  const int bins = 15;
  const auto emit = [&](const char* split_name, const std::vector<Point>& xs,
                        const std::vector<int>& ys) {
    const CalibrationBatch batch = make_calibration_batch(tuned, xs, ys);
    out << split_name << ',' << format_double(accuracy(batch)) << ','
        << format_double(binned_ece(batch, bins)) << ','
        << format_double(smooth_ece_loss(batch, config.classifier.train_opts.beta, bins))
        << "\n";
  };
  emit("train", train_x, train_y);
  emit("holdout", hold_x, hold_y);

  RunRecord record;
  record.config_hash = config.config_hash();
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

bool run_oracles(std::uint64_t seed, int trials, std::ostream& out,
                 const std::string& json_path) {
  const auto reports = oracles::run_all(seed, trials);
  bool all_pass = true;
  for (const auto& r : reports) {
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  max_rel=" << r.max_rel_error
        << " max_abs=" << r.max_abs_error << " tol=" << r.tolerance
        << " trials=" << r.trials;
    if (!r.note.empty()) out << "  (" << r.note << ")";
    if (!r.pass) out << "  worst: " << r.worst_case;
    out << "\n";
    all_pass = all_pass && r.pass;
  }
  if (!json_path.empty()) {
    std::ofstream jout(json_path);
    jout << "[\n";
    for (size_t i = 0; i < reports.size(); ++i)
      jout << "  " << reports[i].to_json() << (i + 1 < reports.size() ? ",\n" : "\n");
    jout << "]\n";
  }
  return all_pass;
}

}  // namespace mixguide::harness
