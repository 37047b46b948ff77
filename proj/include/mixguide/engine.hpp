#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mixguide/guidance.hpp"
#include "mixguide/logit_model.hpp"
#include "mixguide/mixture.hpp"
#include "mixguide/rng.hpp"
#include "mixguide/schedule.hpp"

namespace mixguide {

/// How the guidance gradient computed at the predicted clean sample is mapped
/// back to the noisy state: used directly (the common practice), or scaled by
/// the dominant Jacobian factor 1/sqrt(alpha_bar_t).
enum class ChainRule { identity, inv_sqrt_alphabar };

/// Per-step trajectory record of one chain.
struct StepRecord {
  double max_confidence = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;
};

struct ChainState {
  Point x;
  int t = 0;  // remaining reverse steps; 0 means finished
  int label = 0;
  std::vector<StepRecord> trajectory;
  bool failed = false;
};

/// Guidance configuration for a sampling run. Schedules map the step index
/// t in [1, T] (T = early, 1 = final denoising step) to lambda_t / gamma_t;
/// unset schedules default to a linear 0.2 -> 0.05 entropy weight decay and
/// a constant gamma of 1.
struct GuidanceSpec {
  GuidanceKind kind = GuidanceKind::none;
  std::optional<double> tilt;
  double tau1 = 1.0;
  double tau2 = 1.0;
  double alpha_weight = 0.1;
  double epsilon = 0.1;
  std::function<double(int)> lambda_schedule;
  std::function<double(int)> gamma_schedule;
  ChainRule chain_rule = ChainRule::identity;

  void validate() const;
};

/// lambda_t decaying linearly from lambda_max at t = T to lambda_min at t = 1.
std::function<double(int)> linear_lambda_schedule(int steps, double lambda_max = 0.2,
                                                  double lambda_min = 0.05);
std::function<double(int)> constant_gamma(double gamma = 1.0);

/// x0_hat = (x_t - sqrt(1 - alpha_bar) * eps) / sqrt(alpha_bar).
Point predict_x0(const Point& x_t, const Eigen::VectorXd& eps, double alpha_bar_t);

/// Noise prediction of the analytic denoiser: eps = -sqrt(1 - alpha_bar) * score.
Eigen::VectorXd eps_from_score(const Eigen::VectorXd& score_t, double alpha_bar_t);

/// Posterior mean of the reverse step parameterized by the clean prediction:
/// mu = (sqrt(alpha_bar_prev) beta_t / (1 - alpha_bar_t)) x0_hat
///    + (sqrt(alpha_t) (1 - alpha_bar_prev) / (1 - alpha_bar_t)) x_t.
Point reverse_posterior_mean(const Point& x_t, const Point& x0_hat,
                             const NoiseSchedule& schedule, int t);

/// One guided reverse step: draws x_{t-1} from
/// N(mu + gamma_t * posterior_var_t * g, posterior_var_t * I), decrements t
/// and appends the trajectory record. Requires state.t >= 1.
void reverse_step(ChainState& state, const NoiseSchedule& schedule, const Point& mu,
                  const Eigen::VectorXd& guidance_grad, double gamma_t, Rng& rng,
                  const StepRecord& record);

struct SampleBatch {
  std::vector<ChainState> chains;
  int steps = 0;
  int target_class = 0;

  int num_failed() const;
  std::vector<Point> final_points() const;  // successful chains only
};

/// Guided reverse diffusion over n_chains chains with per-chain seeded
/// streams. Each step predicts the clean sample from the analytic score of
/// the diffused mixture, evaluates the guidance gradient there (exactly once
/// per chain), optionally reweights gradients across the batch when tilt is
/// set, and applies the shifted-mean Gaussian step. Chains that turn
/// non-finite are marked failed and stop stepping.
SampleBatch sample_guided(const GaussianMixture& gmm, const LogitModel& model,
                          const GuidanceSpec& spec, const NoiseSchedule& schedule, int y,
                          int n_chains, std::uint64_t seed);

}  // namespace mixguide
