#include "mixguide/engine.hpp"

#include <cmath>
#include <stdexcept>

#include "mixguide/numerics.hpp"

namespace mixguide {

void GuidanceSpec::validate() const {
  if (!(tau1 > 0.0) || !(tau2 > 0.0))
    throw std::invalid_argument("guidance spec: tau1 and tau2 must be positive");
  if (alpha_weight < 0.0)
    throw std::invalid_argument("guidance spec: alpha_weight must be nonnegative");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("guidance spec: epsilon must lie in [0, 1]");
}

std::function<double(int)> linear_lambda_schedule(int steps, double lambda_max,
                                                  double lambda_min) {
  if (steps < 1) throw std::invalid_argument("lambda schedule: steps must be >= 1");
  return [steps, lambda_max, lambda_min](int t) {
    if (steps == 1) return lambda_max;
    const double frac = static_cast<double>(t - 1) / (steps - 1);  // 1 at t = T
    return lambda_min + (lambda_max - lambda_min) * frac;
  };
}

std::function<double(int)> constant_gamma(double gamma) {
  return [gamma](int) { return gamma; };
}

Point predict_x0(const Point& x_t, const Eigen::VectorXd& eps, double alpha_bar_t) {
  if (!(alpha_bar_t > 0.0 && alpha_bar_t <= 1.0))
    throw std::invalid_argument("predict_x0: alpha_bar must lie in (0, 1]");
  if (x_t.size() != eps.size()) throw std::invalid_argument("predict_x0: size mismatch");
  return (x_t - std::sqrt(1.0 - alpha_bar_t) * eps) / std::sqrt(alpha_bar_t);
}

Eigen::VectorXd eps_from_score(const Eigen::VectorXd& score_t, double alpha_bar_t) {
  if (!(alpha_bar_t >= 0.0 && alpha_bar_t <= 1.0))
    throw std::invalid_argument("eps_from_score: alpha_bar must lie in [0, 1]");
  return -std::sqrt(1.0 - alpha_bar_t) * score_t;
}

Point reverse_posterior_mean(const Point& x_t, const Point& x0_hat,
                             const NoiseSchedule& schedule, int t) {
  if (t < 1 || t > schedule.steps)
    throw std::invalid_argument("reverse_posterior_mean: step out of range");
  const int i = t - 1;
  const double abar = schedule.alpha_bar[i];
  const double abar_prev = i > 0 ? schedule.alpha_bar[i - 1] : 1.0;
  const double c0 = std::sqrt(abar_prev) * schedule.beta[i] / (1.0 - abar);
  const double ct = std::sqrt(schedule.alpha[i]) * (1.0 - abar_prev) / (1.0 - abar);
  return c0 * x0_hat + ct * x_t;
}

void reverse_step(ChainState& state, const NoiseSchedule& schedule, const Point& mu,
                  const Eigen::VectorXd& guidance_grad, double gamma_t, Rng& rng,
                  const StepRecord& record) {
  if (state.t < 1) throw std::invalid_argument("reverse_step: chain already finished");
  if (state.t > schedule.steps)
    throw std::invalid_argument("reverse_step: step exceeds schedule");
  if (mu.size() != state.x.size() || guidance_grad.size() != state.x.size())
    throw std::invalid_argument("reverse_step: dimension mismatch");
  const double var = schedule.posterior_var[state.t - 1];
  Point next = mu + (gamma_t * var) * guidance_grad;
  if (var > 0.0) {
    const double sd = std::sqrt(var);
    for (int j = 0; j < next.size(); ++j) next[j] += sd * rng.normal();
  }
  state.x = std::move(next);
  state.t -= 1;
  state.trajectory.push_back(record);
}

int SampleBatch::num_failed() const {
  int n = 0;
  for (const auto& c : chains) n += c.failed ? 1 : 0;
  return n;
}

std::vector<Point> SampleBatch::final_points() const {
  std::vector<Point> pts;
  pts.reserve(chains.size());
  for (const auto& c : chains)
    if (!c.failed) pts.push_back(c.x);
  return pts;
}

SampleBatch sample_guided(const GaussianMixture& gmm, const LogitModel& model,
                          const GuidanceSpec& spec, const NoiseSchedule& schedule, int y,
                          int n_chains, std::uint64_t seed) {
  spec.validate();
  if (model.dim() != gmm.dim())
    throw std::invalid_argument("sample_guided: model/mixture dimension mismatch");
  if (y < 0 || y >= model.num_classes())
    throw std::invalid_argument("sample_guided: target class out of range");
  if (n_chains < 1) throw std::invalid_argument("sample_guided: need at least one chain");

  const int T = schedule.steps;
  const int d = gmm.dim();
  const auto lambda_fn =
      spec.lambda_schedule ? spec.lambda_schedule : linear_lambda_schedule(T);
  const auto gamma_fn = spec.gamma_schedule ? spec.gamma_schedule : constant_gamma(1.0);
  const TargetDistribution target =
      TargetDistribution::smoothed(model.num_classes(), y, spec.epsilon);

  SampleBatch batch;
  batch.steps = T;
  batch.target_class = y;
  batch.chains.resize(static_cast<size_t>(n_chains));

  std::vector<Rng> rngs;
  rngs.reserve(static_cast<size_t>(n_chains));
  for (int i = 0; i < n_chains; ++i) {
    rngs.push_back(Rng::stream(seed, static_cast<std::uint64_t>(i)));
    auto& chain = batch.chains[static_cast<size_t>(i)];
    chain.t = T;
    chain.label = y;
    chain.trajectory.reserve(static_cast<size_t>(T));
    chain.x.resize(d);
    for (int j = 0; j < d; ++j) chain.x[j] = rngs.back().normal();
  }

  std::vector<Eigen::VectorXd> grads(static_cast<size_t>(n_chains));
  std::vector<Point> mus(static_cast<size_t>(n_chains));
  std::vector<StepRecord> records(static_cast<size_t>(n_chains));
  std::vector<double> log_probs(static_cast<size_t>(n_chains));

  for (int t = T; t >= 1; --t) {
    const double abar = schedule.alpha_bar[t - 1];
    const GaussianMixture diffused = gmm.diffuse(abar);
    const double gamma_t = gamma_fn(t);
    const double lambda_t = lambda_fn(t);
    if (gamma_t < 0.0)
      throw std::invalid_argument("sample_guided: gamma schedule must be nonnegative");
    const double inv_root = 1.0 / std::sqrt(abar);

    std::vector<int> live;
    live.reserve(static_cast<size_t>(n_chains));
    for (int i = 0; i < n_chains; ++i) {
      auto& chain = batch.chains[static_cast<size_t>(i)];
      if (chain.failed) continue;
      const auto idx = static_cast<size_t>(i);
      const Eigen::VectorXd score = diffused.score(chain.x);
      const Eigen::VectorXd eps = eps_from_score(score, abar);
      const Point x0_hat = predict_x0(chain.x, eps, abar);
      mus[idx] = reverse_posterior_mean(chain.x, x0_hat, schedule, t);

      GuidanceGradient g = guidance_grad(model, x0_hat, y, spec.kind, spec.tau1, spec.tau2,
                                         spec.alpha_weight, lambda_t, target);
      if (spec.chain_rule == ChainRule::inv_sqrt_alphabar) g.value *= inv_root;

      const Eigen::VectorXd p = softmax(g.logits);
      records[idx] = {p.maxCoeff(), entropy(p), g.value.norm()};
      log_probs[idx] = log_prob_tau(g.logits, y, spec.tau1, spec.tau2);

      if (!g.value.allFinite() || !mus[idx].allFinite()) {
        chain.failed = true;
        continue;
      }
      grads[idx] = std::move(g.value);
      live.push_back(i);
    }

    if (spec.tilt.has_value() && !live.empty()) {
      Eigen::VectorXd lp(static_cast<Eigen::Index>(live.size()));
      for (size_t j = 0; j < live.size(); ++j)
        lp[static_cast<Eigen::Index>(j)] = log_probs[static_cast<size_t>(live[j])];
      const Eigen::VectorXd scale = tilted_scale_factors(lp, *spec.tilt);
      for (size_t j = 0; j < live.size(); ++j)
        grads[static_cast<size_t>(live[j])] *= scale[static_cast<Eigen::Index>(j)];
    }

    for (const int i : live) {
      const auto idx = static_cast<size_t>(i);
      auto& chain = batch.chains[idx];
      reverse_step(chain, schedule, mus[idx], grads[idx], gamma_t, rngs[idx], records[idx]);
      if (!chain.x.allFinite()) chain.failed = true;
    }
  }
  return batch;
}

}  // namespace mixguide
