#include "mixguide/guidance.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "mixguide/numerics.hpp"

namespace mixguide {

namespace {

void check_class(int y, int num_classes) {
  if (y < 0 || y >= num_classes) throw std::invalid_argument("class index out of range");
}

void check_taus(double tau1, double tau2) {
  if (!(tau1 > 0.0) || !(tau2 > 0.0))
    throw std::invalid_argument("temperatures tau1, tau2 must be positive");
}

// g_i = grad f_i - sum_j p_j grad f_j, stacked as rows.
Eigen::MatrixXd centered_grads(const Eigen::MatrixXd& grads, const Eigen::VectorXd& p) {
  return grads.rowwise() - (p.transpose() * grads).eval();
}

}  // namespace

std::string to_string(GuidanceKind kind) {
  switch (kind) {
    case GuidanceKind::none: return "none";
    case GuidanceKind::entropy: return "entropy";
    case GuidanceKind::rkl: return "rkl";
    case GuidanceKind::fkl: return "fkl";
    case GuidanceKind::js: return "js";
    case GuidanceKind::hellinger: return "hellinger";
  }
  return "none";
}

GuidanceKind guidance_kind_from_string(const std::string& name) {
  if (name == "none") return GuidanceKind::none;
  if (name == "entropy") return GuidanceKind::entropy;
  if (name == "rkl") return GuidanceKind::rkl;
  if (name == "fkl") return GuidanceKind::fkl;
  if (name == "js") return GuidanceKind::js;
  if (name == "hellinger") return GuidanceKind::hellinger;
  throw std::invalid_argument("unknown guidance kind: " + name);
}

bool has_divergence(GuidanceKind kind) {
  return kind == GuidanceKind::rkl || kind == GuidanceKind::fkl ||
         kind == GuidanceKind::js || kind == GuidanceKind::hellinger;
}

DivergenceKind divergence_of(GuidanceKind kind) {
  switch (kind) {
    case GuidanceKind::rkl: return DivergenceKind::rkl;
    case GuidanceKind::fkl: return DivergenceKind::fkl;
    case GuidanceKind::js: return DivergenceKind::js;
    case GuidanceKind::hellinger: return DivergenceKind::hellinger;
    default: throw std::invalid_argument("guidance kind has no divergence");
  }
}

double generator_f(DivergenceKind kind, double t) {
  if (t < 0.0) throw std::invalid_argument("generator_f: t must be >= 0");
  switch (kind) {
    case DivergenceKind::rkl:
      return t == 0.0 ? std::numeric_limits<double>::infinity() : -std::log(t);
    case DivergenceKind::fkl:
      return t == 0.0 ? 0.0 : t * std::log(t);
    case DivergenceKind::js: {
      const double tlogt = t == 0.0 ? 0.0 : t * std::log(t);
      return 0.5 * (tlogt - (t + 1.0) * std::log(0.5 * (t + 1.0)));
    }
    case DivergenceKind::hellinger: {
      const double r = std::sqrt(t) - 1.0;
      return r * r;
    }
  }
  return 0.0;
}

double generator_fprime(DivergenceKind kind, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("generator_fprime: t must be > 0");
  switch (kind) {
    case DivergenceKind::rkl: return -1.0 / t;
    case DivergenceKind::fkl: return std::log(t) + 1.0;
    case DivergenceKind::js: return 0.5 * std::log(2.0 * t / (t + 1.0));
    case DivergenceKind::hellinger: return 1.0 - 1.0 / std::sqrt(t);
  }
  return 0.0;
}

TargetDistribution TargetDistribution::smoothed(int num_classes, int y, double epsilon) {
  if (num_classes < 1) throw std::invalid_argument("target: need at least one class");
  check_class(y, num_classes);
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("target: epsilon must lie in [0, 1]");
  TargetDistribution td;
  td.target_class = y;
  td.epsilon = epsilon;
  td.q = Eigen::VectorXd::Constant(num_classes, (1.0 - epsilon) / num_classes);
  td.q[y] += epsilon;
  td.q /= td.q.sum();
  return td;
}

double log_prob_tau(const Eigen::VectorXd& logits, int y, double tau1, double tau2) {
  check_class(y, static_cast<int>(logits.size()));
  check_taus(tau1, tau2);
  return tau1 * logits[y] - logsumexp(tau2 * logits);
}

GuidanceGradient base_guidance_grad(const LogitModel& model, const Point& x, int y,
                                    double tau1, double tau2) {
  check_class(y, model.num_classes());
  check_taus(tau1, tau2);
  GuidanceGradient out;
  out.logits = model.logits(x);
  const Eigen::MatrixXd grads = model.logit_grads(x);
  const Eigen::VectorXd p_tau2 = softmax(tau2 * out.logits);
  out.value = tau1 * grads.row(y).transpose() - tau2 * (grads.transpose() * p_tau2);
  out.class_weights = p_tau2;
  return out;
}

GuidanceGradient entropy_guidance_grad(const LogitModel& model, const Point& x, int y,
                                       double tau1, double tau2, double lambda_t) {
  if (lambda_t < 0.0) throw std::invalid_argument("entropy guidance: lambda_t must be >= 0");
  check_class(y, model.num_classes());
  check_taus(tau1, tau2);
  GuidanceGradient out;
  out.logits = model.logits(x);
  const Eigen::MatrixXd grads = model.logit_grads(x);
  const Eigen::VectorXd p_tau2 = softmax(tau2 * out.logits);
  out.value = tau1 * grads.row(y).transpose() - tau2 * (grads.transpose() * p_tau2);

  const Eigen::VectorXd p = softmax(out.logits);
  Eigen::VectorXd w(p.size());
  for (int i = 0; i < p.size(); ++i)
    w[i] = lambda_t * p[i] * (std::log(p[i]) + 1.0);
  if (lambda_t != 0.0) {
    const Eigen::MatrixXd g = centered_grads(grads, p);
    out.value -= g.transpose() * w;
  }
  out.class_weights = w;
  return out;
}

double f_weight(DivergenceKind kind, double q, double p) {
  if (!(q > 0.0)) throw std::invalid_argument("f_weight: q must be positive");
  if (p < 0.0) throw std::invalid_argument("f_weight: p must be nonnegative");
  switch (kind) {
    case DivergenceKind::rkl:
      return -q;
    case DivergenceKind::fkl:
      return p == 0.0 ? 0.0 : p * (std::log(p / q) + 1.0);
    case DivergenceKind::js:
      return p == 0.0 ? 0.0 : 0.5 * p * std::log(2.0 * p / (p + q));
    case DivergenceKind::hellinger:
      return p - std::sqrt(p * q);
  }
  return 0.0;
}

double js_unhalved_weight(double q, double p) {
  if (!(q > 0.0)) throw std::invalid_argument("js_unhalved_weight: q must be positive");
  return p == 0.0 ? 0.0 : p * std::log(2.0 * p / (p + q));
}

double divergence_value(DivergenceKind kind, const Eigen::VectorXd& q,
                        const Eigen::VectorXd& p) {
  if (q.size() != p.size()) throw std::invalid_argument("divergence: length mismatch");
  if ((q.array() <= 0.0).any())
    throw std::invalid_argument("divergence: q must be strictly positive");
  if ((p.array() < 0.0).any())
    throw std::invalid_argument("divergence: p must be nonnegative");
  if (std::abs(q.sum() - 1.0) > 1e-6 || std::abs(p.sum() - 1.0) > 1e-6)
    throw std::invalid_argument("divergence: inputs must sum to 1");
  double d = 0.0;
  for (int i = 0; i < q.size(); ++i) d += q[i] * generator_f(kind, p[i] / q[i]);
  return d;
}

GuidanceGradient divergence_guidance_grad(const LogitModel& model, const Point& x, int y,
                                          DivergenceKind kind, double tau1, double tau2,
                                          double alpha, const TargetDistribution& target) {
  if (alpha < 0.0) throw std::invalid_argument("divergence guidance: alpha must be >= 0");
  check_class(y, model.num_classes());
  check_taus(tau1, tau2);
  if (target.q.size() != model.num_classes())
    throw std::invalid_argument("divergence guidance: target length mismatch");

  GuidanceGradient out;
  out.logits = model.logits(x);
  const Eigen::MatrixXd grads = model.logit_grads(x);
  const Eigen::VectorXd p_tau2 = softmax(tau2 * out.logits);
  out.value = tau1 * grads.row(y).transpose() - tau2 * (grads.transpose() * p_tau2);

  const Eigen::VectorXd p = softmax(out.logits);
  Eigen::VectorXd w(p.size());
  for (int i = 0; i < p.size(); ++i) w[i] = alpha * f_weight(kind, target.q[i], p[i]);
  if (alpha != 0.0) {
    const Eigen::MatrixXd g = centered_grads(grads, p);
    out.value -= g.transpose() * w;
  }
  out.class_weights = w;
  return out;
}

Eigen::VectorXd gamma_weights(const GaussianMixture& gmm, const Point& x, int y,
                              double tau1, double tau2, double alpha,
                              const TargetDistribution& target) {
  check_class(y, gmm.num_components());
  check_taus(tau1, tau2);
  if (target.q.size() != gmm.num_components())
    throw std::invalid_argument("gamma_weights: target length mismatch");
  const int K = gmm.num_components();
  Eigen::VectorXd logits(K);
  for (int k = 0; k < K; ++k)
    logits[k] = std::log(gmm.weights()[k]) + gmm.component_log_density(k, x);
  const Eigen::VectorXd p_tau2 = softmax(tau2 * logits);
  const Eigen::VectorXd w = softmax(logits);  // posterior
  Eigen::VectorXd gamma(K);
  for (int k = 0; k < K; ++k)
    gamma[k] = tau1 * (k == y ? 1.0 : 0.0) - tau2 * p_tau2[k] + alpha * (target.q[k] - w[k]);
  return gamma;
}

Eigen::VectorXd gamma_assembled_grad(const GaussianMixture& gmm, const Point& x,
                                     const Eigen::VectorXd& gamma,
                                     bool include_density_factor) {
  if (gamma.size() != gmm.num_components())
    throw std::invalid_argument("gamma_assembled_grad: weight length mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(gmm.dim());
  for (int k = 0; k < gmm.num_components(); ++k) {
    double coeff = gamma[k];
    if (include_density_factor) coeff *= gmm.component_density(k, x);
    g += coeff * gmm.component_log_density_grad(k, x);
  }
  return g;
}

Eigen::VectorXd tilted_weights(const Eigen::VectorXd& log_probs, double t) {
  if (log_probs.size() < 1) throw std::invalid_argument("tilted_weights: empty batch");
  if (!log_probs.allFinite())
    throw std::invalid_argument("tilted_weights: log probabilities must be finite");
  const auto n = log_probs.size();
  if (t == 0.0) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return softmax(t * log_probs);
}

Eigen::VectorXd tilted_scale_factors(const Eigen::VectorXd& log_probs, double t) {
  if (t == 0.0) return Eigen::VectorXd::Ones(log_probs.size());
  return static_cast<double>(log_probs.size()) * tilted_weights(log_probs, t);
}

std::vector<GuidanceGradient> tilted_guidance(std::vector<GuidanceGradient> grads,
                                              const Eigen::VectorXd& log_probs, double t) {
  if (static_cast<Eigen::Index>(grads.size()) != log_probs.size())
    throw std::invalid_argument("tilted_guidance: gradient/log-prob length mismatch");
  if (t == 0.0) return grads;
  const Eigen::VectorXd scale = tilted_scale_factors(log_probs, t);
  for (size_t i = 0; i < grads.size(); ++i)
    grads[i].value *= scale[static_cast<Eigen::Index>(i)];
  return grads;
}

GuidanceGradient guidance_grad(const LogitModel& model, const Point& x, int y,
                               GuidanceKind kind, double tau1, double tau2, double alpha,
                               double lambda_t, const TargetDistribution& target) {
  switch (kind) {
    case GuidanceKind::none:
      return base_guidance_grad(model, x, y, tau1, tau2);
    case GuidanceKind::entropy:
      return entropy_guidance_grad(model, x, y, tau1, tau2, lambda_t);
    default:
      return divergence_guidance_grad(model, x, y, divergence_of(kind), tau1, tau2, alpha,
                                      target);
  }
}

}  // namespace mixguide
