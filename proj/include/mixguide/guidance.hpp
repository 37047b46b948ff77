#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mixguide/logit_model.hpp"
#include "mixguide/mixture.hpp"

namespace mixguide {

enum class GuidanceKind { none, entropy, rkl, fkl, js, hellinger };
enum class DivergenceKind { rkl, fkl, js, hellinger };

std::string to_string(GuidanceKind kind);
GuidanceKind guidance_kind_from_string(const std::string& name);

/// The divergence regularizer behind a guidance kind, if it has one.
bool has_divergence(GuidanceKind kind);
DivergenceKind divergence_of(GuidanceKind kind);

/// Generator function f and its derivative for each divergence, under the
/// convention D_f(q||p) = sum_i q_i f(p_i / q_i), f(1) = 0. The JS generator
/// is scaled so that D_f reproduces the mixture-form definition
/// (1/2) KL(q||m) + (1/2) KL(p||m); see js_unhalved_weight for the variant
/// without that scaling.
double generator_f(DivergenceKind kind, double t);
double generator_fprime(DivergenceKind kind, double t);

/// Smoothed target distribution q_y(i) = (1 - epsilon)/K + epsilon * [i = y],
/// renormalized exactly.
struct TargetDistribution {
  Eigen::VectorXd q;
  int target_class = 0;
  double epsilon = 0.0;

  static TargetDistribution smoothed(int num_classes, int y, double epsilon);
};

/// Guidance gradient plus the diagnostics needed by callers: the per-class
/// weights that multiplied the softmax-gradient directions, and the logits
/// evaluated at the query point (so callers never re-query the model).
struct GuidanceGradient {
  Eigen::VectorXd value;
  Eigen::VectorXd class_weights;
  Eigen::VectorXd logits;
};

/// Temperature-factored log-probability tau1 * f_y - logsumexp(tau2 * f).
double log_prob_tau(const Eigen::VectorXd& logits, int y, double tau1, double tau2);

/// Gradient of log_prob_tau: tau1 * grad f_y - tau2 * sum_i p_tau2(i) grad f_i.
GuidanceGradient base_guidance_grad(const LogitModel& model, const Point& x, int y,
                                    double tau1, double tau2);

/// Base gradient plus the entropy regularizer
/// -lambda_t * sum_i p_i (log p_i + 1) g_i, with p at unit temperature and
/// g_i = grad f_i - sum_j p_j grad f_j.
GuidanceGradient entropy_guidance_grad(const LogitModel& model, const Point& x, int y,
                                       double tau1, double tau2, double lambda_t);

/// Scalar weight w_f(q, p) multiplying g_i in the divergence gradient:
///   rkl        -q
///   fkl        p (log(p/q) + 1)
///   js         (p/2) log(2p / (p + q))
///   hellinger  p - sqrt(p q)
/// p = 0 takes the analytic limit (0 for fkl/js/hellinger, -q for rkl).
double f_weight(DivergenceKind kind, double q, double p);

/// The JS weight without the 1/2 factor, p log(2p/(q+p)): twice the
/// derivative-consistent value returned by f_weight. Kept as a diagnostic;
/// gradients assembled from it fail the finite-difference check of the
/// mixture-form JS definition.
double js_unhalved_weight(double q, double p);

/// D_f(q||p) assembled from the generator; requires q strictly positive.
double divergence_value(DivergenceKind kind, const Eigen::VectorXd& q,
                        const Eigen::VectorXd& p);

/// Base gradient minus alpha * sum_i w_f(q_i, p_i) g_i.
GuidanceGradient divergence_guidance_grad(const LogitModel& model, const Point& x, int y,
                                          DivergenceKind kind, double tau1, double tau2,
                                          double alpha, const TargetDistribution& target);

/// Per-component weights of the Gaussian closed form for RKL guidance:
/// Gamma_k = tau1 [k = y] - tau2 p_tau2(k|x) + alpha (q_y(k) - w_k(x)),
/// with log-density logits l_k = log b_k + log f_k.
Eigen::VectorXd gamma_weights(const GaussianMixture& gmm, const Point& x, int y,
                              double tau1, double tau2, double alpha,
                              const TargetDistribution& target);

/// sum_k Sigma_k^{-1} (mu_k - x) Gamma_k. With include_density_factor each
/// term is additionally multiplied by the component density f_k(x); that
/// variant is diagnostic only and does not match the score gradient.
Eigen::VectorXd gamma_assembled_grad(const GaussianMixture& gmm, const Point& x,
                                     const Eigen::VectorXd& gamma,
                                     bool include_density_factor = false);

/// Batch weights w_i proportional to exp(t * log_prob_i), summing to 1.
Eigen::VectorXd tilted_weights(const Eigen::VectorXd& log_probs, double t);

/// Mean-one weights n * w_i, so t = 0 yields exactly 1 for every chain.
Eigen::VectorXd tilted_scale_factors(const Eigen::VectorXd& log_probs, double t);

/// Scales each gradient by its mean-one tilted weight; t = 0 returns the
/// input unchanged.
std::vector<GuidanceGradient> tilted_guidance(std::vector<GuidanceGradient> grads,
                                              const Eigen::VectorXd& log_probs, double t);

/// Dispatch on kind; lambda_t feeds the entropy kind, alpha and target feed
/// the divergence kinds.
GuidanceGradient guidance_grad(const LogitModel& model, const Point& x, int y,
                               GuidanceKind kind, double tau1, double tau2, double alpha,
                               double lambda_t, const TargetDistribution& target);

}  // namespace mixguide
