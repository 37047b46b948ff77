#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace mixguide {

using Point = Eigen::VectorXd;

/**
 * Gaussian mixture with exact density, score, component posterior and the
 * closed-form marginal of the variance-preserving forward noising process.
 *
 * Components are validated and factorized once at construction; instances
 * are immutable afterwards and safe to share across threads.
 */
class GaussianMixture {
 public:
  GaussianMixture(Eigen::VectorXd weights, std::vector<Eigen::VectorXd> means,
                  std::vector<Eigen::MatrixXd> covariances);

  int dim() const { return dim_; }
  int num_components() const { return static_cast<int>(means_.size()); }

  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& mean(int k) const { return means_[static_cast<size_t>(k)]; }
  const Eigen::MatrixXd& covariance(int k) const { return covs_[static_cast<size_t>(k)]; }

  /// log N(x; mu_k, Sigma_k).
  double component_log_density(int k, const Point& x) const;

  /// Density of component k (not weighted).
  double component_density(int k, const Point& x) const;

  /// log of the mixture density log sum_k b_k N(x; mu_k, Sigma_k).
  double log_density(const Point& x) const;

  /// Component posterior w_k(x) = b_k f_k(x) / sum_j b_j f_j(x), computed in
  /// log space.
  Eigen::VectorXd posterior(const Point& x) const;

  /// Gradient of the log mixture density: sum_k w_k(x) Sigma_k^{-1}(mu_k - x).
  Eigen::VectorXd score(const Point& x) const;

  /// Sigma_k^{-1} (mu_k - x), the per-component log-density gradient.
  Eigen::VectorXd component_log_density_grad(int k, const Point& x) const;

  /// Exact marginal after forward noising to level alpha_bar in (0, 1]:
  /// means scale by sqrt(alpha_bar), covariances become
  /// alpha_bar * Sigma_k + (1 - alpha_bar) * I.
  GaussianMixture diffuse(double alpha_bar) const;

  /// n seeded draws with their component labels. Deterministic given seed;
  /// the call owns a private stream.
  std::vector<std::pair<Point, int>> sample(int n, std::uint64_t seed) const;

  /// First and second moments of the mixture.
  Eigen::VectorXd mixture_mean() const;
  Eigen::MatrixXd mixture_covariance() const;

 private:
  Eigen::VectorXd weights_;
  Eigen::VectorXd log_weights_;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::MatrixXd> covs_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> chol_;  // cached factorizations
  std::vector<double> log_det_;
  int dim_ = 0;
};

}  // namespace mixguide
