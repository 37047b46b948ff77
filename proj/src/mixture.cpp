#include "mixguide/mixture.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mixguide/numerics.hpp"
#include "mixguide/rng.hpp"

namespace mixguide {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kSimplexTol = 1e-12;
}  // namespace

GaussianMixture::GaussianMixture(Eigen::VectorXd weights,
                                 std::vector<Eigen::VectorXd> means,
                                 std::vector<Eigen::MatrixXd> covariances)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      covs_(std::move(covariances)) {
  const auto k = static_cast<size_t>(weights_.size());
  if (k == 0) throw std::invalid_argument("mixture: at least one component required");
  if (means_.size() != k || covs_.size() != k)
    throw std::invalid_argument("mixture: weights/means/covariances length mismatch");

  if ((weights_.array() <= 0.0).any())
    throw std::invalid_argument("mixture: all weights must be positive");
  if (std::abs(weights_.sum() - 1.0) > kSimplexTol)
    throw std::invalid_argument("mixture: weights must sum to 1");

  dim_ = static_cast<int>(means_[0].size());
  log_weights_ = weights_.array().log();
  chol_.reserve(k);
  log_det_.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    if (means_[i].size() != dim_)
      throw std::invalid_argument("mixture: all means must share one dimension");
    const Eigen::MatrixXd& c = covs_[i];
    if (c.rows() != dim_ || c.cols() != dim_)
      throw std::invalid_argument("mixture: covariance shape mismatch");
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > kSimplexTol)
      throw std::invalid_argument("mixture: covariance must be symmetric");
    chol_.emplace_back(c);
    if (chol_.back().info() != Eigen::Success)
      throw std::invalid_argument("mixture: covariance must be positive definite");
    const Eigen::MatrixXd& l = chol_.back().matrixL();
    log_det_.push_back(2.0 * l.diagonal().array().log().sum());
  }
}

double GaussianMixture::component_log_density(int k, const Point& x) const {
  if (k < 0 || k >= num_components()) throw std::invalid_argument("component index out of range");
  if (x.size() != dim_) throw std::invalid_argument("point dimension mismatch");
  const auto idx = static_cast<size_t>(k);
  const Eigen::VectorXd diff = x - means_[idx];
  const double maha = diff.dot(chol_[idx].solve(diff));
  return -0.5 * (dim_ * kLog2Pi + log_det_[idx] + maha);
}

double GaussianMixture::component_density(int k, const Point& x) const {
  return std::exp(component_log_density(k, x));
}

double GaussianMixture::log_density(const Point& x) const {
  Eigen::VectorXd l(num_components());
  for (int k = 0; k < num_components(); ++k)
    l[k] = log_weights_[k] + component_log_density(k, x);
  return logsumexp(l);
}

Eigen::VectorXd GaussianMixture::posterior(const Point& x) const {
  Eigen::VectorXd l(num_components());
  for (int k = 0; k < num_components(); ++k)
    l[k] = log_weights_[k] + component_log_density(k, x);
  if (!l.allFinite()) {
    std::ostringstream msg;
    msg << "posterior: non-finite component log-density at x = [" << x.transpose() << "]";
    throw std::runtime_error(msg.str());
  }
  return softmax(l);
}

Eigen::VectorXd GaussianMixture::component_log_density_grad(int k, const Point& x) const {
  if (k < 0 || k >= num_components()) throw std::invalid_argument("component index out of range");
  if (x.size() != dim_) throw std::invalid_argument("point dimension mismatch");
  const auto idx = static_cast<size_t>(k);
  return chol_[idx].solve(means_[idx] - x);
}

Eigen::VectorXd GaussianMixture::score(const Point& x) const {
  const Eigen::VectorXd w = posterior(x);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim_);
  for (int k = 0; k < num_components(); ++k)
    s += w[k] * component_log_density_grad(k, x);
  return s;
}

GaussianMixture GaussianMixture::diffuse(double alpha_bar) const {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0))
    throw std::invalid_argument("diffuse: alpha_bar must lie in (0, 1]");
  const double root = std::sqrt(alpha_bar);
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
  means.reserve(means_.size());
  covs.reserve(covs_.size());
  const Eigen::MatrixXd noise =
      (1.0 - alpha_bar) * Eigen::MatrixXd::Identity(dim_, dim_);
  for (size_t k = 0; k < means_.size(); ++k) {
    means.push_back(root * means_[k]);
    covs.push_back(alpha_bar * covs_[k] + noise);
  }
  return GaussianMixture(weights_, std::move(means), std::move(covs));
}

std::vector<std::pair<Point, int>> GaussianMixture::sample(int n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  Rng rng(seed);
  std::vector<std::pair<Point, int>> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int k = rng.categorical(weights_);
    Eigen::VectorXd z(dim_);
    for (int j = 0; j < dim_; ++j) z[j] = rng.normal();
    const Eigen::MatrixXd l = chol_[static_cast<size_t>(k)].matrixL();
    out.emplace_back(means_[static_cast<size_t>(k)] + l * z, k);
  }
  return out;
}

Eigen::VectorXd GaussianMixture::mixture_mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim_);
  for (int k = 0; k < num_components(); ++k) m += weights_[k] * means_[static_cast<size_t>(k)];
  return m;
}

Eigen::MatrixXd GaussianMixture::mixture_covariance() const {
  const Eigen::VectorXd m = mixture_mean();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int k = 0; k < num_components(); ++k) {
    const auto idx = static_cast<size_t>(k);
    const Eigen::VectorXd d = means_[idx] - m;
    c += weights_[k] * (covs_[idx] + d * d.transpose());
  }
  return c;
}

}  // namespace mixguide
