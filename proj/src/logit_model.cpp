#include "mixguide/logit_model.hpp"

#include <stdexcept>
#include <utility>

namespace mixguide {

AnalyticLogitModel::AnalyticLogitModel(GaussianMixture gmm) : gmm_(std::move(gmm)) {
  log_weights_ = gmm_.weights().array().log();
}

Eigen::VectorXd AnalyticLogitModel::logits(const Point& x) const {
  if (x.size() != dim()) throw std::invalid_argument("logits: point dimension mismatch");
  Eigen::VectorXd l(num_classes());
  for (int k = 0; k < num_classes(); ++k)
    l[k] = log_weights_[k] + gmm_.component_log_density(k, x);
  return l;
}

Eigen::MatrixXd AnalyticLogitModel::logit_grads(const Point& x) const {
  if (x.size() != dim()) throw std::invalid_argument("logit_grads: point dimension mismatch");
  Eigen::MatrixXd g(num_classes(), dim());
  for (int k = 0; k < num_classes(); ++k)
    g.row(k) = gmm_.component_log_density_grad(k, x).transpose();
  return g;
}

AffineLogitModel::AffineLogitModel(Eigen::MatrixXd weight, Eigen::VectorXd bias)
    : weight_(std::move(weight)), bias_(std::move(bias)) {
  if (weight_.rows() != bias_.size())
    throw std::invalid_argument("affine model: weight rows must match bias length");
  if (weight_.rows() < 1) throw std::invalid_argument("affine model: at least one class");
}

Eigen::VectorXd AffineLogitModel::logits(const Point& x) const {
  if (x.size() != dim()) throw std::invalid_argument("logits: point dimension mismatch");
  return weight_ * x + bias_;
}

Eigen::MatrixXd AffineLogitModel::logit_grads(const Point& x) const {
  if (x.size() != dim()) throw std::invalid_argument("logit_grads: point dimension mismatch");
  return weight_;
}

}  // namespace mixguide
