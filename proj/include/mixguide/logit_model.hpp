#pragma once

#include <Eigen/Dense>

#include "mixguide/mixture.hpp"

namespace mixguide {

/// Anything producing class logits f_i(x) and their input gradients.
class LogitModel {
 public:
  virtual ~LogitModel() = default;
  virtual int dim() const = 0;
  virtual int num_classes() const = 0;
  virtual Eigen::VectorXd logits(const Point& x) const = 0;
  /// K x d matrix; row i is the gradient of logit i.
  virtual Eigen::MatrixXd logit_grads(const Point& x) const = 0;
};

/// Bayes-exact classifier over a Gaussian mixture: logit k is
/// log b_k + log f_k(x), so softmax(logits) equals the component posterior.
class AnalyticLogitModel final : public LogitModel {
 public:
  explicit AnalyticLogitModel(GaussianMixture gmm);

  int dim() const override { return gmm_.dim(); }
  int num_classes() const override { return gmm_.num_components(); }
  Eigen::VectorXd logits(const Point& x) const override;
  Eigen::MatrixXd logit_grads(const Point& x) const override;

  const GaussianMixture& mixture() const { return gmm_; }

 private:
  GaussianMixture gmm_;
  Eigen::VectorXd log_weights_;
};

/// Affine softmax classifier: logits = W x + c.
class AffineLogitModel final : public LogitModel {
 public:
  AffineLogitModel(Eigen::MatrixXd weight, Eigen::VectorXd bias);

  int dim() const override { return static_cast<int>(weight_.cols()); }
  int num_classes() const override { return static_cast<int>(weight_.rows()); }
  Eigen::VectorXd logits(const Point& x) const override;
  Eigen::MatrixXd logit_grads(const Point& x) const override;

  const Eigen::MatrixXd& weight() const { return weight_; }
  const Eigen::VectorXd& bias() const { return bias_; }

  /// Copy with all logits scaled by `factor` (temperature miscalibration).
  AffineLogitModel scaled(double factor) const {
    return AffineLogitModel(factor * weight_, factor * bias_);
  }

 private:
  Eigen::MatrixXd weight_;  // K x d
  Eigen::VectorXd bias_;    // K
};

}  // namespace mixguide
