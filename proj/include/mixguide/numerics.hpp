#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace mixguide {

/// log(sum(exp(v))) with max subtraction.
inline double logsumexp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  Eigen::VectorXd e = (v.array() - m).exp();
  return e / e.sum();
}

inline Eigen::VectorXd log_softmax(const Eigen::VectorXd& v) {
  return v.array() - logsumexp(v);
}

/// Shannon entropy of a probability vector; 0*log(0) terms contribute 0.
inline double entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

}  // namespace mixguide
