#pragma once

#include <Eigen/Dense>

namespace mixguide {

/// Per-step noising coefficients for a T-step forward process.
/// Arrays are 0-indexed: entry t-1 holds the coefficients of step t.
/// posterior_var[0] is 0 by the convention alpha_bar(-1) = 1.
struct NoiseSchedule {
  int steps = 0;
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;          // 1 - beta
  Eigen::VectorXd alpha_bar;      // cumulative product of alpha
  Eigen::VectorXd posterior_var;  // beta_tilde
};

/// Linearly interpolated beta schedule over `steps` steps.
NoiseSchedule build_schedule(int steps, double beta_start, double beta_end);

}  // namespace mixguide
