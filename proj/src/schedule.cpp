#include "mixguide/schedule.hpp"

#include <stdexcept>

namespace mixguide {

NoiseSchedule build_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw std::invalid_argument("schedule: steps must be >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw std::invalid_argument("schedule: need 0 < beta_start <= beta_end < 1");

  NoiseSchedule s;
  s.steps = steps;
  s.beta.resize(steps);
  s.alpha.resize(steps);
  s.alpha_bar.resize(steps);
  s.posterior_var.resize(steps);

  double cum = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double frac = steps > 1 ? static_cast<double>(i) / (steps - 1) : 0.0;
    s.beta[i] = beta_start + (beta_end - beta_start) * frac;
    s.alpha[i] = 1.0 - s.beta[i];
    const double prev = cum;  // alpha_bar of the previous step, 1 at i = 0
    cum *= s.alpha[i];
    s.alpha_bar[i] = cum;
    s.posterior_var[i] = (1.0 - prev) / (1.0 - cum) * s.beta[i];
  }
  return s;
}

}  // namespace mixguide
