#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mixguide/guidance.hpp"
#include "mixguide/logit_model.hpp"
#include "mixguide/mixture.hpp"
#include "mixguide/rng.hpp"

// Independent brute-force and finite-difference verifiers. Everything here
// is written against the defining formulas and shares no implementation with
// the kernels it checks.

namespace mixguide::oracles {

struct FiniteDiffConfig {
  double base_step = 1e-5;  // scaled by (1 + max |x_i|)
};

/// Central-difference gradient of a scalar field.
Eigen::VectorXd finite_diff_grad(const std::function<double(const Point&)>& field,
                                 const Point& x, const FiniteDiffConfig& cfg = {});

struct OracleReport {
  std::string name;
  int trials = 0;
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_case;
  bool pass = true;
  /// Extra measurements that are reported but not gated.
  std::string note;

  std::string to_json() const;
};

/// Hyperparameters drawn per trial by the gradient checks.
struct GuidanceParams {
  double tau1 = 1.0;
  double tau2 = 1.0;
  double alpha = 0.1;
  double epsilon = 0.1;
  double lambda = 0.1;
};

using GradientKernel = std::function<Eigen::VectorXd(
    const LogitModel&, const Point&, int y, const GuidanceParams&)>;
using ScoreField =
    std::function<double(const LogitModel&, const Point&, int y, const GuidanceParams&)>;

/// Random affine models and points; compares the kernel against the central
/// finite difference of its defining score.
OracleReport check_guidance_grad(const std::string& name, const GradientKernel& kernel,
                                 const ScoreField& field, int trials, std::uint64_t seed,
                                 double tol);

/// Random mixtures (K <= 5, d <= 3): asserts the Gamma-weight assembly equals
/// the generic RKL gradient with the analytic backend, and reports (without
/// gating) how far the density-factor variant of the assembly deviates.
OracleReport check_gaussian_identity(int trials, std::uint64_t seed, double tol);

/// Direct term-by-term divergence evaluation from the definitions:
/// rkl sum q log(q/p), fkl sum p log(p/q), js via the mixture form,
/// squared Hellinger via 2 - 2 sum sqrt(qp). No input validation beyond size.
double brute_force_divergence(DivergenceKind kind, const Eigen::VectorXd& q,
                              const Eigen::VectorXd& p);

/// Score fields defined independently of the guidance kernels, used both by
/// the checks above and directly by tests.
double base_score(const LogitModel& model, const Point& x, int y, double tau1, double tau2);
double entropy_score(const LogitModel& model, const Point& x, int y, double tau1,
                     double tau2, double lambda);
double divergence_score(const LogitModel& model, const Point& x, int y, DivergenceKind kind,
                        double tau1, double tau2, double alpha,
                        const Eigen::VectorXd& target);

/// Deterministic random test fixtures.
GaussianMixture random_mixture(Rng& rng, int num_components, int dim);
AffineLogitModel random_affine(Rng& rng, int num_classes, int dim);
Eigen::VectorXd random_simplex(Rng& rng, int n, double floor = 1e-3);

/// The full oracle battery at the given budget; used by tests and the CLI.
std::vector<OracleReport> run_all(std::uint64_t seed, int trials);

}  // namespace mixguide::oracles
