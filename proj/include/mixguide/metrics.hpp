#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mixguide/engine.hpp"
#include "mixguide/mixture.hpp"

namespace mixguide::metrics {

/// Moment summary used by the Frechet distance.
struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Sample mean and (n-1)-normalized, symmetrized covariance.
GaussianSummary summarize(const std::vector<Point>& samples);

/// Exact moments of a mixture, as a summary.
GaussianSummary mixture_summary(const GaussianMixture& gmm);

/// Principal square root of a symmetric PSD matrix: closed form up to 2x2,
/// spectral decomposition above.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m);

/// Squared 2-Wasserstein distance between Gaussian summaries:
/// |mu_a - mu_b|^2 + tr(Sa + Sb - 2 (Sa^{1/2} Sb Sa^{1/2})^{1/2}).
double frechet_gaussian(const GaussianSummary& a, const GaussianSummary& b);

struct PRReport {
  double precision = 0.0;
  double recall = 0.0;
  std::vector<long> mode_hits;  // samples claimed by each component within the radius
};

/// Mode-based precision/recall proxies. A sample counts as precise when its
/// Mahalanobis distance to the nearest component is within radius_sigmas; a
/// component counts as recalled when it claims at least max(1, n b_k / 10)
/// such samples.
PRReport mode_precision_recall(const std::vector<Point>& samples, const GaussianMixture& gmm,
                               double radius_sigmas = 3.0);

/// Per-step aggregates over the successful chains of a batch.
struct StepAggregate {
  double mean_max_confidence = 0.0;
  double mean_entropy = 0.0;
  double top_quartile_confidence = 0.0;  // mean over the top 25% most confident chains
  double mean_grad_norm = 0.0;
};

std::vector<StepAggregate> trajectory_stats(const SampleBatch& batch);

}  // namespace mixguide::metrics
