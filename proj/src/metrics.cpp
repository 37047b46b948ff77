#include "mixguide/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace mixguide::metrics {

namespace {

void check_summary(const GaussianSummary& s, const char* who) {
  if (s.mean.size() != s.covariance.rows() || s.covariance.rows() != s.covariance.cols())
    throw std::invalid_argument(std::string(who) + ": mean/covariance shape mismatch");
  if ((s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument(std::string(who) + ": covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.covariance,
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw std::invalid_argument(std::string(who) + ": covariance must be PSD");
}

}  // namespace

GaussianSummary summarize(const std::vector<Point>& samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("summarize: need at least two samples");
  const auto n = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index d = samples[0].size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& x : samples) {
    if (x.size() != d) throw std::invalid_argument("summarize: inconsistent dimensions");
    mean += x;
  }
  mean /= static_cast<double>(n);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : samples) {
    const Eigen::VectorXd c = x - mean;
    cov += c * c.transpose();
  }
  cov /= static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(mean), std::move(cov)};
}

GaussianSummary mixture_summary(const GaussianMixture& gmm) {
  return {gmm.mixture_mean(), gmm.mixture_covariance()};
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m) {
  const Eigen::Index d = m.rows();
  if (d != m.cols()) throw std::invalid_argument("matrix_sqrt_psd: square matrix required");
  if (d == 1) {
    if (m(0, 0) < 0.0) throw std::invalid_argument("matrix_sqrt_psd: negative input");
    Eigen::MatrixXd r(1, 1);
    r(0, 0) = std::sqrt(m(0, 0));
    return r;
  }
  if (d == 2) {
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double s = std::sqrt(std::max(det, 0.0));
    const double trace = m(0, 0) + m(1, 1);
    const double denom = std::sqrt(std::max(trace + 2.0 * s, 0.0));
    if (denom == 0.0) return Eigen::MatrixXd::Zero(2, 2);
    return (m + s * Eigen::MatrixXd::Identity(2, 2)) / denom;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

double frechet_gaussian(const GaussianSummary& a, const GaussianSummary& b) {
  check_summary(a, "frechet_gaussian");
  check_summary(b, "frechet_gaussian");
  if (a.mean.size() != b.mean.size())
    throw std::invalid_argument("frechet_gaussian: dimension mismatch");
  const Eigen::MatrixXd root_a = matrix_sqrt_psd(a.covariance);
  const Eigen::MatrixXd inner = root_a * b.covariance * root_a;
  const double cross = matrix_sqrt_psd(0.5 * (inner + inner.transpose())).trace();
  const double value = (a.mean - b.mean).squaredNorm() + a.covariance.trace() +
                       b.covariance.trace() - 2.0 * cross;
  return std::max(value, 0.0);
}

PRReport mode_precision_recall(const std::vector<Point>& samples, const GaussianMixture& gmm,
                               double radius_sigmas) {
  if (!(radius_sigmas > 0.0))
    throw std::invalid_argument("mode_precision_recall: radius must be positive");
  const int K = gmm.num_components();
  PRReport report;
  report.mode_hits.assign(static_cast<size_t>(K), 0);
  if (samples.empty()) return report;

  long precise = 0;
  for (const auto& x : samples) {
    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXd diff = x - gmm.mean(k);
      // Mahalanobis distance via the cached solve behind the log-density grad.
      const double m2 = diff.dot(-gmm.component_log_density_grad(k, x));
      if (m2 < best) {
        best = m2;
        nearest = k;
      }
    }
    if (std::sqrt(std::max(best, 0.0)) <= radius_sigmas) {
      ++precise;
      ++report.mode_hits[static_cast<size_t>(nearest)];
    }
  }
  const auto n = static_cast<double>(samples.size());
  report.precision = static_cast<double>(precise) / n;
  int covered = 0;
  for (int k = 0; k < K; ++k) {
    const double threshold = std::max(1.0, n * gmm.weights()[k] / 10.0);
    if (static_cast<double>(report.mode_hits[static_cast<size_t>(k)]) >= threshold) ++covered;
  }
  report.recall = static_cast<double>(covered) / K;
  return report;
}

std::vector<StepAggregate> trajectory_stats(const SampleBatch& batch) {
  if (batch.chains.empty()) throw std::invalid_argument("trajectory_stats: empty batch");
  const int T = batch.steps;
  std::vector<StepAggregate> stats(static_cast<size_t>(T));
  std::vector<double> confs;
  for (int s = 0; s < T; ++s) {
    auto& agg = stats[static_cast<size_t>(s)];
    confs.clear();
    double sum_conf = 0.0, sum_ent = 0.0, sum_norm = 0.0;
    for (const auto& chain : batch.chains) {
      if (chain.failed || static_cast<int>(chain.trajectory.size()) <= s) continue;
      const auto& rec = chain.trajectory[static_cast<size_t>(s)];
      sum_conf += rec.max_confidence;
      sum_ent += rec.entropy;
      sum_norm += rec.grad_norm;
      confs.push_back(rec.max_confidence);
    }
    if (confs.empty()) throw std::invalid_argument("trajectory_stats: no surviving chains");
    const auto n = static_cast<double>(confs.size());
    agg.mean_max_confidence = sum_conf / n;
    agg.mean_entropy = sum_ent / n;
    agg.mean_grad_norm = sum_norm / n;
    const auto top = static_cast<size_t>((confs.size() + 3) / 4);  // ceil(n/4)
    std::partial_sort(confs.begin(), confs.begin() + static_cast<long>(top), confs.end(),
                      std::greater<>());
    double tq = 0.0;
    for (size_t i = 0; i < top; ++i) tq += confs[i];
    agg.top_quartile_confidence = tq / static_cast<double>(top);
  }
  return stats;
}

}  // namespace mixguide::metrics
