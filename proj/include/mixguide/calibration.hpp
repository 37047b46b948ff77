#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mixguide/logit_model.hpp"

namespace mixguide {

/// Per-sample calibration data: top-class confidence, correctness indicator,
/// predicted and true labels. Argmax ties break toward the lowest index.
struct CalibrationBatch {
  Eigen::VectorXd confidence;  // p_hat in [0, 1]
  Eigen::VectorXi correct;     // 1 iff predicted == label
  Eigen::VectorXi predicted;
  Eigen::VectorXi label;

  int size() const { return static_cast<int>(confidence.size()); }
};

CalibrationBatch make_calibration_batch(const LogitModel& model,
                                        const std::vector<Point>& points,
                                        const std::vector<int>& labels);

/// Smooth ECE: (1/n) sum_i sqrt((p_hat_i - a_i)^2 + beta). The value is a
/// plain per-sample mean; each sample lies in exactly one confidence bin, so
/// the bin partition does not change it (see smooth_ece_bin_contributions
/// for the per-bin reporting view).
double smooth_ece_loss(const CalibrationBatch& batch, double beta, int bins);

/// Per-bin sums of the smooth per-sample losses, for reporting. Adding them
/// and dividing by n reproduces smooth_ece_loss.
std::vector<double> smooth_ece_bin_contributions(const CalibrationBatch& batch, double beta,
                                                 int bins);

/// Standard binned ECE over bins ((b-1)/B, b/B]: sum_b (n_b/n) |conf_b - acc_b|.
double binned_ece(const CalibrationBatch& batch, int bins);

/// Fraction of correct predictions.
double accuracy(const CalibrationBatch& batch);

struct FinetuneOptions {
  int epochs = 20;
  int batch_size = 64;
  double lambda = 1.0;   // weight of the smooth-ECE term
  double beta = 1e-4;    // smoothing constant
  double lr = 0.1;
  std::uint64_t seed = 0;
};

/// Mini-batch SGD on cross-entropy plus lambda * smooth ECE for the affine
/// softmax model, with closed-form gradients. The smooth-ECE gradient flows
/// through the max probability only (the correctness indicator is constant).
/// Deterministic given options.seed.
AffineLogitModel finetune_ece(const AffineLogitModel& model, const std::vector<Point>& points,
                              const std::vector<int>& labels, const FinetuneOptions& opts);

/// Total fine-tuning loss CE + lambda * smoothECE on a dataset; used by the
/// gradient checks and for monitoring.
double finetune_loss(const AffineLogitModel& model, const std::vector<Point>& points,
                     const std::vector<int>& labels, double lambda, double beta);

/// Analytic gradient of finetune_loss with respect to (W, c).
struct AffineGradient {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};
AffineGradient finetune_grad(const AffineLogitModel& model, const std::vector<Point>& points,
                             const std::vector<int>& labels, double lambda, double beta);

}  // namespace mixguide
