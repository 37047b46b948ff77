#include "mixguide/calibration.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mixguide/numerics.hpp"
#include "mixguide/rng.hpp"

namespace mixguide {

namespace {

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

void check_batch(const CalibrationBatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("calibration: empty batch");
}

// Bin index for confidence p under bins ((b-1)/B, b/B]; p = 0 lands in bin 0.
int bin_index(double p, int bins) {
  int b = static_cast<int>(std::ceil(p * bins)) - 1;
  if (b < 0) b = 0;
  if (b >= bins) b = bins - 1;
  return b;
}

// Adds the per-sample gradient of CE + lambda * smoothECE w.r.t. the logits
// mapped back onto (W, c).
void add_sample_grad(const Eigen::MatrixXd& weight, const Eigen::VectorXd& bias,
                     const Point& x, int y, double lambda, double beta,
                     Eigen::MatrixXd& grad_w, Eigen::VectorXd& grad_c) {
  const Eigen::VectorXd p = softmax(weight * x + bias);
  if (!p.allFinite()) throw std::runtime_error("finetune: non-finite softmax");
  // Cross entropy: dL/dz = p - e_y.
  Eigen::VectorXd dz = p;
  dz[y] -= 1.0;
  // Smooth ECE through the max entry: dL/dz = ((p_hat - a)/s) * p_m (e_m - p).
  const int m = argmax_lowest(p);
  const double a = m == y ? 1.0 : 0.0;
  const double r = p[m] - a;
  const double s_val = std::sqrt(r * r + beta);
  Eigen::VectorXd jac = -p;
  jac[m] += 1.0;
  dz += lambda * (r / s_val) * p[m] * jac;
  grad_w += dz * x.transpose();
  grad_c += dz;
}

}  // namespace

CalibrationBatch make_calibration_batch(const LogitModel& model,
                                        const std::vector<Point>& points,
                                        const std::vector<int>& labels) {
  if (points.size() != labels.size())
    throw std::invalid_argument("calibration: points/labels length mismatch");
  const int n = static_cast<int>(points.size());
  CalibrationBatch batch;
  batch.confidence.resize(n);
  batch.correct.resize(n);
  batch.predicted.resize(n);
  batch.label.resize(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd p = softmax(model.logits(points[static_cast<size_t>(i)]));
    const int pred = argmax_lowest(p);
    batch.confidence[i] = p[pred];
    batch.predicted[i] = pred;
    batch.label[i] = labels[static_cast<size_t>(i)];
    batch.correct[i] = pred == labels[static_cast<size_t>(i)] ? 1 : 0;
  }
  return batch;
}

double smooth_ece_loss(const CalibrationBatch& batch, double beta, int bins) {
  check_batch(batch);
  if (!(beta > 0.0)) throw std::invalid_argument("smooth ECE: beta must be positive");
  if (bins < 1) throw std::invalid_argument("smooth ECE: bins must be >= 1");
  double total = 0.0;
  for (int i = 0; i < batch.size(); ++i) {
    const double r = batch.confidence[i] - batch.correct[i];
    total += std::sqrt(r * r + beta);
  }
  return total / batch.size();
}

std::vector<double> smooth_ece_bin_contributions(const CalibrationBatch& batch, double beta,
                                                 int bins) {
  check_batch(batch);
  if (!(beta > 0.0)) throw std::invalid_argument("smooth ECE: beta must be positive");
  if (bins < 1) throw std::invalid_argument("smooth ECE: bins must be >= 1");
  std::vector<double> sums(static_cast<size_t>(bins), 0.0);
  for (int i = 0; i < batch.size(); ++i) {
    const double r = batch.confidence[i] - batch.correct[i];
    sums[static_cast<size_t>(bin_index(batch.confidence[i], bins))] += std::sqrt(r * r + beta);
  }
  return sums;
}

double binned_ece(const CalibrationBatch& batch, int bins) {
  check_batch(batch);
  if (bins < 1) throw std::invalid_argument("binned ECE: bins must be >= 1");
  std::vector<double> conf(static_cast<size_t>(bins), 0.0);
  std::vector<double> acc(static_cast<size_t>(bins), 0.0);
  std::vector<int> count(static_cast<size_t>(bins), 0);
  for (int i = 0; i < batch.size(); ++i) {
    const auto b = static_cast<size_t>(bin_index(batch.confidence[i], bins));
    conf[b] += batch.confidence[i];
    acc[b] += batch.correct[i];
    ++count[b];
  }
  double ece = 0.0;
  for (size_t b = 0; b < static_cast<size_t>(bins); ++b) {
    if (count[b] == 0) continue;
    ece += (static_cast<double>(count[b]) / batch.size()) *
           std::abs(conf[b] / count[b] - acc[b] / count[b]);
  }
  return ece;
}

double accuracy(const CalibrationBatch& batch) {
  check_batch(batch);
  return static_cast<double>(batch.correct.sum()) / batch.size();
}

double finetune_loss(const AffineLogitModel& model, const std::vector<Point>& points,
                     const std::vector<int>& labels, double lambda, double beta) {
  if (points.empty()) throw std::invalid_argument("finetune_loss: empty dataset");
  double ce = 0.0;
  double ece = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    const Eigen::VectorXd logp = log_softmax(model.logits(points[i]));
    ce -= logp[labels[i]];
    const Eigen::VectorXd p = logp.array().exp();
    const int pred = argmax_lowest(p);
    const double r = p[pred] - (pred == labels[i] ? 1.0 : 0.0);
    ece += std::sqrt(r * r + beta);
  }
  const auto n = static_cast<double>(points.size());
  return ce / n + lambda * ece / n;
}

AffineGradient finetune_grad(const AffineLogitModel& model, const std::vector<Point>& points,
                             const std::vector<int>& labels, double lambda, double beta) {
  if (points.empty()) throw std::invalid_argument("finetune_grad: empty dataset");
  AffineGradient g{Eigen::MatrixXd::Zero(model.num_classes(), model.dim()),
                   Eigen::VectorXd::Zero(model.num_classes())};
  for (size_t i = 0; i < points.size(); ++i)
    add_sample_grad(model.weight(), model.bias(), points[i], labels[i], lambda, beta,
                    g.weight, g.bias);
  g.weight /= static_cast<double>(points.size());
  g.bias /= static_cast<double>(points.size());
  return g;
}

AffineLogitModel finetune_ece(const AffineLogitModel& model, const std::vector<Point>& points,
                              const std::vector<int>& labels, const FinetuneOptions& opts) {
  if (points.empty()) throw std::invalid_argument("finetune: empty dataset");
  if (points.size() != labels.size())
    throw std::invalid_argument("finetune: points/labels length mismatch");
  if (opts.epochs < 1 || opts.batch_size < 1)
    throw std::invalid_argument("finetune: epochs and batch_size must be positive");
  if (!(opts.beta > 0.0)) throw std::invalid_argument("finetune: beta must be positive");
  if (opts.lambda < 0.0 || opts.lr < 0.0)
    throw std::invalid_argument("finetune: lambda and lr must be nonnegative");

  const int n = static_cast<int>(points.size());
  const int num_classes = model.num_classes();
  for (size_t i = 0; i < points.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw std::invalid_argument("finetune: label out of range");
    if (points[i].size() != model.dim())
      throw std::invalid_argument("finetune: point dimension mismatch");
  }

  Eigen::MatrixXd weight = model.weight();
  Eigen::VectorXd bias = model.bias();
  Rng rng(opts.seed);
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    // Fisher-Yates with the private stream keeps the visit order portable.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform() * (i + 1));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    for (int start = 0; start < n; start += opts.batch_size) {
      const int stop = std::min(start + opts.batch_size, n);
      const int bs = stop - start;
      Eigen::MatrixXd grad_w = Eigen::MatrixXd::Zero(weight.rows(), weight.cols());
      Eigen::VectorXd grad_c = Eigen::VectorXd::Zero(bias.size());
      for (int s = start; s < stop; ++s) {
        const int i = order[static_cast<size_t>(s)];
        try {
          add_sample_grad(weight, bias, points[static_cast<size_t>(i)],
                          labels[static_cast<size_t>(i)], opts.lambda, opts.beta, grad_w,
                          grad_c);
        } catch (const std::runtime_error&) {
          std::ostringstream msg;
          msg << "finetune: non-finite loss at epoch " << epoch << ", sample " << i;
          throw std::runtime_error(msg.str());
        }
      }
      if (opts.lr != 0.0) {
        weight -= (opts.lr / bs) * grad_w;
        bias -= (opts.lr / bs) * grad_c;
      }
    }
  }
  return AffineLogitModel(std::move(weight), std::move(bias));
}

}  // namespace mixguide
