#include "mixguide/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mixguide::oracles {

namespace {

// Local max-subtracted logsumexp; deliberately not shared with the kernels.
double lse(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

Eigen::VectorXd probs_of(const Eigen::VectorXd& logits) {
  const double z = lse(logits);
  return (logits.array() - z).exp();
}

double rel_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-3);
}

struct Worst {
  double rel = 0.0;
  double abs = 0.0;
  std::string where;

  void update(double r, double a, const std::string& w) {
    if (a > abs) abs = a;
    if (r > rel) {
      rel = r;
      where = w;
    }
  }
};

std::string describe(int num_classes, int dim, int y, const GuidanceParams& p) {
  std::ostringstream os;
  os << "K=" << num_classes << " d=" << dim << " y=" << y << " tau1=" << p.tau1
     << " tau2=" << p.tau2 << " alpha=" << p.alpha << " eps=" << p.epsilon
     << " lambda=" << p.lambda;
  return os.str();
}

GuidanceParams draw_params(Rng& rng) {
  GuidanceParams p;
  p.tau1 = 0.5 + 1.5 * rng.uniform();
  p.tau2 = 0.5 + 1.5 * rng.uniform();
  p.alpha = 0.05 + 0.45 * rng.uniform();
  p.epsilon = 0.05 + 0.45 * rng.uniform();
  p.lambda = 0.02 + 0.4 * rng.uniform();
  return p;
}

}  // namespace

std::string OracleReport::to_json() const {
  nlohmann::json j{{"name", name},
                   {"trials", trials},
                   {"tolerance", tolerance},
                   {"max_rel_error", max_rel_error},
                   {"max_abs_error", max_abs_error},
                   {"worst_case", worst_case},
                   {"pass", pass},
                   {"note", note}};
  return j.dump();
}

Eigen::VectorXd finite_diff_grad(const std::function<double(const Point&)>& field,
                                 const Point& x, const FiniteDiffConfig& cfg) {
  if (!(cfg.base_step > 0.0)) throw std::invalid_argument("finite_diff: step must be positive");
  const double h = cfg.base_step * (1.0 + x.cwiseAbs().maxCoeff());
  Eigen::VectorXd g(x.size());
  Point probe = x;
  for (int i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = field(probe);
    probe[i] = x[i] - h;
    const double down = field(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      std::ostringstream msg;
      msg << "finite_diff: non-finite field value near coordinate " << i;
      throw std::runtime_error(msg.str());
    }
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double base_score(const LogitModel& model, const Point& x, int y, double tau1, double tau2) {
  const Eigen::VectorXd f = model.logits(x);
  return tau1 * f[y] - lse(tau2 * f);
}

double entropy_score(const LogitModel& model, const Point& x, int y, double tau1,
                     double tau2, double lambda) {
  const Eigen::VectorXd p = probs_of(model.logits(x));
  double h = 0.0;
  for (int i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return base_score(model, x, y, tau1, tau2) + lambda * h;
}

double divergence_score(const LogitModel& model, const Point& x, int y, DivergenceKind kind,
                        double tau1, double tau2, double alpha,
                        const Eigen::VectorXd& target) {
  const Eigen::VectorXd p = probs_of(model.logits(x));
  return base_score(model, x, y, tau1, tau2) - alpha * brute_force_divergence(kind, target, p);
}

double brute_force_divergence(DivergenceKind kind, const Eigen::VectorXd& q,
                              const Eigen::VectorXd& p) {
  if (q.size() != p.size())
    throw std::invalid_argument("brute_force_divergence: length mismatch");
  double d = 0.0;
  switch (kind) {
    case DivergenceKind::rkl:
      for (int i = 0; i < q.size(); ++i) d += q[i] * std::log(q[i] / p[i]);
      return d;
    case DivergenceKind::fkl:
      for (int i = 0; i < q.size(); ++i)
        if (p[i] > 0.0) d += p[i] * std::log(p[i] / q[i]);
      return d;
    case DivergenceKind::js: {
      for (int i = 0; i < q.size(); ++i) {
        const double m = 0.5 * (q[i] + p[i]);
        d += 0.5 * q[i] * std::log(q[i] / m);
        if (p[i] > 0.0) d += 0.5 * p[i] * std::log(p[i] / m);
      }
      return d;
    }
    case DivergenceKind::hellinger: {
      double bc = 0.0;
      for (int i = 0; i < q.size(); ++i) bc += std::sqrt(q[i] * p[i]);
      return 2.0 - 2.0 * bc;
    }
  }
  return d;
}

GaussianMixture random_mixture(Rng& rng, int num_components, int dim) {
  Eigen::VectorXd w(num_components);
  for (int k = 0; k < num_components; ++k) w[k] = 0.2 + rng.uniform();
  w /= w.sum();
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
  for (int k = 0; k < num_components; ++k) {
    Eigen::VectorXd mu(dim);
    for (int j = 0; j < dim; ++j) mu[j] = 6.0 * rng.uniform() - 3.0;
    Eigen::MatrixXd a(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) a(r, c) = 0.4 * rng.normal();
    Eigen::MatrixXd cov = a * a.transpose();
    for (int j = 0; j < dim; ++j) cov(j, j) += 0.4 + 0.6 * rng.uniform();
    means.push_back(std::move(mu));
    covs.push_back(std::move(cov));
  }
  return GaussianMixture(std::move(w), std::move(means), std::move(covs));
}

AffineLogitModel random_affine(Rng& rng, int num_classes, int dim) {
  Eigen::MatrixXd w(num_classes, dim);
  Eigen::VectorXd c(num_classes);
  for (int r = 0; r < num_classes; ++r) {
    c[r] = rng.normal() * 0.5;
    for (int j = 0; j < dim; ++j) w(r, j) = rng.normal();
  }
  return AffineLogitModel(std::move(w), std::move(c));
}

Eigen::VectorXd random_simplex(Rng& rng, int n, double floor) {
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = -std::log(rng.uniform() + 1e-12) + floor;
  return p / p.sum();
}

OracleReport check_guidance_grad(const std::string& name, const GradientKernel& kernel,
                                 const ScoreField& field, int trials, std::uint64_t seed,
                                 double tol) {
  OracleReport report;
  report.name = name;
  report.trials = trials;
  report.tolerance = tol;
  Rng rng(seed);
  Worst worst;
  for (int trial = 0; trial < trials; ++trial) {
    const int num_classes = 2 + static_cast<int>(rng.uniform() * 9);  // 2..10
    const int dim = 1 + static_cast<int>(rng.uniform() * 3);          // 1..3
    const int y = static_cast<int>(rng.uniform() * num_classes);
    const GuidanceParams params = draw_params(rng);
    const AffineLogitModel model = random_affine(rng, num_classes, dim);
    Point x(dim);
    for (int j = 0; j < dim; ++j) x[j] = 1.5 * rng.normal();

    const Eigen::VectorXd analytic = kernel(model, x, y, params);
    const Eigen::VectorXd fd = finite_diff_grad(
        [&](const Point& p) { return field(model, p, y, params); }, x);
    worst.update(rel_error(analytic, fd), (analytic - fd).cwiseAbs().maxCoeff(),
                 describe(num_classes, dim, y, params));
  }
  report.max_rel_error = worst.rel;
  report.max_abs_error = worst.abs;
  report.worst_case = worst.where;
  report.pass = worst.rel < tol;
  return report;
}

OracleReport check_gaussian_identity(int trials, std::uint64_t seed, double tol) {
  OracleReport report;
  report.name = "gaussian-gamma-identity";
  report.trials = trials;
  report.tolerance = tol;
  Rng rng(seed);
  Worst worst;
  double density_variant_dev = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const int num_components = 1 + static_cast<int>(rng.uniform() * 5);  // 1..5
    const int dim = 1 + static_cast<int>(rng.uniform() * 3);             // 1..3
    const GaussianMixture gmm = random_mixture(rng, num_components, dim);
    const int y = static_cast<int>(rng.uniform() * num_components);
    const GuidanceParams params = draw_params(rng);
    Point x(dim);
    for (int j = 0; j < dim; ++j) x[j] = 2.0 * rng.normal();

    const TargetDistribution target =
        TargetDistribution::smoothed(num_components, y, params.epsilon);
    const Eigen::VectorXd gamma =
        gamma_weights(gmm, x, y, params.tau1, params.tau2, params.alpha, target);
    const Eigen::VectorXd assembled = gamma_assembled_grad(gmm, x, gamma, false);
    const AnalyticLogitModel model(gmm);
    const Eigen::VectorXd generic =
        divergence_guidance_grad(model, x, y, DivergenceKind::rkl, params.tau1, params.tau2,
                                 params.alpha, target)
            .value;
    worst.update(rel_error(assembled, generic), (assembled - generic).cwiseAbs().maxCoeff(),
                 describe(num_components, dim, y, params));

    const Eigen::VectorXd density_variant = gamma_assembled_grad(gmm, x, gamma, true);
    density_variant_dev =
        std::max(density_variant_dev, rel_error(density_variant, generic));
  }
  report.max_rel_error = worst.rel;
  report.max_abs_error = worst.abs;
  report.worst_case = worst.where;
  report.pass = worst.rel < tol;
  std::ostringstream note;
  note << "density-factor variant deviates by up to " << density_variant_dev
       << " (relative, reported only)";
  report.note = note.str();
  return report;
}

namespace {

// Oracle-side assembly of the generic Prop-2 gradient from the generator
// derivative, used to cross-check the specialized kernel weights.
Eigen::VectorXd generic_divergence_grad(const LogitModel& model, const Point& x, int y,
                                        DivergenceKind kind, const GuidanceParams& params,
                                        const Eigen::VectorXd& target) {
  const Eigen::VectorXd f = model.logits(x);
  const Eigen::MatrixXd grads = model.logit_grads(x);
  const Eigen::VectorXd p2 = probs_of(params.tau2 * f);
  const Eigen::VectorXd p = probs_of(f);
  Eigen::VectorXd value =
      params.tau1 * grads.row(y).transpose() - params.tau2 * (grads.transpose() * p2);
  const Eigen::VectorXd mean_grad = grads.transpose() * p;
  for (int i = 0; i < p.size(); ++i) {
    const double w = p[i] * generator_fprime(kind, p[i] / target[i]);
    value -= params.alpha * w * (grads.row(i).transpose() - mean_grad);
  }
  return value;
}

OracleReport check_specialization(DivergenceKind kind, const std::string& name, int trials,
                                  std::uint64_t seed, double tol) {
  OracleReport report;
  report.name = name;
  report.trials = trials;
  report.tolerance = tol;
  Rng rng(seed);
  Worst worst;
  for (int trial = 0; trial < trials; ++trial) {
    const int num_classes = 2 + static_cast<int>(rng.uniform() * 9);
    const int dim = 1 + static_cast<int>(rng.uniform() * 3);
    const int y = static_cast<int>(rng.uniform() * num_classes);
    const GuidanceParams params = draw_params(rng);
    const AffineLogitModel model = random_affine(rng, num_classes, dim);
    Point x(dim);
    for (int j = 0; j < dim; ++j) x[j] = 1.5 * rng.normal();
    const TargetDistribution target =
        TargetDistribution::smoothed(num_classes, y, params.epsilon);

    const Eigen::VectorXd specialized =
        divergence_guidance_grad(model, x, y, kind, params.tau1, params.tau2, params.alpha,
                                 target)
            .value;
    const Eigen::VectorXd generic =
        generic_divergence_grad(model, x, y, kind, params, target.q);
    worst.update(rel_error(specialized, generic),
                 (specialized - generic).cwiseAbs().maxCoeff(),
                 describe(num_classes, dim, y, params));
  }
  report.max_rel_error = worst.rel;
  report.max_abs_error = worst.abs;
  report.worst_case = worst.where;
  report.pass = worst.rel < tol;
  return report;
}

OracleReport check_lemma1(int trials, std::uint64_t seed, double tol) {
  OracleReport report;
  report.name = "lemma1-rkl-decomposition";
  report.trials = trials;
  report.tolerance = tol;
  Rng rng(seed);
  Worst worst;
  for (int trial = 0; trial < trials; ++trial) {
    const int num_classes = 2 + static_cast<int>(rng.uniform() * 9);
    const int dim = 1 + static_cast<int>(rng.uniform() * 3);
    const int y = static_cast<int>(rng.uniform() * num_classes);
    const GuidanceParams params = draw_params(rng);
    const AffineLogitModel model = random_affine(rng, num_classes, dim);
    Point x(dim);
    for (int j = 0; j < dim; ++j) x[j] = 1.5 * rng.normal();
    const TargetDistribution target =
        TargetDistribution::smoothed(num_classes, y, params.epsilon);

    // Regularizer as computed by the kernel: divergence grad minus base grad.
    const Eigen::VectorXd reg =
        divergence_guidance_grad(model, x, y, DivergenceKind::rkl, params.tau1, params.tau2,
                                 params.alpha, target)
            .value -
        base_guidance_grad(model, x, y, params.tau1, params.tau2).value;

    // Target direction minus current direction, straight from the lemma.
    const Eigen::MatrixXd grads = model.logit_grads(x);
    const Eigen::VectorXd p = probs_of(model.logits(x));
    const Eigen::VectorXd lemma =
        params.alpha *
        (grads.transpose() * target.q - grads.transpose() * p);
    worst.update(rel_error(reg, lemma), (reg - lemma).cwiseAbs().maxCoeff(),
                 describe(num_classes, dim, y, params));
  }
  report.max_rel_error = worst.rel;
  report.max_abs_error = worst.abs;
  report.worst_case = worst.where;
  report.pass = worst.rel < tol;
  return report;
}

OracleReport check_js_partial(int trials, std::uint64_t seed, double tol) {
  OracleReport report;
  report.name = "js-partial-derivative";
  report.trials = trials;
  report.tolerance = tol;
  Rng rng(seed);
  Worst worst;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 7);
    const Eigen::VectorXd q = random_simplex(rng, n, 0.05);
    const Eigen::VectorXd p = random_simplex(rng, n, 0.05);
    const int i = static_cast<int>(rng.uniform() * n);
    const double h = 1e-6;
    Eigen::VectorXd up = p, down = p;
    up[i] += h;
    down[i] -= h;
    const double fd = (brute_force_divergence(DivergenceKind::js, q, up) -
                       brute_force_divergence(DivergenceKind::js, q, down)) /
                      (2.0 * h);
    const double expected = 0.5 * std::log(p[i] / (0.5 * (q[i] + p[i])));
    const double abs = std::abs(fd - expected);
    const double rel = abs / std::max(std::abs(expected), 1e-3);
    std::ostringstream os;
    os << "n=" << n << " i=" << i << " p_i=" << p[i] << " q_i=" << q[i];
    worst.update(rel, abs, os.str());
  }
  report.max_rel_error = worst.rel;
  report.max_abs_error = worst.abs;
  report.worst_case = worst.where;
  report.pass = worst.rel < tol;
  return report;
}

OracleReport check_divergence_values(int trials, std::uint64_t seed, double tol) {
  OracleReport report;
  report.name = "divergence-value-vs-bruteforce";
  report.trials = trials;
  report.tolerance = tol;
  Rng rng(seed);
  Worst worst;
  const DivergenceKind kinds[] = {DivergenceKind::rkl, DivergenceKind::fkl,
                                  DivergenceKind::js, DivergenceKind::hellinger};
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 9);
    const Eigen::VectorXd q = random_simplex(rng, n, 1e-3);
    const Eigen::VectorXd p = random_simplex(rng, n, 1e-3);
    for (const auto kind : kinds) {
      const double got = divergence_value(kind, q, p);
      const double want = brute_force_divergence(kind, q, p);
      const double abs = std::abs(got - want);
      const double rel = abs / std::max(std::abs(want), 1.0);
      std::ostringstream os;
      os << "kind=" << static_cast<int>(kind) << " n=" << n;
      worst.update(rel, abs, os.str());
    }
  }
  report.max_rel_error = worst.rel;
  report.max_abs_error = worst.abs;
  report.worst_case = worst.where;
  report.pass = worst.rel < tol;
  return report;
}

OracleReport check_divergence_axioms(int pairs, std::uint64_t seed) {
  OracleReport report;
  report.name = "divergence-axioms";
  report.trials = pairs;
  report.tolerance = 1e-10;
  Rng rng(seed);
  const DivergenceKind kinds[] = {DivergenceKind::rkl, DivergenceKind::fkl,
                                  DivergenceKind::js, DivergenceKind::hellinger};
  double worst_violation = 0.0;
  std::string where;
  const double log2 = std::log(2.0);
  for (int trial = 0; trial < pairs; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 9);
    const Eigen::VectorXd q = random_simplex(rng, n, 1e-3);
    const Eigen::VectorXd p = random_simplex(rng, n, 1e-3);
    for (const auto kind : kinds) {
      const double d = divergence_value(kind, q, p);
      if (-d > worst_violation) {
        worst_violation = -d;
        where = "nonnegativity";
      }
      const double same = std::abs(divergence_value(kind, q, q));
      if (same > worst_violation) {
        worst_violation = same;
        where = "identity D(q||q)=0";
      }
    }
    const double js_qp = divergence_value(DivergenceKind::js, q, p);
    const double js_pq = divergence_value(DivergenceKind::js, p, q);
    if (std::abs(js_qp - js_pq) > worst_violation) {
      worst_violation = std::abs(js_qp - js_pq);
      where = "js symmetry";
    }
    if (js_qp - log2 > worst_violation) {
      worst_violation = js_qp - log2;
      where = "js <= log 2";
    }
  }
  report.max_abs_error = worst_violation;
  report.max_rel_error = worst_violation;
  report.worst_case = where;
  report.pass = worst_violation < report.tolerance;
  return report;
}

OracleReport check_mixture_score(int trials, std::uint64_t seed, double tol) {
  OracleReport report;
  report.name = "mixture-score-vs-fd";
  report.trials = trials;
  report.tolerance = tol;
  Rng rng(seed);
  Worst worst;
  for (int trial = 0; trial < trials; ++trial) {
    const int num_components = 1 + static_cast<int>(rng.uniform() * 5);
    const int dim = 1 + static_cast<int>(rng.uniform() * 3);
    const GaussianMixture gmm = random_mixture(rng, num_components, dim);
    Point x(dim);
    for (int j = 0; j < dim; ++j) x[j] = 2.0 * rng.normal();
    const Eigen::VectorXd analytic = gmm.score(x);
    const Eigen::VectorXd fd =
        finite_diff_grad([&](const Point& p) { return gmm.log_density(p); }, x);
    std::ostringstream os;
    os << "K=" << num_components << " d=" << dim;
    worst.update(rel_error(analytic, fd), (analytic - fd).cwiseAbs().maxCoeff(), os.str());
  }
  report.max_rel_error = worst.rel;
  report.max_abs_error = worst.abs;
  report.worst_case = worst.where;
  report.pass = worst.rel < tol;
  return report;
}

OracleReport check_tilted_weights(int trials, std::uint64_t seed) {
  OracleReport report;
  report.name = "tilted-weights";
  report.trials = trials;
  report.tolerance = 1e-12;
  Rng rng(seed);
  double worst_violation = 0.0;
  std::string where;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 16);
    Eigen::VectorXd lp(n);
    for (int i = 0; i < n; ++i) lp[i] = -4.0 * rng.uniform();
    const double t = 2.0 * rng.uniform() - 1.0;
    const Eigen::VectorXd w = tilted_weights(lp, t);
    const double sum_err = std::abs(w.sum() - 1.0);
    if (sum_err > worst_violation) {
      worst_violation = sum_err;
      where = "weights sum to 1";
    }
    // Weight order must follow log-prob order for t > 0 and reverse for t < 0.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (lp[i] <= lp[j]) continue;
        const double gap = t > 0.0 ? w[j] - w[i] : (t < 0.0 ? w[i] - w[j] : 0.0);
        if (gap > worst_violation) {
          worst_violation = gap;
          where = t > 0.0 ? "monotone for t > 0" : "antitone for t < 0";
        }
      }
    }
  }
  report.max_abs_error = worst_violation;
  report.max_rel_error = worst_violation;
  report.worst_case = where;
  report.pass = worst_violation < report.tolerance;
  return report;
}

}  // namespace

std::vector<OracleReport> run_all(std::uint64_t seed, int trials) {
  std::vector<OracleReport> reports;

  const auto base_kernel = [](const LogitModel& m, const Point& x, int y,
                              const GuidanceParams& p) {
    return base_guidance_grad(m, x, y, p.tau1, p.tau2).value;
  };
  const auto base_field = [](const LogitModel& m, const Point& x, int y,
                             const GuidanceParams& p) {
    return base_score(m, x, y, p.tau1, p.tau2);
  };
  reports.push_back(
      check_guidance_grad("grad-base", base_kernel, base_field, trials, seed + 1, 1e-5));

  const auto entropy_kernel = [](const LogitModel& m, const Point& x, int y,
                                 const GuidanceParams& p) {
    return entropy_guidance_grad(m, x, y, p.tau1, p.tau2, p.lambda).value;
  };
  const auto entropy_field = [](const LogitModel& m, const Point& x, int y,
                                const GuidanceParams& p) {
    return entropy_score(m, x, y, p.tau1, p.tau2, p.lambda);
  };
  reports.push_back(check_guidance_grad("grad-entropy", entropy_kernel, entropy_field,
                                        trials, seed + 2, 1e-5));

  const DivergenceKind kinds[] = {DivergenceKind::rkl, DivergenceKind::fkl,
                                  DivergenceKind::js, DivergenceKind::hellinger};
  const char* kind_names[] = {"rkl", "fkl", "js", "hellinger"};
  for (int k = 0; k < 4; ++k) {
    const DivergenceKind kind = kinds[k];
    const auto kernel = [kind](const LogitModel& m, const Point& x, int y,
                               const GuidanceParams& p) {
      const TargetDistribution target =
          TargetDistribution::smoothed(m.num_classes(), y, p.epsilon);
      return divergence_guidance_grad(m, x, y, kind, p.tau1, p.tau2, p.alpha, target).value;
    };
    const auto field = [kind](const LogitModel& m, const Point& x, int y,
                              const GuidanceParams& p) {
      const TargetDistribution target =
          TargetDistribution::smoothed(m.num_classes(), y, p.epsilon);
      return divergence_score(m, x, y, kind, p.tau1, p.tau2, p.alpha, target.q);
    };
    reports.push_back(check_guidance_grad(std::string("grad-") + kind_names[k], kernel,
                                          field, trials, seed + 3 + k, 1e-5));
    reports.push_back(check_specialization(kind,
                                           std::string("specialization-") + kind_names[k],
                                           trials, seed + 30 + k, 1e-10));
  }

  reports.push_back(check_gaussian_identity(std::max(trials, 200), seed + 7, 1e-8));
  reports.push_back(check_lemma1(trials, seed + 8, 1e-10));
  reports.push_back(check_js_partial(trials, seed + 9, 1e-6));
  reports.push_back(check_divergence_values(trials, seed + 10, 1e-12));
  reports.push_back(check_divergence_axioms(std::max(trials * 5, 1000), seed + 11));
  reports.push_back(check_mixture_score(std::max(trials, 100), seed + 12, 1e-6));
  reports.push_back(check_tilted_weights(trials, seed + 13));
  return reports;
}

}  // namespace mixguide::oracles
