#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mixguide/guidance.hpp"
#include "mixguide/oracles.hpp"

using namespace mixguide;
using namespace mixguide::oracles;

TEST_CASE("finite differences on elementary fields") {
  Point x(2);
  x << 1.0, 2.0;

  const auto constant = finite_diff_grad([](const Point&) { return 3.5; }, x);
  CHECK(constant.cwiseAbs().maxCoeff() < 1e-10);

  Eigen::VectorXd a(2);
  a << 0.3, -1.2;
  const auto linear = finite_diff_grad([&](const Point& p) { return a.dot(p); }, x);
  CHECK((linear - a).cwiseAbs().maxCoeff() < 1e-8);

  const auto quadratic =
      finite_diff_grad([](const Point& p) { return 0.5 * p.squaredNorm(); }, x);
  CHECK((quadratic - x).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("finite differences flag non-finite fields") {
  Point x(1);
  x << 0.0;
  CHECK_THROWS_AS(
      finite_diff_grad([](const Point& p) { return std::log(p[0] - 10.0); }, x),
      std::runtime_error);
}

TEST_CASE("brute-force divergences agree with closed forms") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 6);
    const Eigen::VectorXd q = random_simplex(rng, n, 1e-3);
    const Eigen::VectorXd p = random_simplex(rng, n, 1e-3);

    for (const auto kind : {DivergenceKind::rkl, DivergenceKind::fkl, DivergenceKind::js,
                            DivergenceKind::hellinger})
      CHECK(std::abs(brute_force_divergence(kind, q, q)) < 1e-14);

    double rkl = 0.0;
    for (int i = 0; i < n; ++i) rkl += q[i] * std::log(q[i] / p[i]);
    CHECK(brute_force_divergence(DivergenceKind::rkl, q, p) ==
          doctest::Approx(rkl).epsilon(1e-12));

    // Alternate closed form for the squared Hellinger distance.
    double bc = 0.0;
    for (int i = 0; i < n; ++i) bc += std::sqrt(q[i] * p[i]);
    CHECK(brute_force_divergence(DivergenceKind::hellinger, q, p) ==
          doctest::Approx(2.0 - 2.0 * bc).epsilon(1e-12));
    CHECK(divergence_value(DivergenceKind::hellinger, q, p) ==
          doctest::Approx(2.0 - 2.0 * bc).epsilon(1e-12));
  }
}

TEST_CASE("oracle reports are deterministic given the seed") {
  const auto a = run_all(99, 10);
  const auto b = run_all(99, 10);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].max_rel_error == b[i].max_rel_error);
    CHECK(a[i].max_abs_error == b[i].max_abs_error);
    CHECK(a[i].pass == b[i].pass);
  }
}

TEST_CASE("entropy check with lambda forced to zero reproduces the base report") {
  const auto base_kernel = [](const LogitModel& m, const Point& x, int y,
                              const GuidanceParams& p) {
    return base_guidance_grad(m, x, y, p.tau1, p.tau2).value;
  };
  const auto base_field = [](const LogitModel& m, const Point& x, int y,
                             const GuidanceParams& p) {
    return base_score(m, x, y, p.tau1, p.tau2);
  };
  const auto entropy_kernel = [](const LogitModel& m, const Point& x, int y,
                                 const GuidanceParams& p) {
    return entropy_guidance_grad(m, x, y, p.tau1, p.tau2, 0.0).value;
  };
  const auto entropy_field = [](const LogitModel& m, const Point& x, int y,
                                const GuidanceParams& p) {
    return entropy_score(m, x, y, p.tau1, p.tau2, 0.0);
  };
  const auto a = check_guidance_grad("base", base_kernel, base_field, 40, 7, 1e-5);
  const auto b = check_guidance_grad("entropy-lambda0", entropy_kernel, entropy_field, 40,
                                     7, 1e-5);
  CHECK(a.max_rel_error == b.max_rel_error);
  CHECK(a.max_abs_error == b.max_abs_error);
  CHECK(a.pass);
  CHECK(b.pass);
}

TEST_CASE("the js check only passes with the half-corrected weight") {
  // Gradient assembled from the derivative-consistent weight: passes.
  const auto good_kernel = [](const LogitModel& m, const Point& x, int y,
                              const GuidanceParams& p) {
    const TargetDistribution target =
        TargetDistribution::smoothed(m.num_classes(), y, p.epsilon);
    return divergence_guidance_grad(m, x, y, DivergenceKind::js, p.tau1, p.tau2, p.alpha,
                                    target)
        .value;
  };
  // Gradient assembled from the unhalved weight: twice the regularizer,
  // must fail the same check.
  const auto bad_kernel = [](const LogitModel& m, const Point& x, int y,
                             const GuidanceParams& p) {
    const TargetDistribution target =
        TargetDistribution::smoothed(m.num_classes(), y, p.epsilon);
    const Eigen::VectorXd logits = m.logits(x);
    const Eigen::MatrixXd grads = m.logit_grads(x);
    Eigen::VectorXd f = logits;
    const double mx = f.maxCoeff();
    Eigen::VectorXd p2 = ((p.tau2 * logits).array() - (p.tau2 * logits).maxCoeff()).exp();
    p2 /= p2.sum();
    Eigen::VectorXd pr = (f.array() - mx).exp();
    pr /= pr.sum();
    Eigen::VectorXd value =
        p.tau1 * grads.row(y).transpose() - p.tau2 * (grads.transpose() * p2);
    const Eigen::VectorXd mean_grad = grads.transpose() * pr;
    for (int i = 0; i < pr.size(); ++i) {
      const double w = js_unhalved_weight(target.q[i], pr[i]);
      value -= p.alpha * w * (grads.row(i).transpose() - mean_grad);
    }
    return value;
  };
  const auto field = [](const LogitModel& m, const Point& x, int y,
                        const GuidanceParams& p) {
    const TargetDistribution target =
        TargetDistribution::smoothed(m.num_classes(), y, p.epsilon);
    return divergence_score(m, x, y, DivergenceKind::js, p.tau1, p.tau2, p.alpha, target.q);
  };
  const auto good = check_guidance_grad("js-good", good_kernel, field, 50, 13, 1e-5);
  const auto bad = check_guidance_grad("js-unhalved", bad_kernel, field, 50, 13, 1e-5);
  CHECK(good.pass);
  CHECK(!bad.pass);
  CHECK(bad.max_rel_error > 1e-3);
}

TEST_CASE("gaussian identity check holds at a stringent tolerance") {
  const auto report = check_gaussian_identity(100, 21, 1e-10);
  CHECK(report.pass);
  CHECK(report.max_rel_error < 1e-10);
}

TEST_CASE("the gaussian identity check reports the density-variant deviation") {
  const auto report = check_gaussian_identity(50, 5, 1e-8);
  CHECK(report.pass);
  CHECK(report.note.find("density-factor") != std::string::npos);
}

TEST_CASE("the full battery passes at the acceptance budget") {
  const auto reports = run_all(2024, 100);
  for (const auto& r : reports) {
    INFO(r.name, ": rel=", r.max_rel_error, " tol=", r.tolerance);
    CHECK(r.pass);
    CHECK(r.trials >= 100);
  }
}

TEST_CASE("reports serialize to json") {
  OracleReport r;
  r.name = "demo";
  r.pass = true;
  r.trials = 5;
  const auto j = r.to_json();
  CHECK(j.find("\"name\":\"demo\"") != std::string::npos);
  CHECK(j.find("\"pass\":true") != std::string::npos);
}
