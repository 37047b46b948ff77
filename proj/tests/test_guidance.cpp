#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mixguide/guidance.hpp"
#include "mixguide/numerics.hpp"
#include "mixguide/oracles.hpp"

using namespace mixguide;

namespace {

AffineLogitModel zero_model(int classes, int dim) {
  return AffineLogitModel(Eigen::MatrixXd::Zero(classes, dim),
                          Eigen::VectorXd::Zero(classes));
}

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (const double x : vals) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("log_prob_tau collapses to log softmax at unit temperatures") {
  CHECK(log_prob_tau(vec({0.0, 0.0}), 0, 1.0, 1.0) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-14));

  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd logits(4);
    for (int i = 0; i < 4; ++i) logits[i] = 3.0 * rng.normal();
    const int y = static_cast<int>(rng.uniform() * 4);
    CHECK(std::abs(log_prob_tau(logits, y, 1.0, 1.0) - log_softmax(logits)[y]) < 1e-12);
  }
}

TEST_CASE("log_prob_tau matches a naive two-pass evaluation") {
  const Eigen::VectorXd logits = vec({2.0, 1.0, 0.0});
  // Frozen from the naive evaluation of tau1 f_y - log sum exp(tau2 f).
  CHECK(log_prob_tau(logits, 0, 1.0, 0.5) ==
        doctest::Approx(0.3197303293582654).epsilon(1e-13));
  double naive = 0.0;
  for (int i = 0; i < 3; ++i) naive += std::exp(0.5 * logits[i]);
  CHECK(log_prob_tau(logits, 0, 1.0, 0.5) ==
        doctest::Approx(2.0 - std::log(naive)).epsilon(1e-13));
  CHECK_THROWS_AS(log_prob_tau(logits, 0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("base guidance of a constant model vanishes") {
  const auto model = zero_model(3, 2);
  const auto g = base_guidance_grad(model, Eigen::VectorXd::Zero(2), 1, 1.0, 1.0);
  CHECK(g.value.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("base guidance with one class is the temperature difference") {
  Eigen::MatrixXd w(1, 2);
  w << 0.7, -0.4;
  const AffineLogitModel model(w, vec({0.2}));
  Point x(2);
  x << 0.3, 0.9;
  const auto g = base_guidance_grad(model, x, 0, 1.3, 0.6);
  const Eigen::VectorXd expected = (1.3 - 0.6) * w.row(0).transpose();
  CHECK((g.value - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("base guidance matches the finite difference of its score") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto model = oracles::random_affine(rng, 4, 2);
    Point x(2);
    x << rng.normal(), rng.normal();
    const int y = static_cast<int>(rng.uniform() * 4);
    const auto g = base_guidance_grad(model, x, y, 1.0, 1.0);
    const auto fd = oracles::finite_diff_grad(
        [&](const Point& p) { return oracles::base_score(model, p, y, 1.0, 1.0); }, x);
    CHECK((g.value - fd).norm() / std::max(fd.norm(), 1e-3) < 1e-6);
  }
}

TEST_CASE("entropy guidance reduces to base guidance at lambda zero") {
  Rng rng(41);
  const auto model = oracles::random_affine(rng, 5, 3);
  Point x(3);
  x << 0.4, -0.2, 1.0;
  const auto base = base_guidance_grad(model, x, 2, 1.2, 0.8);
  const auto ent = entropy_guidance_grad(model, x, 2, 1.2, 0.8, 0.0);
  for (int j = 0; j < 3; ++j) CHECK(base.value[j] == ent.value[j]);
}

TEST_CASE("entropy term vanishes at the uniform distribution") {
  // Equal logits make p uniform; the entropy gradient is then a multiple of
  // sum_i g_i = 0.
  Eigen::MatrixXd w(3, 2);
  w << 1.0, 0.0, 1.0, 0.0, 1.0, 0.0;  // identical rows, logits always equal
  const AffineLogitModel model(w, Eigen::VectorXd::Zero(3));
  Point x(2);
  x << 0.7, -0.1;
  const auto base = base_guidance_grad(model, x, 0, 1.0, 1.0);
  const auto ent = entropy_guidance_grad(model, x, 0, 1.0, 1.0, 0.7);
  CHECK((base.value - ent.value).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("entropy guidance matches the finite difference of its score") {
  Rng rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const auto model = oracles::random_affine(rng, 4, 2);
    Point x(2);
    x << rng.normal(), rng.normal();
    const int y = static_cast<int>(rng.uniform() * 4);
    const double lambda = 0.05 + 0.4 * rng.uniform();
    const auto g = entropy_guidance_grad(model, x, y, 1.0, 1.0, lambda);
    const auto fd = oracles::finite_diff_grad(
        [&](const Point& p) {
          return oracles::entropy_score(model, p, y, 1.0, 1.0, lambda);
        },
        x);
    CHECK((g.value - fd).norm() / std::max(fd.norm(), 1e-3) < 1e-6);
  }
}

TEST_CASE("a gradient-ascent step on the entropy term moves toward uniform") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = oracles::random_affine(rng, 2, 2);
    Point x(2);
    x << rng.normal(), rng.normal();
    const Eigen::VectorXd p = softmax(model.logits(x));
    if (std::abs(p[0] - 0.5) < 1e-6) continue;
    // Isolate the entropy contribution by differencing against the base term.
    const Eigen::VectorXd entropy_dir =
        entropy_guidance_grad(model, x, 0, 1.0, 1.0, 1.0).value -
        base_guidance_grad(model, x, 0, 1.0, 1.0).value;
    const Point stepped = x + 1e-4 * entropy_dir;
    const Eigen::VectorXd p2 = softmax(model.logits(stepped));
    CHECK(std::abs(p2[0] - 0.5) < std::abs(p[0] - 0.5));
  }
}

TEST_CASE("f_weight specializations") {
  CHECK(f_weight(DivergenceKind::rkl, 0.3, 0.9) == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(f_weight(DivergenceKind::rkl, 0.3, 0.0) == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(f_weight(DivergenceKind::hellinger, 0.4, 0.4) == doctest::Approx(0.0));
  CHECK(f_weight(DivergenceKind::fkl, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f_weight(DivergenceKind::fkl, 0.2, 0.0) == 0.0);
  CHECK(f_weight(DivergenceKind::js, 0.2, 0.0) == 0.0);
  CHECK(f_weight(DivergenceKind::hellinger, 0.2, 0.0) == 0.0);
  CHECK_THROWS_AS(f_weight(DivergenceKind::rkl, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("f_weight for fkl matches the numeric derivative of the divergence") {
  // w_f(q, p) = p * dD/dp restricted to the generator term; cross-check via
  // the numeric derivative of q f(p/q) in p.
  const double q = 0.5;
  for (const double p : {0.1, 0.3, 0.5, 0.9}) {
    const double h = 1e-7;
    const auto term = [&](double pv) { return q * generator_f(DivergenceKind::fkl, pv / q); };
    const double dfdp = (term(p + h) - term(p - h)) / (2.0 * h);
    CHECK(f_weight(DivergenceKind::fkl, q, p) == doctest::Approx(p * dfdp).epsilon(1e-6));
  }
}

TEST_CASE("generator metadata satisfies f(1) = 0 and matches the weights") {
  Rng rng(3);
  for (const auto kind : {DivergenceKind::rkl, DivergenceKind::fkl, DivergenceKind::js,
                          DivergenceKind::hellinger}) {
    CHECK(std::abs(generator_f(kind, 1.0)) < 1e-15);
    for (int trial = 0; trial < 20; ++trial) {
      const double q = 0.1 + 0.8 * rng.uniform();
      const double p = 0.05 + 0.9 * rng.uniform();
      CHECK(f_weight(kind, q, p) ==
            doctest::Approx(p * generator_fprime(kind, p / q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("divergence values at reference points") {
  const Eigen::VectorXd q5 = vec({0.28, 0.18, 0.18, 0.18, 0.18});
  const Eigen::VectorXd p5 = vec({0.6, 0.1, 0.1, 0.1, 0.1});
  // Frozen from the brute-force sum of q log(q/p).
  CHECK(divergence_value(DivergenceKind::rkl, q5, p5) ==
        doctest::Approx(0.20980718415639457).epsilon(1e-12));
  CHECK(divergence_value(DivergenceKind::rkl, q5, p5) ==
        doctest::Approx(oracles::brute_force_divergence(DivergenceKind::rkl, q5, p5))
            .epsilon(1e-12));

  for (const auto kind : {DivergenceKind::rkl, DivergenceKind::fkl, DivergenceKind::js,
                          DivergenceKind::hellinger}) {
    CHECK(std::abs(divergence_value(kind, q5, q5)) < 1e-14);
  }

  // Near one-hot versus the opposite corner stays below the JS bound.
  const auto qa = TargetDistribution::smoothed(2, 0, 0.999).q;
  const auto qb = TargetDistribution::smoothed(2, 1, 0.999).q;
  CHECK(divergence_value(DivergenceKind::js, qa, qb) <= std::log(2.0));
  CHECK(divergence_value(DivergenceKind::js, qa, qb) > 0.9 * std::log(2.0));
}

TEST_CASE("divergence_value validates its inputs") {
  CHECK_THROWS_AS(divergence_value(DivergenceKind::rkl, vec({0.5, 0.5}), vec({0.9, 0.2})),
                  std::invalid_argument);
  CHECK_THROWS_AS(divergence_value(DivergenceKind::rkl, vec({1.0, 0.0}), vec({0.5, 0.5})),
                  std::invalid_argument);
  CHECK_THROWS_AS(divergence_value(DivergenceKind::rkl, vec({0.5, 0.5}), vec({0.5})),
                  std::invalid_argument);
}

TEST_CASE("js divergence is symmetric and bounded") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 8);
    const auto q = oracles::random_simplex(rng, n, 1e-3);
    const auto p = oracles::random_simplex(rng, n, 1e-3);
    const double qp = divergence_value(DivergenceKind::js, q, p);
    const double pq = divergence_value(DivergenceKind::js, p, q);
    CHECK(std::abs(qp - pq) < 1e-12);
    CHECK(qp <= std::log(2.0) + 1e-12);
    CHECK(qp >= 0.0);
  }
}

TEST_CASE("target distribution construction") {
  const auto t = TargetDistribution::smoothed(5, 2, 0.1);
  CHECK(t.q[2] == doctest::Approx(0.28).epsilon(1e-14));
  CHECK(t.q[0] == doctest::Approx(0.18).epsilon(1e-14));
  CHECK(std::abs(t.q.sum() - 1.0) < 1e-15);
  CHECK(t.q.minCoeff() > 0.0);

  const auto onehot = TargetDistribution::smoothed(1, 0, 0.3);
  CHECK(onehot.q[0] == 1.0);
  CHECK_THROWS_AS(TargetDistribution::smoothed(3, 5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(TargetDistribution::smoothed(3, 0, 1.5), std::invalid_argument);
}

TEST_CASE("divergence guidance with alpha zero equals base guidance exactly") {
  Rng rng(9);
  const auto model = oracles::random_affine(rng, 4, 2);
  Point x(2);
  x << 0.5, -1.0;
  const auto target = TargetDistribution::smoothed(4, 1, 0.1);
  const auto base = base_guidance_grad(model, x, 1, 1.0, 0.5);
  const auto div =
      divergence_guidance_grad(model, x, 1, DivergenceKind::js, 1.0, 0.5, 0.0, target);
  for (int j = 0; j < 2; ++j) CHECK(base.value[j] == div.value[j]);
}

TEST_CASE("rkl regularizer equals the target-minus-current decomposition") {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const int classes = 2 + static_cast<int>(rng.uniform() * 6);
    const auto model = oracles::random_affine(rng, classes, 2);
    Point x(2);
    x << rng.normal(), rng.normal();
    const int y = static_cast<int>(rng.uniform() * classes);
    const double alpha = 0.05 + rng.uniform();
    const auto target = TargetDistribution::smoothed(classes, y, 0.1);

    const Eigen::VectorXd reg =
        divergence_guidance_grad(model, x, y, DivergenceKind::rkl, 1.0, 1.0, alpha, target)
            .value -
        base_guidance_grad(model, x, y, 1.0, 1.0).value;
    const Eigen::MatrixXd grads = model.logit_grads(x);
    const Eigen::VectorXd p = softmax(model.logits(x));
    const Eigen::VectorXd lemma =
        alpha * (grads.transpose() * target.q - grads.transpose() * p);
    CHECK((reg - lemma).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("every divergence gradient matches the finite difference of its score") {
  Rng rng(11);
  for (const auto kind : {DivergenceKind::rkl, DivergenceKind::fkl, DivergenceKind::js,
                          DivergenceKind::hellinger}) {
    for (int trial = 0; trial < 25; ++trial) {
      const int classes = 2 + static_cast<int>(rng.uniform() * 6);
      const auto model = oracles::random_affine(rng, classes, 2);
      Point x(2);
      x << rng.normal(), rng.normal();
      const int y = static_cast<int>(rng.uniform() * classes);
      const double alpha = 0.05 + 0.4 * rng.uniform();
      const auto target = TargetDistribution::smoothed(classes, y, 0.1);
      const auto g =
          divergence_guidance_grad(model, x, y, kind, 1.0, 0.7, alpha, target);
      const auto fd = oracles::finite_diff_grad(
          [&](const Point& p) {
            return oracles::divergence_score(model, p, y, kind, 1.0, 0.7, alpha, target.q);
          },
          x);
      CHECK((g.value - fd).norm() / std::max(fd.norm(), 1e-3) < 1e-6);
    }
  }
}

TEST_CASE("softmax gradient identity holds for both backends") {
  Rng rng(12);
  const auto affine = oracles::random_affine(rng, 4, 2);
  const auto gmm = oracles::random_mixture(rng, 3, 2);
  const AnalyticLogitModel analytic(gmm);
  const LogitModel* models[] = {&affine, &analytic};
  for (const auto* model : models) {
    for (int trial = 0; trial < 20; ++trial) {
      Point x(2);
      x << rng.normal(), rng.normal();
      const int i = static_cast<int>(rng.uniform() * model->num_classes());
      const Eigen::MatrixXd grads = model->logit_grads(x);
      const Eigen::VectorXd p = softmax(model->logits(x));
      const Eigen::VectorXd analytic_grad =
          grads.row(i).transpose() - grads.transpose() * p;
      const auto fd = oracles::finite_diff_grad(
          [&](const Point& q) {
            const Eigen::VectorXd l = model->logits(q);
            return l[i] - logsumexp(l);
          },
          x);
      CHECK((analytic_grad - fd).norm() / std::max(fd.norm(), 1e-3) < 1e-6);
    }
  }
}

TEST_CASE("gamma weights collapse for a single component") {
  Eigen::VectorXd w(1);
  w << 1.0;
  const GaussianMixture g(w, {Eigen::VectorXd::Zero(2)},
                          {Eigen::MatrixXd::Identity(2, 2)});
  const auto target = TargetDistribution::smoothed(1, 0, 0.1);
  Point x(2);
  x << 0.4, 0.4;
  const Eigen::VectorXd gamma = gamma_weights(g, x, 0, 1.4, 0.9, 0.3, target);
  CHECK(gamma[0] == 1.4 - 0.9);  // exact: q(0) = 1 and w(0) = 1
}

TEST_CASE("gamma weights collapse to classic guidance weights at alpha zero") {
  Rng rng(13);
  const auto g = oracles::random_mixture(rng, 4, 2);
  const auto target = TargetDistribution::smoothed(4, 2, 0.1);
  Point x(2);
  x << rng.normal(), rng.normal();
  const Eigen::VectorXd gamma = gamma_weights(g, x, 2, 1.0, 1.0, 0.0, target);
  const Eigen::VectorXd w = g.posterior(x);
  for (int k = 0; k < 4; ++k) {
    const double expected = (k == 2 ? 1.0 : 0.0) - w[k];
    CHECK(gamma[k] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("gamma assembly reproduces the analytic rkl gradient") {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform() * 3);
    const auto g = oracles::random_mixture(rng, k, 2);
    const AnalyticLogitModel model(g);
    const int y = static_cast<int>(rng.uniform() * k);
    const auto target = TargetDistribution::smoothed(k, y, 0.1);
    Point x(2);
    x << 2.0 * rng.normal(), 2.0 * rng.normal();
    const Eigen::VectorXd gamma = gamma_weights(g, x, y, 1.0, 1.0, 0.1, target);
    const Eigen::VectorXd assembled = gamma_assembled_grad(g, x, gamma);
    const Eigen::VectorXd generic =
        divergence_guidance_grad(model, x, y, DivergenceKind::rkl, 1.0, 1.0, 0.1, target)
            .value;
    CHECK((assembled - generic).norm() / std::max(generic.norm(), 1e-3) < 1e-10);
  }
}

TEST_CASE("tilted weights") {
  const Eigen::VectorXd lp3 = vec({-0.1, -0.7, -2.0});
  const Eigen::VectorXd w0 = tilted_weights(lp3, 0.0);
  for (int i = 0; i < 3; ++i) CHECK(w0[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(tilted_scale_factors(lp3, 0.0).isOnes());

  const Eigen::VectorXd lp = vec({std::log(0.9), std::log(0.1)});
  const Eigen::VectorXd w1 = tilted_weights(lp, 1.0);
  CHECK(w1[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(w1[1] == doctest::Approx(0.1).epsilon(1e-12));
  const Eigen::VectorXd wn = tilted_weights(lp, -1.0);
  CHECK(wn[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(wn[1] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("tilted weights match the direct formula at a mild negative tilt") {
  const double t = -0.2;
  const Eigen::VectorXd lp = vec({-0.11, -2.3, -0.4, -1.2});
  const Eigen::VectorXd w = tilted_weights(lp, t);
  double denom = 0.0;
  for (int i = 0; i < 4; ++i) denom += std::exp(t * lp[i]);
  for (int i = 0; i < 4; ++i)
    CHECK(w[i] == doctest::Approx(std::exp(t * lp[i]) / denom).epsilon(1e-12));
  CHECK(std::abs(w.sum() - 1.0) < 1e-12);
}

TEST_CASE("tilted guidance leaves gradients alone at t = 0 and for one chain") {
  std::vector<GuidanceGradient> grads(2);
  grads[0].value = vec({1.0, 2.0});
  grads[1].value = vec({-3.0, 0.5});
  const Eigen::VectorXd lp = vec({-0.2, -1.5});
  const auto same = tilted_guidance(grads, lp, 0.0);
  for (size_t i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(same[i].value[j] == grads[i].value[j]);

  std::vector<GuidanceGradient> one(1);
  one[0].value = vec({0.7, -0.7});
  const auto scaled = tilted_guidance(one, vec({-0.4}), -0.8);
  CHECK(scaled[0].value[0] == one[0].value[0]);
  CHECK(scaled[0].value[1] == one[0].value[1]);
}

TEST_CASE("the unhalved js weight is twice the derivative-consistent one") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const double q = 0.1 + 0.8 * rng.uniform();
    const double p = 0.05 + 0.9 * rng.uniform();
    CHECK(js_unhalved_weight(q, p) ==
          doctest::Approx(2.0 * f_weight(DivergenceKind::js, q, p)).epsilon(1e-14));
  }
}
