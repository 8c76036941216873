#include <cmath>

#include "doctest.h"
#include "phidro/errors.hpp"
#include "phidro/regfx.hpp"
#include "test_util.hpp"

using namespace phidro;

namespace {

const std::vector<std::vector<double>> kAtoms = {
    {0.3, -0.2}, {-0.5, 0.4}, {0.1, 0.8}};

BallAtoms small_ball(Norm norm = Norm::L2) {
  return unit_ball_atoms(2, norm, 1024);
}

}  // namespace

TEST_CASE("test loss gradients match finite differences") {
  for (const char* name : {"linear", "quadratic", "logsumexp"}) {
    auto loss = parse_test_loss(name);
    for (const auto& z : kAtoms) {
      std::vector<double> g(2);
      loss.grad(z, g);
      auto fd = testutil::finite_diff(
          [&](const std::vector<double>& p) { return loss.value(p); }, z);
      for (int i = 0; i < 2; ++i)
        CHECK(testutil::rel_err(g[i], fd[i]) <= 1e-6);
    }
  }
}

TEST_CASE("ball atoms have unit measure geometry") {
  auto pol = unit_ball_atoms(2, Norm::L2, 512);
  CHECK(pol.deterministic);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t j = 0; j < pol.count; ++j) {
    double x = pol.pts[2 * j], y = pol.pts[2 * j + 1];
    double r2 = x * x + y * y;
    CHECK(r2 <= 1.0 + 1e-12);
    s1 += x;
    s2 += r2;
  }
  CHECK(std::fabs(s1 / pol.count) <= 1e-12);           // symmetric
  CHECK(s2 / pol.count == doctest::Approx(0.5).epsilon(1e-4));  // E r^2 = 1/2

  auto box = unit_ball_atoms(2, Norm::Linf, 128);
  for (std::size_t j = 0; j < box.count; ++j) {
    CHECK(std::fabs(box.pts[2 * j]) <= 1.0);
    CHECK(std::fabs(box.pts[2 * j + 1]) <= 1.0);
  }
  auto mc = unit_ball_atoms(3, Norm::L2, 4096, 5000, 3);
  CHECK(!mc.deterministic);
  CHECK(mc.count == 5000);
}

TEST_CASE("variation regularizer closed forms") {
  auto lin = make_linear_loss({2.0, -1.0});
  CHECK(variation_regularizer(lin, kAtoms, 0.5, Norm::Linf) ==
        doctest::Approx(0.5 * 3.0));  // L1 norm of the gradient
  CHECK(variation_regularizer(lin, kAtoms, 0.5, Norm::L2) ==
        doctest::Approx(0.5 * std::sqrt(5.0)));
  auto zero = make_linear_loss({0.0, 0.0});
  CHECK(variation_regularizer(zero, kAtoms, 0.5, Norm::L2) == 0.0);
  // quadratic loss: analytic per-atom gradient A z + b
  auto quad = parse_test_loss("quadratic");
  double expect = 0.0;
  for (const auto& z : kAtoms) {
    double g0 = 3.0 * z[0] + 0.5 * z[1] + 0.5;
    double g1 = 0.5 * z[0] + 1.5 * z[1] - 1.0;
    expect += std::sqrt(g0 * g0 + g1 * g1) / kAtoms.size();
  }
  CHECK(variation_regularizer(quad, kAtoms, 0.25, Norm::L2) ==
        doctest::Approx(0.25 * expect));
}

TEST_CASE("variance regularizer matches the ball identity") {
  auto ball = small_ball();
  auto lin = make_linear_loss({2.0, -1.0});
  auto kl = make_divergence(DivergenceKind::KL);
  auto quad_div = make_divergence(DivergenceKind::Quadratic);
  double rho = 0.2, eta = 0.5;
  // Var_b(a.b) = ||a||^2 / (d + 2) on the unit L2 ball, d = 2
  double want = rho * rho / (2.0 * eta) * 5.0 / 4.0;
  auto r3 = variance_regularizer(lin, {{0.0, 0.0}}, rho, eta, kl, ball);
  CHECK(r3.value == doctest::Approx(want).epsilon(1e-3));
  auto r3q = variance_regularizer(lin, {{0.0, 0.0}}, rho, eta, quad_div, ball);
  CHECK(r3.value == doctest::Approx(r3q.value).epsilon(1e-12));
  CHECK_THROWS_AS(variance_regularizer(
                      lin, kAtoms, rho, eta,
                      make_divergence(DivergenceKind::Hinge), ball),
                  ParameterError);
  // zero gradient
  auto zero = make_linear_loss({0.0, 0.0});
  CHECK(variance_regularizer(zero, kAtoms, rho, eta, kl, ball).value == 0.0);
}

TEST_CASE("regularizer gap basics") {
  auto ball = small_ball();
  auto kl = make_divergence(DivergenceKind::KL);

  // constant loss: gap is identically zero
  auto zero = make_linear_loss({0.0, 0.0});
  for (auto kind : {DivergenceKind::KL, DivergenceKind::Quadratic,
                    DivergenceKind::AbsoluteValue, DivergenceKind::Hinge}) {
    auto d = make_divergence(kind);
    CHECK(regularizer_gap(zero, kAtoms, 0.3, 0.4, d, ball).value ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  // linear loss, eta -> 0: gap approaches rho ||a||_2
  auto lin = make_linear_loss({2.0, -1.0});
  double rho = 0.125;
  double g_small =
      regularizer_gap(lin, {{0.0, 0.0}}, rho, rho * 1e-3, kl, ball).value;
  CHECK(g_small == doctest::Approx(rho * std::sqrt(5.0)).epsilon(0.02));

  // nondecreasing in rho at fixed eta
  double prev = -1.0;
  for (double r : {0.05, 0.1, 0.2, 0.4}) {
    double g = regularizer_gap(lin, kAtoms, r, 0.1, kl, ball).value;
    CHECK(g >= prev - 1e-12);
    prev = g;
  }

  // sandwich: 0 <= gap <= max-over-ball - loss at atom (convex losses)
  auto quad = parse_test_loss("quadratic");
  for (auto kind : {DivergenceKind::KL, DivergenceKind::Quadratic}) {
    auto d = make_divergence(kind);
    for (const auto& z : kAtoms) {
      double gap = regularizer_gap(quad, {z}, 0.3, 0.2, d, ball).value;
      double worst = -1e300;
      std::vector<double> zp(2);
      for (std::size_t j = 0; j < ball.count; ++j) {
        zp[0] = z[0] + 0.3 * ball.pts[2 * j];
        zp[1] = z[1] + 0.3 * ball.pts[2 * j + 1];
        worst = std::max(worst, quad.value(zp));
      }
      CHECK(gap >= -1e-10);
      CHECK(gap <= worst - quad.value(z) + 1e-10);
    }
  }
}

TEST_CASE("surrogate gap: exact for linear, quadratic remainder for smooth") {
  auto ball = small_ball();
  auto kl = make_divergence(DivergenceKind::KL);
  auto lin = make_linear_loss({2.0, -1.0});
  double rho = 0.25, eta = 0.1;
  double eps = regularizer_gap(lin, {{0.0, 0.0}}, rho, eta, kl, ball).value;
  double sur = surrogate_gap(lin, {{0.0, 0.0}}, rho, eta, kl, ball).value;
  CHECK(eps == doctest::Approx(sur).epsilon(1e-10));

  // |eps - surrogate| = O(rho^2): the log-log slope over halvings is near 2
  auto quad = parse_test_loss("quadratic");
  std::vector<double> rhos, gaps;
  for (int k = 2; k <= 6; ++k) {
    double r = std::pow(2.0, -k);
    double e = regularizer_gap(quad, kAtoms, r, r, kl, ball).value;
    double s = surrogate_gap(quad, kAtoms, r, r, kl, ball).value;
    rhos.push_back(std::log(r));
    gaps.push_back(std::log(std::max(std::fabs(e - s), 1e-300)));
  }
  // least-squares slope
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    mx += rhos[i];
    my += gaps[i];
  }
  mx /= rhos.size();
  my /= gaps.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    sxy += (rhos[i] - mx) * (gaps[i] - my);
    sxx += (rhos[i] - mx) * (rhos[i] - mx);
  }
  double slope = sxy / sxx;
  CHECK(slope >= 1.6);
  CHECK(slope <= 2.6);

  // zero gradient: surrogate is exactly zero
  auto zero = make_linear_loss({0.0, 0.0});
  CHECK(surrogate_gap(zero, kAtoms, rho, eta, kl, ball).value ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("oce regularizer interpolates between R2 and R3") {
  auto ball = small_ball();
  auto kl = make_divergence(DivergenceKind::KL);
  auto lin = make_linear_loss({2.0, -1.0});
  double rho = 0.2;

  auto r2 = variation_regularizer(lin, kAtoms, rho, Norm::L2);
  auto r1_big = oce_regularizer(lin, kAtoms, rho, 1e3, kl, ball);
  CHECK(std::fabs(r1_big.value - r2) <= 0.02 * r2);

  double eta_for_small_c = rho / 1e-2;  // C = rho / eta
  auto r3 = variance_regularizer(lin, kAtoms, rho, eta_for_small_c, kl, ball);
  auto r1_small = oce_regularizer(lin, kAtoms, rho, 1e-2, kl, ball);
  CHECK(std::fabs(r1_small.value - r3.value) <= 0.05 * r3.value);

  // zero gradient -> 0
  auto zero = make_linear_loss({0.0, 0.0});
  CHECK(oce_regularizer(zero, kAtoms, rho, 1.0, kl, ball).value ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("scaling regimes decrease and hit the variation target") {
  auto ball = small_ball();
  auto quad = parse_test_loss("quadratic");
  auto lin = parse_test_loss("linear");

  for (auto regime :
       {Regime::Interp, Regime::VariationLimit, Regime::VarianceLimit}) {
    auto rep = run_scaling_study(quad, kAtoms, regime, 8, 1.0, ball);
    REQUIRE(rep.rows.size() == 8);
    for (std::size_t i = 3; i < rep.rows.size(); ++i)
      CHECK(rep.rows[i].rel_err <= rep.rows[i - 1].rel_err + 1e-10);
  }

  auto var = run_scaling_study(lin, kAtoms, Regime::VariationLimit, 5, 1.0, ball);
  CHECK(var.rows[3].rel_err <= 0.02);  // k = 4
}

TEST_CASE("golden section finds convex minima") {
  double x = golden_section_minimize(
      [](double t) { return (t - 1.3) * (t - 1.3) + 2.0; }, -10.0, 10.0, 1e-10);
  CHECK(x == doctest::Approx(1.3).epsilon(1e-7));
}

TEST_CASE("regime parsing") {
  double C = 0.0;
  CHECK(parse_regime("interp:2.5", &C) == Regime::Interp);
  CHECK(C == doctest::Approx(2.5));
  CHECK(parse_regime("variation", nullptr) == Regime::VariationLimit);
  CHECK(parse_regime("variance", nullptr) == Regime::VarianceLimit);
  CHECK_THROWS_AS(parse_regime("bogus", nullptr), ParameterError);
  CHECK_THROWS_AS(parse_regime("interp:-1", &C), ParameterError);
}

TEST_CASE("monte carlo path reports standard errors in higher dimension") {
  auto lin = make_linear_loss({1.0, -2.0, 0.5});
  auto ball = unit_ball_atoms(3, Norm::L2, 4096, 40000, 11);
  CHECK(!ball.deterministic);
  auto kl = make_divergence(DivergenceKind::KL);
  double rho = 0.2;
  auto gap = regularizer_gap(lin, {{0.0, 0.0, 0.0}}, rho, rho * 1e-3, kl, ball);
  CHECK(gap.stderr_ > 0.0);
  double target = rho * std::sqrt(1.0 + 4.0 + 0.25);
  CHECK(std::fabs(gap.value - target) <=
        0.05 * target + 3.0 * gap.stderr_);
  CHECK_THROWS_AS(unit_ball_atoms(3, Norm::L2, 4096, 50, 1), ParameterError);
}
