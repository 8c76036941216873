#include <cmath>
#include <vector>

#include "doctest.h"
#include "phidro/density.hpp"
#include "phidro/errors.hpp"

using namespace phidro;

namespace {

std::vector<double> landscape_values(const ToyLandscape& land,
                                     const Grid1D& grid) {
  std::vector<double> v(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) v[j] = land.loss(grid.points[j]);
  return v;
}

double integrate(const WorstCaseDensity& d) {
  double s = 0.0;
  for (double v : d.density) s += v * d.grid.weight;
  return s;
}

}  // namespace

TEST_CASE("grid construction") {
  auto g = make_grid(-5.0, 5.0, 100);
  CHECK(g.weight == doctest::Approx(0.1));
  CHECK(g.points.front() == doctest::Approx(-4.95));
  CHECK(g.points.back() == doctest::Approx(4.95));
  for (std::size_t j = 1; j < g.n; ++j) CHECK(g.points[j] > g.points[j - 1]);
  CHECK_THROWS_AS(make_grid(1.0, 0.0, 10), ParameterError);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 1), ParameterError);
}

TEST_CASE("toy landscape determinism and shape") {
  ToyLandscape a(kToyLandscapeSeed), b(kToyLandscapeSeed);
  double va = a.loss(1.5), vb = b.loss(1.5);
  CHECK(va == vb);  // identical bits
  CHECK(a.loss(1.5) == va);

  ToyLandscape c(kToyLandscapeSeed + 1);
  CHECK(c.loss(1.5) != va);

  // nonnegative and finite on the domain; grid argmax dominates the grid
  auto grid = make_grid(-5.0, 5.0, 2000);
  auto vals = landscape_values(a, grid);
  double best = vals[0];
  for (double v : vals) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    best = std::max(best, v);
  }
  for (double v : vals) CHECK(best >= v);
}

TEST_CASE("indicator alpha=1 density is exactly uniform") {
  ToyLandscape land(kToyLandscapeSeed);
  auto grid = make_grid(-5.0, 5.0, 2000);
  auto d = worst_case_density([&](double z) { return land.loss(z); }, 0.0, 5.0,
                              make_divergence(DivergenceKind::Indicator, 1.0),
                              1.0, grid);
  for (double v : d.density) CHECK(std::fabs(v - 0.1) <= 1e-10);
  CHECK(integrate(d) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kl density flattens for huge eta") {
  ToyLandscape land(kToyLandscapeSeed);
  auto grid = make_grid(-5.0, 5.0, 2000);
  auto d = worst_case_density([&](double z) { return land.loss(z); }, 0.0, 5.0,
                              make_divergence(DivergenceKind::KL), 1e3, grid);
  double lo = d.density[0], hi = d.density[0];
  for (double v : d.density) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi / lo <= 1.01);
  CHECK(integrate(d) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("quadratic density is exactly zero off its support") {
  ToyLandscape land(kToyLandscapeSeed);
  auto grid = make_grid(-5.0, 5.0, 2000);
  auto vals = landscape_values(land, grid);
  auto d = worst_case_density([&](double z) { return land.loss(z); }, 0.0, 5.0,
                              make_divergence(DivergenceKind::Quadratic), 0.05,
                              grid);
  // recover mu from the density: gamma_j > 0 iff f_j > mu
  bool has_zero = false, has_pos = false;
  double mu_hint = -1e300;
  for (std::size_t j = 0; j < grid.n; ++j) {
    if (d.density[j] == 0.0) {
      has_zero = true;
      mu_hint = std::max(mu_hint, vals[j]);
    } else {
      has_pos = true;
    }
  }
  CHECK(has_zero);
  CHECK(has_pos);
  for (std::size_t j = 0; j < grid.n; ++j)
    if (vals[j] < mu_hint) CHECK(d.density[j] == 0.0);
  CHECK(integrate(d) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("absolute and hinge densities are uniform on their support") {
  ToyLandscape land(kToyLandscapeSeed);
  auto grid = make_grid(-5.0, 5.0, 2000);
  auto vals = landscape_values(land, grid);
  double f_hi = vals[0];
  for (double v : vals) f_hi = std::max(f_hi, v);
  const double eta = 0.4;
  struct Case {
    DivergenceKind kind;
    double pop;
  };
  for (auto c : {Case{DivergenceKind::AbsoluteValue, 2.0 * eta},
                 Case{DivergenceKind::Hinge, eta}}) {
    auto d = worst_case_density([&](double z) { return land.loss(z); }, 0.0,
                                5.0, make_divergence(c.kind), eta, grid);
    double positive = 0.0;
    for (std::size_t j = 0; j < grid.n; ++j) {
      bool in_support = vals[j] >= f_hi - c.pop - 1e-9;
      if (d.density[j] > 0.0) {
        CHECK(in_support);
        if (positive == 0.0) positive = d.density[j];
        CHECK(d.density[j] == doctest::Approx(positive).epsilon(1e-9));
      } else if (vals[j] < f_hi - c.pop - 1e-9) {
        CHECK(d.density[j] == 0.0);
      }
    }
    CHECK(integrate(d) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("kl concentration rises as eta falls") {
  ToyLandscape land(kToyLandscapeSeed);
  auto grid = make_grid(-5.0, 5.0, 2000);
  auto vals = landscape_values(land, grid);
  double prev = -1.0;
  for (double eta : {10.0, 1.0, 0.1, 0.01}) {
    auto d = worst_case_density([&](double z) { return land.loss(z); }, 0.0,
                                5.0, make_divergence(DivergenceKind::KL), eta,
                                grid);
    double c = density_concentration(d, vals, 0.5);
    if (prev >= 0.0) CHECK(c >= prev - 0.02);
    prev = c;
  }
  CHECK(prev >= 0.9);  // eta = 0.01 concentrates near the argmax
}

TEST_CASE("density_concentration edge cases") {
  auto grid = make_grid(-1.0, 1.0, 10);
  WorstCaseDensity d;
  d.grid = grid;
  d.density.assign(grid.n, 0.5);  // uniform on [-1, 1]
  std::vector<double> vals(grid.n, 0.0);
  vals[7] = 1.0;
  CHECK(density_concentration(d, vals, 2.0) == doctest::Approx(1.0));
  // point mass at the argmax cell
  std::fill(d.density.begin(), d.density.end(), 0.0);
  d.density[7] = 1.0 / grid.weight;
  CHECK(density_concentration(d, vals, 0.05) == doctest::Approx(1.0));
}

TEST_CASE("mixtures average per-atom densities") {
  ToyLandscape land(kToyLandscapeSeed);
  auto grid = make_grid(-7.0, 7.0, 1400);
  auto kl = make_divergence(DivergenceKind::KL);
  auto loss = [&](double z) { return land.loss(z); };
  auto mix = worst_case_density_mixture(loss, {-1.0, 1.0}, {0.25, 0.75}, 5.0,
                                        kl, 1.0, grid);
  auto d1 = worst_case_density(loss, -1.0, 5.0, kl, 1.0, grid);
  auto d2 = worst_case_density(loss, 1.0, 5.0, kl, 1.0, grid);
  for (std::size_t j = 0; j < grid.n; ++j)
    CHECK(mix.density[j] ==
          doctest::Approx(0.25 * d1.density[j] + 0.75 * d2.density[j]));
  CHECK(integrate(mix) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("coverage and resolution errors") {
  ToyLandscape land(kToyLandscapeSeed);
  auto grid = make_grid(-1.0, 1.0, 50);
  auto loss = [&](double z) { return land.loss(z); };
  CHECK_THROWS_AS(worst_case_density(loss, 0.0, 5.0,
                                     make_divergence(DivergenceKind::KL), 1.0,
                                     grid),
                  ParameterError);
  // indicator needs alpha * (points in ball) >= 1
  auto tiny = make_grid(-5.0, 5.0, 40);
  CHECK_THROWS_AS(
      worst_case_density(loss, 0.0, 5.0,
                         make_divergence(DivergenceKind::Indicator, 0.01), 1.0,
                         tiny),
      NumericalError);
}

TEST_CASE("indicator density takes at most two levels plus a boundary cell") {
  ToyLandscape land(kToyLandscapeSeed);
  auto grid = make_grid(-5.0, 5.0, 2000);
  const double alpha = 0.37;
  auto d = worst_case_density([&](double z) { return land.loss(z); }, 0.0, 5.0,
                              make_divergence(DivergenceKind::Indicator, alpha),
                              1.0, grid);
  double cap = 1.0 / (alpha * 10.0);  // (alpha * 2 rho)^{-1}
  std::size_t at_cap = 0, boundary = 0;
  for (double v : d.density) {
    if (v == 0.0) continue;
    if (std::fabs(v - cap) <= 1e-9 * cap)
      ++at_cap;
    else
      ++boundary;
  }
  CHECK(at_cap > 0);
  CHECK(boundary <= 1);
  CHECK(integrate(d) == doctest::Approx(1.0).epsilon(1e-6));
}
