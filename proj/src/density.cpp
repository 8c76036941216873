#include "phidro/density.hpp"

#include <cassert>
#include <cmath>

#include "phidro/errors.hpp"
#include "phidro/inner.hpp"
#include "phidro/kernels.hpp"
#include "phidro/parallel.hpp"
#include "phidro/rng.hpp"

namespace phidro {

Grid1D make_grid(double lo, double hi, std::size_t n) {
  if (n < 2) throw ParameterError("grid needs n >= 2");
  if (!(lo < hi)) throw ParameterError("grid needs lo < hi");
  Grid1D g;
  g.lo = lo;
  g.hi = hi;
  g.n = n;
  g.weight = (hi - lo) / static_cast<double>(n);
  g.points.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    g.points[j] = lo + (static_cast<double>(j) + 0.5) * g.weight;
  return g;
}

ToyLandscape::ToyLandscape(std::uint64_t seed) : seed_(seed) {
  Rng rng(seed);
  w1_.resize(kHidden * 5);
  w2_.resize(kHidden * kHidden);
  w3_.resize(kPenult * kHidden);
  w4_.resize(kPenult);
  for (auto& w : w1_) w = 0.5 * rng.next_gaussian();  // N(0, 0.25)
  for (auto& w : w2_) w = rng.next_gaussian();
  for (auto& w : w3_) w = rng.next_gaussian();
  for (auto& w : w4_) w = rng.next_gaussian();
}

double ToyLandscape::network(double z) const {
  const double basis[5] = {z, std::sqrt(std::fabs(z)), z * z, std::sin(z),
                           std::cos(z)};
  std::vector<double> h1(kHidden), h2(kHidden), h3(kPenult);
  kernels::matvec(w1_, kHidden, 5, std::span<const double>(basis, 5), h1);
  kernels::softplus(h1, h1);
  kernels::matvec(w2_, kHidden, kHidden, h1, h2);
  kernels::softplus(h2, h2);
  kernels::matvec(w3_, kPenult, kHidden, h2, h3);
  kernels::sigmoid(h3, h3);
  return kernels::dot(w4_, h3);
}

double ToyLandscape::loss(double z) const {
  double g = network(z);
  return g * g;
}

namespace {

// Inner solve over the grid points that fall inside the ball; gamma is
// mapped back onto the full grid.
WorstCaseDensity density_single(const std::vector<double>& loss_on_grid,
                                double center, double rho,
                                const DivergenceSpec& divergence, double eta,
                                const Grid1D& grid) {
  if (!(rho > 0.0)) throw ParameterError("density needs rho > 0");
  if (center - rho < grid.lo - 0.5 * grid.weight ||
      center + rho > grid.hi + 0.5 * grid.weight)
    throw ParameterError("grid does not cover the perturbation ball");

  std::vector<std::size_t> inside;
  inside.reserve(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j)
    if (std::fabs(grid.points[j] - center) <= rho) inside.push_back(j);
  if (inside.size() < 2)
    throw NumericalError("grid too coarse: ball contains fewer than 2 points");

  InnerProblem p;
  p.eta = eta;
  p.divergence = divergence;
  p.values.reserve(inside.size());
  for (std::size_t j : inside) p.values.push_back(loss_on_grid[j]);

  InnerSolution sol = solve_inner(p, 1e-12);

  WorstCaseDensity d;
  d.grid = grid;
  d.divergence = divergence;
  d.eta = eta;
  d.value = sol.value;
  d.density.assign(grid.n, 0.0);
  // gamma_j / cell width = m gamma_j / (2 rho) on an exactly covering grid
  for (std::size_t k = 0; k < inside.size(); ++k)
    d.density[inside[k]] = sol.gamma[k] / grid.weight;
  return d;
}

std::vector<double> eval_on_grid(const std::function<double(double)>& loss,
                                 const Grid1D& grid) {
  std::vector<double> v(grid.n);
  par::parallel_for(static_cast<std::int64_t>(grid.n), [&](std::int64_t j) {
    v[static_cast<std::size_t>(j)] = loss(grid.points[static_cast<std::size_t>(j)]);
  });
  return v;
}

}  // namespace

WorstCaseDensity worst_case_density(const std::function<double(double)>& loss,
                                    double center, double rho,
                                    const DivergenceSpec& divergence,
                                    double eta, const Grid1D& grid) {
  return density_single(eval_on_grid(loss, grid), center, rho, divergence, eta,
                        grid);
}

WorstCaseDensity worst_case_density_from_values(
    const std::vector<double>& loss_on_grid, double center, double rho,
    const DivergenceSpec& divergence, double eta, const Grid1D& grid) {
  if (loss_on_grid.size() != grid.n)
    throw ParameterError("loss values do not match the grid size");
  return density_single(loss_on_grid, center, rho, divergence, eta, grid);
}

WorstCaseDensity worst_case_density_mixture(
    const std::function<double(double)>& loss,
    const std::vector<double>& atoms, const std::vector<double>& atom_weights,
    double rho, const DivergenceSpec& divergence, double eta,
    const Grid1D& grid) {
  if (atoms.empty() || atoms.size() != atom_weights.size())
    throw ParameterError("mixture needs matching nonempty atoms and weights");
  double wsum = 0.0;
  for (double w : atom_weights) wsum += w;
  if (!(wsum > 0.0)) throw ParameterError("mixture weights must sum > 0");

  auto values = eval_on_grid(loss, grid);
  WorstCaseDensity out;
  out.grid = grid;
  out.divergence = divergence;
  out.eta = eta;
  out.density.assign(grid.n, 0.0);
  out.value = 0.0;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    WorstCaseDensity da =
        density_single(values, atoms[a], rho, divergence, eta, grid);
    double w = atom_weights[a] / wsum;
    out.value += w * da.value;
    for (std::size_t j = 0; j < grid.n; ++j)
      out.density[j] += w * da.density[j];
  }
  return out;
}

double density_concentration(const WorstCaseDensity& d,
                             const std::vector<double>& loss_on_grid,
                             double neighborhood) {
  assert(loss_on_grid.size() == d.grid.n);
  std::size_t argmax = 0;
  for (std::size_t j = 1; j < d.grid.n; ++j)
    if (loss_on_grid[j] > loss_on_grid[argmax]) argmax = j;
  double z_star = d.grid.points[argmax];
  double mass = 0.0;
  for (std::size_t j = 0; j < d.grid.n; ++j)
    if (std::fabs(d.grid.points[j] - z_star) <= neighborhood)
      mass += d.density[j] * d.grid.weight;
  return mass;
}

}  // namespace phidro
