#pragma once

// Worst-case distribution densities on a discretized 1-D perturbation ball,
// plus the seeded random neural landscape used to visualize them.

#include <functional>
#include <vector>

#include "phidro/divergence.hpp"

namespace phidro {

// Midpoint grid: point_j = lo + (j + 1/2) (hi - lo) / n, so that
// sum_j weight = hi - lo exactly.
struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 0;
  std::vector<double> points;
  double weight = 0.0;  // cell width (hi - lo) / n
};

Grid1D make_grid(double lo, double hi, std::size_t n);

// Default landscape seed used by the CLI and the regression checks; chosen
// once so the documented flatness / concentration behaviors hold.
inline constexpr std::uint64_t kToyLandscapeSeed = 3;

// Random 4-layer network g: R -> R over the basis expansion
// z' = (z, sqrt|z|, z^2, sin z, cos z); the loss is f(z) = g(z)^2.
// Weights are generated from the seed in declaration order (w1 rows first,
// then w2, w3, w4), each entry one Box-Muller draw, so landscapes are
// bit-reproducible.
class ToyLandscape {
 public:
  static constexpr int kHidden = 512;
  static constexpr int kPenult = 10;

  explicit ToyLandscape(std::uint64_t seed);

  double loss(double z) const;         // f(z) = g(z)^2
  double network(double z) const;      // g(z)
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::vector<double> w1_;  // 512 x 5, entries N(0, 0.25)
  std::vector<double> w2_;  // 512 x 512, entries N(0, 1)
  std::vector<double> w3_;  // 10 x 512, entries N(0, 1)
  std::vector<double> w4_;  // length 10, entries N(0, 1)
};

struct WorstCaseDensity {
  Grid1D grid;
  std::vector<double> density;  // per unit length; integrates to 1
  DivergenceSpec divergence;
  double eta = 0.0;
  double value = 0.0;  // inner optimal value on the discretized ball
};

// Worst-case density for a single atom at `center` with radius rho,
// discretized on `grid` (which must cover [center - rho, center + rho]).
// The loss is evaluated at every grid point inside the ball and the
// discrete inner problem provides the weights; density = m gamma / (2 rho).
WorstCaseDensity worst_case_density(const std::function<double(double)>& loss,
                                    double center, double rho,
                                    const DivergenceSpec& divergence,
                                    double eta, const Grid1D& grid);

// Same, with the loss already evaluated on the grid points.
WorstCaseDensity worst_case_density_from_values(
    const std::vector<double>& loss_on_grid, double center, double rho,
    const DivergenceSpec& divergence, double eta, const Grid1D& grid);

// Mixture of atoms: weighted average of the per-atom densities.
WorstCaseDensity worst_case_density_mixture(
    const std::function<double(double)>& loss,
    const std::vector<double>& atoms, const std::vector<double>& atom_weights,
    double rho, const DivergenceSpec& divergence, double eta,
    const Grid1D& grid);

// Probability mass the density places within +/- neighborhood of the grid
// argmax of the loss.
double density_concentration(const WorstCaseDensity& d,
                             const std::vector<double>& loss_on_grid,
                             double neighborhood);

}  // namespace phidro
