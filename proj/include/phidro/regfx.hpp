#pragma once

// Numerical verification of the small-(rho, eta) regularization
// asymptotics: the exact regularizer gap against the OCE (R1), variation
// (R2), and variance (R3) regularizers across scaling regimes.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "phidro/divergence.hpp"
#include "phidro/mlmc.hpp"

namespace phidro {

enum class TestLossKind { Linear, Quadratic, LogSumExp };

// Smooth test losses with closed-form gradients.
//   Linear:    f(z) = a.z
//   Quadratic: f(z) = 0.5 z'Az + b.z          (A symmetric, dim x dim)
//   LogSumExp: f(z) = log sum_k exp(A_k.z + b_k)   (A is K x dim)
struct SmoothTestLoss {
  TestLossKind kind = TestLossKind::Linear;
  int dim = 1;
  std::vector<double> a;
  std::vector<double> A;
  std::vector<double> b;

  double value(std::span<const double> z) const;
  void grad(std::span<const double> z, std::span<double> out) const;
  // ||grad f(z)||_* for the dual of the ball norm (L2 -> L2, Linf -> L1).
  double dual_norm_grad(std::span<const double> z, Norm norm) const;
};

SmoothTestLoss make_linear_loss(std::vector<double> a);
SmoothTestLoss make_quadratic_loss(int dim, std::vector<double> A,
                                   std::vector<double> b);
SmoothTestLoss make_logsumexp_loss(int dim, std::vector<double> A,
                                   std::vector<double> b);
SmoothTestLoss parse_test_loss(const std::string& text, int dim = 2);

// Equal-measure discretization of the unit ball used for the deterministic
// gap and regularizer estimates. 1-D: midpoint grid on [-1, 1]; 2-D L2:
// polar grid, equal measure per cell; 2-D Linf: tensor midpoint grid;
// higher dimensions fall back to Monte Carlo (seeded).
struct BallAtoms {
  int dim = 1;
  Norm norm = Norm::L2;
  std::size_t count = 0;
  std::vector<double> pts;  // count x dim, row-major
  bool deterministic = true;
};

BallAtoms unit_ball_atoms(int dim, Norm norm, std::size_t resolution = 4096,
                          std::size_t mc_samples = 100000,
                          std::uint64_t seed = 1);

struct McValue {
  double value = 0.0;
  double stderr_ = 0.0;  // 0 for deterministic grids
};

// Exact regularizer gap: mean_z [ inner OCE value of f over z + rho*ball ]
// minus mean_z f(z).
McValue regularizer_gap(const SmoothTestLoss& loss,
                        const std::vector<std::vector<double>>& atoms,
                        double rho, double eta,
                        const DivergenceSpec& divergence, const BallAtoms& ball);

// R1: rho * mean_z OCE_{1/C}( grad f(z) . b ), b over the unit ball.
McValue oce_regularizer(const SmoothTestLoss& loss,
                        const std::vector<std::vector<double>>& atoms,
                        double rho, double C, const DivergenceSpec& divergence,
                        const BallAtoms& ball);

// R2: rho * mean_z ||grad f(z)||_*
double variation_regularizer(const SmoothTestLoss& loss,
                             const std::vector<std::vector<double>>& atoms,
                             double rho, Norm norm);

// R3: rho^2 / (2 eta phi''(1)) * mean_z Var_b( grad f(z) . b )
McValue variance_regularizer(const SmoothTestLoss& loss,
                             const std::vector<std::vector<double>>& atoms,
                             double rho, double eta,
                             const DivergenceSpec& divergence,
                             const BallAtoms& ball);

// First-order surrogate gap: rho * mean_z OCE_{eta/rho}( grad f(z) . b ).
McValue surrogate_gap(const SmoothTestLoss& loss,
                      const std::vector<std::vector<double>>& atoms, double rho,
                      double eta, const DivergenceSpec& divergence,
                      const BallAtoms& ball);

enum class Regime { Interp, VariationLimit, VarianceLimit };
Regime parse_regime(const std::string& text, double* C_out);

struct ScalingRow {
  int k = 0;
  double rho = 0.0;
  double eta = 0.0;
  double gap = 0.0;
  double reg = 0.0;
  double rel_err = 0.0;  // |gap - reg| / rho
  double stderr_ = 0.0;
};

struct ScalingReport {
  Regime regime = Regime::Interp;
  double C = 1.0;
  DivergenceSpec divergence;
  std::vector<ScalingRow> rows;
};

// Schedules (rho_k = 2^{-k}):
//   Interp(C):      eta_k = rho_k / C          compared against R1
//   VariationLimit: eta_k = rho_k^3            compared against R2
//   VarianceLimit:  eta_k = sqrt(rho_k)        compared against R3
// The default divergence per regime is kl / absolute / quadratic; pass
// divergence_override to change it.
ScalingReport run_scaling_study(const SmoothTestLoss& loss,
                                const std::vector<std::vector<double>>& atoms,
                                Regime regime, int steps, double C,
                                const BallAtoms& ball,
                                const DivergenceSpec* divergence_override = nullptr);

// Golden-section minimizer for convex scalar functions; the independent
// dual route used by the Monte Carlo path and the cross-check tests.
double golden_section_minimize(const std::function<double(double)>& fn,
                               double lo, double hi, double tol,
                               int max_iter = 200);

}  // namespace phidro
