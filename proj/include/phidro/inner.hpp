#pragma once

// Finite-support penalized phi-divergence DRO subproblem
//
//   R(f, eta) = max_{gamma in simplex} sum_i gamma_i f_i
//               - (eta/m) sum_i phi(m gamma_i)
//
// solved either by dual bisection (KL, Quadratic) or by the per-divergence
// closed forms. Pure functions over immutable inputs; the solvers allocate
// only local scratch.

#include <span>
#include <vector>

#include "phidro/divergence.hpp"

namespace phidro {

struct InnerProblem {
  std::vector<double> values;  // f_1..f_m, all finite, m >= 1
  double eta = 1.0;            // regularization level, > 0
  DivergenceSpec divergence;
};

enum class InnerMethod { Bisection, ClosedForm };

struct InnerSolution {
  std::vector<double> gamma;  // probability weights, sum to 1
  double mu = 0.0;            // dual multiplier
  double value = 0.0;         // optimal objective estimate
  int iterations = 0;         // bisection steps taken
  InnerMethod method = InnerMethod::ClosedForm;
  // True when gamma is an exact primal optimum (up to fp rounding), not just
  // the epsilon-accurate bisection iterate.
  bool primal_exact = false;
};

struct BisectionOptions {
  // Ratio range bounding the KL effective strong-convexity modulus;
  // kappa_eff = 1 / r_max.
  double r_max = 1e6;
  // Stop early once |h(mu)| falls below this.
  double h_tol = 1e-12;
};

// Dual objective d(mu) = mu + (1/m) sum_i (eta phi)*(f_i - mu); convex in mu,
// +inf where the conjugate is +inf.
double dual_objective(const InnerProblem& p, double mu);

// Bisection on the dual multiplier; requires an invertible phi' (KL,
// Quadratic). Guarantees |value - optimum| <= epsilon and
// ||gamma - gamma*||_inf <= (1/m) sqrt(2 epsilon / (kappa_eff eta)).
InnerSolution solve_bisection(const InnerProblem& p, double epsilon,
                              const BisectionOptions& opt = {});

// Closed forms: KL (softmax / log-mean-exp), Indicator (AV@R), Absolute,
// Hinge. Quadratic has no closed form and is redirected to bisection.
InnerSolution solve_closed_form(const InnerProblem& p);

// Preferred route per divergence: closed form where exact, bisection for
// Quadratic.
InnerSolution solve_inner(const InnerProblem& p, double epsilon,
                          const BisectionOptions& opt = {});

// Primal objective at a feasible gamma (used for value reporting and tests).
double primal_objective(const InnerProblem& p, std::span<const double> gamma);

// Optimal value only, without materializing gamma; the fast path for large
// supports (grid discretizations).
double inner_value(const InnerProblem& p, double epsilon,
                   const BisectionOptions& opt = {});

}  // namespace phidro
