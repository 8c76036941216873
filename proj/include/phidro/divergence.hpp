#pragma once

// The five built-in phi-divergence generators, their convex conjugates, and
// the constants the solvers need. All values are immutable after
// construction; every member is a pure function.

#include <limits>
#include <string>

namespace phidro {

enum class DivergenceKind { KL, Quadratic, Indicator, AbsoluteValue, Hinge };

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DivergenceSpec {
  DivergenceKind kind;
  // Risk level in (0, 1]; meaningful for Indicator only.
  double alpha = 1.0;
  // Global strong-convexity modulus of phi on its domain (0 when none).
  double kappa = 0.0;
  // K = lim_{s -> 0+} phi'(s); -inf allowed.
  double K = 0.0;
  // phi''(1); +inf when undefined (kinks or boundary at 1).
  double phi_second_at_one = kInf;
  // KL is strictly convex but not globally strongly convex on R+; the
  // effective modulus below restricts it to a caller-chosen ratio range.
  bool globally_strongly_convex = false;

  double phi(double x) const;
  // phi*(s) = sup_{x >= 0} { s x - phi(x) }; +inf is a valid return.
  double conjugate(double s) const;
  // (eta phi)*(t) = eta * phi*(t / eta)
  double scaled_conjugate(double t, double eta) const;
  // phi'(x); defined for KL and Quadratic.
  double phi_prime(double x) const;
  // (phi')^{-1}(s); defined for KL (e^s) and Quadratic (max(s, 0)).
  double inv_phi_prime(double s) const;
  bool has_inv_phi_prime() const {
    return kind == DivergenceKind::KL || kind == DivergenceKind::Quadratic;
  }
  // Strong-convexity modulus usable by the bisection bounds. KL: 1/r_max
  // over the ratio range [r_min, r_max]; Quadratic: 1; otherwise 0.
  double kappa_eff(double r_max = 1e6) const;

  std::string name() const;
};

// alpha is required in (0, 1] for Indicator and ignored otherwise.
DivergenceSpec make_divergence(DivergenceKind kind, double alpha = 1.0);

// Accepts "kl", "quadratic", "indicator:<alpha>", "absolute", "hinge".
DivergenceSpec parse_divergence(const std::string& text);

}  // namespace phidro
