#include "phidro/divergence.hpp"

#include <cmath>

#include "phidro/errors.hpp"

namespace phidro {

double DivergenceSpec::phi(double x) const {
  if (x < 0.0) return kInf;
  switch (kind) {
    case DivergenceKind::KL:
      if (x == 0.0) return 1.0;  // x log x -> 0
      return x * std::log(x) - x + 1.0;
    case DivergenceKind::Quadratic:
      return 0.5 * (x * x - 1.0);
    case DivergenceKind::Indicator:
      return x <= 1.0 / alpha ? 0.0 : kInf;
    case DivergenceKind::AbsoluteValue:
      return std::fabs(x - 1.0);
    case DivergenceKind::Hinge:
      return x > 1.0 ? x - 1.0 : 0.0;
  }
  return kInf;
}

double DivergenceSpec::conjugate(double s) const {
  switch (kind) {
    case DivergenceKind::KL:
      // sup attained at x = e^s
      return std::expm1(s);
    case DivergenceKind::Quadratic:
      // x = max(s, 0)
      return s > 0.0 ? 0.5 + 0.5 * s * s : 0.5;
    case DivergenceKind::Indicator:
      return s > 0.0 ? s / alpha : 0.0;
    case DivergenceKind::AbsoluteValue:
      if (s > 1.0) return kInf;
      return s < -1.0 ? -1.0 : s;
    case DivergenceKind::Hinge:
      if (s > 1.0) return kInf;
      return s > 0.0 ? s : 0.0;
  }
  return kInf;
}

double DivergenceSpec::scaled_conjugate(double t, double eta) const {
  return eta * conjugate(t / eta);
}

double DivergenceSpec::phi_prime(double x) const {
  switch (kind) {
    case DivergenceKind::KL:
      return std::log(x);
    case DivergenceKind::Quadratic:
      return x;
    default:
      throw UnsupportedDivergenceError("phi_prime undefined for " + name());
  }
}

double DivergenceSpec::inv_phi_prime(double s) const {
  switch (kind) {
    case DivergenceKind::KL:
      return std::exp(s);
    case DivergenceKind::Quadratic:
      return s > 0.0 ? s : 0.0;
    default:
      throw UnsupportedDivergenceError(
          "inverse derivative undefined for " + name() +
          "; use the closed-form solver");
  }
}

double DivergenceSpec::kappa_eff(double r_max) const {
  switch (kind) {
    case DivergenceKind::KL:
      // phi''(x) = 1/x >= 1/r_max on (0, r_max]
      return 1.0 / r_max;
    case DivergenceKind::Quadratic:
      return 1.0;
    default:
      return 0.0;
  }
}

std::string DivergenceSpec::name() const {
  switch (kind) {
    case DivergenceKind::KL:
      return "kl";
    case DivergenceKind::Quadratic:
      return "quadratic";
    case DivergenceKind::Indicator:
      return "indicator:" + std::to_string(alpha);
    case DivergenceKind::AbsoluteValue:
      return "absolute";
    case DivergenceKind::Hinge:
      return "hinge";
  }
  return "?";
}

DivergenceSpec make_divergence(DivergenceKind kind, double alpha) {
  DivergenceSpec d;
  d.kind = kind;
  switch (kind) {
    case DivergenceKind::KL:
      d.kappa = 0.0;  // strictly convex only; see kappa_eff
      d.K = -kInf;
      d.phi_second_at_one = 1.0;
      d.globally_strongly_convex = false;
      break;
    case DivergenceKind::Quadratic:
      d.kappa = 1.0;
      d.K = 0.0;
      d.phi_second_at_one = 1.0;
      d.globally_strongly_convex = true;
      break;
    case DivergenceKind::Indicator:
      if (!(alpha > 0.0 && alpha <= 1.0))
        throw ParameterError("indicator risk level alpha must lie in (0, 1]");
      d.alpha = alpha;
      d.kappa = 0.0;
      d.K = 0.0;
      // phi vanishes on a neighborhood of 1 when alpha < 1; at alpha = 1 the
      // point 1 sits on the domain boundary.
      d.phi_second_at_one = alpha < 1.0 ? 0.0 : kInf;
      break;
    case DivergenceKind::AbsoluteValue:
      d.kappa = 0.0;
      d.K = -1.0;
      d.phi_second_at_one = kInf;
      break;
    case DivergenceKind::Hinge:
      d.kappa = 0.0;
      d.K = 0.0;
      d.phi_second_at_one = kInf;
      break;
  }
  return d;
}

DivergenceSpec parse_divergence(const std::string& text) {
  if (text == "kl") return make_divergence(DivergenceKind::KL);
  if (text == "quadratic") return make_divergence(DivergenceKind::Quadratic);
  if (text == "absolute") return make_divergence(DivergenceKind::AbsoluteValue);
  if (text == "hinge") return make_divergence(DivergenceKind::Hinge);
  if (text.rfind("indicator", 0) == 0) {
    double alpha = 1.0;
    auto colon = text.find(':');
    if (colon != std::string::npos) {
      try {
        alpha = std::stod(text.substr(colon + 1));
      } catch (const std::exception&) {
        throw ParameterError("bad indicator alpha in '" + text + "'");
      }
    }
    return make_divergence(DivergenceKind::Indicator, alpha);
  }
  throw ParameterError("unknown divergence '" + text +
                       "' (expected kl|quadratic|indicator:alpha|absolute|hinge)");
}

}  // namespace phidro
