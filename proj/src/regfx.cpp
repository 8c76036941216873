#include "phidro/regfx.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

#include "phidro/errors.hpp"
#include "phidro/inner.hpp"
#include "phidro/kernels.hpp"
#include "phidro/parallel.hpp"
#include "phidro/rng.hpp"

namespace phidro {

double SmoothTestLoss::value(std::span<const double> z) const {
  switch (kind) {
    case TestLossKind::Linear:
      return kernels::dot(a, z);
    case TestLossKind::Quadratic: {
      std::vector<double> az(dim);
      kernels::matvec(A, dim, dim, z, az);
      return 0.5 * kernels::dot(z, az) + kernels::dot(b, z);
    }
    case TestLossKind::LogSumExp: {
      std::size_t k = b.size();
      std::vector<double> t(k);
      kernels::matvec(A, k, dim, z, t);
      for (std::size_t i = 0; i < k; ++i) t[i] += b[i];
      // log sum exp = log(n) + log mean exp
      return kernels::log_mean_exp(t, 1.0) +
             std::log(static_cast<double>(k));
    }
  }
  return 0.0;
}

void SmoothTestLoss::grad(std::span<const double> z,
                          std::span<double> out) const {
  switch (kind) {
    case TestLossKind::Linear:
      for (int i = 0; i < dim; ++i) out[i] = a[i];
      return;
    case TestLossKind::Quadratic:
      kernels::matvec(A, dim, dim, z, out);
      for (int i = 0; i < dim; ++i) out[i] += b[i];
      return;
    case TestLossKind::LogSumExp: {
      std::size_t k = b.size();
      std::vector<double> t(k), w(k);
      kernels::matvec(A, k, dim, z, t);
      for (std::size_t i = 0; i < k; ++i) t[i] += b[i];
      kernels::softmax_weights(t, 1.0, w);
      for (int i = 0; i < dim; ++i) out[i] = 0.0;
      for (std::size_t r = 0; r < k; ++r)
        kernels::axpy(w[r], std::span<const double>(A.data() + r * dim, dim),
                      out);
      return;
    }
  }
}

double SmoothTestLoss::dual_norm_grad(std::span<const double> z,
                                      Norm norm) const {
  std::vector<double> g(dim);
  grad(z, g);
  if (norm == Norm::L2) return std::sqrt(kernels::dot(g, g));
  double s = 0.0;  // dual of Linf is L1
  for (double v : g) s += std::fabs(v);
  return s;
}

SmoothTestLoss make_linear_loss(std::vector<double> a) {
  SmoothTestLoss l;
  l.kind = TestLossKind::Linear;
  l.dim = static_cast<int>(a.size());
  l.a = std::move(a);
  return l;
}

SmoothTestLoss make_quadratic_loss(int dim, std::vector<double> A,
                                   std::vector<double> b) {
  if (A.size() != static_cast<std::size_t>(dim) * dim ||
      b.size() != static_cast<std::size_t>(dim))
    throw ParameterError("quadratic loss needs dim x dim A and dim b");
  SmoothTestLoss l;
  l.kind = TestLossKind::Quadratic;
  l.dim = dim;
  l.A = std::move(A);
  l.b = std::move(b);
  return l;
}

SmoothTestLoss make_logsumexp_loss(int dim, std::vector<double> A,
                                   std::vector<double> b) {
  if (b.empty() || A.size() != b.size() * static_cast<std::size_t>(dim))
    throw ParameterError("logsumexp loss needs K x dim A and K offsets");
  SmoothTestLoss l;
  l.kind = TestLossKind::LogSumExp;
  l.dim = dim;
  l.A = std::move(A);
  l.b = std::move(b);
  return l;
}

SmoothTestLoss parse_test_loss(const std::string& text, int dim) {
  if (dim != 2) throw ParameterError("built-in test losses are 2-D");
  if (text == "linear") return make_linear_loss({2.0, -1.0});
  if (text == "quadratic")
    return make_quadratic_loss(2, {3.0, 0.5, 0.5, 1.5}, {0.5, -1.0});
  if (text == "logsumexp")
    return make_logsumexp_loss(2, {1.0, 0.5, -0.5, 1.0, 0.2, -0.8},
                               {0.1, -0.2, 0.3});
  throw ParameterError("unknown test loss '" + text +
                       "' (expected linear|quadratic|logsumexp)");
}

BallAtoms unit_ball_atoms(int dim, Norm norm, std::size_t resolution,
                          std::size_t mc_samples, std::uint64_t seed) {
  if (dim < 1) throw ParameterError("ball atoms need dim >= 1");
  BallAtoms ball;
  ball.dim = dim;
  ball.norm = norm;
  if (dim == 1) {
    ball.count = resolution;
    ball.deterministic = true;
    ball.pts.resize(resolution);
    double w = 2.0 / static_cast<double>(resolution);
    for (std::size_t j = 0; j < resolution; ++j)
      ball.pts[j] = -1.0 + (static_cast<double>(j) + 0.5) * w;
    return ball;
  }
  if (dim == 2 && norm == Norm::L2) {
    // equal-measure polar cells: u = r^2 and theta midpoints
    std::size_t n_r = resolution / 4, n_t = resolution;
    ball.count = n_r * n_t;
    ball.deterministic = true;
    ball.pts.resize(ball.count * 2);
    for (std::size_t i = 0; i < n_r; ++i) {
      double r = std::sqrt((static_cast<double>(i) + 0.5) /
                           static_cast<double>(n_r));
      for (std::size_t j = 0; j < n_t; ++j) {
        double th = 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) /
                    static_cast<double>(n_t);
        std::size_t at = (i * n_t + j) * 2;
        ball.pts[at] = r * std::cos(th);
        ball.pts[at + 1] = r * std::sin(th);
      }
    }
    return ball;
  }
  if (dim == 2 && norm == Norm::Linf) {
    std::size_t n = resolution / 2;
    ball.count = n * n;
    ball.deterministic = true;
    ball.pts.resize(ball.count * 2);
    double w = 2.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        std::size_t at = (i * n + j) * 2;
        ball.pts[at] = -1.0 + (static_cast<double>(i) + 0.5) * w;
        ball.pts[at + 1] = -1.0 + (static_cast<double>(j) + 0.5) * w;
      }
    return ball;
  }
  // dimension >= 3: Monte Carlo
  if (mc_samples < 100)
    throw ParameterError("ball sampling needs at least 100 MC samples");
  ball.count = mc_samples;
  ball.deterministic = false;
  ball.pts.resize(mc_samples * dim);
  BallSampler sampler{norm, 1.0, dim};
  Rng rng(seed);
  for (std::size_t j = 0; j < mc_samples; ++j)
    sampler.sample(rng, std::span<double>(ball.pts.data() + j * dim, dim));
  return ball;
}

namespace {

constexpr int kBlocks = 8;  // stderr blocks for the MC path

void check_scales(double rho, double eta) {
  if (!(rho > 0.0) || !(eta > 0.0))
    throw ParameterError("regularizers need rho > 0 and eta > 0");
}

// mean over ball blocks of fn(values of one block); deterministic grids use
// a single block and report stderr 0.
McValue blocked_mean(const BallAtoms& ball,
                     const std::function<double(std::size_t, std::size_t)>& fn) {
  if (ball.deterministic) return {fn(0, ball.count), 0.0};
  double means[kBlocks];
  std::size_t per = ball.count / kBlocks;
  for (int b = 0; b < kBlocks; ++b)
    means[b] = fn(b * per, (b + 1 == kBlocks) ? ball.count : (b + 1) * per);
  double m = 0.0;
  for (double v : means) m += v;
  m /= kBlocks;
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  var /= (kBlocks - 1);
  return {m, std::sqrt(var / kBlocks)};
}

// OCE value of the projections grad.b over the ball atoms at scale
// eta_oce: inf_mu { mu + eta_oce * mean phi*((x - mu)/eta_oce) }.
double projection_oce(std::span<const double> grad_at_atom,
                      const BallAtoms& ball, std::size_t first,
                      std::size_t last, double eta_oce,
                      const DivergenceSpec& divergence) {
  InnerProblem p;
  p.eta = eta_oce;
  p.divergence = divergence;
  p.values.resize(last - first);
  par::parallel_for_blocks(
      static_cast<std::int64_t>(last - first),
      [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t j = lo; j < hi; ++j) {
          const double* bpt = ball.pts.data() + (first + j) * ball.dim;
          p.values[j] = kernels::dot(
              grad_at_atom, std::span<const double>(bpt, ball.dim));
        }
      });
  return inner_value(p, 1e-13 * std::max(1.0, std::fabs(p.values[0])));
}

}  // namespace

McValue regularizer_gap(const SmoothTestLoss& loss,
                        const std::vector<std::vector<double>>& atoms,
                        double rho, double eta,
                        const DivergenceSpec& divergence,
                        const BallAtoms& ball) {
  check_scales(rho, eta);
  if (atoms.empty()) throw ParameterError("regularizer gap needs data atoms");
  McValue total{0.0, 0.0};
  for (const auto& z : atoms) {
    double fz = loss.value(z);
    McValue per = blocked_mean(ball, [&](std::size_t first, std::size_t last) {
      InnerProblem p;
      p.eta = eta;
      p.divergence = divergence;
      p.values.resize(last - first);
      par::parallel_for_blocks(
          static_cast<std::int64_t>(last - first),
          [&](std::int64_t lo, std::int64_t hi) {
            std::vector<double> zp(ball.dim);
            for (std::int64_t j = lo; j < hi; ++j) {
              const double* bpt = ball.pts.data() + (first + j) * ball.dim;
              for (int i = 0; i < ball.dim; ++i)
                zp[i] = z[i] + rho * bpt[i];
              p.values[j] = loss.value(zp);
            }
          });
      if (ball.deterministic)
        return inner_value(p, 1e-13 * std::max(1.0, std::fabs(fz)));
      // Monte Carlo path: golden-section on the convex dual objective, the
      // independent route from the discrete inner solver.
      double f_lo = kernels::reduce_min(p.values);
      double f_hi = kernels::reduce_max(p.values);
      double spread = f_hi - f_lo + 1.0;
      double mu = golden_section_minimize(
          [&](double t) { return dual_objective(p, t); },
          f_lo - spread - 10.0 * eta, f_hi + spread + 10.0 * eta,
          1e-11 * std::max(1.0, std::fabs(fz)), 300);
      return dual_objective(p, mu);
    });
    total.value += (per.value - fz) / atoms.size();
    total.stderr_ += per.stderr_ / atoms.size();
  }
  return total;
}

McValue oce_regularizer(const SmoothTestLoss& loss,
                        const std::vector<std::vector<double>>& atoms,
                        double rho, double C, const DivergenceSpec& divergence,
                        const BallAtoms& ball) {
  if (!(rho > 0.0) || !(C > 0.0))
    throw ParameterError("oce regularizer needs rho > 0 and C > 0");
  McValue total{0.0, 0.0};
  std::vector<double> g(loss.dim);
  for (const auto& z : atoms) {
    loss.grad(z, g);
    McValue per = blocked_mean(ball, [&](std::size_t first, std::size_t last) {
      return projection_oce(g, ball, first, last, 1.0 / C, divergence);
    });
    total.value += rho * per.value / atoms.size();
    total.stderr_ += rho * per.stderr_ / atoms.size();
  }
  return total;
}

double variation_regularizer(const SmoothTestLoss& loss,
                             const std::vector<std::vector<double>>& atoms,
                             double rho, Norm norm) {
  if (!(rho > 0.0)) throw ParameterError("variation regularizer needs rho > 0");
  double s = 0.0;
  for (const auto& z : atoms) s += loss.dual_norm_grad(z, norm);
  return rho * s / atoms.size();
}

McValue variance_regularizer(const SmoothTestLoss& loss,
                             const std::vector<std::vector<double>>& atoms,
                             double rho, double eta,
                             const DivergenceSpec& divergence,
                             const BallAtoms& ball) {
  check_scales(rho, eta);
  double p2 = divergence.phi_second_at_one;
  if (!(p2 > 0.0) || p2 == kInf)
    throw ParameterError(
        "variance regularizer needs phi twice differentiable at 1 with "
        "phi''(1) > 0 (kl or quadratic)");
  McValue total{0.0, 0.0};
  std::vector<double> g(loss.dim);
  double scale = rho * rho / (2.0 * eta * p2);
  for (const auto& z : atoms) {
    loss.grad(z, g);
    McValue per = blocked_mean(ball, [&](std::size_t first, std::size_t last) {
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t j = first; j < last; ++j) {
        double x = kernels::dot(
            g, std::span<const double>(ball.pts.data() + j * ball.dim,
                                       ball.dim));
        s1 += x;
        s2 += x * x;
      }
      double n = static_cast<double>(last - first);
      double mean = s1 / n;
      return s2 / n - mean * mean;
    });
    total.value += scale * per.value / atoms.size();
    total.stderr_ += scale * per.stderr_ / atoms.size();
  }
  return total;
}

McValue surrogate_gap(const SmoothTestLoss& loss,
                      const std::vector<std::vector<double>>& atoms, double rho,
                      double eta, const DivergenceSpec& divergence,
                      const BallAtoms& ball) {
  check_scales(rho, eta);
  McValue total{0.0, 0.0};
  std::vector<double> g(loss.dim);
  for (const auto& z : atoms) {
    loss.grad(z, g);
    McValue per = blocked_mean(ball, [&](std::size_t first, std::size_t last) {
      return projection_oce(g, ball, first, last, eta / rho, divergence);
    });
    total.value += rho * per.value / atoms.size();
    total.stderr_ += rho * per.stderr_ / atoms.size();
  }
  return total;
}

Regime parse_regime(const std::string& text, double* C_out) {
  if (text.rfind("interp", 0) == 0) {
    double C = 1.0;
    auto colon = text.find(':');
    if (colon != std::string::npos) {
      try {
        C = std::stod(text.substr(colon + 1));
      } catch (const std::exception&) {
        throw ParameterError("bad interp constant in '" + text + "'");
      }
    }
    if (!(C > 0.0)) throw ParameterError("interp constant must be > 0");
    if (C_out) *C_out = C;
    return Regime::Interp;
  }
  if (text == "variation") return Regime::VariationLimit;
  if (text == "variance") return Regime::VarianceLimit;
  throw ParameterError("unknown regime '" + text +
                       "' (expected interp:C|variation|variance)");
}

ScalingReport run_scaling_study(const SmoothTestLoss& loss,
                                const std::vector<std::vector<double>>& atoms,
                                Regime regime, int steps, double C,
                                const BallAtoms& ball,
                                const DivergenceSpec* divergence_override) {
  if (steps < 1) throw ParameterError("scaling study needs steps >= 1");
  ScalingReport report;
  report.regime = regime;
  report.C = C;
  switch (regime) {
    case Regime::Interp:
      report.divergence = make_divergence(DivergenceKind::KL);
      break;
    case Regime::VariationLimit:
      report.divergence = make_divergence(DivergenceKind::AbsoluteValue);
      break;
    case Regime::VarianceLimit:
      report.divergence = make_divergence(DivergenceKind::Quadratic);
      break;
  }
  if (divergence_override) report.divergence = *divergence_override;

  for (int k = 1; k <= steps; ++k) {
    double rho = std::pow(2.0, -k);
    double eta = 0.0;
    switch (regime) {
      case Regime::Interp:
        eta = rho / C;
        break;
      case Regime::VariationLimit:
        eta = rho * rho * rho;
        break;
      case Regime::VarianceLimit:
        eta = std::sqrt(rho);
        break;
    }
    McValue gap = regularizer_gap(loss, atoms, rho, eta, report.divergence, ball);
    McValue reg;
    switch (regime) {
      case Regime::Interp:
        reg = oce_regularizer(loss, atoms, rho, C, report.divergence, ball);
        break;
      case Regime::VariationLimit:
        reg = {variation_regularizer(loss, atoms, rho, ball.norm), 0.0};
        break;
      case Regime::VarianceLimit:
        reg = variance_regularizer(loss, atoms, rho, eta, report.divergence,
                                   ball);
        break;
    }
    ScalingRow row;
    row.k = k;
    row.rho = rho;
    row.eta = eta;
    row.gap = gap.value;
    row.reg = reg.value;
    row.rel_err = std::fabs(gap.value - reg.value) / rho;
    row.stderr_ = (gap.stderr_ + reg.stderr_) / rho;
    report.rows.push_back(row);
  }
  return report;
}

double golden_section_minimize(const std::function<double(double)>& fn,
                               double lo, double hi, double tol,
                               int max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace phidro
