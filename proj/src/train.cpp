#include "phidro/train.hpp"

#include <cassert>
#include <cmath>

#include "phidro/errors.hpp"
#include "phidro/kernels.hpp"
#include "phidro/parallel.hpp"

namespace phidro {

void project_l2_ball(std::span<double> v, double radius) {
  if (radius == kInf) return;
  double n2 = kernels::dot(v, v);
  if (n2 <= radius * radius) return;
  double s = radius / std::sqrt(n2);
  for (double& x : v) x *= s;
}

TrainResult projected_sgd(const Model& model, const Dataset& data,
                          const TrainConfig& config) {
  if (config.iterations < 1) throw ParameterError("training needs T >= 1");
  if (!(config.step > 0.0)) throw ParameterError("training needs step > 0");
  if (!(config.rho > 0.0)) throw ParameterError("training needs rho > 0");
  if (!(config.eta > 0.0)) throw ParameterError("training needs eta > 0");
  if (data.empty()) throw ParameterError("training needs data");

  BallSampler sampler{config.ball_norm, config.rho,
                      static_cast<int>(data[0].x.size())};

  std::vector<double> theta = config.theta0.empty()
                                  ? initial_theta(model, config.seed)
                                  : config.theta0;
  if (theta.size() != static_cast<std::size_t>(model.param_dim()))
    throw ParameterError("theta0 size does not match the model");
  project_l2_ball(theta, config.projection_radius);
  std::vector<double> avg(theta.size(), 0.0);

  TrainResult result;
  result.metrics.reserve(config.iterations);
  std::int64_t samples_total = 0;

  // Reservoir for the uniformly random iterate (nonconvex selection rule).
  Rng pick_rng = Rng::stream(config.seed, 0x5eedu);
  result.theta_random = theta;
  std::size_t pick_count = 0;

  for (int t = 1; t <= config.iterations; ++t) {
    // iterate average includes theta_t before the update
    kernels::axpy(1.0, theta, avg);
    if (pick_rng.uniform_index(++pick_count) == 0) result.theta_random = theta;

    Rng iter_rng = Rng::stream(config.seed, static_cast<std::uint64_t>(t));
    GradientEstimate est =
        estimate_gradient(model, theta, config.estimator, sampler, data,
                          config.eta, config.divergence, iter_rng);
    double gn = std::sqrt(kernels::dot(est.vector, est.vector));
    if (!std::isfinite(gn))
      throw NumericalError("non-finite gradient at iteration " +
                           std::to_string(t) + " (norm=" + std::to_string(gn) +
                           ")");
    kernels::axpy(-config.step, est.vector, theta);
    project_l2_ball(theta, config.projection_radius);

    samples_total += est.samples_drawn;
    result.metrics.push_back(
        {t, est.mean_inner_value, gn, samples_total});
  }

  result.theta_final = theta;
  result.theta_average = avg;
  double inv = 1.0 / static_cast<double>(config.iterations);
  for (double& a : result.theta_average) a *= inv;
  return result;
}

PresetKind parse_preset(const std::string& text) {
  if (text == "convex-sg") return PresetKind::ConvexSG;
  if (text == "convex-rtmlmc") return PresetKind::ConvexRTMLMC;
  if (text == "nonconvex") return PresetKind::Nonconvex;
  if (text == "nonconvex-free") return PresetKind::NonconvexFree;
  throw ParameterError(
      "unknown preset '" + text +
      "' (expected convex-sg|convex-rtmlmc|nonconvex|nonconvex-free)");
}

void apply_preset(TrainConfig& config, PresetKind kind, double delta,
                  double base_step) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ParameterError("preset accuracy delta must lie in (0, 1)");
  if (!(base_step > 0.0)) throw ParameterError("preset base step must be > 0");
  double inv = 1.0 / delta;
  double log2inv = std::log2(inv);
  double logsq = std::max(1.0, std::log(inv) * std::log(inv));
  auto ceil_int = [](double v) { return static_cast<int>(std::ceil(v)); };
  switch (kind) {
    case PresetKind::ConvexSG:
      config.estimator.scheme = Scheme::SG;
      config.estimator.n_outer = 1;
      config.estimator.L = std::max(0, ceil_int(log2inv));
      config.iterations = ceil_int(inv * inv);
      config.step = base_step * delta;
      break;
    case PresetKind::ConvexRTMLMC:
      config.estimator.scheme = Scheme::RTMLMC;
      config.estimator.n_outer = 1;
      config.estimator.L = std::max(0, ceil_int(log2inv));
      config.iterations = ceil_int(logsq * inv * inv);
      config.step = base_step * delta / logsq;
      break;
    case PresetKind::Nonconvex:
      config.estimator.scheme = Scheme::RTMLMC;
      config.estimator.n_outer = ceil_int(inv * inv);
      config.estimator.L = std::max(0, ceil_int(2.0 * log2inv));
      config.iterations = ceil_int(inv * inv);
      config.step = base_step;
      break;
    case PresetKind::NonconvexFree:
      config.estimator.scheme = Scheme::RTMLMC;
      config.estimator.n_outer = 1;
      config.estimator.L = std::max(0, ceil_int(2.0 * log2inv));
      config.iterations = ceil_int(inv * inv * inv * inv);
      config.step = base_step * delta * delta;
      config.projection_radius = kInf;
      break;
  }
}

namespace {

void project_offset(std::span<double> x, std::span<const double> x0, Norm norm,
                    double eps) {
  std::size_t d = x.size();
  if (norm == Norm::Linf) {
    for (std::size_t i = 0; i < d; ++i) {
      double lo = x0[i] - eps, hi = x0[i] + eps;
      if (x[i] < lo) x[i] = lo;
      if (x[i] > hi) x[i] = hi;
    }
    return;
  }
  double n2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double t = x[i] - x0[i];
    n2 += t * t;
  }
  if (n2 > eps * eps) {
    double s = eps / std::sqrt(n2);
    for (std::size_t i = 0; i < d; ++i) x[i] = x0[i] + s * (x[i] - x0[i]);
  }
}

}  // namespace

DataPoint pgm_attack(const Model& model, std::span<const double> theta,
                     const DataPoint& point, const AttackConfig& attack) {
  if (attack.epsilon < 0.0) throw ParameterError("attack needs epsilon >= 0");
  if (attack.steps < 1) throw ParameterError("pgm attack needs steps >= 1");
  if (attack.epsilon == 0.0) return point;
  DataPoint z = point;
  std::vector<double> g(z.x.size());
  for (int s = 0; s < attack.steps; ++s) {
    model.loss_grad_input(theta, z, g);
    if (attack.norm == Norm::Linf) {
      for (std::size_t i = 0; i < g.size(); ++i)
        z.x[i] += attack.step_size * (g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0));
    } else {
      double n = std::sqrt(kernels::dot(g, g));
      if (n > 0.0)
        kernels::axpy(attack.step_size / n, g, z.x);
    }
    project_offset(z.x, point.x, attack.norm, attack.epsilon);
  }
  return z;
}

DataPoint white_noise_attack(const DataPoint& point, const AttackConfig& attack,
                             Rng& rng) {
  if (attack.epsilon < 0.0) throw ParameterError("attack needs epsilon >= 0");
  DataPoint z = point;
  if (attack.epsilon == 0.0) return z;
  BallSampler ball{attack.norm, attack.epsilon, static_cast<int>(z.x.size())};
  std::vector<double> offset(z.x.size());
  ball.sample(rng, offset);
  for (std::size_t i = 0; i < z.x.size(); ++i) z.x[i] += offset[i];
  return z;
}

double evaluate(const Model& model, std::span<const double> theta,
                const Dataset& data, const std::optional<AttackConfig>& attack,
                std::uint64_t seed) {
  if (data.empty()) throw ParameterError("evaluate needs data");
  std::vector<int> wrong(data.size(), 0);
  par::parallel_for(static_cast<std::int64_t>(data.size()), [&](std::int64_t i) {
    const DataPoint& p0 = data[static_cast<std::size_t>(i)];
    double s;
    if (!attack) {
      s = model.score(theta, p0);
    } else if (attack->kind == AttackConfig::Kind::PGM) {
      s = model.score(theta, pgm_attack(model, theta, p0, *attack));
    } else {
      Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
      s = model.score(theta, white_noise_attack(p0, *attack, rng));
    }
    double pred = s >= 0.0 ? 1.0 : -1.0;
    wrong[static_cast<std::size_t>(i)] = pred != p0.y ? 1 : 0;
  });
  std::int64_t total = 0;
  for (int w : wrong) total += w;
  return static_cast<double>(total) / static_cast<double>(data.size());
}

}  // namespace phidro
