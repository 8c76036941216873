#pragma once

// Projected-SGD outer loop over the stochastic estimators, plus the attack
// and evaluation side used by the supervised experiments.

#include <optional>
#include <string>
#include <vector>

#include "phidro/mlmc.hpp"
#include "phidro/model.hpp"

namespace phidro {

struct TrainConfig {
  int iterations = 100;            // T
  double step = 1e-2;              // tau
  double projection_radius = kInf; // Theta = L2 ball; inf = unconstrained
  EstimatorConfig estimator;
  double rho = 0.1;
  double eta = 0.2;                // defaults to 2 rho when unset by the CLI
  Norm ball_norm = Norm::L2;
  std::uint64_t seed = 1;
  DivergenceSpec divergence = make_divergence(DivergenceKind::KL);
  // Optional warm start; empty uses initial_theta(model, seed).
  std::vector<double> theta0;
};

struct MetricsRow {
  int iter = 0;
  double objective_estimate = 0.0;
  double grad_norm = 0.0;
  std::int64_t samples_cumulative = 0;
};

struct TrainResult {
  std::vector<double> theta_final;
  std::vector<double> theta_average;  // running average (convex regime)
  std::vector<double> theta_random;   // uniformly random iterate (nonconvex)
  std::vector<MetricsRow> metrics;
};

TrainResult projected_sgd(const Model& model, const Dataset& data,
                          const TrainConfig& config);

// Named hyper-parameter presets implementing the theoretical scalings in
// the target accuracy delta. The absolute constants are unobservable, so a
// user-set base step (default 1e-2) anchors the step size and the remaining
// quantities follow their stated orders:
//   convex-sg:        n_outer 1, L ~ log2(1/d), T ~ 1/d^2, step ~ d
//   convex-rtmlmc:    n_outer 1, L ~ log2(1/d), T ~ log^2(1/d)/d^2,
//                     step ~ d / log^2(1/d)
//   nonconvex:        L ~ 2 log2(1/d), T ~ 1/d^2, n_outer ~ 1/d^2, step O(1)
//   nonconvex-free:   L ~ 2 log2(1/d), T ~ 1/d^4, n_outer 1, step ~ d^2
// (the last assumes an unconstrained parameter set).
enum class PresetKind { ConvexSG, ConvexRTMLMC, Nonconvex, NonconvexFree };
PresetKind parse_preset(const std::string& text);

// Fills iterations/step/estimator fields of a config; rho/eta/norm/seed are
// left to the caller.
void apply_preset(TrainConfig& config, PresetKind kind, double delta,
                  double base_step = 1e-2);

struct AttackConfig {
  enum class Kind { PGM, WhiteNoise };
  Kind kind = Kind::PGM;
  Norm norm = Norm::Linf;
  double epsilon = 0.1;   // attack radius
  int steps = 15;         // PGM iterations
  double step_size = 0.1; // PGM per-step magnitude
};

// Iterated projected gradient ascent on the input within B_eps(point.x);
// the label never changes.
DataPoint pgm_attack(const Model& model, std::span<const double> theta,
                     const DataPoint& point, const AttackConfig& attack);

DataPoint white_noise_attack(const DataPoint& point, const AttackConfig& attack,
                             Rng& rng);

// Misclassification rate of sign(score) against labels in {-1, +1}; when an
// attack is given, every point is attacked first (white noise draws use a
// per-point stream of `seed`).
double evaluate(const Model& model, std::span<const double> theta,
                const Dataset& data,
                const std::optional<AttackConfig>& attack = std::nullopt,
                std::uint64_t seed = 0);

// Euclidean projection onto the radius ball (identity when radius = inf).
void project_l2_ball(std::span<double> v, double radius);

}  // namespace phidro
