#pragma once

// Contextual pricing under covariate perturbation: random-feature decision
// rule trained with the same projected-SGD + RT-MLMC machinery, evaluated
// against an ERM baseline on fresh ground-truth samples.

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "phidro/model.hpp"
#include "phidro/train.hpp"

namespace phidro {

struct PricingInstance {
  static constexpr int kXDim = 10;
  static constexpr int kFeatures = 100;

  std::uint64_t seed = 1;
  std::vector<double> beta1, beta2;   // U[-0.1, 0.1]^10
  std::vector<double> omega;          // 100 x 10, N(0, I)
  std::vector<double> feat_offset;    // U[0, 2 pi]
  std::vector<std::vector<double>> xs;          // M covariates ~ N(0, I)
  std::vector<std::array<double, 2>> z_mean;    // conditional sample means
  int m_conditional = 0;

  // Price sensitivity z | x = (tanh(3 b1.x) - 1, exp(-2 b2.x)) + N(0, I_2):
  // downward-sloping demand with a positive intercept. The training data
  // keeps only the conditional means: the revenue loss is linear in z, so
  // the conditional sample average collapses exactly.
  static PricingInstance generate(int M, int m, std::uint64_t seed);

  std::array<double, 2> true_conditional_mean(std::span<const double> x) const;
  // Random-feature map g(x) = cos(omega_i . x + b_i), entries in [-1, 1].
  void features(std::span<const double> x, std::span<double> g) const;
};

// Negative revenue Psi(w, z) = -w (z1 w + z2).
double pricing_loss(double price, double z1, double z2);

// Model adapter: data point x = covariate (perturbed during training),
// label = covariate index selecting the conditional sample mean; the
// decision is w = theta . g(x).
std::unique_ptr<Model> make_pricing_model(const PricingInstance& instance);

struct PricingTrainConfig {
  int iterations = 1200;
  double step = 0.1;
  double projection_radius = 10.0;
  int n_outer = 8;
  int L = 4;
  double rho = 0.45;
  double eta = 0.9;
  std::uint64_t seed = 1;
  std::int64_t eval_samples = 100000;  // fresh ground-truth pairs
  double price_bound = 50.0;           // |w| cap defining the oracle optimum
};

struct PricingResult {
  std::vector<double> theta_robust;
  std::vector<double> theta_erm;
  double revenue_loss_robust = 0.0;  // R(theta) on fresh samples
  double revenue_loss_erm = 0.0;
  double revenue_loss_best = 0.0;    // R*: per-covariate optimum within the price bound
  double improvement = 0.0;          // J = 1 - (R - R*) / (R_erm - R*)
  bool improvement_defined = false;
};

PricingResult solve_pricing(const PricingInstance& instance,
                            const PricingTrainConfig& config);

}  // namespace phidro
