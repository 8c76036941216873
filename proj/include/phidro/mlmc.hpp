#pragma once

// SG and RT-MLMC stochastic gradient estimators for the regularized
// adversarial objective: sample trees of perturbed points, weighted
// gradients through the finite-support inner solver, and the entropic
// log-sum-exp fast path.
//
// Estimator assembly is deterministic for a fixed seed regardless of thread
// count: each outer draw gets its own RNG stream and writes into its own
// slot; the final average reduces the slots in index order.

#include <cstdint>
#include <span>
#include <vector>

#include "phidro/divergence.hpp"
#include "phidro/inner.hpp"
#include "phidro/model.hpp"
#include "phidro/rng.hpp"

namespace phidro {

enum class Norm { L2, Linf };
Norm parse_norm(const std::string& text);

struct BallSampler {
  Norm norm = Norm::L2;
  double rho = 1.0;
  int dim = 1;

  // Writes a point of the closed radius-rho ball centered at the origin.
  // L2: Gaussian direction scaled by rho * U^{1/dim}; Linf: per-coordinate
  // uniform in [-rho, rho].
  void sample(Rng& rng, std::span<double> out) const;
};

struct SampleTree {
  DataPoint root;
  std::vector<DataPoint> children;  // 2^level points of B_rho(root)
  int level = 0;
};

SampleTree sample_tree(const BallSampler& sampler, const Dataset& data,
                       int level, Rng& rng);

enum class Scheme { SG, RTMLMC };
Scheme parse_scheme(const std::string& text);

struct EstimatorConfig {
  int L = 0;            // max level
  int n_outer = 1;      // outer batch size
  double inner_eps = 1e-10;
  Scheme scheme = Scheme::SG;
  // Use the closed-form softmax for KL inner problems instead of bisection.
  bool entropic_fast_path = true;
};

struct GradientEstimate {
  std::vector<double> vector;
  std::int64_t samples_drawn = 0;   // perturbed points generated
  std::int64_t inner_queries = 0;   // inner-solver invocations
  std::vector<int> levels_used;     // sampled level per outer draw
  double mean_inner_value = 0.0;    // objective diagnostic
};

// Weighted parameter gradient sum_i gamma_i grad_theta f_theta(z_i) with
// gamma from the inner solver on the losses at `points`.
std::vector<double> grad_hat_r(const Model& model,
                               std::span<const double> theta,
                               std::span<const DataPoint> points, double eta,
                               const DivergenceSpec& divergence,
                               double inner_eps, bool entropic_fast_path = true,
                               double* value_out = nullptr);

GradientEstimate sg_estimator(const Model& model, std::span<const double> theta,
                              const EstimatorConfig& config,
                              const BallSampler& sampler, const Dataset& data,
                              double eta, const DivergenceSpec& divergence,
                              Rng& rng);

// P(level = l) = 2^{-l} / (2 - 2^{-L}); each term combines the full window
// with its two halves on the same children (antithetic coupling), scaled by
// the inverse level probability. Level 0 reduces to the single-sample term.
GradientEstimate rt_mlmc_estimator(const Model& model,
                                   std::span<const double> theta,
                                   const EstimatorConfig& config,
                                   const BallSampler& sampler,
                                   const Dataset& data, double eta,
                                   const DivergenceSpec& divergence, Rng& rng);

GradientEstimate estimate_gradient(const Model& model,
                                   std::span<const double> theta,
                                   const EstimatorConfig& config,
                                   const BallSampler& sampler,
                                   const Dataset& data, double eta,
                                   const DivergenceSpec& divergence, Rng& rng);

// Entropic level difference G^l for a KL tree: the gradient of
// U_{1:2^l} - U_{1:2^{l-1}}/2 - U_{2^{l-1}+1:2^l}/2, each U a log-sum-exp
// over its window. Level 0 returns the plain single-window gradient.
std::vector<double> entropic_level_term(const Model& model,
                                        std::span<const double> theta,
                                        const SampleTree& tree, double eta);

// Exact truncated-geometric level probability.
double level_probability(int level, int max_level);

}  // namespace phidro
