#include "phidro/mlmc.hpp"

#include <cassert>
#include <cmath>

#include "phidro/errors.hpp"
#include "phidro/kernels.hpp"
#include "phidro/parallel.hpp"

namespace phidro {

Norm parse_norm(const std::string& text) {
  if (text == "l2") return Norm::L2;
  if (text == "linf") return Norm::Linf;
  throw ParameterError("unknown norm '" + text + "' (expected l2|linf)");
}

Scheme parse_scheme(const std::string& text) {
  if (text == "sg") return Scheme::SG;
  if (text == "rtmlmc") return Scheme::RTMLMC;
  throw ParameterError("unknown scheme '" + text + "' (expected sg|rtmlmc)");
}

void BallSampler::sample(Rng& rng, std::span<double> out) const {
  assert(static_cast<int>(out.size()) == dim);
  if (norm == Norm::Linf) {
    for (int i = 0; i < dim; ++i) out[i] = rng.uniform(-rho, rho);
    return;
  }
  // Gaussian direction, radius rho * U^{1/d}
  double nrm2 = 0.0;
  do {
    nrm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      out[i] = rng.next_gaussian();
      nrm2 += out[i] * out[i];
    }
  } while (nrm2 == 0.0);
  double r = rho * std::pow(rng.next_double(),
                            1.0 / static_cast<double>(dim)) /
             std::sqrt(nrm2);
  for (int i = 0; i < dim; ++i) out[i] *= r;
}

SampleTree sample_tree(const BallSampler& sampler, const Dataset& data,
                       int level, Rng& rng) {
  if (level < 0) throw ParameterError("sample tree needs level >= 0");
  if (data.empty()) throw ParameterError("sample tree needs a nonempty data source");
  SampleTree tree;
  tree.level = level;
  tree.root = data[rng.uniform_index(data.size())];
  if (tree.root.x.size() != static_cast<std::size_t>(sampler.dim))
    throw ParameterError("sampler dimension does not match the data");
  std::size_t n_children = std::size_t{1} << level;
  tree.children.assign(n_children, tree.root);
  std::vector<double> offset(sampler.dim);
  for (auto& child : tree.children) {
    sampler.sample(rng, offset);
    for (int i = 0; i < sampler.dim; ++i) child.x[i] += offset[i];
    // label component never perturbed
  }
  return tree;
}

double level_probability(int level, int max_level) {
  assert(level >= 0 && level <= max_level);
  return std::pow(2.0, -level) / (2.0 - std::pow(2.0, -max_level));
}

namespace {

// Losses and parameter gradients for every child, computed once so the
// RT-MLMC window combinations reuse them.
struct ChildBatch {
  std::vector<double> losses;       // size n
  std::vector<double> grads;        // n x p, row-major
  std::size_t n = 0;
  std::size_t p = 0;
};

ChildBatch eval_children(const Model& model, std::span<const double> theta,
                         std::span<const DataPoint> points) {
  ChildBatch b;
  b.n = points.size();
  b.p = static_cast<std::size_t>(model.param_dim());
  b.losses.resize(b.n);
  b.grads.resize(b.n * b.p);
  for (std::size_t i = 0; i < b.n; ++i) {
    b.losses[i] = model.loss_grad_theta(
        theta, points[i], std::span<double>(b.grads.data() + i * b.p, b.p));
  }
  return b;
}

// Inner solve on losses[first, last) and gamma-weighted gradient
// accumulation: out += scale * sum gamma_i grads_i.
double weighted_grad_window(const ChildBatch& b, std::size_t first,
                            std::size_t last, double eta,
                            const DivergenceSpec& divergence, double inner_eps,
                            bool fast_path, double scale,
                            std::span<double> out) {
  InnerProblem p;
  p.values.assign(b.losses.begin() + first, b.losses.begin() + last);
  p.eta = eta;
  p.divergence = divergence;
  InnerSolution sol;
  if (divergence.kind == DivergenceKind::KL && !fast_path)
    sol = solve_bisection(p, inner_eps);
  else
    sol = solve_inner(p, inner_eps);
  for (std::size_t i = first; i < last; ++i) {
    double w = scale * sol.gamma[i - first];
    if (w != 0.0)
      kernels::axpy(w, std::span<const double>(b.grads.data() + i * b.p, b.p),
                    out);
  }
  return sol.value;
}

}  // namespace

std::vector<double> grad_hat_r(const Model& model,
                               std::span<const double> theta,
                               std::span<const DataPoint> points, double eta,
                               const DivergenceSpec& divergence,
                               double inner_eps, bool entropic_fast_path,
                               double* value_out) {
  if (points.empty()) throw ParameterError("grad_hat_r needs points");
  ChildBatch b = eval_children(model, theta, points);
  std::vector<double> g(b.p, 0.0);
  double value = weighted_grad_window(b, 0, b.n, eta, divergence, inner_eps,
                                      entropic_fast_path, 1.0, g);
  if (value_out) *value_out = value;
  return g;
}

namespace {

struct DrawResult {
  std::vector<double> grad;
  std::int64_t samples = 0;
  std::int64_t queries = 0;
  int level = 0;
  double value = 0.0;
};

GradientEstimate reduce_draws(std::vector<DrawResult>& draws, std::size_t p) {
  GradientEstimate est;
  est.vector.assign(p, 0.0);
  double inv = 1.0 / static_cast<double>(draws.size());
  for (auto& d : draws) {
    kernels::axpy(inv, d.grad, est.vector);
    est.samples_drawn += d.samples;
    est.inner_queries += d.queries;
    est.levels_used.push_back(d.level);
    est.mean_inner_value += inv * d.value;
  }
  return est;
}

}  // namespace

GradientEstimate sg_estimator(const Model& model, std::span<const double> theta,
                              const EstimatorConfig& config,
                              const BallSampler& sampler, const Dataset& data,
                              double eta, const DivergenceSpec& divergence,
                              Rng& rng) {
  if (config.n_outer < 1 || config.L < 0)
    throw ParameterError("estimator needs n_outer >= 1 and L >= 0");
  std::uint64_t master = rng.next_u64();
  std::vector<DrawResult> draws(config.n_outer);
  par::parallel_for(config.n_outer, [&](std::int64_t i) {
    Rng stream = Rng::stream(master, static_cast<std::uint64_t>(i));
    SampleTree tree = sample_tree(sampler, data, config.L, stream);
    ChildBatch b = eval_children(model, theta, tree.children);
    DrawResult& d = draws[i];
    d.grad.assign(b.p, 0.0);
    d.value = weighted_grad_window(b, 0, b.n, eta, divergence,
                                   config.inner_eps, config.entropic_fast_path,
                                   1.0, d.grad);
    d.samples = static_cast<std::int64_t>(b.n);
    d.queries = 1;
    d.level = config.L;
  });
  return reduce_draws(draws, model.param_dim());
}

GradientEstimate rt_mlmc_estimator(const Model& model,
                                   std::span<const double> theta,
                                   const EstimatorConfig& config,
                                   const BallSampler& sampler,
                                   const Dataset& data, double eta,
                                   const DivergenceSpec& divergence, Rng& rng) {
  if (config.n_outer < 1 || config.L < 0)
    throw ParameterError("estimator needs n_outer >= 1 and L >= 0");
  // inverse-cdf table for the truncated geometric level law
  std::vector<double> cdf(config.L + 1);
  double acc = 0.0;
  for (int l = 0; l <= config.L; ++l) {
    acc += level_probability(l, config.L);
    cdf[l] = acc;
  }
  std::uint64_t master = rng.next_u64();
  std::vector<DrawResult> draws(config.n_outer);
  par::parallel_for(config.n_outer, [&](std::int64_t i) {
    Rng stream = Rng::stream(master, static_cast<std::uint64_t>(i));
    double u = stream.next_double();
    int level = 0;
    while (level < config.L && u > cdf[level]) ++level;
    double inv_p = 1.0 / level_probability(level, config.L);

    SampleTree tree = sample_tree(sampler, data, level, stream);
    ChildBatch b = eval_children(model, theta, tree.children);
    DrawResult& d = draws[i];
    d.grad.assign(b.p, 0.0);
    d.level = level;
    d.samples = static_cast<std::int64_t>(b.n);
    if (level == 0) {
      d.value = weighted_grad_window(b, 0, 1, eta, divergence, config.inner_eps,
                                     config.entropic_fast_path, inv_p, d.grad);
      d.queries = 1;
    } else {
      std::size_t half = b.n / 2;
      d.value = weighted_grad_window(b, 0, b.n, eta, divergence,
                                     config.inner_eps,
                                     config.entropic_fast_path, inv_p, d.grad);
      weighted_grad_window(b, 0, half, eta, divergence, config.inner_eps,
                           config.entropic_fast_path, -0.5 * inv_p, d.grad);
      weighted_grad_window(b, half, b.n, eta, divergence, config.inner_eps,
                           config.entropic_fast_path, -0.5 * inv_p, d.grad);
      d.queries = 3;
    }
  });
  return reduce_draws(draws, model.param_dim());
}

GradientEstimate estimate_gradient(const Model& model,
                                   std::span<const double> theta,
                                   const EstimatorConfig& config,
                                   const BallSampler& sampler,
                                   const Dataset& data, double eta,
                                   const DivergenceSpec& divergence, Rng& rng) {
  return config.scheme == Scheme::SG
             ? sg_estimator(model, theta, config, sampler, data, eta,
                            divergence, rng)
             : rt_mlmc_estimator(model, theta, config, sampler, data, eta,
                                 divergence, rng);
}

std::vector<double> entropic_level_term(const Model& model,
                                        std::span<const double> theta,
                                        const SampleTree& tree, double eta) {
  ChildBatch b = eval_children(model, theta, tree.children);
  auto kl = make_divergence(DivergenceKind::KL);
  std::vector<double> g(b.p, 0.0);
  if (tree.level == 0) {
    weighted_grad_window(b, 0, 1, eta, kl, 1e-12, true, 1.0, g);
    return g;
  }
  std::size_t half = b.n / 2;
  weighted_grad_window(b, 0, b.n, eta, kl, 1e-12, true, 1.0, g);
  weighted_grad_window(b, 0, half, eta, kl, 1e-12, true, -0.5, g);
  weighted_grad_window(b, half, b.n, eta, kl, 1e-12, true, -0.5, g);
  return g;
}

}  // namespace phidro
