// Acceptance suite: one check per criterion, one PASS/FAIL line each.
// Every tolerance is pinned here; the binary exits nonzero when any
// criterion fails. Pass --cli <path> (wired through ctest) so the
// determinism criterion can invoke the real command-line binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "phidro/data.hpp"
#include "phidro/density.hpp"
#include "phidro/inner.hpp"
#include "phidro/io.hpp"
#include "phidro/kernels.hpp"
#include "phidro/mlmc.hpp"
#include "phidro/pricing.hpp"
#include "phidro/qlearn.hpp"
#include "phidro/regfx.hpp"
#include "phidro/rng.hpp"
#include "phidro/train.hpp"
#include "test_util.hpp"

using namespace phidro;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

std::string g_cli_path;

void note(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what;
  }
}

// ------------------------------------------------------------- criterion 1

Outcome criterion_oracle_equivalence() {
  Outcome o;
  Rng rng(1001);
  double worst_value = 0.0, worst_gamma = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t m = 1 + rng.uniform_index(64);
    InnerProblem p;
    p.values.resize(m);
    for (auto& v : p.values) v = rng.uniform(-5.0, 5.0);
    p.eta = rng.uniform(0.05, 5.0);
    p.divergence = make_divergence(DivergenceKind::KL);
    auto bi = solve_bisection(p, 1e-10);
    auto cf = solve_closed_form(p);
    worst_value = std::max(worst_value, std::fabs(bi.value - cf.value));
    for (std::size_t i = 0; i < m; ++i)
      worst_gamma = std::max(worst_gamma, std::fabs(bi.gamma[i] - cf.gamma[i]));
  }
  note(o, worst_value <= 1e-6, "value gap " + fmt17(worst_value));
  note(o, worst_gamma <= 1e-5, "gamma gap " + fmt17(worst_gamma));
  if (o.pass)
    o.detail = "value gap " + fmt17(worst_value) + ", gamma gap " +
               fmt17(worst_gamma);
  return o;
}

// ------------------------------------------------------------- criterion 2

struct QuadExact {
  double mu;
  double value;
  std::vector<double> gamma;
};

QuadExact quadratic_exact(const std::vector<double>& f, double eta) {
  const std::size_t m = f.size();
  std::vector<double> sorted = f;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double md = static_cast<double>(m);
  double prefix = 0.0;
  QuadExact out;
  out.mu = sorted[0] - md * eta;
  for (std::size_t k = 1; k <= m; ++k) {
    prefix += sorted[k - 1];
    double mu = (prefix - md * eta) / static_cast<double>(k);
    double lo = k < m ? sorted[k] : -1e300;
    if (mu >= lo && mu <= sorted[k - 1]) {
      out.mu = mu;
      break;
    }
  }
  double s2 = 0.0;
  out.gamma.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double t = std::max(f[i] - out.mu, 0.0);
    s2 += t * t;
    out.gamma[i] = t / (md * eta);
  }
  out.value = out.mu + 0.5 * eta + s2 / (2.0 * md * eta);
  return out;
}

Outcome criterion_bisection_bounds() {
  Outcome o;
  Rng rng(1002);
  for (double eps : {1e-4, 1e-8}) {
    double worst_value = 0.0, worst_gamma_rel = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
      std::size_t m = 2 + rng.uniform_index(30);
      InnerProblem p;
      p.values.resize(m);
      for (auto& v : p.values) v = rng.uniform(-3.0, 3.0);
      p.eta = rng.uniform(0.1, 2.0);
      p.divergence = make_divergence(DivergenceKind::Quadratic);
      auto exact = quadratic_exact(p.values, p.eta);
      auto sol = solve_bisection(p, eps);
      worst_value =
          std::max(worst_value, std::fabs(sol.value - exact.value) / eps);
      double bound = std::sqrt(2.0 * eps / p.eta) / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i)
        worst_gamma_rel = std::max(
            worst_gamma_rel, std::fabs(sol.gamma[i] - exact.gamma[i]) / bound);
    }
    note(o, worst_value <= 1.0,
         "eps " + fmt17(eps) + ": value error ratio " + fmt17(worst_value));
    note(o, worst_gamma_rel <= 1.0,
         "eps " + fmt17(eps) + ": gamma bound ratio " + fmt17(worst_gamma_rel));
  }
  return o;
}

// ------------------------------------------------------------- criterion 3

Outcome criterion_consistency() {
  Outcome o;
  InnerProblem p;
  p.values = {1.0, 2.0, 3.0};
  p.eta = 1e-3;
  p.divergence = make_divergence(DivergenceKind::KL);
  note(o, std::fabs(solve_closed_form(p).value - 3.0) <= 0.01, "kl consistency");
  p.divergence = make_divergence(DivergenceKind::Quadratic);
  note(o, std::fabs(solve_bisection(p, 1e-12).value - 3.0) <= 0.01,
       "quadratic consistency");
  p.divergence = make_divergence(DivergenceKind::Indicator, 0.5);
  double ind = solve_closed_form(p).value;
  note(o, std::fabs(ind - 3.0) > 0.1,
       "indicator negative control (got " + fmt17(ind) + ")");
  return o;
}

// ------------------------------------------------------------- criterion 4

Outcome criterion_densities() {
  Outcome o;
  ToyLandscape land(kToyLandscapeSeed);
  auto grid = make_grid(-5.0, 5.0, 10000);
  std::vector<double> vals(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) vals[j] = land.loss(grid.points[j]);
  auto loss = [&](double z) { return land.loss(z); };

  // (a) indicator alpha = 1: exactly uniform
  auto ind = worst_case_density(loss, 0.0, 5.0,
                                make_divergence(DivergenceKind::Indicator, 1.0),
                                1.0, grid);
  double uni_dev = 0.0;
  for (double v : ind.density) uni_dev = std::max(uni_dev, std::fabs(v - 0.1));
  note(o, uni_dev <= 1e-10, "indicator uniformity dev " + fmt17(uni_dev));

  // (b) kl concentration within +-0.5, monotone as eta falls, >= 0.9 at 0.01
  double prev = -1.0, last = 0.0;
  bool monotone = true;
  for (double eta : {10.0, 1.0, 0.1, 0.01}) {
    auto d = worst_case_density(loss, 0.0, 5.0,
                                make_divergence(DivergenceKind::KL), eta, grid);
    double c = density_concentration(d, vals, 0.5);
    if (prev >= 0.0 && c < prev - 0.02) monotone = false;
    prev = c;
    last = c;
  }
  note(o, monotone, "kl concentration monotone");
  note(o, last >= 0.9, "kl concentration at eta=0.01 is " + fmt17(last));

  // (c) quadratic: exactly zero off the support
  auto qd = worst_case_density(loss, 0.0, 5.0,
                               make_divergence(DivergenceKind::Quadratic), 0.05,
                               grid);
  double max_zero_f = -kInf, min_pos_f = kInf;
  std::size_t zeros = 0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    if (qd.density[j] == 0.0) {
      ++zeros;
      max_zero_f = std::max(max_zero_f, vals[j]);
    } else {
      min_pos_f = std::min(min_pos_f, vals[j]);
    }
  }
  note(o, zeros > 0 && zeros < grid.n, "quadratic support is proper");
  note(o, max_zero_f <= min_pos_f,
       "quadratic density zero exactly below the support threshold");
  return o;
}

// ------------------------------------------------------------- criterion 5

class DiagModel final : public Model {
 public:
  int param_dim() const override { return 2; }
  int input_dim() const override { return 1; }
  std::string name() const override { return "diag"; }
  double loss(std::span<const double> t, const DataPoint& z) const override {
    double a = t[0] - z.x[0], b = t[1] - z.x[0] * z.x[0];
    return 0.5 * a * a + 0.5 * b * b;
  }
  double loss_grad_theta(std::span<const double> t, const DataPoint& z,
                         std::span<double> g) const override {
    double a = t[0] - z.x[0], b = t[1] - z.x[0] * z.x[0];
    g[0] = a;
    g[1] = b;
    return 0.5 * a * a + 0.5 * b * b;
  }
  void loss_grad_input(std::span<const double> t, const DataPoint& z,
                       std::span<double> gx) const override {
    double a = t[0] - z.x[0], b = t[1] - z.x[0] * z.x[0];
    gx[0] = -a - 2.0 * z.x[0] * b;
  }
  double score(std::span<const double> t, const DataPoint& z) const override {
    return loss(t, z);
  }
};

Outcome criterion_estimator_stats() {
  Outcome o;
  DiagModel model;
  Dataset data = {DataPoint{{0.25}, 0.0}};
  BallSampler sampler{Norm::L2, 0.5, 1};
  auto kl = make_divergence(DivergenceKind::KL);
  std::vector<double> theta = {0.4, -0.1};
  const int L = 5;
  const int draws = 200000;

  struct Stats {
    double mean[2] = {0, 0};
    double se[2] = {0, 0};
    double samples_per_draw = 0;
    std::vector<std::int64_t> level_counts;
  };
  auto run = [&](Scheme scheme, std::uint64_t seed) {
    EstimatorConfig cfg;
    cfg.scheme = scheme;
    cfg.L = L;
    cfg.n_outer = 1;
    Stats s;
    s.level_counts.assign(L + 1, 0);
    double m2[2] = {0, 0};
    std::int64_t samples = 0;
    Rng rng(seed);
    for (int i = 0; i < draws; ++i) {
      auto e =
          estimate_gradient(model, theta, cfg, sampler, data, 0.5, kl, rng);
      for (int j = 0; j < 2; ++j) {
        s.mean[j] += e.vector[j];
        m2[j] += e.vector[j] * e.vector[j];
      }
      samples += e.samples_drawn;
      for (int l : e.levels_used) ++s.level_counts[l];
    }
    for (int j = 0; j < 2; ++j) {
      s.mean[j] /= draws;
      double var = m2[j] / draws - s.mean[j] * s.mean[j];
      s.se[j] = std::sqrt(std::max(var, 0.0) / draws);
    }
    s.samples_per_draw = static_cast<double>(samples) / draws;
    return s;
  };

  Stats sg = run(Scheme::SG, 2001);
  Stats rt = run(Scheme::RTMLMC, 2002);
  for (int j = 0; j < 2; ++j) {
    double se = std::sqrt(sg.se[j] * sg.se[j] + rt.se[j] * rt.se[j]);
    double gap = std::fabs(sg.mean[j] - rt.mean[j]);
    note(o, gap <= 3.0 * se,
         "mean agreement coord " + std::to_string(j) + ": gap " + fmt17(gap) +
             " vs 3se " + fmt17(3.0 * se));
  }
  for (int l = 0; l <= L; ++l) {
    double pl = level_probability(l, L);
    double freq = static_cast<double>(rt.level_counts[l]) / draws;
    double sigma = std::sqrt(pl * (1.0 - pl) / draws);
    note(o, std::fabs(freq - pl) <= 3.0 * sigma,
         "level " + std::to_string(l) + " frequency " + fmt17(freq));
  }
  double want = (L + 1) / (2.0 - std::pow(2.0, -L));
  note(o, std::fabs(rt.samples_per_draw - want) <= 0.05 * want,
       "samples/draw " + fmt17(rt.samples_per_draw) + " vs " + fmt17(want));
  return o;
}

// ------------------------------------------------------------- criterion 6

Outcome criterion_level_decay() {
  Outcome o;
  DiagModel model;
  Dataset data = {DataPoint{{0.25}, 0.0}};
  BallSampler sampler{Norm::L2, 0.5, 1};
  std::vector<double> theta = {0.4, -0.1};
  auto second_moment = [&](int level, std::uint64_t seed) {
    const int draws = 20000;
    double acc = 0.0;
    Rng rng(seed);
    for (int i = 0; i < draws; ++i) {
      auto tree = sample_tree(sampler, data, level, rng);
      auto g = entropic_level_term(model, theta, tree, 0.5);
      acc += kernels::dot(g, g);
    }
    return acc / draws;
  };
  double m3 = second_moment(3, 3001);
  double m6 = second_moment(6, 3002);
  note(o, m6 <= 0.6 * m3,
       "second moment l=6 " + fmt17(m6) + " vs 0.6 * l=3 " + fmt17(0.6 * m3));
  if (o.pass)
    o.detail = "ratio " + fmt17(m6 / m3);
  return o;
}

// ------------------------------------------------------------- criterion 7

Outcome criterion_gradient_checks() {
  Outcome o;
  Rng rng(4001);
  for (auto kind : {ModelKind::Linear, ModelKind::Logistic, ModelKind::Mlp1}) {
    auto model = make_model(kind, 3, 8);
    double worst = 0.0;
    for (int probe = 0; probe < 50; ++probe) {
      std::vector<double> theta(model->param_dim());
      for (auto& t : theta) t = rng.uniform(-1.0, 1.0);
      DataPoint z;
      z.x = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
             rng.uniform(-2.0, 2.0)};
      z.y = kind == ModelKind::Linear ? rng.uniform(-2.0, 2.0)
                                      : (rng.next_double() < 0.5 ? -1.0 : 1.0);
      worst = std::max(worst, testutil::max_grad_rel_err(*model, theta, z));
    }
    note(o, worst <= 1e-4, model->name() + " gradient rel err " + fmt17(worst));
  }
  auto inst = PricingInstance::generate(6, 10, 4002);
  auto pricing = make_pricing_model(inst);
  double worst = 0.0;
  for (int probe = 0; probe < 50; ++probe) {
    std::vector<double> theta(pricing->param_dim());
    for (auto& t : theta) t = rng.uniform(-0.3, 0.3);
    DataPoint z;
    z.y = static_cast<double>(rng.uniform_index(inst.xs.size()));
    z.x = inst.xs[static_cast<std::size_t>(z.y)];
    worst = std::max(worst, testutil::max_grad_rel_err(*pricing, theta, z));
  }
  note(o, worst <= 1e-4, "pricing gradient rel err " + fmt17(worst));
  return o;
}

// ------------------------------------------------------------- criterion 8

Outcome criterion_regularization_effects() {
  Outcome o;
  auto ball = unit_ball_atoms(2, Norm::L2, 2048);
  std::vector<std::vector<double>> atoms = {{0.3, -0.2}, {-0.5, 0.4}, {0.1, 0.8}};
  auto quad = parse_test_loss("quadratic");
  auto lin = parse_test_loss("linear");

  const char* regime_names[] = {"interp", "variation", "variance"};
  for (auto regime :
       {Regime::Interp, Regime::VariationLimit, Regime::VarianceLimit}) {
    auto rep = run_scaling_study(quad, atoms, regime, 8, 1.0, ball);
    for (std::size_t i = 3; i < rep.rows.size(); ++i) {
      bool dec = rep.rows[i].rel_err <= rep.rows[i - 1].rel_err + 1e-10;
      note(o, dec,
           std::string(regime_names[static_cast<int>(regime)]) + " k=" +
               std::to_string(rep.rows[i].k) + " rel_err " +
               fmt17(rep.rows[i].rel_err) + " above " +
               fmt17(rep.rows[i - 1].rel_err));
    }
  }
  auto var = run_scaling_study(lin, atoms, Regime::VariationLimit, 5, 1.0, ball);
  note(o, var.rows[3].rel_err <= 0.02,
       "linear variation k=4 rel err " + fmt17(var.rows[3].rel_err));

  auto kl = make_divergence(DivergenceKind::KL);
  double rho = 0.2;
  double r2 = variation_regularizer(lin, atoms, rho, Norm::L2);
  double r1_big = oce_regularizer(lin, atoms, rho, 1e3, kl, ball).value;
  note(o, std::fabs(r1_big - r2) <= 0.02 * r2,
       "R1(C=1e3) " + fmt17(r1_big) + " vs R2 " + fmt17(r2));
  double r3 = variance_regularizer(lin, atoms, rho, rho / 1e-2, kl, ball).value;
  double r1_small = oce_regularizer(lin, atoms, rho, 1e-2, kl, ball).value;
  note(o, std::fabs(r1_small - r3) <= 0.05 * r3,
       "R1(C=1e-2) " + fmt17(r1_small) + " vs R3 " + fmt17(r3));
  return o;
}

// ------------------------------------------------------------- criterion 9

Outcome criterion_supervised() {
  Outcome o;
  const std::uint64_t seed = 5;
  auto train_data = make_blobs(300, {0.8, 0.8}, {-0.8, -0.8}, 0.3, 0.7, seed);
  auto test_data =
      make_blobs(4000, {0.8, 0.8}, {-0.8, -0.8}, 0.3, 0.7, seed + 1000);
  auto model = make_model(ModelKind::Logistic, 2);
  TrainConfig base;
  base.iterations = 2000;
  base.step = 1.0;
  base.seed = seed;
  base.ball_norm = Norm::L2;
  base.estimator.scheme = Scheme::RTMLMC;
  base.estimator.L = 3;
  base.estimator.n_outer = 16;
  TrainConfig erm_cfg = base;
  erm_cfg.rho = 1e-6;
  erm_cfg.eta = 2e-6;
  auto erm = projected_sgd(*model, train_data, erm_cfg).theta_average;
  TrainConfig rob_cfg = base;
  rob_cfg.rho = 0.45;
  rob_cfg.eta = 0.9;
  auto rob = projected_sgd(*model, train_data, rob_cfg).theta_average;

  AttackConfig atk{AttackConfig::Kind::PGM, Norm::Linf, 0.3, 15, 0.1};
  double rob_clean = evaluate(*model, rob, test_data);
  double erm_clean = evaluate(*model, erm, test_data);
  double rob_atk = evaluate(*model, rob, test_data, atk);
  double erm_atk = evaluate(*model, erm, test_data, atk);
  note(o, rob_clean <= 0.1, "robust clean rate " + fmt17(rob_clean));
  note(o, erm_clean <= 0.1, "erm clean rate " + fmt17(erm_clean));
  note(o, rob_atk <= erm_atk,
       "attacked rates robust " + fmt17(rob_atk) + " vs erm " + fmt17(erm_atk));
  if (o.pass)
    o.detail = "attacked " + fmt17(rob_atk) + " <= " + fmt17(erm_atk);
  return o;
}

// ------------------------------------------------------------ criterion 10

Outcome criterion_rl() {
  Outcome o;
  auto mdp = make_hazard_gridworld();

  // (a) robust with rho = 0 is bit-identical to regular
  QLearnOptions a;
  a.episodes = 300;
  a.seed = 11;
  QLearnOptions b = a;
  b.robust = true;
  b.rho = 0.0;
  b.eta = 0.37;
  auto ra = run_q_learning(mdp, a);
  auto rb = run_q_learning(mdp, b);
  note(o, ra.q.q == rb.q.q && ra.episode_returns == rb.episode_returns,
       "rho=0 bit identity");

  // (b) value-iteration agreement after 5e4 steps
  auto qstar = value_iteration_q(mdp);
  QLearnOptions vi;
  vi.episodes = std::int64_t{1} << 40;
  vi.total_step_cap = 50000;
  vi.seed = 17;
  auto trained = run_q_learning(mdp, vi);
  double worst = 0.0;
  for (std::size_t i = 0; i < qstar.size(); ++i)
    worst = std::max(worst, std::fabs(trained.q.q[i] - qstar[i]));
  note(o, worst <= 0.05, "VI sup-norm gap " + fmt17(worst));

  // (c) robust >= regular on each perturbed environment, 10 seeded trials
  auto slip = perturb_slip(mdp, 0.2);
  auto corr = perturb_corridor_reward(mdp, 0.2);
  auto wind = perturb_wind(mdp, 0.2);
  const GridMDP* envs[3] = {&slip, &corr, &wind};
  const char* names[3] = {"slip", "corridor", "wind"};
  double mean[2][3] = {{0, 0, 0}, {0, 0, 0}};
  for (int trial = 0; trial < 10; ++trial) {
    for (int robust = 0; robust < 2; ++robust) {
      QLearnOptions opt;
      opt.episodes = 4000;
      opt.robust = robust;
      opt.eta = 0.8;
      opt.rho = 1.0;
      opt.seed = 100 + trial;
      auto res = run_q_learning(mdp, opt);
      for (int e = 0; e < 3; ++e)
        mean[robust][e] +=
            evaluate_policy(res.q, *envs[e], 200, 777 + trial).mean / 10.0;
    }
  }
  for (int e = 0; e < 3; ++e)
    note(o, mean[1][e] >= mean[0][e],
         std::string(names[e]) + " robust " + fmt17(mean[1][e]) +
             " vs regular " + fmt17(mean[0][e]));
  if (o.pass)
    o.detail = "VI gap " + fmt17(worst);
  return o;
}

// ------------------------------------------------------------ criterion 11

Outcome criterion_pricing() {
  Outcome o;
  double sum_j = 0.0;
  int defined = 0;
  for (int t = 0; t < 50; ++t) {
    auto inst =
        PricingInstance::generate(100, 50, Rng::stream(1, t).next_u64());
    PricingTrainConfig pc;
    pc.rho = 0.45;
    pc.eta = 0.9;
    pc.seed = mix64(1 + static_cast<std::uint64_t>(t));
    auto res = solve_pricing(inst, pc);
    if (res.improvement_defined) {
      sum_j += res.improvement;
      ++defined;
    }
  }
  double mean_j = defined > 0 ? sum_j / defined : 0.0;
  note(o, defined >= 45, "defined trials " + std::to_string(defined));
  note(o, mean_j > 0.0, "mean improvement " + fmt17(mean_j));
  if (o.pass)
    o.detail = "mean J = " + fmt17(mean_j) + " over " +
               std::to_string(defined) + " trials";
  return o;
}

// ------------------------------------------------------------ criterion 12

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing " + path + ">";
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const std::string& dir,
            const std::string& stdout_file) {
  std::string cmd = "cd " + dir + " && " + g_cli_path + " " + args + " > " +
                    stdout_file + " 2> /dev/null";
  return std::system(cmd.c_str());
}

Outcome criterion_determinism() {
  Outcome o;
  if (g_cli_path.empty()) {
    note(o, false, "cli path not provided (--cli)");
    return o;
  }
  std::string base = "/tmp/phidro_accept";
  int prep = std::system(
      ("rm -rf " + base + " && mkdir -p " + base + "/a " + base + "/b").c_str());
  note(o, prep == 0, "scratch directory setup");

  std::string cfg_path = base + "/run.cfg";
  write_file(cfg_path,
             "model = logistic\ndata = blobs\nn = 60\nT = 25\nstep = 0.2\n"
             "rho = 0.3\neta = 0.6\nL = 2\nn_outer = 2\nseed = 5\n");

  struct Cmd {
    std::string name;
    std::string args;
    std::vector<std::string> outputs;  // relative to the run dir
  };
  std::vector<Cmd> cmds = {
      {"inner-solve",
       "inner-solve --values 1,2,0.5 --eta 0.7 --divergence quadratic --eps "
       "1e-10",
       {}},
      {"density",
       "density --divergence kl --eta 0.5 --rho 5 --seed 3 --grid 500 --out "
       "density.csv --landscape-out landscape.csv",
       {"density.csv", "landscape.csv"}},
      {"estimator-stats",
       "estimator-stats --scheme rtmlmc --L 4 --draws 2000 --seed 9",
       {}},
      {"train", "train --config " + cfg_path, {"metrics.csv", "theta.json"}},
      {"regfx",
       "regfx --loss quadratic --regime variance --steps 3 --resolution 256 "
       "--out report.csv",
       {"report.csv"}},
      {"rl",
       "rl --robust --eta 0.8 --rho 1 --episodes 150 --seed 3 "
       "--eval-episodes 20 --out returns.csv",
       {"returns.csv"}},
      {"pricing",
       "pricing --M 12 --m 6 --trials 2 --T 40 --seed 4 --out imp.csv",
       {"imp.csv"}},
  };
  for (const auto& cmd : cmds) {
    int rc1 = run_cli(cmd.args, base + "/a", "stdout.txt");
    int rc2 = run_cli(cmd.args, base + "/b", "stdout.txt");
    note(o, rc1 == 0 && rc2 == 0, cmd.name + " exit status");
    bool same = slurp(base + "/a/stdout.txt") == slurp(base + "/b/stdout.txt");
    for (const auto& f : cmd.outputs)
      same = same && slurp(base + "/a/" + f) == slurp(base + "/b/" + f);
    note(o, same, cmd.name + " byte-identical outputs");
  }

  // attack-eval consumes the train outputs
  {
    auto data = make_blobs(40, {0.8, 0.8}, {-0.8, -0.8}, 0.3, 0.7, 77);
    save_csv_dataset(data, base + "/a/test.csv");
    save_csv_dataset(data, base + "/b/test.csv");
    std::string args =
        "attack-eval --theta theta.json --data test.csv --attack noise "
        "--norm l2 --eps 0.3 --seed 12";
    int rc1 = run_cli(args, base + "/a", "attack_stdout.txt");
    int rc2 = run_cli(args, base + "/b", "attack_stdout.txt");
    note(o, rc1 == 0 && rc2 == 0, "attack-eval exit status");
    note(o,
         slurp(base + "/a/attack_stdout.txt") ==
             slurp(base + "/b/attack_stdout.txt"),
         "attack-eval byte-identical outputs");
  }

  int rc = std::system((g_cli_path + " inner-solve --values 1,2 --eta -1 "
                        "--divergence kl > /dev/null 2>&1")
                           .c_str());
  note(o, WIFEXITED(rc) && WEXITSTATUS(rc) == 2, "usage error exit code");

  // numerical failures exit with code 3 (indicator support too coarse)
  rc = std::system((g_cli_path + " density --divergence indicator:0.0001 "
                    "--grid 100 --out " + base + "/a/coarse.csv "
                    "> /dev/null 2>&1")
                       .c_str());
  note(o, WIFEXITED(rc) && WEXITSTATUS(rc) == 3, "numerical error exit code");

  // flags override config-file values
  {
    int rc2 = run_cli("train --config " + cfg_path + " --set eta=0.9",
                      base + "/a", "override_stdout.txt");
    note(o, rc2 == 0, "train --set exit status");
    std::string metrics = slurp(base + "/a/metrics.csv");
    note(o, metrics.find("# eta = 0.9") != std::string::npos,
         "flag overrides the config eta");
  }

  // the emitted density CSV feeds the bundled plot script unmodified
  {
    std::string plot = g_cli_path;
    auto slash = plot.rfind('/');
    plot = plot.substr(0, slash);  // .../build
    slash = plot.rfind('/');
    plot = plot.substr(0, slash) + "/tools/plot_csv.py";
    int rc3 = std::system(("python3 " + plot + " " + base +
                           "/a/density.csv " + base + "/a/density.svg omega "
                           "density > /dev/null 2>&1")
                              .c_str());
    bool made = WIFEXITED(rc3) && WEXITSTATUS(rc3) == 0 &&
                !slurp(base + "/a/density.svg").empty();
    note(o, made, "plot script consumes density.csv");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::string(argv[i]) == "--cli") g_cli_path = argv[i + 1];

  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  std::vector<Entry> entries = {
      {1, "inner-solver oracle equivalence", criterion_oracle_equivalence},
      {2, "bisection bound conformance", criterion_bisection_bounds},
      {3, "vanishing-regularization consistency", criterion_consistency},
      {4, "worst-case density reproduction", criterion_densities},
      {5, "estimator statistics", criterion_estimator_stats},
      {6, "level-difference second-moment decay", criterion_level_decay},
      {7, "gradient checks", criterion_gradient_checks},
      {8, "regularization-effect asymptotics",
       criterion_regularization_effects},
      {9, "supervised robust-vs-erm ordering", criterion_supervised},
      {10, "robust q-learning", criterion_rl},
      {11, "pricing improvement", criterion_pricing},
      {12, "cli determinism", criterion_determinism},
  };

  int failures = 0;
  for (auto& e : entries) {
    auto t0 = Clock::now();
    Outcome o = e.fn();
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%s  %2d  %-40s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", e.id,
                e.name, secs, o.detail.empty() ? "" : "  -- ",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(entries.size()) - failures, entries.size());
  return failures == 0 ? 0 : 1;
}
