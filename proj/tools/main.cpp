// Command-line front end: one binary, one subcommand per experiment surface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "phidro/data.hpp"
#include "phidro/density.hpp"
#include "phidro/errors.hpp"
#include "phidro/inner.hpp"
#include "phidro/io.hpp"
#include "phidro/kernels.hpp"
#include "phidro/mlmc.hpp"
#include "phidro/parallel.hpp"
#include "phidro/pricing.hpp"
#include "phidro/qlearn.hpp"
#include "phidro/regfx.hpp"
#include "phidro/train.hpp"

using json = nlohmann::ordered_json;
using namespace phidro;

namespace {

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_file(out_path, text);
}

// ---------------------------------------------------------------- inner-solve

struct InnerSolveArgs {
  std::string values;
  double eta = 1.0;
  std::string divergence = "kl";
  double eps = 1e-8;
  std::string out;
};

int run_inner_solve(const InnerSolveArgs& a) {
  InnerProblem p;
  p.values = parse_double_list(a.values);
  if (!(a.eta > 0.0)) throw ParameterError("eta must be > 0");
  p.eta = a.eta;
  p.divergence = parse_divergence(a.divergence);
  InnerSolution sol = solve_inner(p, a.eps);
  json j;
  j["config"] = {{"values", a.values},
                 {"eta", a.eta},
                 {"divergence", a.divergence},
                 {"eps", a.eps}};
  j["gamma"] = sol.gamma;
  j["mu"] = sol.mu;
  j["value"] = sol.value;
  j["iterations"] = sol.iterations;
  j["method"] = sol.method == InnerMethod::Bisection ? "bisection" : "closed-form";
  j["primal_exact"] = sol.primal_exact;
  emit_text(j.dump(2) + "\n", a.out);
  return 0;
}

// -------------------------------------------------------------------- density

struct DensityArgs {
  std::string divergence = "kl";
  double eta = 1.0;
  double rho = 5.0;
  double center = 0.0;
  std::uint64_t seed = kToyLandscapeSeed;
  std::size_t grid = 10000;
  std::string out = "density.csv";
  std::string landscape_out;
};

int run_density(const DensityArgs& a) {
  if (!(a.rho > 0.0)) throw ParameterError("rho must be > 0");
  if (!(a.eta > 0.0)) throw ParameterError("eta must be > 0");
  auto divergence = parse_divergence(a.divergence);
  ToyLandscape land(a.seed);
  auto grid = make_grid(a.center - a.rho, a.center + a.rho, a.grid);
  std::vector<double> vals(grid.n);
  par::parallel_for(static_cast<std::int64_t>(grid.n), [&](std::int64_t j) {
    vals[j] = land.loss(grid.points[j]);
  });
  auto d = worst_case_density_from_values(vals, a.center, a.rho, divergence,
                                          a.eta, grid);

  std::map<std::string, std::string> cfg = {
      {"divergence", a.divergence}, {"eta", fmt17(a.eta)},
      {"rho", fmt17(a.rho)},        {"center", fmt17(a.center)},
      {"seed", std::to_string(a.seed)}, {"grid", std::to_string(a.grid)}};
  CsvWriter w(a.out, {"omega", "f", "density"}, cfg);
  for (std::size_t j = 0; j < grid.n; ++j)
    w.row({grid.points[j], vals[j], d.density[j]});
  w.close();

  if (!a.landscape_out.empty()) {
    CsvWriter lw(a.landscape_out, {"z", "f"}, cfg);
    for (std::size_t j = 0; j < grid.n; ++j)
      lw.row({grid.points[j], vals[j]});
    lw.close();
  }
  return 0;
}

// ------------------------------------------------------------ estimator-stats

struct EstimatorStatsArgs {
  std::string scheme = "rtmlmc";
  int L = 5;
  std::int64_t draws = 100000;
  double eta = 0.5;
  double rho = 0.5;
  std::uint64_t seed = 1;
  std::string out;
};

// Built-in 2-parameter quadratic model used by the estimator diagnostics.
class DiagnosticModel final : public Model {
 public:
  int param_dim() const override { return 2; }
  int input_dim() const override { return 1; }
  std::string name() const override { return "diag-quadratic"; }
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

int run_estimator_stats(const EstimatorStatsArgs& a) {
  Scheme scheme = parse_scheme(a.scheme);
  if (a.L < 0 || a.draws < 1)
    throw ParameterError("estimator-stats needs L >= 0 and draws >= 1");
  DiagnosticModel model;
  Dataset data = {DataPoint{{0.25}, 0.0}};
  BallSampler sampler{Norm::L2, a.rho, 1};
  auto kl = make_divergence(DivergenceKind::KL);
  std::vector<double> theta = {0.4, -0.1};

  EstimatorConfig cfg;
  cfg.scheme = scheme;
  cfg.L = a.L;
  cfg.n_outer = 1;

  std::vector<double> mean(2, 0.0);
  double second_moment = 0.0;
  std::int64_t samples = 0, queries = 0;
  std::vector<std::int64_t> level_hist(a.L + 1, 0);
  Rng rng(a.seed);
  for (std::int64_t i = 0; i < a.draws; ++i) {
    GradientEstimate e =
        estimate_gradient(model, theta, cfg, sampler, data, a.eta, kl, rng);
    for (int j = 0; j < 2; ++j) mean[j] += e.vector[j];
    second_moment += kernels::dot(e.vector, e.vector);
    samples += e.samples_drawn;
    queries += e.inner_queries;
    for (int l : e.levels_used) ++level_hist[l];
  }
  double n = static_cast<double>(a.draws);
  for (auto& v : mean) v /= n;
  second_moment /= n;
  double var = second_moment - kernels::dot(mean, mean);

  json j;
  j["config"] = {{"scheme", a.scheme}, {"L", a.L},      {"draws", a.draws},
                 {"eta", a.eta},       {"rho", a.rho},  {"seed", a.seed}};
  j["mean"] = mean;
  j["second_moment"] = second_moment;
  j["variance"] = var;
  j["samples_per_draw"] = static_cast<double>(samples) / n;
  j["inner_queries_per_draw"] = static_cast<double>(queries) / n;
  json hist = json::array();
  for (int l = 0; l <= a.L; ++l)
    hist.push_back({{"level", l},
                    {"count", level_hist[l]},
                    {"frequency", static_cast<double>(level_hist[l]) / n},
                    {"expected", scheme == Scheme::RTMLMC
                                     ? level_probability(l, a.L)
                                     : (l == a.L ? 1.0 : 0.0)}});
  j["levels"] = hist;
  emit_text(j.dump(2) + "\n", a.out);
  return 0;
}

// ---------------------------------------------------------------------- train

const std::vector<std::string> kTrainKeys = {
    "model", "dims", "hidden", "data", "n", "noise", "divergence", "eta",
    "rho", "norm", "scheme", "L", "n_outer", "inner_eps", "T", "step",
    "projection_radius", "seed", "metrics_out", "theta_out", "preset",
    "delta", "base_step"};

Dataset dataset_from_config(const ConfigView& cfg, std::uint64_t seed) {
  std::string source = cfg.get_string("data", "blobs");
  std::size_t n = static_cast<std::size_t>(cfg.get_int("n", 200));
  if (source == "blobs")
    return make_blobs(n, {1.2, 1.2}, {-1.2, -1.2}, 0.35, 0.55, seed);
  if (source == "moons")
    return make_two_moons(n, cfg.get_double("noise", 0.1), seed);
  return load_csv_dataset(source);
}

int run_train(const std::string& config_path,
              const std::map<std::string, std::string>& overrides) {
  std::map<std::string, std::string> kv;
  if (!config_path.empty()) kv = read_config_file(config_path);
  ConfigView cfg(kv);
  cfg.override_with(overrides);
  cfg.reject_unknown(kTrainKeys);

  auto kind = parse_model_kind(cfg.get_string("model", "logistic"));
  Dataset data = dataset_from_config(
      cfg, static_cast<std::uint64_t>(cfg.get_int("seed", 1)));
  int dims = static_cast<int>(cfg.get_int("dims", data[0].x.size()));
  if (dims != static_cast<int>(data[0].x.size()))
    throw ParameterError("dims does not match the dataset feature width");
  auto model = make_model(kind, dims, static_cast<int>(cfg.get_int("hidden", 16)));

  TrainConfig tc;
  tc.rho = cfg.get_double("rho", 0.45);
  tc.eta = cfg.get_double("eta", 2.0 * tc.rho);
  if (!(tc.rho > 0.0)) throw ParameterError("rho must be > 0");
  if (!(tc.eta > 0.0)) throw ParameterError("eta must be > 0");
  tc.iterations = 300;
  tc.step = 0.05;
  tc.estimator.scheme = Scheme::RTMLMC;
  tc.estimator.L = 4;
  tc.estimator.n_outer = 4;
  // a named preset seeds T/step/L/n_outer/scheme; explicit keys override
  if (cfg.has("preset"))
    apply_preset(tc, parse_preset(cfg.get_string("preset")),
                 cfg.get_double("delta", 0.1), cfg.get_double("base_step", 1e-2));
  tc.iterations = static_cast<int>(cfg.get_int("T", tc.iterations));
  tc.step = cfg.get_double("step", tc.step);
  tc.projection_radius = cfg.get_double("projection_radius", tc.projection_radius);
  tc.ball_norm = parse_norm(cfg.get_string("norm", "l2"));
  tc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  if (cfg.has("scheme"))
    tc.estimator.scheme = parse_scheme(cfg.get_string("scheme"));
  tc.estimator.L = static_cast<int>(cfg.get_int("L", tc.estimator.L));
  tc.estimator.n_outer =
      static_cast<int>(cfg.get_int("n_outer", tc.estimator.n_outer));
  tc.estimator.inner_eps = cfg.get_double("inner_eps", 1e-10);
  tc.divergence = parse_divergence(cfg.get_string("divergence", "kl"));

  auto result = projected_sgd(*model, data, tc);

  std::map<std::string, std::string> echo;
  for (const auto& [k, v] : cfg.map()) echo[k] = v;
  echo["model"] = cfg.get_string("model", "logistic");
  echo["resolved_eta"] = fmt17(tc.eta);

  std::string metrics_path = cfg.get_string("metrics_out", "metrics.csv");
  CsvWriter w(metrics_path,
              {"iter", "objective_estimate", "grad_norm", "samples_cumulative"},
              echo);
  for (const auto& row : result.metrics)
    w.row({static_cast<double>(row.iter), row.objective_estimate,
           row.grad_norm, static_cast<double>(row.samples_cumulative)});
  w.close();

  json j;
  j["model"] = cfg.get_string("model", "logistic");
  j["dims"] = dims;
  j["hidden"] = cfg.get_int("hidden", 16);
  j["config"] = echo;
  j["theta_final"] = result.theta_final;
  j["theta_average"] = result.theta_average;
  j["theta_random"] = result.theta_random;
  write_file(cfg.get_string("theta_out", "theta.json"), j.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- attack-eval

struct AttackEvalArgs {
  std::string theta_path;
  std::string data_path;
  std::string attack = "pgm";
  std::string norm = "linf";
  double epsilon = 0.3;
  int steps = 15;
  double step_size = 0.1;
  std::string which = "average";
  std::uint64_t seed = 1;
  std::string out;
};

int run_attack_eval(const AttackEvalArgs& a) {
  std::ifstream in(a.theta_path);
  if (!in) throw ParameterError("cannot open theta file '" + a.theta_path + "'");
  json j = json::parse(in, nullptr, true);
  auto kind = parse_model_kind(j.at("model").get<std::string>());
  auto model = make_model(kind, j.at("dims").get<int>(),
                          j.value("hidden", 16));
  std::string key = "theta_" + a.which;
  if (!j.contains(key))
    throw ParameterError("theta file has no entry '" + key + "'");
  std::vector<double> theta = j.at(key).get<std::vector<double>>();

  Dataset data = load_csv_dataset(a.data_path);
  double clean = evaluate(*model, theta, data);
  AttackConfig attack;
  attack.kind = a.attack == "pgm" ? AttackConfig::Kind::PGM
                                  : AttackConfig::Kind::WhiteNoise;
  if (a.attack != "pgm" && a.attack != "noise")
    throw ParameterError("unknown attack '" + a.attack + "' (pgm|noise)");
  attack.norm = parse_norm(a.norm);
  attack.epsilon = a.epsilon;
  attack.steps = a.steps;
  attack.step_size = a.step_size;
  double attacked = evaluate(*model, theta, data, attack, a.seed);

  json out;
  out["config"] = {{"theta", a.theta_path}, {"data", a.data_path},
                   {"attack", a.attack},    {"norm", a.norm},
                   {"epsilon", a.epsilon},  {"steps", a.steps},
                   {"step_size", a.step_size}, {"which", a.which},
                   {"seed", a.seed}};
  out["clean_error"] = clean;
  out["attacked_error"] = attacked;
  emit_text(out.dump(2) + "\n", a.out);
  return 0;
}

// ---------------------------------------------------------------------- regfx

struct RegfxArgs {
  std::string loss = "quadratic";
  std::string regime = "variation";
  int steps = 8;
  std::string divergence;
  std::string norm = "l2";
  std::size_t resolution = 2048;
  std::string out = "report.csv";
};

int run_regfx(const RegfxArgs& a) {
  double C = 1.0;
  Regime regime = parse_regime(a.regime, &C);
  auto loss = parse_test_loss(a.loss);
  auto ball = unit_ball_atoms(2, parse_norm(a.norm), a.resolution);
  std::vector<std::vector<double>> atoms = {{0.3, -0.2}, {-0.5, 0.4}, {0.1, 0.8}};
  std::optional<DivergenceSpec> divergence;
  if (!a.divergence.empty()) divergence = parse_divergence(a.divergence);
  auto report = run_scaling_study(loss, atoms, regime, a.steps, C, ball,
                                  divergence ? &*divergence : nullptr);

  std::map<std::string, std::string> cfg = {
      {"loss", a.loss},
      {"regime", a.regime},
      {"steps", std::to_string(a.steps)},
      {"divergence", report.divergence.name()},
      {"norm", a.norm},
      {"resolution", std::to_string(a.resolution)}};
  CsvWriter w(a.out, {"k", "rho", "eta", "gap", "reg", "rel_err", "stderr"},
              cfg);
  for (const auto& r : report.rows)
    w.row({static_cast<double>(r.k), r.rho, r.eta, r.gap, r.reg, r.rel_err,
           r.stderr_});
  w.close();
  return 0;
}

// ------------------------------------------------------------------------- rl

struct RlArgs {
  bool robust = false;
  double eta = 0.8;
  double rho = 1.0;
  std::int64_t episodes = 2000;
  std::uint64_t seed = 3;
  std::int64_t eval_episodes = 200;
  std::string out = "returns.csv";
};

int run_rl(const RlArgs& a) {
  auto mdp = make_hazard_gridworld();
  QLearnOptions opt;
  opt.episodes = a.episodes;
  opt.robust = a.robust;
  opt.eta = a.eta;
  opt.rho = a.rho;
  opt.seed = a.seed;
  auto res = run_q_learning(mdp, opt);

  std::map<std::string, std::string> cfg = {
      {"robust", a.robust ? "1" : "0"}, {"eta", fmt17(a.eta)},
      {"rho", fmt17(a.rho)},            {"episodes", std::to_string(a.episodes)},
      {"seed", std::to_string(a.seed)}};
  CsvWriter w(a.out, {"episode", "return"}, cfg);
  for (std::size_t i = 0; i < res.episode_returns.size(); ++i)
    w.row({static_cast<double>(i), res.episode_returns[i]});
  w.close();

  json j;
  j["config"] = {{"robust", a.robust}, {"eta", a.eta},   {"rho", a.rho},
                 {"episodes", a.episodes}, {"seed", a.seed}};
  struct EvalEnv {
    const char* name;
    GridMDP mdp;
  };
  std::vector<EvalEnv> envs;
  envs.push_back({"original", mdp});
  envs.push_back({"slip", perturb_slip(mdp, 0.2)});
  envs.push_back({"corridor", perturb_corridor_reward(mdp, 0.2)});
  envs.push_back({"wind", perturb_wind(mdp, 0.2)});
  for (const auto& env : envs) {
    auto v = evaluate_policy(res.q, env.mdp, a.eval_episodes, a.seed + 1);
    j["evaluation"][env.name] = {{"mean", v.mean}, {"stderr", v.stderr_}};
  }
  std::fputs((j.dump(2) + "\n").c_str(), stdout);
  return 0;
}

// -------------------------------------------------------------------- pricing

struct PricingArgs {
  int M = 100;
  int m = 50;
  double rho = 0.45;
  double eta = 0.9;
  int trials = 50;
  std::uint64_t seed = 1;
  int T = 1200;
  std::string out = "improvements.csv";
};

int run_pricing(const PricingArgs& a) {
  if (a.trials < 1) throw ParameterError("pricing needs trials >= 1");
  std::map<std::string, std::string> cfg = {
      {"M", std::to_string(a.M)},     {"m", std::to_string(a.m)},
      {"rho", fmt17(a.rho)},          {"eta", fmt17(a.eta)},
      {"trials", std::to_string(a.trials)}, {"seed", std::to_string(a.seed)},
      {"T", std::to_string(a.T)}};
  CsvWriter w(a.out,
              {"trial", "improvement", "loss_robust", "loss_erm", "loss_best"},
              cfg);
  double sum_j = 0.0;
  int defined = 0;
  for (int t = 0; t < a.trials; ++t) {
    auto inst = PricingInstance::generate(
        a.M, a.m, Rng::stream(a.seed, static_cast<std::uint64_t>(t)).next_u64());
    PricingTrainConfig pc;
    pc.rho = a.rho;
    pc.eta = a.eta;
    pc.iterations = a.T;
    pc.seed = mix64(a.seed + static_cast<std::uint64_t>(t));
    auto res = solve_pricing(inst, pc);
    w.raw_row({std::to_string(t),
               res.improvement_defined ? fmt17(res.improvement) : "null",
               fmt17(res.revenue_loss_robust), fmt17(res.revenue_loss_erm),
               fmt17(res.revenue_loss_best)});
    if (res.improvement_defined) {
      sum_j += res.improvement;
      ++defined;
    }
  }
  w.close();
  json j;
  j["trials"] = a.trials;
  j["defined"] = defined;
  j["mean_improvement"] = defined > 0 ? sum_j / defined : 0.0;
  std::fputs((j.dump(2) + "\n").c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phi-divergence regularized adversarial training toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (0 = machine parallelism)");

  InnerSolveArgs is;
  auto* inner_cmd =
      app.add_subcommand("inner-solve", "solve one finite-support inner problem");
  inner_cmd->add_option("--values", is.values, "comma-separated losses f_i")
      ->required();
  inner_cmd->add_option("--eta", is.eta, "regularization level (> 0)")->required();
  inner_cmd->add_option("--divergence", is.divergence,
                        "kl|quadratic|indicator:alpha|absolute|hinge");
  inner_cmd->add_option("--eps", is.eps, "bisection tolerance");
  inner_cmd->add_option("--out", is.out, "write JSON here instead of stdout");

  DensityArgs da;
  auto* density_cmd =
      app.add_subcommand("density", "worst-case density on the toy landscape");
  density_cmd->add_option("--divergence", da.divergence,
                          "kl|quadratic|indicator:alpha|absolute|hinge");
  density_cmd->add_option("--eta", da.eta, "regularization level");
  density_cmd->add_option("--rho", da.rho, "perturbation radius");
  density_cmd->add_option("--center", da.center, "data atom location");
  density_cmd->add_option("--seed", da.seed, "landscape seed");
  density_cmd->add_option("--grid", da.grid, "grid points");
  density_cmd->add_option("--out", da.out, "density CSV path");
  density_cmd->add_option("--landscape-out", da.landscape_out,
                          "also dump the loss curve CSV");

  EstimatorStatsArgs ea;
  auto* est_cmd = app.add_subcommand(
      "estimator-stats", "bias/moment/cost diagnostics for the estimators");
  est_cmd->add_option("--scheme", ea.scheme, "sg|rtmlmc");
  est_cmd->add_option("--L", ea.L, "max level");
  est_cmd->add_option("--draws", ea.draws, "independent draws");
  est_cmd->add_option("--eta", ea.eta, "regularization level");
  est_cmd->add_option("--rho", ea.rho, "perturbation radius");
  est_cmd->add_option("--seed", ea.seed, "rng seed");
  est_cmd->add_option("--out", ea.out, "write JSON here instead of stdout");

  std::string train_config;
  std::map<std::string, std::string> train_overrides;
  std::vector<std::string> set_pairs;
  auto* train_cmd =
      app.add_subcommand("train", "projected-SGD adversarial training");
  train_cmd->add_option("--config", train_config, "key = value config file");
  train_cmd->add_option("--set", set_pairs,
                        "override config entries as key=value (repeatable)");

  AttackEvalArgs aa;
  auto* attack_cmd =
      app.add_subcommand("attack-eval", "attack a trained model on a dataset");
  attack_cmd->add_option("--theta", aa.theta_path, "theta.json from train")
      ->required();
  attack_cmd->add_option("--data", aa.data_path, "CSV dataset")->required();
  attack_cmd->add_option("--attack", aa.attack, "pgm|noise");
  attack_cmd->add_option("--norm", aa.norm, "l2|linf");
  attack_cmd->add_option("--eps", aa.epsilon, "attack radius");
  attack_cmd->add_option("--steps", aa.steps, "PGM iterations");
  attack_cmd->add_option("--step-size", aa.step_size, "PGM step size");
  attack_cmd->add_option("--which", aa.which, "final|average|random");
  attack_cmd->add_option("--seed", aa.seed, "noise seed");
  attack_cmd->add_option("--out", aa.out, "write JSON here instead of stdout");

  RegfxArgs ra;
  auto* regfx_cmd =
      app.add_subcommand("regfx", "regularization-effect scaling study");
  regfx_cmd->add_option("--loss", ra.loss, "linear|quadratic|logsumexp");
  regfx_cmd->add_option("--regime", ra.regime, "interp:C|variation|variance");
  regfx_cmd->add_option("--steps", ra.steps, "number of rho halvings");
  regfx_cmd->add_option("--divergence", ra.divergence,
                        "override the regime default divergence");
  regfx_cmd->add_option("--norm", ra.norm, "ball norm l2|linf");
  regfx_cmd->add_option("--resolution", ra.resolution, "ball grid resolution");
  regfx_cmd->add_option("--out", ra.out, "report CSV path");

  RlArgs rl;
  auto* rl_cmd = app.add_subcommand("rl", "tabular q-learning benchmark");
  rl_cmd->add_flag("--robust", rl.robust, "use the entropic robust update");
  rl_cmd->add_option("--eta", rl.eta, "entropic level");
  rl_cmd->add_option("--rho", rl.rho, "state-perturbation radius");
  rl_cmd->add_option("--episodes", rl.episodes, "training episodes");
  rl_cmd->add_option("--seed", rl.seed, "rng seed");
  rl_cmd->add_option("--eval-episodes", rl.eval_episodes, "evaluation episodes");
  rl_cmd->add_option("--out", rl.out, "per-episode returns CSV");

  PricingArgs pa;
  auto* pricing_cmd =
      app.add_subcommand("pricing", "contextual pricing improvement study");
  pricing_cmd->add_option("--M", pa.M, "covariate count");
  pricing_cmd->add_option("--m", pa.m, "conditional samples per covariate");
  pricing_cmd->add_option("--rho", pa.rho, "covariate perturbation radius");
  pricing_cmd->add_option("--eta", pa.eta, "regularization level");
  pricing_cmd->add_option("--trials", pa.trials, "independent trials");
  pricing_cmd->add_option("--seed", pa.seed, "rng seed");
  pricing_cmd->add_option("--T", pa.T, "training iterations per trial");
  pricing_cmd->add_option("--out", pa.out, "per-trial improvements CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (threads > 0) par::set_max_threads(threads);
    if (inner_cmd->parsed()) return run_inner_solve(is);
    if (density_cmd->parsed()) return run_density(da);
    if (est_cmd->parsed()) return run_estimator_stats(ea);
    if (train_cmd->parsed()) {
      for (const auto& pair : set_pairs) {
        auto eq = pair.find('=');
        if (eq == std::string::npos)
          throw ParameterError("--set expects key=value, got '" + pair + "'");
        train_overrides[pair.substr(0, eq)] = pair.substr(eq + 1);
      }
      return run_train(train_config, train_overrides);
    }
    if (attack_cmd->parsed()) return run_attack_eval(aa);
    if (regfx_cmd->parsed()) return run_regfx(ra);
    if (rl_cmd->parsed()) return run_rl(rl);
    if (pricing_cmd->parsed()) return run_pricing(pa);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
