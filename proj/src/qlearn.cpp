#include "phidro/qlearn.hpp"

#include <cassert>
#include <cmath>

#include "phidro/errors.hpp"
#include "phidro/divergence.hpp"
#include "phidro/kernels.hpp"
#include "phidro/rng.hpp"

namespace phidro {

double GridMDP::expected_reward(int s, int a) const {
  std::size_t base = (static_cast<std::size_t>(s) * n_actions + a) * n_states();
  double r_exp = 0.0;
  for (int s2 = 0; s2 < n_states(); ++s2)
    r_exp += transition[base + s2] * reward[base + s2];
  return r_exp;
}

std::vector<int> GridMDP::chebyshev_neighbors(int s, double rho) const {
  int radius = static_cast<int>(std::ceil(rho));
  int row = s / width, col = s % width;
  std::vector<int> out;
  for (int dr = -radius; dr <= radius; ++dr)
    for (int dc = -radius; dc <= radius; ++dc) {
      int r2 = row + dr, c2 = col + dc;
      if (r2 >= 0 && r2 < height && c2 >= 0 && c2 < width)
        out.push_back(r2 * width + c2);
    }
  return out;
}

namespace {

constexpr double kStepReward = -0.1;
constexpr double kGoalReward = 1.0;
constexpr double kSwampReward = -5.0;
constexpr double kBumpPenalty = -0.4;  // extra cost for walking into a wall

int clamp_move(int row, int col, int a, int width, int height) {
  int dr = 0, dc = 0;
  switch (a) {
    case 0: dr = -1; break;  // up
    case 1: dc = 1; break;   // right
    case 2: dr = 1; break;   // down
    case 3: dc = -1; break;  // left
  }
  int r2 = std::min(std::max(row + dr, 0), height - 1);
  int c2 = std::min(std::max(col + dc, 0), width - 1);
  return r2 * width + c2;
}

}  // namespace

GridMDP make_hazard_gridworld() {
  GridMDP m;
  m.width = 5;
  m.height = 5;
  m.discount = 0.6;
  int S = m.n_states();
  m.start_state = 4 * m.width + 0;  // bottom-left
  int goal = 4 * m.width + 4;       // bottom-right
  m.terminal.assign(S, 0);
  m.terminal[goal] = 1;
  m.entry_reward.assign(S, kStepReward);
  m.entry_reward[goal] = kGoalReward;
  for (int c = 1; c <= 2; ++c)
    m.entry_reward[4 * m.width + c] = kSwampReward;  // swamp, non-terminal

  m.transition.assign(static_cast<std::size_t>(S) * m.n_actions * S, 0.0);
  m.reward.assign(static_cast<std::size_t>(S) * m.n_actions * S, 0.0);
  for (int s = 0; s < S; ++s) {
    int row = s / m.width, col = s % m.width;
    for (int a = 0; a < m.n_actions; ++a) {
      std::size_t base = (static_cast<std::size_t>(s) * m.n_actions + a) * S;
      if (m.terminal[s]) {
        m.transition[base + s] = 1.0;  // absorb, zero reward
        continue;
      }
      int s2 = clamp_move(row, col, a, m.width, m.height);
      m.transition[base + s2] = 1.0;
      m.reward[base + s2] = m.entry_reward[s2] + (s2 == s ? kBumpPenalty : 0.0);
    }
  }
  return m;
}

GridMDP perturb_slip(const GridMDP& mdp, double slip_prob) {
  GridMDP out = mdp;
  int S = mdp.n_states(), A = mdp.n_actions;
  for (int s = 0; s < S; ++s) {
    if (mdp.terminal[s]) continue;
    for (int a = 0; a < A; ++a) {
      std::size_t base = (static_cast<std::size_t>(s) * A + a) * S;
      for (int s2 = 0; s2 < S; ++s2) {
        double p = (1.0 - slip_prob) * mdp.p(s, a, s2);
        double rp = (1.0 - slip_prob) * mdp.p(s, a, s2) * mdp.r(s, a, s2);
        for (int a2 = 0; a2 < A; ++a2) {
          if (a2 == a) continue;
          p += slip_prob / (A - 1) * mdp.p(s, a2, s2);
          rp += slip_prob / (A - 1) * mdp.p(s, a2, s2) * mdp.r(s, a2, s2);
        }
        out.transition[base + s2] = p;
        out.reward[base + s2] = p > 0.0 ? rp / p : 0.0;
      }
    }
  }
  return out;
}

GridMDP perturb_corridor_reward(const GridMDP& mdp, double penalty) {
  GridMDP out = mdp;
  int S = mdp.n_states(), A = mdp.n_actions;
  // the corridor hugging the hazard: cells one row above a swamp cell or
  // its immediate flanks
  int corridor_row = mdp.height - 2;
  std::vector<std::uint8_t> in_corridor(S, 0);
  for (int s = 0; s < S; ++s) {
    if (s / mdp.width != corridor_row) continue;
    int col = s % mdp.width;
    for (int dc = -1; dc <= 1; ++dc) {
      int c2 = col + dc;
      if (c2 < 0 || c2 >= mdp.width) continue;
      int below = (corridor_row + 1) * mdp.width + c2;
      if (!mdp.terminal[below] && mdp.entry_reward[below] < -0.5)
        in_corridor[s] = 1;
    }
  }
  for (int s = 0; s < S; ++s) {
    if (!in_corridor[s] || mdp.terminal[s]) continue;
    for (int a = 0; a < A; ++a) {
      std::size_t base = (static_cast<std::size_t>(s) * A + a) * S;
      for (int s2 = 0; s2 < S; ++s2)
        if (mdp.p(s, a, s2) > 0.0) out.reward[base + s2] -= penalty;
    }
  }
  return out;
}

GridMDP perturb_wind(const GridMDP& mdp, double push_prob) {
  GridMDP out = mdp;
  int S = mdp.n_states(), A = mdp.n_actions;
  for (int s = 0; s < S; ++s) {
    if (mdp.terminal[s]) continue;
    for (int a = 0; a < A; ++a) {
      std::size_t base = (static_cast<std::size_t>(s) * A + a) * S;
      std::vector<double> p(S, 0.0), rp(S, 0.0);
      for (int s2 = 0; s2 < S; ++s2) {
        double mass = mdp.p(s, a, s2);
        if (mass == 0.0) continue;
        // wind pushes the landing cell one row down with probability
        // push_prob (unless already on the bottom row or at a terminal)
        int row2 = s2 / mdp.width;
        int pushed = (!mdp.terminal[s2] && row2 + 1 < mdp.height)
                         ? s2 + mdp.width
                         : s2;
        p[s2] += (1.0 - push_prob) * mass;
        rp[s2] += (1.0 - push_prob) * mass * mdp.r(s, a, s2);
        p[pushed] += push_prob * mass;
        rp[pushed] += push_prob * mass *
                      (pushed == s2 ? mdp.r(s, a, s2) : mdp.entry_reward[pushed]);
      }
      for (int s2 = 0; s2 < S; ++s2) {
        out.transition[base + s2] = p[s2];
        out.reward[base + s2] = p[s2] > 0.0 ? rp[s2] / p[s2] : 0.0;
      }
    }
  }
  return out;
}

QTable make_qtable(const GridMDP& mdp) {
  QTable q;
  q.n_states = mdp.n_states();
  q.n_actions = mdp.n_actions;
  q.q.assign(static_cast<std::size_t>(q.n_states) * q.n_actions, 0.0);
  q.visits.assign(q.q.size(), 0);
  return q;
}

int QTable::greedy(int s) const {
  int best = 0;
  for (int a = 1; a < n_actions; ++a)
    if (at(s, a) > at(s, best)) best = a;
  return best;
}

double soft_neighborhood_value(const QTable& q, const GridMDP& mdp, int s2,
                               int a, double eta, double rho) {
  std::vector<int> nb = mdp.chebyshev_neighbors(s2, rho);
  if (nb.size() == 1) return q.at(nb[0], a);
  std::vector<double> neg(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) neg[i] = -q.at(nb[i], a);
  if (eta == kInf) {
    return -kernels::reduce_sum(neg) / static_cast<double>(neg.size());
  }
  // -eta log mean exp(-Q/eta), stable through the shared helper
  return -kernels::log_mean_exp(neg, eta);
}

void robust_q_update(QTable& q, const GridMDP& mdp, int s, int a, double r,
                     int s2, double eta, double rho) {
  if (!(eta > 0.0)) throw ParameterError("robust update needs eta > 0");
  std::size_t idx = static_cast<std::size_t>(s) * q.n_actions + a;
  double alpha = 1.0 / (1.0 + q.visits[idx]);
  ++q.visits[idx];
  double bootstrap = 0.0;
  if (!mdp.terminal[s2]) {
    double best = -kInf;
    for (int a2 = 0; a2 < q.n_actions; ++a2)
      best = std::max(best, soft_neighborhood_value(q, mdp, s2, a2, eta, rho));
    bootstrap = mdp.discount * best;
  }
  q.q[idx] = (1.0 - alpha) * q.q[idx] + alpha * (r + bootstrap);
}

namespace {

int sample_next_state(const GridMDP& mdp, int s, int a, Rng& rng) {
  double u = rng.next_double();
  std::size_t base =
      (static_cast<std::size_t>(s) * mdp.n_actions + a) * mdp.n_states();
  double acc = 0.0;
  int last = 0;
  for (int s2 = 0; s2 < mdp.n_states(); ++s2) {
    double p = mdp.transition[base + s2];
    if (p <= 0.0) continue;
    acc += p;
    last = s2;
    if (u < acc) return s2;
  }
  return last;
}

}  // namespace

QLearnResult run_q_learning(const GridMDP& mdp, const QLearnOptions& opt) {
  if (opt.episodes < 1) throw ParameterError("q-learning needs episodes >= 1");
  QLearnResult res;
  res.q = make_qtable(mdp);
  Rng rng(opt.seed);
  std::vector<int> starts;
  for (int s = 0; s < mdp.n_states(); ++s)
    if (!mdp.terminal[s]) starts.push_back(s);
  for (std::int64_t ep = 0; ep < opt.episodes; ++ep) {
    if (opt.total_step_cap > 0 && res.total_steps >= opt.total_step_cap) break;
    int s = opt.exploring_starts
                ? starts[rng.uniform_index(starts.size())]
                : mdp.start_state;
    double ep_return = 0.0;
    for (int t = 0; t < opt.max_steps_per_episode; ++t) {
      // epsilon decays 1 -> 0.05 linearly over the horizon (episodes, or
      // steps when a step cap drives the run); exploring starts also force
      // a uniformly random first action so every pair keeps getting visits
      double frac = opt.total_step_cap > 0
                        ? static_cast<double>(res.total_steps) /
                              static_cast<double>(opt.total_step_cap)
                        : static_cast<double>(ep) /
                              static_cast<double>(opt.episodes);
      double eps = std::max(0.05, 1.0 - 0.95 * std::min(1.0, frac));
      bool force_random = opt.exploring_starts && t == 0;
      int a = force_random || rng.next_double() < eps
                  ? static_cast<int>(rng.uniform_index(mdp.n_actions))
                  : res.q.greedy(s);
      int s2 = sample_next_state(mdp, s, a, rng);
      double r = mdp.r(s, a, s2);
      if (opt.robust)
        robust_q_update(res.q, mdp, s, a, r, s2, opt.eta, opt.rho);
      else
        robust_q_update(res.q, mdp, s, a, r, s2, 1.0, 0.0);  // singleton path
      ep_return += r;
      ++res.total_steps;
      s = s2;
      if (mdp.terminal[s]) break;
      if (opt.total_step_cap > 0 && res.total_steps >= opt.total_step_cap)
        break;
    }
    res.episode_returns.push_back(ep_return);
  }
  return res;
}

PolicyValue evaluate_policy(const QTable& q, const GridMDP& mdp,
                            std::int64_t episodes, std::uint64_t seed,
                            int max_steps_per_episode) {
  if (episodes < 1) throw ParameterError("evaluation needs episodes >= 1");
  std::vector<double> returns(episodes);
  for (std::int64_t ep = 0; ep < episodes; ++ep) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(ep));
    int s = mdp.start_state;
    double total = 0.0;
    double disc = 1.0;
    for (int t = 0; t < max_steps_per_episode && !mdp.terminal[s]; ++t) {
      int a = q.greedy(s);
      int s2 = sample_next_state(mdp, s, a, rng);
      total += disc * mdp.r(s, a, s2);
      disc *= mdp.discount;
      s = s2;
    }
    returns[ep] = total;
  }
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(episodes);
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  var = episodes > 1 ? var / static_cast<double>(episodes - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(episodes))};
}

std::vector<double> value_iteration_q(const GridMDP& mdp, double tol) {
  int S = mdp.n_states(), A = mdp.n_actions;
  std::vector<double> q(static_cast<std::size_t>(S) * A, 0.0), next(q.size());
  for (int iter = 0; iter < 100000; ++iter) {
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double v = 0.0;
        std::size_t base = (static_cast<std::size_t>(s) * A + a) * S;
        for (int s2 = 0; s2 < S; ++s2) {
          double p = mdp.transition[base + s2];
          if (p == 0.0) continue;
          double best = 0.0;
          if (!mdp.terminal[s2]) {
            best = q[static_cast<std::size_t>(s2) * A];
            for (int a2 = 1; a2 < A; ++a2)
              best = std::max(best, q[static_cast<std::size_t>(s2) * A + a2]);
          }
          v += p * (mdp.reward[base + s2] + mdp.discount * best);
        }
        next[static_cast<std::size_t>(s) * A + a] = v;
        delta = std::max(delta,
                         std::fabs(v - q[static_cast<std::size_t>(s) * A + a]));
      }
    }
    q.swap(next);
    if (delta < tol) break;
  }
  return q;
}

}  // namespace phidro
