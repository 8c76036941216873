#pragma once

// Tabular Q-learning on a small gridworld with the entropic
// state-perturbation update, plus the value-iteration oracle and the
// perturbed evaluation environments.

#include <cstdint>
#include <vector>

namespace phidro {

// Grid cells are states s = row * width + col; actions are
// 0=up 1=right 2=down 3=left. Terminal states absorb with zero reward.
// Rewards are paid on entry: reward(s,a,s') = entry_reward[s'].
struct GridMDP {
  int width = 5;
  int height = 5;
  int n_actions = 4;
  double discount = 0.6;
  int start_state = 0;
  std::vector<std::uint8_t> terminal;      // per state
  std::vector<double> entry_reward;        // per landing state
  std::vector<double> transition;          // P(s'|s,a): s*A*S' row-major
  std::vector<double> reward;              // r(s,a,s'): same layout

  int n_states() const { return width * height; }
  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) *
                          n_states() + s2];
  }
  double r(int s, int a, int s2) const {
    return reward[(static_cast<std::size_t>(s) * n_actions + a) * n_states() +
                  s2];
  }
  // Expected immediate reward, used by value iteration.
  double expected_reward(int s, int a) const;
  // States within Chebyshev distance ceil(rho) on the grid (contains s).
  std::vector<int> chebyshev_neighbors(int s, double rho) const;
};

// 5x5 benchmark: start bottom-left, goal bottom-right (+1, terminal), a
// swamp of costly non-terminal cells (-1 on entry) along the bottom between
// them, step cost -0.1 elsewhere. The shortest path hugs the swamp; the
// detour one row up is safe. Swamp values are learned, so the neighborhood
// soft-min sees the hazard.
GridMDP make_hazard_gridworld();

// Evaluation perturbations standing in for shifted physics.
GridMDP perturb_slip(const GridMDP& mdp, double slip_prob);     // random action
GridMDP perturb_corridor_reward(const GridMDP& mdp, double penalty);  // row above the swamp
GridMDP perturb_wind(const GridMDP& mdp, double push_prob);     // push toward the swamp

struct QTable {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> q;
  std::vector<int> visits;

  double& at(int s, int a) { return q[static_cast<std::size_t>(s) * n_actions + a]; }
  double at(int s, int a) const { return q[static_cast<std::size_t>(s) * n_actions + a]; }
  int greedy(int s) const;
};

QTable make_qtable(const GridMDP& mdp);

// Soft state-perturbed bootstrap value of action a at s':
// -eta log mean_{s in N_rho(s')} exp(-Q(s,a)/eta). A singleton neighborhood
// returns Q(s',a) exactly, so rho = 0 reproduces the standard update
// bit-for-bit. eta = +inf uses the neighborhood mean.
double soft_neighborhood_value(const QTable& q, const GridMDP& mdp, int s2,
                               int a, double eta, double rho);

// One learning-rate-scheduled update on (s, a, r, s2); alpha = 1/(1+visits).
void robust_q_update(QTable& q, const GridMDP& mdp, int s, int a, double r,
                     int s2, double eta, double rho);

struct QLearnOptions {
  std::int64_t episodes = 2000;
  int max_steps_per_episode = 100;
  std::int64_t total_step_cap = 0;  // 0 = no cap
  bool robust = false;
  double eta = 0.8;
  double rho = 0.0;
  std::uint64_t seed = 1;
  // Exploring starts: each training episode begins at a uniformly random
  // non-terminal state, so every state-action pair keeps getting visits.
  // Evaluation always starts at start_state.
  bool exploring_starts = true;
};

struct QLearnResult {
  QTable q;
  std::vector<double> episode_returns;  // undiscounted
  std::int64_t total_steps = 0;
};

QLearnResult run_q_learning(const GridMDP& mdp, const QLearnOptions& opt);

struct PolicyValue {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Mean undiscounted return of the greedy policy over seeded episodes.
PolicyValue evaluate_policy(const QTable& q, const GridMDP& mdp,
                            std::int64_t episodes, std::uint64_t seed,
                            int max_steps_per_episode = 100);

// Q* by value iteration to sup-norm tolerance.
std::vector<double> value_iteration_q(const GridMDP& mdp, double tol = 1e-10);

}  // namespace phidro
