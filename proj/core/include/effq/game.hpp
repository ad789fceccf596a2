#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "effq/rng.hpp"

namespace effq {

/// Mixed-radix indexing of joint actions. Agent 0 is the most significant
/// coordinate, so the flat index is row-major over agents in order.
class JointActionSpace {
 public:
  JointActionSpace() = default;
  explicit JointActionSpace(std::vector<int> actions_per_agent);

  int num_agents() const { return static_cast<int>(sizes_.size()); }
  int size() const { return total_; }
  int agent_actions(int agent) const { return sizes_[agent]; }
  const std::vector<int>& sizes() const { return sizes_; }

  int encode(std::span<const int> actions) const;
  std::vector<int> decode(int flat) const;

  /// Agent's coordinate of a flat joint action.
  int coordinate(int flat, int agent) const {
    return (flat / strides_[agent]) % sizes_[agent];
  }

  /// Flat index with one agent's coordinate replaced.
  int replace(int flat, int agent, int action) const {
    return flat + (action - coordinate(flat, agent)) * strides_[agent];
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> strides_;
  int total_ = 0;
};

/// Finite n-agent identical-interest stochastic game <S, A, r, p> with a
/// common reward table and a fully specified transition kernel. Immutable
/// after construction; safe to share across threads.
struct StochasticGame {
  int num_agents = 0;
  int num_states = 0;
  std::vector<int> actions_per_agent;
  JointActionSpace joint_actions;
  std::vector<double> reward;  // [s * |A| + a]
  std::vector<double> kernel;  // [(s * |A| + a) * |S| + s']
  double gamma = 0.0;

  int num_joint_actions() const { return joint_actions.size(); }

  double reward_at(int s, int a) const {
    return reward[static_cast<std::size_t>(s) * num_joint_actions() + a];
  }
  double kernel_at(int s, int a, int next) const {
    return kernel_row(s, a)[next];
  }
  std::span<const double> kernel_row(int s, int a) const {
    const std::size_t base =
        (static_cast<std::size_t>(s) * num_joint_actions() + a) * num_states;
    return {kernel.data() + base, static_cast<std::size_t>(num_states)};
  }
  std::span<const double> reward_row(int s) const {
    const std::size_t base =
        static_cast<std::size_t>(s) * num_joint_actions();
    return {reward.data() + base, static_cast<std::size_t>(num_joint_actions())};
  }

  /// Largest absolute stage reward; finite for any valid game.
  double max_abs_reward() const;

  /// r_max / (1 - gamma): the bound the learning iterates never leave when
  /// started from zero with stepsizes in [0,1].
  double value_bound() const { return max_abs_reward() / (1.0 - gamma); }
};

/// Builds a game and checks structural consistency (table sizes only;
/// semantic checks live in validate_game). Throws std::invalid_argument.
StochasticGame make_game(int num_agents, int num_states,
                         std::vector<int> actions_per_agent,
                         std::vector<double> reward,
                         std::vector<double> kernel, double gamma);

/// Dense real table over (state, joint action) pairs.
struct QTable {
  int num_states = 0;
  int num_joint_actions = 0;
  std::vector<double> values;

  static QTable zeros(int num_states, int num_joint_actions) {
    QTable q;
    q.num_states = num_states;
    q.num_joint_actions = num_joint_actions;
    q.values.assign(
        static_cast<std::size_t>(num_states) * num_joint_actions, 0.0);
    return q;
  }

  double& at(int s, int a) {
    return values[static_cast<std::size_t>(s) * num_joint_actions + a];
  }
  double at(int s, int a) const {
    return values[static_cast<std::size_t>(s) * num_joint_actions + a];
  }
  std::span<const double> row(int s) const {
    return {values.data() + static_cast<std::size_t>(s) * num_joint_actions,
            static_cast<std::size_t>(num_joint_actions)};
  }

  double max_abs() const;
};

/// Sup-norm distance between two tables of identical shape.
double max_abs_diff(const QTable& a, const QTable& b);

struct ValidationReport {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
  std::string to_string() const;
};

/// Checks every game invariant (kernel row sums and ranges, finite rewards,
/// discount range) and returns the full list of violations. Never throws.
ValidationReport validate_game(const StochasticGame& game);

/// True iff p(s'|s,a) > 0 for every (s', s, a).
bool is_irreducible(const StochasticGame& game);

/// Seeded generator of valid, irreducible games. Rewards are i.i.d. uniform
/// on [reward_min, reward_max]; each kernel row is a Dirichlet(1) draw floored
/// at min_transition_prob and renormalized, so every entry lies in
/// [min_transition_prob, 1 - (|S|-1) * min_transition_prob].
/// Requires 0 < min_transition_prob <= 1/|S|.
StochasticGame random_game(int num_agents, int num_states,
                           const std::vector<int>& actions_per_agent,
                           double reward_min, double reward_max,
                           double min_transition_prob, double gamma,
                           std::uint64_t seed);

/// JSON persistence. save/load round-trip is bit-exact on all numeric
/// fields. Malformed files raise std::runtime_error naming the offending
/// field.
void save_game(const StochasticGame& game, const std::string& path);
StochasticGame load_game(const std::string& path);

void save_qtable(const QTable& q, const std::string& path);
QTable load_qtable(const std::string& path);

}  // namespace effq
