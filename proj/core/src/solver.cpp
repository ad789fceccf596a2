#include "effq/solver.hpp"

#include <algorithm>
#include <cmath>

namespace effq {

JointStrategy JointStrategy::point_mass(const std::vector<int>& profile_per_state,
                                        int num_joint_actions) {
  JointStrategy pi;
  pi.probs.resize(profile_per_state.size());
  for (std::size_t s = 0; s < profile_per_state.size(); ++s) {
    pi.probs[s].assign(num_joint_actions, 0.0);
    pi.probs[s][profile_per_state[s]] = 1.0;
  }
  return pi;
}

namespace {

double row_max(std::span<const double> row) {
  double m = row[0];
  for (double v : row) m = std::max(m, v);
  return m;
}

void validate_strategy(const StochasticGame& game, const JointStrategy& pi) {
  if (static_cast<int>(pi.probs.size()) != game.num_states)
    throw std::invalid_argument("strategy must have one distribution per state");
  for (int s = 0; s < game.num_states; ++s) {
    if (static_cast<int>(pi.probs[s].size()) != game.num_joint_actions())
      throw std::invalid_argument("strategy row has wrong length");
    double sum = 0.0;
    for (double p : pi.probs[s]) {
      if (!(p >= 0.0)) throw std::invalid_argument("strategy has negative mass");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("strategy row does not sum to 1");
  }
}

}  // namespace

QTable bellman_operator(const StochasticGame& game, const QTable& q) {
  const int A = game.num_joint_actions();
  QTable out = QTable::zeros(game.num_states, A);
  std::vector<double> state_value(game.num_states);
  for (int s = 0; s < game.num_states; ++s) state_value[s] = row_max(q.row(s));
  for (int s = 0; s < game.num_states; ++s) {
    for (int a = 0; a < A; ++a) {
      double cont = 0.0;
      const auto row = game.kernel_row(s, a);
      for (int next = 0; next < game.num_states; ++next)
        cont += row[next] * state_value[next];
      out.at(s, a) = game.reward_at(s, a) + game.gamma * cont;
    }
  }
  return out;
}

SolveResult solve_q_star(const StochasticGame& game, double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  QTable q = QTable::zeros(game.num_states, game.num_joint_actions());

  SolveResult result;
  if (game.gamma == 0.0) {
    result.q_star = bellman_operator(game, q);
    result.iterations = 1;
  } else {
    const double threshold = tol * (1.0 - game.gamma) / (2.0 * game.gamma);
    double step = 0.0;
    int iter = 0;
    while (true) {
      QTable next = bellman_operator(game, q);
      step = max_abs_diff(next, q);
      q = std::move(next);
      ++iter;
      if (step <= threshold) break;
      if (iter >= max_iter)
        throw SolveError("value iteration did not reach tolerance after " +
                             std::to_string(max_iter) +
                             " iterations (last step " + std::to_string(step) + ")",
                         step);
    }
    result.q_star = std::move(q);
    result.iterations = iter;
  }
  result.final_residual = max_abs_diff(bellman_operator(game, result.q_star),
                                       result.q_star);
  return result;
}

std::vector<int> greedy_profile(const QTable& q) {
  std::vector<int> out(q.num_states, 0);
  for (int s = 0; s < q.num_states; ++s) {
    const auto row = q.row(s);
    int best = 0;
    for (int a = 1; a < q.num_joint_actions; ++a)
      if (row[a] > row[best]) best = a;
    out[s] = best;
  }
  return out;
}

std::pair<std::vector<double>, QTable> evaluate_joint_strategy(
    const StochasticGame& game, const JointStrategy& pi, double tol,
    int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  validate_strategy(game, pi);

  const int S = game.num_states;
  const int A = game.num_joint_actions();

  // Collapse the strategy once: r_pi(s) and P_pi(s,s').
  std::vector<double> r_pi(S, 0.0);
  std::vector<double> p_pi(static_cast<std::size_t>(S) * S, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const double w = pi.probs[s][a];
      if (w == 0.0) continue;
      r_pi[s] += w * game.reward_at(s, a);
      const auto row = game.kernel_row(s, a);
      for (int next = 0; next < S; ++next)
        p_pi[static_cast<std::size_t>(s) * S + next] += w * row[next];
    }
  }

  const double threshold =
      game.gamma > 0.0 ? std::min(tol, tol * (1.0 - game.gamma) / (2.0 * game.gamma))
                       : tol;
  std::vector<double> v(S, 0.0);
  std::vector<double> next(S, 0.0);
  for (int iter = 0; iter < max_iter; ++iter) {
    double step = 0.0;
    for (int s = 0; s < S; ++s) {
      double cont = 0.0;
      for (int t = 0; t < S; ++t) cont += p_pi[static_cast<std::size_t>(s) * S + t] * v[t];
      next[s] = r_pi[s] + game.gamma * cont;
      step = std::max(step, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (step <= threshold) {
      QTable q = QTable::zeros(S, A);
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          double cont = 0.0;
          const auto row = game.kernel_row(s, a);
          for (int t = 0; t < S; ++t) cont += row[t] * v[t];
          q.at(s, a) = game.reward_at(s, a) + game.gamma * cont;
        }
      }
      return {std::move(v), std::move(q)};
    }
  }
  throw SolveError("policy evaluation did not converge", 0.0);
}

double asymptotic_error_bound(double tau, int joint_action_count, double gamma) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
  return tau * std::log(static_cast<double>(joint_action_count)) / (1.0 - gamma);
}

}  // namespace effq
