#pragma once

#include <stdexcept>
#include <vector>

#include "effq/game.hpp"

namespace effq {

/// One Markov stationary strategy over joint actions: a distribution over A
/// per state. Product strategies are the special case where the distribution
/// factorizes per agent.
struct JointStrategy {
  std::vector<std::vector<double>> probs;  // [state][joint action]

  /// Point mass on one joint action per state.
  static JointStrategy point_mass(const std::vector<int>& profile_per_state,
                                  int num_joint_actions);
};

/// Thrown when an iterative solve runs out of iterations; carries the last
/// observed sup-norm residual.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double residual)
      : std::runtime_error(what), last_residual(residual) {}
  double last_residual;
};

struct SolveResult {
  QTable q_star;
  int iterations = 0;
  double final_residual = 0.0;  // sup-norm Bellman residual of q_star
};

/// (TQ)(s,a) = r(s,a) + gamma * sum_s' p(s'|s,a) * max_a' Q(s',a').
QTable bellman_operator(const StochasticGame& game, const QTable& q);

/// Value iteration from zero. Stops when the sup-norm step is at most
/// tol*(1-gamma)/(2*gamma) (single application when gamma == 0), which
/// certifies ||Q - Q*||inf <= tol/2 by the contraction bound. The reported
/// residual is re-measured on the returned table.
SolveResult solve_q_star(const StochasticGame& game, double tol, int max_iter);

/// Per-state argmax over joint actions; ties break to the lowest flat index.
std::vector<int> greedy_profile(const QTable& q);

/// Policy evaluation of a fixed joint strategy: iterates
/// v(s) = sum_a pi(s)(a) [r(s,a) + gamma sum_s' p(s'|s,a) v(s')]
/// to the certified tolerance, then fills q(s,a) = r + gamma * E[v].
std::pair<std::vector<double>, QTable> evaluate_joint_strategy(
    const StochasticGame& game, const JointStrategy& pi, double tol,
    int max_iter = 1'000'000);

/// tau * ln|A| / (1 - gamma): the asymptotic sup-norm error the softmax
/// temperature induces in the learned Q table.
double asymptotic_error_bound(double tau, int joint_action_count, double gamma);

}  // namespace effq
