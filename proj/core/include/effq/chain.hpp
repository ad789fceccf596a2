#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "effq/dynamics.hpp"
#include "effq/game.hpp"
#include "effq/rng.hpp"
#include "effq/schedule.hpp"

namespace effq {

/// Indexing of the extended state space W = S x A^|S|: the current state
/// paired with one stored joint action per state. State 0's profile is the
/// most significant digit; the base state is above all of them, so
/// w = s * |A|^|S| + profile digits.
class ExtendedSpace {
 public:
  ExtendedSpace(int num_states, int num_joint_actions);

  std::uint64_t size() const { return size_; }
  int num_states() const { return num_states_; }
  int num_joint_actions() const { return num_joint_actions_; }

  std::uint64_t encode(int state, std::span<const int> profiles) const;
  void decode(std::uint64_t w, int& state, std::vector<int>& profiles) const;

 private:
  int num_states_;
  int num_joint_actions_;
  std::uint64_t profiles_size_;  // |A|^|S|
  std::uint64_t size_;
};

/// Dense row-stochastic transition matrix over W for a frozen table: the
/// stage play at the current state (one uniformly picked agent softmax-
/// responds, the rest replay) composed with the state transition. Nonzero
/// entries exist only where the target profile map differs from the source
/// at the source's base state, in at most one agent coordinate.
struct ExtendedChain {
  ExtendedSpace space;
  std::vector<double> matrix;  // row-major |W| x |W|
  double tau = 0.0;
  QTable q;

  double at(std::uint64_t from, std::uint64_t to) const {
    return matrix[from * space.size() + to];
  }
  std::span<const double> row(std::uint64_t from) const {
    return {matrix.data() + from * space.size(), space.size()};
  }
};

/// Builds the full matrix. Throws when |W| exceeds max_rows (default
/// 200000 rows) with the actual |W| in the message.
ExtendedChain build_extended_chain(const StochasticGame& game, const QTable& q,
                                   double tau,
                                   std::uint64_t max_rows = 200000);

/// Certified transition-probability floor and reachability horizon:
///   kappa = |S| * n
///   epsilon = (1/n) * (exp(-2*q_bound/tau) / max_i |A^i|) * min p(s'|s,a),
/// a lower bound on every nonzero entry of any chain built from a table
/// bounded by q_bound. Throws if the game is not irreducible.
std::pair<double, int> epsilon_kappa(const StochasticGame& game, double q_bound,
                                     double tau);

/// Power iteration until the L1 step is at most tol. The returned vector
/// satisfies ||pi P - pi||_1 <= 2 tol. Throws SolveError past max_iter.
std::vector<double> stationary_distribution(const ExtendedChain& chain,
                                            double tol, int max_iter);

enum class MarginalMode { ConditionalOnVisit, Joint };

/// Distribution over the joint action stored at state s, under a
/// distribution over W. Joint mode sums over all extended states; the
/// default conditions on the base state being s and renormalizes (throws on
/// zero conditioning mass).
std::vector<double> state_action_marginal(
    const ExtendedChain& chain, std::span<const double> dist, int s,
    MarginalMode mode = MarginalMode::ConditionalOnVisit);

/// Total variation distance (1/2) * sum |p_i - q_i|.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Draws (x, y) with marginals exactly p and q and
/// Pr(x != y) = tv_distance(p, q): with probability 1-TV both come from the
/// normalized overlap min(p,q); otherwise each comes independently from its
/// normalized residual. Consumes 1 draw when coupled, 3 when not.
std::pair<int, int> maximal_coupling_sample(std::span<const double> p,
                                            std::span<const double> q, Rng& rng);

/// Sparse one-step distribution over W from a single extended state, for
/// games too large to materialize the full matrix.
struct SparseDist {
  std::vector<std::uint64_t> index;  // strictly increasing
  std::vector<double> prob;
};

SparseDist extended_row(const StochasticGame& game, const ExtendedSpace& space,
                        const QTable& q, double tau, std::uint64_t from);

/// Sparse-support maximal coupling with the same guarantees as the dense
/// variant.
std::pair<std::uint64_t, std::uint64_t> maximal_coupling_sample(
    const SparseDist& p, const SparseDist& q, Rng& rng);

/// One paired trajectory of the live chain (table evolving by the learning
/// update) against the frozen-table reference chain, coupled maximally
/// whenever the two sit in the same extended state and run independently
/// otherwise.
struct CouplingRun {
  std::vector<std::uint8_t> matched;  // per stage, after the transition
  double max_one_step_tv = 0.0;       // max TV between the two kernels at the
                                      // live chain's current state
};

struct CoupleOptions {
  bool freeze_live = false;  // run the live side with the frozen table too
  std::optional<std::uint64_t> live_init;    // default: same as reference
  std::optional<std::uint64_t> reference_init;  // default: extended state 0
};

CouplingRun coupled_run(const StochasticGame& game, const QTable& frozen_q,
                        const StepsizeSchedule& schedule, double tau,
                        std::uint64_t epoch_start, std::uint64_t T,
                        std::uint64_t seed, const CoupleOptions& options = {});

/// Per-interval aggregation of paired runs against the analytic mismatch
/// envelope.
struct CouplingSummary {
  double epsilon = 0.0;
  int kappa = 1;
  double lambda = 1.0;
  std::uint64_t pairs = 0;
  struct PerInterval {
    int m = 0;
    double mismatch_max = 0.0;   // max over stages in [m kappa, (m+1) kappa)
    double mismatch_mean = 0.0;
    double ci_halfwidth = 0.0;   // 3 binomial sigma at the envelope value
    double bound_raw = 0.0;
    double bound_clamped = 0.0;
  };
  std::vector<PerInterval> per_m;
};

CouplingSummary summarize_coupling(const std::vector<CouplingRun>& runs,
                                   double epsilon, int kappa, double lambda);

/// Mismatch envelope for coupled chains with transition floor epsilon,
/// per-step match retention lambda, reachability horizon kappa, after m
/// kappa-length intervals:
///   (1 - eps^k lam^k)^m + (1 - lam^k)(1 + eps^k lam^k)/(eps^k lam^k).
/// The raw value may exceed 1 (then vacuous); the clamped value never does.
struct MismatchBound {
  double raw = 0.0;
  double clamped = 0.0;
};
MismatchBound coupling_mismatch_bound(double epsilon, double lambda, int kappa,
                                      std::uint64_t m);

/// Gap between the softmax-weighted value and the exact maximum of one row:
///   e_d = E_{a ~ softmax(Q(s,.)/tau)}[Q(s,a)] - max_a Q(s,a)  (always <= 0)
/// together with its analytic bound tau * ln|A|.
struct SoftHardGap {
  double e_d = 0.0;
  double bound = 0.0;
};
SoftHardGap soft_vs_hard_gap(const QTable& q, double tau, int s);

/// The analytic per-epoch error budget the convergence argument assembles.
struct SubErrorReport {
  double q_bar = 0.0;        // r_max / (1 - gamma)
  double beta_epoch_start = 0.0;
  double drift_bound = 0.0;  // 2 * q_bar * T * beta_{kT}
  double epsilon = 0.0;
  int kappa = 1;
  double tracking_bound = 0.0;  // (1/T) * 2 * q_bar * kappa / eps^kappa
  double softmax_gap_bound = 0.0;  // tau * ln|A|
  double total_bound = 0.0;        // tau * ln|A| / (1 - gamma)
  std::optional<double> lambda_user;
  std::optional<double> lambda_measured;
  bool lambda_valid = true;
  std::string note;
};

SubErrorReport sub_error_bounds(const StochasticGame& game,
                                const StepsizeSchedule& schedule,
                                std::uint64_t k, std::uint64_t T, double tau,
                                double q_bound = -1.0,
                                std::optional<double> lipschitz_user = {},
                                std::optional<double> lipschitz_measured = {});

/// Empirical estimate of the one-step TV sensitivity of the extended chain
/// to table perturbations: maximizes TV(row(Q), row(Q+D)) / ||D||_max over
/// sampled perturbations and all extended states.
double measure_lipschitz_constant(const StochasticGame& game, const QTable& q,
                                  double tau, int num_perturbations,
                                  double magnitude, std::uint64_t seed);

}  // namespace effq
