#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "effq/game.hpp"
#include "effq/rng.hpp"
#include "effq/schedule.hpp"

namespace effq {

/// Softmax with temperature tau, computed with max-subtraction. Entries are
/// strictly positive (underflowed weights are clamped to the smallest normal
/// double) and sum to 1.
std::vector<double> softmax_response(std::span<const double> q_row, double tau);

/// Synchronous update of the whole table:
///   Q'(s,a) = Q(s,a) + beta * (r(s,a)
///             + gamma * sum_s' p(s'|s,a) * Q(s', last_profile[s']) - Q(s,a))
/// where last_profile[s'] is the joint action most recently played at s'.
QTable q_update(const StochasticGame& game, const QTable& q,
                const std::vector<int>& last_profile, double beta);

struct RunConfig {
  StepsizeSchedule schedule = StepsizeSchedule::harmonic(2.0);
  double tau = 0.1;
  std::uint64_t stages = 0;
  std::uint64_t seed = 0;
  std::uint64_t log_stride = 100;

  enum class InitState { UniformRandom, Fixed };
  InitState init_state = InitState::UniformRandom;
  int fixed_state = 0;

  enum class InitProfiles { UniformRandom, Zero };
  InitProfiles init_profiles = InitProfiles::UniformRandom;
};

/// Full state of one learning run. Copyable; never shared mutably.
struct RunState {
  std::uint64_t t = 0;
  int state = 0;
  std::vector<int> last_profile;  // flat joint action per state
  QTable q;
  Rng rng;
};

/// Seeds the run. RNG draw order: initial state (one draw when uniform),
/// then one profile draw per state (when uniform).
RunState make_initial_state(const StochasticGame& game, const RunConfig& cfg);

/// One stage of the dynamics. RNG draw order is fixed:
///   1. pick the updating agent uniformly,
///   2. sample its action from the softmax response to the others' stored
///      coordinates at the current state (the stored profile there is
///      replaced; all other states keep theirs),
///   3. update Q synchronously with beta_t,
///   4. sample the next state from the kernel row of the new profile.
RunState step(RunState state, const StochasticGame& game, const RunConfig& cfg);

/// Logged time series of a run. q_err and opt_play are populated only when
/// the run was given the reference table.
struct Trajectory {
  std::vector<std::uint64_t> t;
  std::vector<int> state;
  std::vector<int> joint_action;
  std::vector<double> q_err;   // ||Q - Q*||inf after the stage's update
  std::vector<std::uint8_t> opt_play;
  bool has_reference = false;
  std::size_t size() const { return t.size(); }
};

/// Called once per stage with the pre-update table and the post-play profile
/// map; lets callers reconstruct epoch aggregates without the engine storing
/// snapshots itself.
using StageHook =
    std::function<void(std::uint64_t t, const QTable& q_before,
                       const std::vector<int>& profile_after_play)>;

/// Runs the dynamics for cfg.stages stages, logging every cfg.log_stride
/// stages. Fully determined by (game, cfg): identical inputs yield bitwise
/// identical results.
std::pair<RunState, Trajectory> run(const StochasticGame& game,
                                    const RunConfig& cfg,
                                    const QTable* q_star = nullptr,
                                    const StageHook& hook = {});

/// CSV with header "t,state,joint_action,q_err_max,opt_play"; the last two
/// columns are empty when the run had no reference table.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

/// Stage records covering epoch k of length T: the T+1 tables
/// Q_{kT}, ..., Q_{(k+1)T} and the T post-play profile maps.
struct EpochTrace {
  std::uint64_t k = 0;
  std::uint64_t T = 0;
  std::vector<QTable> q_snapshots;            // T+1 entries
  std::vector<std::vector<int>> profiles;     // T entries
};

/// Runs the dynamics for num_epochs * T stages and returns one trace per
/// epoch.
std::vector<EpochTrace> collect_epoch_traces(const StochasticGame& game,
                                             const RunConfig& cfg,
                                             std::uint64_t T,
                                             std::uint64_t num_epochs);

/// Checks the epoch-aggregated form of the update rule: unrolling T stages
/// gives, exactly,
///   Q~_{(k+1)}(s,a) = (1 - alpha_k) Q~_{(k)}(s,a)
///                     + alpha_k * gamma * sum_s' p(s'|s,a) V(s')
/// with V(s') = sum_t (alpha_t/alpha_k) (Q_t(s', a_t(s')) - max_a Q*(s',a))
/// and Q~ = Q - Q*. Returns the max absolute difference between the two
/// sides, which must sit at floating-point noise level for a faithful
/// engine. Throws if the trace shape does not match T.
double verify_epoch_identity(const StochasticGame& game, const EpochTrace& trace,
                             const StepsizeSchedule& schedule, std::uint64_t T,
                             const QTable& q_star, std::uint64_t k);

/// Streaming variant of the identity check, fed from a StageHook; keeps only
/// one epoch of snapshots at a time.
class EpochIdentityChecker {
 public:
  EpochIdentityChecker(const StochasticGame& game, StepsizeSchedule schedule,
                       std::uint64_t T, QTable q_star);

  void observe(std::uint64_t t, const QTable& q_before,
               const std::vector<int>& profile_after_play);
  /// Flush the final pending epoch using the run's final table.
  void finish(const QTable& q_final);

  double max_residual() const { return max_residual_; }
  std::uint64_t epochs_checked() const { return epochs_checked_; }

 private:
  const StochasticGame& game_;
  StepsizeSchedule schedule_;
  std::uint64_t T_;
  QTable q_star_;
  EpochTrace pending_;
  double max_residual_ = 0.0;
  std::uint64_t epochs_checked_ = 0;
};

}  // namespace effq
