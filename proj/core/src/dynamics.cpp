#include "effq/dynamics.hpp"

#include "effq/solver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace effq {

std::vector<double> softmax_response(std::span<const double> q_row, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (q_row.empty()) throw std::invalid_argument("empty payoff row");
  double m = q_row[0];
  for (double z : q_row) {
    if (!std::isfinite(z)) throw std::invalid_argument("non-finite payoff entry");
    m = std::max(m, z);
  }
  std::vector<double> probs(q_row.size());
  double total = 0.0;
  for (std::size_t i = 0; i < q_row.size(); ++i) {
    double w = std::exp((q_row[i] - m) / tau);
    // Keep every action playable even when exp underflows.
    if (w == 0.0) w = std::numeric_limits<double>::min();
    probs[i] = w;
    total += w;
  }
  for (double& p : probs) p /= total;
  return probs;
}

namespace {

// Q'(s,a) = Q(s,a) + beta * (r + gamma * <p(.|s,a), cont> - Q(s,a)), written
// in exactly that innovation form. cont[s'] = Q(s', last_profile[s']).
void q_update_in_place(const StochasticGame& game, QTable& q,
                       const std::vector<int>& last_profile, double beta,
                       std::vector<double>& cont) {
  const int S = game.num_states;
  const int A = game.num_joint_actions();
  cont.resize(S);
  for (int s = 0; s < S; ++s) cont[s] = q.at(s, last_profile[s]);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const auto row = game.kernel_row(s, a);
      double expected = 0.0;
      for (int next = 0; next < S; ++next) expected += row[next] * cont[next];
      double& cell = q.at(s, a);
      cell += beta * (game.reward_at(s, a) + game.gamma * expected - cell);
    }
  }
}

struct SoftmaxScratch {
  std::vector<double> payoffs;
  std::vector<double> probs;
};

// Payoff row for the picked agent: its own action varies, the others keep
// their stored coordinates at the current state.
int sample_agent_action(const StochasticGame& game, const QTable& q, int state,
                        int stored_flat, int agent, double tau, Rng& rng,
                        SoftmaxScratch& scratch) {
  const int own = game.joint_actions.agent_actions(agent);
  scratch.payoffs.resize(own);
  for (int b = 0; b < own; ++b)
    scratch.payoffs[b] = q.at(state, game.joint_actions.replace(stored_flat, agent, b));
  scratch.probs = softmax_response(scratch.payoffs, tau);
  return rng.sample_discrete(scratch.probs);
}

}  // namespace

QTable q_update(const StochasticGame& game, const QTable& q,
                const std::vector<int>& last_profile, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("beta must lie in [0,1]");
  QTable out = q;
  std::vector<double> cont;
  q_update_in_place(game, out, last_profile, beta, cont);
  return out;
}

RunState make_initial_state(const StochasticGame& game, const RunConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  RunState rs{0, 0, {}, QTable::zeros(game.num_states, game.num_joint_actions()),
              Rng(Rng::derive(cfg.seed, 0))};
  rs.state = cfg.init_state == RunConfig::InitState::UniformRandom
                 ? rs.rng.uniform_int(game.num_states)
                 : cfg.fixed_state;
  if (rs.state < 0 || rs.state >= game.num_states)
    throw std::invalid_argument("initial state out of range");
  rs.last_profile.resize(game.num_states, 0);
  if (cfg.init_profiles == RunConfig::InitProfiles::UniformRandom)
    for (int s = 0; s < game.num_states; ++s)
      rs.last_profile[s] = rs.rng.uniform_int(game.num_joint_actions());
  return rs;
}

namespace {

void advance(RunState& rs, const StochasticGame& game, const RunConfig& cfg,
             SoftmaxScratch& scratch, std::vector<double>& cont) {
  const int s = rs.state;
  const int agent = rs.rng.uniform_int(game.num_agents);
  const int stored = rs.last_profile[s];
  const int action =
      sample_agent_action(game, rs.q, s, stored, agent, cfg.tau, rs.rng, scratch);
  rs.last_profile[s] = game.joint_actions.replace(stored, agent, action);

  q_update_in_place(game, rs.q, rs.last_profile, cfg.schedule.beta(rs.t), cont);

  rs.state = rs.rng.sample_discrete(game.kernel_row(s, rs.last_profile[s]));
  ++rs.t;
}

}  // namespace

RunState step(RunState state, const StochasticGame& game, const RunConfig& cfg) {
  SoftmaxScratch scratch;
  std::vector<double> cont;
  advance(state, game, cfg, scratch, cont);
  return state;
}

std::pair<RunState, Trajectory> run(const StochasticGame& game,
                                    const RunConfig& cfg, const QTable* q_star,
                                    const StageHook& hook) {
  RunState rs = make_initial_state(game, cfg);
  Trajectory traj;
  traj.has_reference = q_star != nullptr;
  std::vector<int> greedy;
  if (q_star) greedy = greedy_profile(*q_star);

  SoftmaxScratch scratch;
  std::vector<double> cont;
  const std::uint64_t stride = std::max<std::uint64_t>(1, cfg.log_stride);
  for (std::uint64_t t = 0; t < cfg.stages; ++t) {
    const int s_t = rs.state;
    if (hook) {
      const QTable q_before = rs.q;
      advance(rs, game, cfg, scratch, cont);
      hook(t, q_before, rs.last_profile);
    } else {
      advance(rs, game, cfg, scratch, cont);
    }
    if (t % stride == 0) {
      traj.t.push_back(t);
      traj.state.push_back(s_t);
      traj.joint_action.push_back(rs.last_profile[s_t]);
      if (q_star) {
        traj.q_err.push_back(max_abs_diff(rs.q, *q_star));
        traj.opt_play.push_back(rs.last_profile[s_t] == greedy[s_t] ? 1 : 0);
      }
    }
  }
  return {std::move(rs), std::move(traj)};
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "t,state,joint_action,q_err_max,opt_play\n";
  char buf[64];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << traj.t[i] << ',' << traj.state[i] << ',' << traj.joint_action[i] << ',';
    if (traj.has_reference) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.q_err[i]);
      out << buf << ',' << static_cast<int>(traj.opt_play[i]);
    } else {
      out << ',';
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<EpochTrace> collect_epoch_traces(const StochasticGame& game,
                                             const RunConfig& cfg_in,
                                             std::uint64_t T,
                                             std::uint64_t num_epochs) {
  RunConfig cfg = cfg_in;
  cfg.stages = T * num_epochs;
  std::vector<EpochTrace> traces(num_epochs);
  for (std::uint64_t k = 0; k < num_epochs; ++k) {
    traces[k].k = k;
    traces[k].T = T;
  }
  auto hook = [&](std::uint64_t t, const QTable& q_before,
                  const std::vector<int>& profile) {
    const std::uint64_t k = t / T;
    EpochTrace& trace = traces[k];
    trace.q_snapshots.push_back(q_before);
    trace.profiles.push_back(profile);
  };
  auto [final_state, traj] = run(game, cfg, nullptr, hook);
  (void)traj;
  // Close each epoch with the next epoch's opening table (the final run
  // table for the last one).
  for (std::uint64_t k = 0; k + 1 < num_epochs; ++k)
    traces[k].q_snapshots.push_back(traces[k + 1].q_snapshots.front());
  if (num_epochs > 0) traces.back().q_snapshots.push_back(final_state.q);
  return traces;
}

double verify_epoch_identity(const StochasticGame& game, const EpochTrace& trace,
                             const StepsizeSchedule& schedule, std::uint64_t T,
                             const QTable& q_star, std::uint64_t k) {
  if (trace.q_snapshots.size() != T + 1)
    throw std::invalid_argument("epoch trace must hold T+1 snapshots, got " +
                                std::to_string(trace.q_snapshots.size()));
  if (trace.profiles.size() != T)
    throw std::invalid_argument("epoch trace must hold T profile maps");

  const QTable& q_open = trace.q_snapshots.front();
  const QTable& q_close = trace.q_snapshots.back();
  const int S = game.num_states;
  const int A = game.num_joint_actions();

  const EpochWeights w = epoch_weights(schedule, k, T);

  std::vector<double> v_star(S);
  for (int s = 0; s < S; ++s) {
    const auto row = q_star.row(s);
    double m = row[0];
    for (double x : row) m = std::max(m, x);
    v_star[s] = m;
  }

  std::vector<double> v(S, 0.0);
  if (w.alpha_total > 0.0) {
    for (std::uint64_t j = 0; j < T; ++j) {
      const double weight = w.alpha[j] / w.alpha_total;
      if (weight == 0.0) continue;
      const QTable& q_t = trace.q_snapshots[j];
      const std::vector<int>& profile = trace.profiles[j];
      for (int s = 0; s < S; ++s)
        v[s] += weight * (q_t.at(s, profile[s]) - v_star[s]);
    }
  }

  double residual = 0.0;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const double lhs = q_close.at(s, a) - q_star.at(s, a);
      const auto row = game.kernel_row(s, a);
      double expected_v = 0.0;
      for (int next = 0; next < S; ++next) expected_v += row[next] * v[next];
      const double rhs = (1.0 - w.alpha_total) * (q_open.at(s, a) - q_star.at(s, a)) +
                         w.alpha_total * game.gamma * expected_v;
      residual = std::max(residual, std::abs(lhs - rhs));
    }
  }
  return residual;
}

EpochIdentityChecker::EpochIdentityChecker(const StochasticGame& game,
                                           StepsizeSchedule schedule,
                                           std::uint64_t T, QTable q_star)
    : game_(game), schedule_(std::move(schedule)), T_(T), q_star_(std::move(q_star)) {
  if (T_ < 1) throw std::invalid_argument("epoch length must be >= 1");
  pending_.k = 0;
  pending_.T = T_;
}

void EpochIdentityChecker::observe(std::uint64_t t, const QTable& q_before,
                                   const std::vector<int>& profile) {
  if (t / T_ != pending_.k) {
    // A fresh epoch begins; the previous one is closed by this stage's
    // pre-update snapshot.
    pending_.q_snapshots.push_back(q_before);
    max_residual_ = std::max(
        max_residual_,
        verify_epoch_identity(game_, pending_, schedule_, T_, q_star_, pending_.k));
    ++epochs_checked_;
    pending_.q_snapshots.clear();
    pending_.profiles.clear();
    pending_.k = t / T_;
  }
  pending_.q_snapshots.push_back(q_before);
  pending_.profiles.push_back(profile);
}

void EpochIdentityChecker::finish(const QTable& q_final) {
  if (pending_.profiles.size() == T_) {
    pending_.q_snapshots.push_back(q_final);
    max_residual_ = std::max(
        max_residual_,
        verify_epoch_identity(game_, pending_, schedule_, T_, q_star_, pending_.k));
    ++epochs_checked_;
  }
  pending_.q_snapshots.clear();
  pending_.profiles.clear();
}

}  // namespace effq
