#include "effq/game.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace effq {

using nlohmann::json;

JointActionSpace::JointActionSpace(std::vector<int> actions_per_agent)
    : sizes_(std::move(actions_per_agent)) {
  if (sizes_.empty()) throw std::invalid_argument("joint action space needs at least one agent");
  strides_.assign(sizes_.size(), 1);
  total_ = 1;
  for (int i = static_cast<int>(sizes_.size()) - 1; i >= 0; --i) {
    if (sizes_[i] < 1) throw std::invalid_argument("agent action count must be >= 1");
    strides_[i] = total_;
    if (total_ > std::numeric_limits<int>::max() / sizes_[i])
      throw std::invalid_argument("joint action space overflows int");
    total_ *= sizes_[i];
  }
}

int JointActionSpace::encode(std::span<const int> actions) const {
  int flat = 0;
  for (int i = 0; i < num_agents(); ++i) flat += actions[i] * strides_[i];
  return flat;
}

std::vector<int> JointActionSpace::decode(int flat) const {
  std::vector<int> actions(sizes_.size());
  for (int i = 0; i < num_agents(); ++i) actions[i] = coordinate(flat, i);
  return actions;
}

double StochasticGame::max_abs_reward() const {
  double m = 0.0;
  for (double r : reward) m = std::max(m, std::abs(r));
  return m;
}

StochasticGame make_game(int num_agents, int num_states,
                         std::vector<int> actions_per_agent,
                         std::vector<double> reward,
                         std::vector<double> kernel, double gamma) {
  if (num_agents < 1) throw std::invalid_argument("num_agents must be >= 1");
  if (num_states < 1) throw std::invalid_argument("num_states must be >= 1");
  if (static_cast<int>(actions_per_agent.size()) != num_agents)
    throw std::invalid_argument("actions_per_agent size does not match num_agents");
  StochasticGame g;
  g.num_agents = num_agents;
  g.num_states = num_states;
  g.actions_per_agent = actions_per_agent;
  g.joint_actions = JointActionSpace(std::move(actions_per_agent));
  const std::size_t table = static_cast<std::size_t>(num_states) * g.joint_actions.size();
  if (reward.size() != table)
    throw std::invalid_argument("reward table size does not match |S| * |A|");
  if (kernel.size() != table * num_states)
    throw std::invalid_argument("kernel size does not match |S| * |A| * |S|");
  g.reward = std::move(reward);
  g.kernel = std::move(kernel);
  g.gamma = gamma;
  return g;
}

double QTable::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const QTable& a, const QTable& b) {
  if (a.values.size() != b.values.size())
    throw std::invalid_argument("QTable shapes differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

std::string ValidationReport::to_string() const {
  if (ok()) return "valid";
  std::ostringstream out;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (i) out << "; ";
    out << problems[i];
  }
  return out.str();
}

namespace {

constexpr double kRowSumTol = 1e-12;

std::string sa_label(const StochasticGame& g, int s, int a) {
  std::ostringstream out;
  out << "(s=" << s << ", a=" << a << ")";
  (void)g;
  return out.str();
}

}  // namespace

ValidationReport validate_game(const StochasticGame& game) {
  ValidationReport report;
  auto add = [&report](const std::string& p) { report.problems.push_back(p); };

  if (!(game.gamma >= 0.0 && game.gamma < 1.0))
    add("discount factor out of range: gamma must lie in [0,1), got " +
        std::to_string(game.gamma));

  const int A = game.num_joint_actions();
  for (int s = 0; s < game.num_states; ++s) {
    for (int a = 0; a < A; ++a) {
      if (!std::isfinite(game.reward_at(s, a)))
        add("non-finite reward at " + sa_label(game, s, a));
      double sum = 0.0;
      bool bad_entry = false;
      for (int next = 0; next < game.num_states; ++next) {
        const double p = game.kernel_at(s, a, next);
        if (!(p >= 0.0 && p <= 1.0) || !std::isfinite(p)) bad_entry = true;
        sum += p;
      }
      if (bad_entry)
        add("kernel entry outside [0,1] at " + sa_label(game, s, a));
      if (std::abs(sum - 1.0) > kRowSumTol) {
        std::ostringstream out;
        out << "kernel row at " << sa_label(game, s, a) << " sums to " << sum;
        add(out.str());
      }
    }
  }
  return report;
}

bool is_irreducible(const StochasticGame& game) {
  for (double p : game.kernel)
    if (!(p > 0.0)) return false;
  return true;
}

StochasticGame random_game(int num_agents, int num_states,
                           const std::vector<int>& actions_per_agent,
                           double reward_min, double reward_max,
                           double min_transition_prob, double gamma,
                           std::uint64_t seed) {
  if (!(min_transition_prob > 0.0))
    throw std::invalid_argument("min_transition_prob must be > 0");
  if (min_transition_prob * num_states > 1.0 + 1e-15) {
    std::ostringstream out;
    out << "min_transition_prob " << min_transition_prob << " infeasible: " << num_states
        << " states require min_transition_prob <= " << (1.0 / num_states);
    throw std::invalid_argument(out.str());
  }
  if (reward_max < reward_min)
    throw std::invalid_argument("empty reward range");

  JointActionSpace space(actions_per_agent);
  const int A = space.size();
  Rng rng(Rng::derive(seed, 0));

  std::vector<double> reward(static_cast<std::size_t>(num_states) * A);
  for (double& r : reward)
    r = reward_min + rng.uniform01() * (reward_max - reward_min);

  // Dirichlet(1) row via normalized exponentials, then floor + renormalize.
  std::vector<double> kernel(reward.size() * num_states);
  const double slack = 1.0 - min_transition_prob * num_states;
  std::vector<double> e(num_states);
  for (std::size_t row = 0; row < reward.size(); ++row) {
    double total = 0.0;
    for (int next = 0; next < num_states; ++next) {
      e[next] = -std::log(1.0 - rng.uniform01());
      total += e[next];
    }
    for (int next = 0; next < num_states; ++next) {
      const double simplex = total > 0.0 ? e[next] / total : 1.0 / num_states;
      kernel[row * num_states + next] = min_transition_prob + slack * simplex;
    }
    // Grind out the last ulp so the row sums to 1 exactly enough for
    // validate_game.
    double sum = 0.0;
    for (int next = 0; next < num_states; ++next) sum += kernel[row * num_states + next];
    for (int next = 0; next < num_states; ++next) kernel[row * num_states + next] /= sum;
  }

  return make_game(num_agents, num_states, actions_per_agent,
                   std::move(reward), std::move(kernel), gamma);
}

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

const json& require_field(const json& j, const char* field, const std::string& path) {
  auto it = j.find(field);
  if (it == j.end())
    throw std::runtime_error(path + ": missing field \"" + field + "\"");
  return *it;
}

}  // namespace

void save_game(const StochasticGame& game, const std::string& path) {
  json j;
  j["spec_version"] = "1";
  j["n"] = game.num_agents;
  j["num_states"] = game.num_states;
  j["actions_per_agent"] = game.actions_per_agent;
  j["gamma"] = game.gamma;
  const int A = game.num_joint_actions();
  json reward = json::array();
  json kernel = json::array();
  for (int s = 0; s < game.num_states; ++s) {
    json rrow = json::array();
    json krow = json::array();
    for (int a = 0; a < A; ++a) {
      rrow.push_back(game.reward_at(s, a));
      json dist = json::array();
      for (int next = 0; next < game.num_states; ++next)
        dist.push_back(game.kernel_at(s, a, next));
      krow.push_back(std::move(dist));
    }
    reward.push_back(std::move(rrow));
    kernel.push_back(std::move(krow));
  }
  j["reward"] = std::move(reward);
  j["kernel"] = std::move(kernel);
  write_json_file(j, path);
}

StochasticGame load_game(const std::string& path) {
  const json j = load_json_file(path);
  const int n = require_field(j, "n", path).get<int>();
  const int num_states = require_field(j, "num_states", path).get<int>();
  const auto actions =
      require_field(j, "actions_per_agent", path).get<std::vector<int>>();
  const double gamma = require_field(j, "gamma", path).get<double>();
  const json& reward = require_field(j, "reward", path);
  const json& kernel = require_field(j, "kernel", path);

  if (static_cast<int>(actions.size()) != n)
    throw std::runtime_error(path + ": field \"actions_per_agent\" has length " +
                             std::to_string(actions.size()) + ", expected n=" +
                             std::to_string(n));
  JointActionSpace space(actions);
  const int A = space.size();

  if (static_cast<int>(reward.size()) != num_states)
    throw std::runtime_error(path + ": field \"reward\" must have one row per state");
  if (static_cast<int>(kernel.size()) != num_states)
    throw std::runtime_error(path + ": field \"kernel\" must have one row per state");

  std::vector<double> rtab;
  std::vector<double> ktab;
  rtab.reserve(static_cast<std::size_t>(num_states) * A);
  ktab.reserve(static_cast<std::size_t>(num_states) * A * num_states);
  for (int s = 0; s < num_states; ++s) {
    if (static_cast<int>(reward[s].size()) != A)
      throw std::runtime_error(path + ": field \"reward\" row " + std::to_string(s) +
                               " has " + std::to_string(reward[s].size()) +
                               " entries, expected |A|=" + std::to_string(A));
    if (static_cast<int>(kernel[s].size()) != A)
      throw std::runtime_error(path + ": field \"kernel\" row " + std::to_string(s) +
                               " has " + std::to_string(kernel[s].size()) +
                               " entries, expected |A|=" + std::to_string(A));
    for (int a = 0; a < A; ++a) {
      rtab.push_back(reward[s][a].get<double>());
      const json& dist = kernel[s][a];
      if (static_cast<int>(dist.size()) != num_states)
        throw std::runtime_error(path + ": kernel distribution at state " +
                                 std::to_string(s) + ", action " + std::to_string(a) +
                                 " has " + std::to_string(dist.size()) +
                                 " entries, expected |S|=" + std::to_string(num_states));
      for (int next = 0; next < num_states; ++next)
        ktab.push_back(dist[next].get<double>());
    }
  }
  return make_game(n, num_states, actions, std::move(rtab), std::move(ktab), gamma);
}

void save_qtable(const QTable& q, const std::string& path) {
  json j;
  j["spec_version"] = "1";
  j["num_states"] = q.num_states;
  j["num_joint_actions"] = q.num_joint_actions;
  json values = json::array();
  for (int s = 0; s < q.num_states; ++s) {
    json row = json::array();
    for (int a = 0; a < q.num_joint_actions; ++a) row.push_back(q.at(s, a));
    values.push_back(std::move(row));
  }
  j["values"] = std::move(values);
  write_json_file(j, path);
}

QTable load_qtable(const std::string& path) {
  const json j = load_json_file(path);
  QTable q;
  q.num_states = require_field(j, "num_states", path).get<int>();
  q.num_joint_actions = require_field(j, "num_joint_actions", path).get<int>();
  const json& values = require_field(j, "values", path);
  if (static_cast<int>(values.size()) != q.num_states)
    throw std::runtime_error(path + ": field \"values\" must have one row per state");
  q.values.reserve(static_cast<std::size_t>(q.num_states) * q.num_joint_actions);
  for (int s = 0; s < q.num_states; ++s) {
    if (static_cast<int>(values[s].size()) != q.num_joint_actions)
      throw std::runtime_error(path + ": field \"values\" row " + std::to_string(s) +
                               " length mismatch");
    for (int a = 0; a < q.num_joint_actions; ++a)
      q.values.push_back(values[s][a].get<double>());
  }
  return q;
}

}  // namespace effq
