#include "effq/schedule.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace effq {

namespace {

void require_beta_range(double b, const std::string& where) {
  if (!(b >= 0.0 && b <= 1.0) || !std::isfinite(b))
    throw std::invalid_argument(where + ": stepsize " + std::to_string(b) +
                                " outside [0,1]");
}

}  // namespace

StepsizeSchedule StepsizeSchedule::harmonic(double c) {
  if (!(c >= 1.0))
    throw std::invalid_argument("harmonic schedule needs c >= 1 so beta_0 <= 1");
  StepsizeSchedule s;
  s.family_ = Family::Harmonic;
  s.param_ = c;
  return s;
}

StepsizeSchedule StepsizeSchedule::constant(double b) {
  require_beta_range(b, "constant schedule");
  StepsizeSchedule s;
  s.family_ = Family::Constant;
  s.param_ = b;
  return s;
}

StepsizeSchedule StepsizeSchedule::custom(std::vector<double> table) {
  if (table.empty()) throw std::invalid_argument("custom schedule table is empty");
  for (double b : table) require_beta_range(b, "custom schedule");
  StepsizeSchedule s;
  s.family_ = Family::Custom;
  s.table_ = std::make_shared<const std::vector<double>>(std::move(table));
  return s;
}

double StepsizeSchedule::beta(std::uint64_t t) const {
  switch (family_) {
    case Family::Harmonic:
      return 1.0 / (static_cast<double>(t) + param_);
    case Family::Constant:
      return param_;
    case Family::Custom:
      if (t >= table_->size())
        throw std::out_of_range("stepsize table lookup past end: t=" +
                                std::to_string(t) + ", table size " +
                                std::to_string(table_->size()));
      return (*table_)[t];
  }
  return 0.0;
}

std::string StepsizeSchedule::to_string() const {
  std::ostringstream out;
  switch (family_) {
    case Family::Harmonic:
      out << "harmonic:c=" << param_;
      break;
    case Family::Constant:
      out << "constant:b=" << param_;
      break;
    case Family::Custom:
      out << "table[" << table_->size() << "]";
      break;
  }
  return out.str();
}

StepsizeSchedule parse_schedule_spec(const std::string& spec) {
  auto parse_real = [&spec](const std::string& text) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad schedule spec \"" + spec + "\"");
    }
    if (used != text.size())
      throw std::invalid_argument("bad schedule spec \"" + spec + "\"");
    return value;
  };

  if (spec.rfind("harmonic:c=", 0) == 0)
    return StepsizeSchedule::harmonic(parse_real(spec.substr(11)));
  if (spec.rfind("constant:b=", 0) == 0)
    return StepsizeSchedule::constant(parse_real(spec.substr(11)));
  if (spec.rfind("table:", 0) == 0) {
    const std::string path = spec.substr(6);
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open schedule table " + path);
    std::vector<double> table;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      table.push_back(parse_real(line));
    }
    return StepsizeSchedule::custom(std::move(table));
  }
  throw std::invalid_argument(
      "bad schedule spec \"" + spec +
      "\" (expected harmonic:c=<real>, constant:b=<real>, or table:<path>)");
}

namespace {

ConditionVerdict pass(bool analytic, std::string detail = {}) {
  return {ConditionVerdict::Status::Pass, analytic, std::move(detail)};
}
ConditionVerdict fail(bool analytic, std::string detail = {}) {
  return {ConditionVerdict::Status::Fail, analytic, std::move(detail)};
}
ConditionVerdict diagnostic(std::string detail) {
  return {ConditionVerdict::Status::DiagnosticOnly, false, std::move(detail)};
}

}  // namespace

ConditionReport check_conditions(const StepsizeSchedule& schedule,
                                 std::uint64_t horizon) {
  if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  if (schedule.family() == StepsizeSchedule::Family::Custom)
    horizon = std::min<std::uint64_t>(horizon, schedule.table_size());

  ConditionReport report;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const double b = schedule.beta(t);
    report.partial_sum += b;
    report.partial_sum_squares += b * b;
  }

  switch (schedule.family()) {
    case StepsizeSchedule::Family::Harmonic:
      // 1/(t+c) is strictly decreasing, non-summable, square-summable, and
      // satisfies the no-recency-bias inequality with equality:
      // 1/(t+c) - 1/(t+c+1) = 1/((t+c)(t+c+1)) = beta_t * beta_{t+1}.
      report.monotone = pass(true, "1/(t+c) strictly decreasing");
      report.non_summable = pass(true, "harmonic series diverges");
      report.square_summable = pass(true, "sum 1/(t+c)^2 converges");
      report.no_recency_bias = pass(true, "equality");
      break;
    case StepsizeSchedule::Family::Constant: {
      const double b = schedule.param();
      report.monotone = fail(true, "constant sequence is not strictly decreasing");
      report.non_summable =
          b > 0.0 ? pass(true) : fail(true, "all-zero sequence sums to 0");
      report.square_summable =
          b == 0.0 ? pass(true) : fail(true, "sum of b^2 diverges for b > 0");
      report.no_recency_bias =
          b == 0.0 ? pass(true) : fail(true, "0 >= b^2 fails for b > 0");
      break;
    }
    case StepsizeSchedule::Family::Custom: {
      bool strict = true;
      bool no_bias = true;
      std::uint64_t first_bad_monotone = 0, first_bad_bias = 0;
      for (std::uint64_t t = 0; t + 1 < horizon; ++t) {
        const double bt = schedule.beta(t);
        const double bn = schedule.beta(t + 1);
        if (!(bt > bn) && strict) {
          strict = false;
          first_bad_monotone = t;
        }
        if (bt - bn < bt * bn && no_bias) {
          no_bias = false;
          first_bad_bias = t;
        }
      }
      report.monotone =
          strict ? pass(false, "numeric check over horizon")
                 : fail(false, "violated at t=" + std::to_string(first_bad_monotone));
      report.no_recency_bias =
          no_bias ? pass(false, "numeric check over horizon")
                  : fail(false, "violated at t=" + std::to_string(first_bad_bias));
      std::ostringstream sums;
      sums << "finite-horizon diagnostic only: partial sum "
           << report.partial_sum << ", partial sum of squares "
           << report.partial_sum_squares;
      report.non_summable = diagnostic(sums.str());
      report.square_summable = diagnostic(sums.str());
      break;
    }
  }
  return report;
}

EpochWeights epoch_weights(const StepsizeSchedule& schedule, std::uint64_t k,
                           std::uint64_t T) {
  if (T < 1) throw std::invalid_argument("epoch length must be >= 1");
  EpochWeights w;
  w.k = k;
  w.T = T;
  w.alpha.assign(T, 0.0);

  std::vector<double> betas(T);
  for (std::uint64_t j = 0; j < T; ++j) betas[j] = schedule.beta(k * T + j);

  if (T <= 64) {
    // Plain suffix products: suffix[j] = prod_{l=j}^{T-1} (1 - beta_l).
    std::vector<double> suffix(T + 1, 1.0);
    for (std::uint64_t j = T; j > 0; --j)
      suffix[j - 1] = suffix[j] * (1.0 - betas[j - 1]);
    for (std::uint64_t j = 0; j < T; ++j) w.alpha[j] = betas[j] * suffix[j + 1];
    w.survival_product = suffix[0];
  } else {
    // Long epochs: accumulate log(1-beta) forward with Kahan compensation,
    // recorded as prefix sums so each suffix is one subtraction. An exact
    // zero factor (beta == 1) short-circuits everything at or before it.
    std::vector<double> prefix_log(T + 1, 0.0);
    std::uint64_t last_zero = 0;  // 1-based position of the last beta == 1
    double sum = 0.0, comp = 0.0;
    for (std::uint64_t j = 0; j < T; ++j) {
      if (betas[j] == 1.0) last_zero = j + 1;
      const double term = betas[j] < 1.0 ? std::log1p(-betas[j]) : 0.0;
      const double y = term - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      prefix_log[j + 1] = sum;
    }
    auto suffix = [&](std::uint64_t j) {
      if (last_zero > j) return 0.0;
      return std::exp(prefix_log[T] - prefix_log[j]);
    };
    for (std::uint64_t j = 0; j < T; ++j) w.alpha[j] = betas[j] * suffix(j + 1);
    w.survival_product = suffix(0);
  }

  double total = 0.0;
  for (double a : w.alpha) total += a;
  w.alpha_total = total;
  return w;
}

bool weight_monotonicity_check(const EpochWeights& weights) {
  for (std::size_t j = 0; j + 1 < weights.alpha.size(); ++j)
    if (weights.alpha[j] < weights.alpha[j + 1]) return false;
  return true;
}

}  // namespace effq
