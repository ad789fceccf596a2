#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace effq {

/// Vanishing-stepsize sequences beta_t in [0,1].
///
/// Families:
///   harmonic  beta_t = 1/(t+c), c >= 1 (the canonical experiment schedule:
///             it satisfies all four admissibility conditions, the no-recency
///             -bias condition with equality)
///   constant  beta_t = b
///   custom    finite table, one beta per stage
class StepsizeSchedule {
 public:
  enum class Family { Harmonic, Constant, Custom };

  static StepsizeSchedule harmonic(double c);
  static StepsizeSchedule constant(double b);
  static StepsizeSchedule custom(std::vector<double> table);

  Family family() const { return family_; }
  double param() const { return param_; }
  const std::vector<double>& table() const { return *table_; }
  std::size_t table_size() const { return table_ ? table_->size() : 0; }

  /// beta_t. Throws on custom-table lookup past the end.
  double beta(std::uint64_t t) const;

  /// Human-readable spec string, e.g. "harmonic:c=2".
  std::string to_string() const;

 private:
  Family family_ = Family::Harmonic;
  double param_ = 1.0;
  std::shared_ptr<const std::vector<double>> table_;
};

/// Parses "harmonic:c=<real>", "constant:b=<real>", or "table:<path>"
/// (one beta per line). Throws std::invalid_argument on bad specs.
StepsizeSchedule parse_schedule_spec(const std::string& spec);

/// Verdict on one stepsize admissibility condition.
struct ConditionVerdict {
  enum class Status { Pass, Fail, DiagnosticOnly };
  Status status = Status::DiagnosticOnly;
  bool analytic = false;  // closed-form for known families vs numeric check
  std::string detail;
  bool passed() const { return status == Status::Pass; }
};

/// Report on the four stepsize conditions:
///   (1) strict monotone decrease, (2) non-summable, (3) square-summable,
///   (4) no recency bias: beta_t - beta_{t+1} >= beta_t * beta_{t+1}.
/// Asymptotic conditions (2)/(3) are certified analytically for known
/// families only; custom tables get finite-horizon diagnostics with partial
/// sums, since summability is not decidable from finite data.
struct ConditionReport {
  ConditionVerdict monotone;
  ConditionVerdict non_summable;
  ConditionVerdict square_summable;
  ConditionVerdict no_recency_bias;
  double partial_sum = 0.0;         // sum of beta_t over the horizon
  double partial_sum_squares = 0.0; // sum of beta_t^2 over the horizon
  bool all_pass() const {
    return monotone.passed() && non_summable.passed() &&
           square_summable.passed() && no_recency_bias.passed();
  }
};

ConditionReport check_conditions(const StepsizeSchedule& schedule,
                                 std::uint64_t horizon);

/// Per-stage weights of one epoch [kT, (k+1)T):
///   alpha_t = beta_t * prod_{l=t+1}^{(k+1)T-1} (1 - beta_l)
/// and their aggregate alpha_k = sum_t alpha_t = 1 - prod_t (1 - beta_t).
struct EpochWeights {
  std::uint64_t k = 0;
  std::uint64_t T = 1;
  std::vector<double> alpha;       // length T, index j for stage kT + j
  double alpha_total = 0.0;        // sum of alpha
  double survival_product = 0.0;   // prod_t (1 - beta_t) over the epoch
};

/// Computes alpha weights exactly. Products accumulate in forward order;
/// for T > 64 they switch to compensated summation of log(1-beta) to avoid
/// underflow on long epochs.
EpochWeights epoch_weights(const StepsizeSchedule& schedule, std::uint64_t k,
                           std::uint64_t T);

/// True iff alpha_{kT} >= alpha_{kT+1} >= ... >= alpha_{(k+1)T-1}.
/// Schedules satisfying the no-recency-bias condition over the epoch always
/// produce non-increasing weights.
bool weight_monotonicity_check(const EpochWeights& weights);

}  // namespace effq
