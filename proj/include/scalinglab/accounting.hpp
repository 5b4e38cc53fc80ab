#pragma once

#include <cstdint>
#include <span>

namespace scalinglab {

inline constexpr double kDefaultFlopsPerParamToken = 2.0;

/// Inference cost of forward passes over `tokens` tokens with a
/// `params`-parameter model: coefficient · params · tokens.
double inference_flops(std::uint64_t params, std::uint64_t tokens,
                       double flops_per_param_token = kDefaultFlopsPerParamToken);

/// Token and FLOPs ledger of one inference run. Counters only grow; flops()
/// is always derived from them, never stored.
class BudgetReport {
 public:
  BudgetReport(std::uint64_t policy_params, std::uint64_t reward_params, bool include_reward_flops = true,
               double flops_per_param_token = kDefaultFlopsPerParamToken);

  void add_policy_tokens(std::uint64_t tokens) noexcept { policy_tokens_ += tokens; }
  void add_reward_tokens(std::uint64_t tokens) noexcept { reward_tokens_ += tokens; }
  void add_reward_calls(std::uint64_t calls = 1) noexcept { reward_calls_ += calls; }

  std::uint64_t policy_params() const noexcept { return policy_params_; }
  std::uint64_t reward_params() const noexcept { return reward_params_; }
  std::uint64_t policy_tokens() const noexcept { return policy_tokens_; }
  std::uint64_t reward_tokens() const noexcept { return reward_tokens_; }
  std::uint64_t reward_calls() const noexcept { return reward_calls_; }
  bool include_reward_flops() const noexcept { return include_reward_flops_; }
  double flops_per_param_token() const noexcept { return coefficient_; }

  double flops() const noexcept;

  bool same_params(const BudgetReport& other) const noexcept;
  friend bool operator==(const BudgetReport&, const BudgetReport&) = default;

 private:
  std::uint64_t policy_params_;
  std::uint64_t reward_params_;
  bool include_reward_flops_;
  double coefficient_;
  std::uint64_t policy_tokens_ = 0;
  std::uint64_t reward_tokens_ = 0;
  std::uint64_t reward_calls_ = 0;
};

/// Accounting knobs shared by every run of an experiment. The reward model
/// defaults to 34B parameters, the size of the step-level reward model the
/// compute comparisons were made with.
struct AccountingConfig {
  std::uint64_t reward_params = 34'000'000'000ULL;
  bool include_reward_flops = true;
  double flops_per_param_token = kDefaultFlopsPerParamToken;

  BudgetReport report_for(std::uint64_t policy_params) const {
    return BudgetReport(policy_params, reward_params, include_reward_flops, flops_per_param_token);
  }
};

/// Sums token counters of reports with identical parameter fields.
/// Throws EmptyInput or ParamMismatch.
BudgetReport merge(std::span<const BudgetReport> reports);

}  // namespace scalinglab
