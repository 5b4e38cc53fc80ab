#include "scalinglab/accounting.hpp"

#include "scalinglab/error.hpp"

namespace scalinglab {

double inference_flops(std::uint64_t params, std::uint64_t tokens, double flops_per_param_token) {
  return flops_per_param_token * static_cast<double>(params) * static_cast<double>(tokens);
}

BudgetReport::BudgetReport(std::uint64_t policy_params, std::uint64_t reward_params, bool include_reward_flops,
                           double flops_per_param_token)
    : policy_params_(policy_params),
      reward_params_(reward_params),
      include_reward_flops_(include_reward_flops),
      coefficient_(flops_per_param_token) {
  if (policy_params_ == 0 || reward_params_ == 0) {
    throw Error(ErrorCode::InvalidArgument, "parameter counts must be positive");
  }
  if (!(coefficient_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "flops_per_param_token must be positive");
}

double BudgetReport::flops() const noexcept {
  double f = inference_flops(policy_params_, policy_tokens_, coefficient_);
  if (include_reward_flops_) f += inference_flops(reward_params_, reward_tokens_, coefficient_);
  return f;
}

bool BudgetReport::same_params(const BudgetReport& other) const noexcept {
  return policy_params_ == other.policy_params_ && reward_params_ == other.reward_params_ &&
         include_reward_flops_ == other.include_reward_flops_ && coefficient_ == other.coefficient_;
}

BudgetReport merge(std::span<const BudgetReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::EmptyInput, "merge of an empty report list");
  BudgetReport out(reports[0].policy_params(), reports[0].reward_params(), reports[0].include_reward_flops(),
                   reports[0].flops_per_param_token());
  for (const auto& r : reports) {
    if (!r.same_params(out)) throw Error(ErrorCode::ParamMismatch, "merge of reports with different parameters");
    out.add_policy_tokens(r.policy_tokens());
    out.add_reward_tokens(r.reward_tokens());
    out.add_reward_calls(r.reward_calls());
  }
  return out;
}

}  // namespace scalinglab
