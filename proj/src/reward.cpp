#include "scalinglab/reward.hpp"

#include <algorithm>
#include <cmath>

#include "scalinglab/error.hpp"

namespace scalinglab {

std::string_view to_string(Aggregation a) noexcept {
  switch (a) {
    case Aggregation::Last: return "last";
    case Aggregation::Min: return "min";
    case Aggregation::Product: return "product";
  }
  return "last";
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "last") return Aggregation::Last;
  if (s == "min") return Aggregation::Min;
  if (s == "product") return Aggregation::Product;
  throw Error(ErrorCode::InvalidArgument, "unknown aggregation '" + std::string(s) + "'");
}

void RewardSpec::validate() const {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "reward alpha must be >= 0");
  if (!(eta >= 0.0 && eta <= 0.5)) throw Error(ErrorCode::InvalidArgument, "reward eta must lie in [0, 0.5]");
}

double RewardSpec::blend_weight() const noexcept {
  if (std::isinf(alpha)) return 1.0;
  return alpha / (1.0 + alpha);
}

double prefix_noise(std::uint64_t seed, std::string_view problem_id, std::span<const StepId> prefix) noexcept {
  std::uint64_t h = hash_combine(mix64(seed), hash_string(problem_id));
  h = hash_combine(h, prefix.size());
  for (auto s : prefix) h = hash_combine(h, s.value);
  return 2.0 * to_unit(mix64(h)) - 1.0;
}

namespace {

double blend_and_clamp(const RewardSpec& reward, double q_star, double noise) {
  double w = reward.blend_weight();
  double blended = (1.0 - w) * 0.5 + w * q_star;
  return std::clamp(blended + reward.eta * noise, 0.0, 1.0);
}

}  // namespace

double prefix_success_probability(const Problem& problem, std::span<const StepId> prefix, std::uint64_t cap) {
  double total = 0.0;
  for (const auto& p : enumerate_continuations(problem.policy(), prefix, cap)) {
    if (*p.solution.answer == problem.truth()) total += p.probability;
  }
  return total;
}

double score_prefix(const RewardSpec& reward, const Problem& problem, std::span<const StepId> prefix) {
  reward.validate();
  double q = prefix_success_probability(problem, prefix);
  return blend_and_clamp(reward, q, prefix_noise(reward.seed, problem.id(), prefix));
}

double aggregate_step_scores(std::span<const double> step_scores, Aggregation aggregation) {
  if (step_scores.empty()) throw Error(ErrorCode::EmptyInput, "no step scores to aggregate");
  switch (aggregation) {
    case Aggregation::Last: return step_scores.back();
    case Aggregation::Min: return *std::min_element(step_scores.begin(), step_scores.end());
    case Aggregation::Product: {
      double p = 1.0;
      for (double s : step_scores) p *= s;
      return p;
    }
  }
  return step_scores.back();
}

double score_solution(const RewardSpec& reward, const Problem& problem, const Solution& solution) {
  if (!solution.complete()) throw Error(ErrorCode::IncompleteSolution, "solution has no answer");
  std::span<const StepId> steps = solution.steps;
  if (reward.aggregation == Aggregation::Last) return score_prefix(reward, problem, steps);
  std::vector<double> scores;
  scores.reserve(steps.size());
  for (std::size_t k = 1; k <= steps.size(); ++k) scores.push_back(score_prefix(reward, problem, steps.first(k)));
  return aggregate_step_scores(scores, reward.aggregation);
}

RewardModel::RewardModel(RewardSpec spec, const Problem& problem)
    : spec_(spec), problem_(&problem), q_star_(success_table(problem.policy(), problem.truth())) {
  spec_.validate();
  root_q_ = q_star_[problem.policy().start().value];
}

double RewardModel::score_prefix(std::span<const StepId> prefix) const {
  double q = prefix.empty() ? root_q_ : q_star_[prefix.back().value];
  return blend_and_clamp(spec_, q, prefix_noise(spec_.seed, problem_->id(), prefix));
}

std::vector<double> RewardModel::score_steps(std::span<const StepId> steps) const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (std::size_t k = 1; k <= steps.size(); ++k) out.push_back(score_prefix(steps.first(k)));
  return out;
}

double RewardModel::score_solution(const Solution& solution) const {
  if (!solution.complete()) throw Error(ErrorCode::IncompleteSolution, "solution has no answer");
  if (spec_.aggregation == Aggregation::Last) return score_prefix(solution.steps);
  return aggregate_step_scores(score_steps(solution.steps), spec_.aggregation);
}

}  // namespace scalinglab
