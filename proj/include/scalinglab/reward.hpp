#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "scalinglab/toyworld.hpp"

namespace scalinglab {

/// How step scores along a solution become the solution's voting weight.
enum class Aggregation { Last, Min, Product };

std::string_view to_string(Aggregation a) noexcept;
Aggregation parse_aggregation(std::string_view s);

/// Synthetic process reward model.
///
/// score = clamp((1 − w)·0.5 + w·Q* + η·u, 0, 1) with w = α/(1 + α), Q* the
/// exact success probability of the prefix, and u ∈ [−1, 1) a hash of
/// (seed, problem id, prefix). α = 0 gives an uninformative constant 0.5;
/// α = +inf gives w = 1.
struct RewardSpec {
  double alpha = 1.0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  Aggregation aggregation = Aggregation::Last;

  void validate() const;
  double blend_weight() const noexcept;
};

/// Deterministic noise u ∈ [−1, 1) for a prefix.
double prefix_noise(std::uint64_t seed, std::string_view problem_id, std::span<const StepId> prefix) noexcept;

/// Q*: probability, by enumeration of every continuation of `prefix`, that
/// sampling ends on problem.truth. Throws InvalidPrefix or CapExceeded.
double prefix_success_probability(const Problem& problem, std::span<const StepId> prefix,
                                  std::uint64_t cap = kDefaultPathCap);

double score_prefix(const RewardSpec& reward, const Problem& problem, std::span<const StepId> prefix);

/// Throws IncompleteSolution when the solution has no answer.
double score_solution(const RewardSpec& reward, const Problem& problem, const Solution& solution);

double aggregate_step_scores(std::span<const double> step_scores, Aggregation aggregation);

/// Reward bound to one problem. Q* comes from a per-state table, so scoring a
/// prefix costs one hash and one lookup; searches call this in their inner loop.
class RewardModel {
 public:
  RewardModel(RewardSpec spec, const Problem& problem);

  const RewardSpec& spec() const noexcept { return spec_; }
  const Problem& problem() const noexcept { return *problem_; }

  double success_probability(StepId last) const { return q_star_.at(last.value); }
  /// No path validation; `prefix` must come from the problem's policy.
  double score_prefix(std::span<const StepId> prefix) const;
  /// Scores every non-empty prefix of `steps`, in order.
  std::vector<double> score_steps(std::span<const StepId> steps) const;
  double score_solution(const Solution& solution) const;

 private:
  RewardSpec spec_;
  const Problem* problem_;
  std::vector<double> q_star_;
  double root_q_ = 0.0;
};

}  // namespace scalinglab
