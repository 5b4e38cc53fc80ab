#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "scalinglab/rng.hpp"
#include "scalinglab/toyworld.hpp"

namespace scalinglab {

/// Result of a (weighted) vote over candidate solutions.
///
/// `tally` holds vote counts or total weight per answer, over complete
/// solutions only. `winner` is the argmax with ties going to the smallest
/// answer in lexicographic order; it is empty when no solution is complete.
struct VoteOutcome {
  std::optional<Answer> winner;
  std::map<Answer, double> tally;
  bool tie = false;
  std::size_t effective_votes = 0;
};

/// n independent draws from one stream, in draw order.
std::vector<Solution> sample_n(const PolicySpec& policy, std::size_t n, Rng& rng);

/// Throws EmptyInput. Truncated solutions cost a slot but cast no vote.
VoteOutcome majority_vote(std::span<const Solution> solutions);

/// Throws EmptyInput, LengthMismatch, or InvalidArgument for negative weights.
VoteOutcome weighted_majority_vote(std::span<const Solution> solutions, std::span<const double> weights);

/// Index of the highest-weight complete solution, earliest on ties.
/// Throws EmptyInput, LengthMismatch or NoCompleteSolutions.
std::size_t best_of_n_index(std::span<const Solution> solutions, std::span<const double> weights);

const Solution& best_of_n(std::span<const Solution> solutions, std::span<const double> weights);

}  // namespace scalinglab
