#include "scalinglab/strategies.hpp"

#include <cmath>

#include "scalinglab/error.hpp"

namespace scalinglab {

std::vector<Solution> sample_n(const PolicySpec& policy, std::size_t n, Rng& rng) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample_n needs n >= 1");
  std::vector<Solution> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_solution(policy, rng));
  return out;
}

namespace {

void check_weights(std::span<const Solution> solutions, std::span<const double> weights) {
  if (solutions.empty()) throw Error(ErrorCode::EmptyInput, "no solutions");
  if (solutions.size() != weights.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(solutions.size()) + " solutions but " +
                                               std::to_string(weights.size()) + " weights");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "weights must be finite and >= 0");
  }
}

// std::map iterates answers in lexicographic order, so a strict comparison
// keeps the smallest answer among equal maxima.
void settle(VoteOutcome& out) {
  const double* best = nullptr;
  for (const auto& [answer, mass] : out.tally) {
    if (best == nullptr || mass > *best) {
      best = &mass;
      out.winner = answer;
      out.tie = false;
    } else if (mass == *best) {
      out.tie = true;
    }
  }
}

}  // namespace

VoteOutcome majority_vote(std::span<const Solution> solutions) {
  if (solutions.empty()) throw Error(ErrorCode::EmptyInput, "no solutions");
  VoteOutcome out;
  for (const auto& s : solutions) {
    if (!s.answer) continue;
    out.tally[*s.answer] += 1.0;
    ++out.effective_votes;
  }
  settle(out);
  return out;
}

VoteOutcome weighted_majority_vote(std::span<const Solution> solutions, std::span<const double> weights) {
  check_weights(solutions, weights);
  VoteOutcome out;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    if (!solutions[i].answer) continue;
    out.tally[*solutions[i].answer] += weights[i];
    ++out.effective_votes;
  }
  settle(out);
  return out;
}

std::size_t best_of_n_index(std::span<const Solution> solutions, std::span<const double> weights) {
  check_weights(solutions, weights);
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    if (!solutions[i].answer) continue;
    if (!best || weights[i] > weights[*best]) best = i;
  }
  if (!best) throw Error(ErrorCode::NoCompleteSolutions, "best_of_n: every candidate is truncated");
  return *best;
}

const Solution& best_of_n(std::span<const Solution> solutions, std::span<const double> weights) {
  return solutions[best_of_n_index(solutions, weights)];
}

}  // namespace scalinglab
