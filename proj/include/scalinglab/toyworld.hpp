#pragma once

// Synthetic problems whose policy model is a finite layered stochastic
// process. Every quantity the voting limits depend on can be computed
// exactly by enumerating root-to-terminal paths.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scalinglab/rng.hpp"

namespace scalinglab {

inline constexpr std::size_t kDefaultMaxAnswerLength = 8;
inline constexpr std::uint32_t kDefaultTokensPerStep = 32;
inline constexpr std::uint64_t kDefaultPathCap = 1'000'000;
inline constexpr double kProbabilitySumTolerance = 1e-9;

/// Final answer string y. Atomic: the end-of-reasoning token is arrival at a
/// terminal state, so no answer-length machinery is needed beyond the bound.
class Answer {
 public:
  explicit Answer(std::string value, std::size_t max_length = kDefaultMaxAnswerLength);

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const Answer&, const Answer&) = default;

 private:
  std::string value_;
};

/// Index of a state in its PolicySpec. Index order is the canonical
/// (construction) order used for every tie-break.
struct StepId {
  std::uint32_t value = 0;
  friend auto operator<=>(const StepId&, const StepId&) = default;
};

struct Transition {
  StepId target;
  double probability = 0.0;
};

/// Name-keyed description of a policy, as read from JSON or written by hand.
struct PolicyDraft {
  std::vector<std::string> states;
  std::string start;
  std::map<std::string, std::vector<std::pair<std::string, double>>> transitions;
  std::map<std::string, std::string> terminals;
  std::map<std::string, std::uint32_t> tokens_per_step;  // missing states cost kDefaultTokensPerStep
  int max_depth = 1;
  std::uint64_t param_count = 1;
};

/// Immutable, validated policy model. Throws Error(InvalidPolicy) on
/// construction if any invariant fails: probabilities of every non-terminal
/// state sum to one, terminals have no outgoing edges, and every path from
/// start hits a terminal within max_depth steps.
class PolicySpec {
 public:
  explicit PolicySpec(const PolicyDraft& draft);

  std::size_t size() const noexcept { return names_.size(); }
  StepId start() const noexcept { return start_; }
  int max_depth() const noexcept { return max_depth_; }
  std::uint64_t param_count() const noexcept { return param_count_; }

  const std::string& name(StepId id) const { return names_.at(id.value); }
  std::optional<StepId> find(std::string_view name) const;
  StepId at(std::string_view name) const;

  std::span<const Transition> transitions(StepId id) const { return transitions_.at(id.value); }
  bool is_terminal(StepId id) const { return answers_.at(id.value).has_value(); }
  const std::optional<Answer>& answer(StepId id) const { return answers_.at(id.value); }
  std::uint32_t tokens(StepId id) const { return tokens_.at(id.value); }

  /// Copy with a new parameter count (model size) and the given transition
  /// probabilities. `probabilities[s][k]` replaces transitions(s)[k].
  PolicySpec reweighted(const std::vector<std::vector<double>>& probabilities,
                        std::uint64_t param_count) const;

  PolicyDraft to_draft() const;

 private:
  PolicySpec() = default;
  void validate() const;

  std::vector<std::string> names_;
  StepId start_;
  std::vector<std::vector<Transition>> transitions_;
  std::vector<std::optional<Answer>> answers_;
  std::vector<std::uint32_t> tokens_;
  int max_depth_ = 1;
  std::uint64_t param_count_ = 1;
};

/// Problem x with ground truth y. Construction checks that truth is a
/// reachable terminal answer unless `truth_unreachable` says otherwise.
class Problem {
 public:
  Problem(std::string id, Answer truth, PolicySpec policy, bool truth_unreachable = false);

  const std::string& id() const noexcept { return id_; }
  const Answer& truth() const noexcept { return truth_; }
  const PolicySpec& policy() const noexcept { return policy_; }
  bool truth_unreachable() const noexcept { return truth_unreachable_; }

  Problem with_policy(PolicySpec policy) const;

 private:
  std::string id_;
  Answer truth_;
  PolicySpec policy_;
  bool truth_unreachable_;
};

class Dataset {
 public:
  explicit Dataset(std::vector<Problem> problems);

  std::span<const Problem> problems() const noexcept { return problems_; }
  std::size_t size() const noexcept { return problems_.size(); }
  const Problem& operator[](std::size_t i) const { return problems_[i]; }

 private:
  std::vector<Problem> problems_;
};

/// One sampled reasoning path. `steps` excludes the start state (the question).
struct Solution {
  std::vector<StepId> steps;
  std::optional<Answer> answer;
  std::uint64_t tokens = 0;
  double log_prob = 0.0;

  bool complete() const noexcept { return answer.has_value(); }
  friend bool operator==(const Solution&, const Solution&) = default;
};

/// Recomputes tokens, answer and log-probability of a step sequence.
/// Throws InvalidPrefix if the steps are not a path from start.
Solution make_solution(const PolicySpec& policy, std::span<const StepId> steps);

/// Categorical draw over a state's outgoing transitions in listed order.
StepId sample_step(const PolicySpec& policy, StepId from, Rng& rng);

Solution sample_solution(const PolicySpec& policy, Rng& rng);
/// Stops after `depth_limit` steps; the solution is then incomplete.
Solution sample_solution(const PolicySpec& policy, Rng& rng, int depth_limit);

Solution greedy_solution(const PolicySpec& policy);

struct WeightedPath {
  Solution solution;
  double probability = 0.0;
};

/// Number of positive-probability paths from `from` to a terminal, saturated at cap + 1.
std::uint64_t count_paths(const PolicySpec& policy, StepId from, std::uint64_t cap);

/// All complete paths from start with their exact probabilities, in
/// depth-first canonical transition order. Throws CapExceeded above `cap`.
std::vector<WeightedPath> enumerate_paths(const PolicySpec& policy,
                                          std::uint64_t cap = kDefaultPathCap);

/// Paths continuing from the end of `prefix` (which must be a valid path from
/// start). The returned solutions contain the full step sequence.
std::vector<WeightedPath> enumerate_continuations(const PolicySpec& policy,
                                                  std::span<const StepId> prefix,
                                                  std::uint64_t cap = kDefaultPathCap);

using AnswerDistribution = std::map<Answer, double>;

AnswerDistribution marginal_answer_distribution(const PolicySpec& policy,
                                                std::uint64_t cap = kDefaultPathCap);

/// Per-state probability that continued sampling ends at a terminal whose
/// answer equals `truth`. Dynamic programming over the acyclic reachable
/// graph; states unreachable from start get the value their subgraph implies.
std::vector<double> success_table(const PolicySpec& policy, const Answer& truth);

/// Size-quality fixture. Each member mixes the base transitions toward the
/// truth-conditioned transitions p(c)·Q*(c)/Q*(s) with weight
/// q(N) = 1 − (1 − q0)·(N0/N)^β, clamped to [0, 1].
struct FamilyParams {
  double q0 = 0.55;
  double beta = 0.5;
  std::uint64_t reference_size = 0;  // N0; 0 means the smallest requested size
};

double family_mixing_weight(std::uint64_t size, std::uint64_t reference_size,
                            const FamilyParams& params);

std::vector<PolicySpec> make_policy_family(const PolicySpec& base, const Answer& truth,
                                           std::span<const std::uint64_t> sizes,
                                           const FamilyParams& params = {});

/// Random layered problems. Layer d holds `width` states; each non-terminal
/// state links to `branching` distinct states of the next layer with
/// Dirichlet(1) probabilities, states before the last layer are terminal
/// with probability `early_stop`, and the last layer is all terminal.
struct GeneratorSpec {
  std::size_t problems = 20;
  int depth = 4;
  int width = 4;
  int branching = 3;
  int answers = 3;
  double early_stop = 0.15;
  double truth_is_mode = 0.7;  // chance the truth is the most likely answer
  std::uint32_t tokens_per_step = kDefaultTokensPerStep;
  std::uint64_t param_count = 1;
  std::uint64_t seed = 0;
};

Dataset generate_dataset(const GeneratorSpec& spec);

}  // namespace scalinglab
