#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "scalinglab/accounting.hpp"
#include "scalinglab/reward.hpp"
#include "scalinglab/rng.hpp"
#include "scalinglab/toyworld.hpp"

namespace scalinglab {

enum class Generator { Greedy, Sampling, Rebase, Mcts };
enum class Selection { Majority, Weighted, BestOfN };

std::string_view to_string(Generator g) noexcept;
std::string_view to_string(Selection s) noexcept;

/// One inference strategy: how candidates are generated and how the final
/// answer is picked. Per-kind knobs are ignored by the other kinds.
struct StrategySpec {
  Generator generator = Generator::Sampling;
  Selection selection = Selection::Majority;
  std::string name;  // overrides label() when non-empty

  double balance_temperature = 0.1;
  int rebase_max_depth = 0;

  double exploration_c = 1.0;
  std::optional<int> root_children;  // default: max(1, n / 8)
  int nonroot_children = 2;

  /// "greedy", or "<sampling|rebase|mcts>+<mv|wv|bon>".
  std::string label() const;
  void validate() const;
};

/// Parses a label such as "rebase+wv" into a spec with default knobs.
StrategySpec parse_strategy(std::string_view label);

struct InferenceOutcome {
  std::optional<Answer> answer;
  bool correct = false;
  std::size_t candidates = 0;
  std::size_t effective_votes = 0;
  BudgetReport report;
};

/// Runs one strategy with sample count `n` on the problem bound to `reward`.
/// For REBASE n is the target solution count, for MCTS the number of
/// generated nodes; greedy ignores it.
InferenceOutcome run_inference(const RewardModel& reward, const StrategySpec& strategy, std::uint64_t n, Rng& rng,
                               const AccountingConfig& accounting = {});

}  // namespace scalinglab
