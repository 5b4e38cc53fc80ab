#pragma once

// Tree-search candidate generators: reward-balanced search (REBASE) and
// Monte Carlo tree search with UCT selection. Both grow a SearchTree whose
// root is the question and whose other nodes are sampled solution steps.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scalinglab/accounting.hpp"
#include "scalinglab/reward.hpp"
#include "scalinglab/rng.hpp"
#include "scalinglab/toyworld.hpp"

namespace scalinglab {

using NodeId = std::uint32_t;

struct TreeNode {
  NodeId id = 0;
  std::optional<NodeId> parent;
  StepId step;
  int depth = 0;
  std::optional<double> reward;
  std::uint64_t visit_count = 0;
  double quality = 0.0;
  bool terminal = false;
  std::vector<NodeId> children;
};

/// Arena-backed search tree. Node ids are creation order, root is 0.
class SearchTree {
 public:
  explicit SearchTree(StepId root_step);

  NodeId add_child(NodeId parent, StepId step, bool terminal);

  std::size_t size() const noexcept { return nodes_.size(); }
  TreeNode& node(NodeId id) { return nodes_.at(id); }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  const TreeNode& root() const { return nodes_.front(); }
  std::span<const TreeNode> nodes() const noexcept { return nodes_; }

  /// Steps from the root (exclusive) down to `id` (inclusive).
  std::vector<StepId> prefix(NodeId id) const;
  /// `id` first, root last.
  std::vector<NodeId> path_to_root(NodeId id) const;
  /// Pointers for backpropagate(); invalidated by add_child.
  std::vector<TreeNode*> path_nodes(NodeId id);

 private:
  std::vector<TreeNode> nodes_;
};

// ---------------------------------------------------------------------------
// REBASE

enum class Rounding { LargestRemainder };

struct RebaseConfig {
  std::uint64_t target_n = 1;
  double balance_temperature = 0.1;
  int max_depth = 0;  // 0: the policy's max_depth
  Rounding rounding = Rounding::LargestRemainder;

  void validate() const;
};

/// Expansion widths W_j for one depth: B·softmax(R/T_b) apportioned so the
/// widths sum to B exactly. Units left after flooring go to the largest
/// fractional remainders; equal remainders prefer the higher reward, then the
/// lower index.
std::vector<std::uint64_t> allocate_widths(std::span<const double> rewards, std::uint64_t budget,
                                           double balance_temperature);

/// Bookkeeping for one depth of REBASE.
struct RebaseIteration {
  int depth = 0;
  std::uint64_t budget = 0;     // B_i after subtracting this depth's completions
  std::uint64_t completed = 0;  // C_i
  std::vector<double> rewards;  // rewards of the nodes that were expanded
  std::vector<std::uint64_t> widths;
};

// ---------------------------------------------------------------------------
// MCTS

struct MctsConfig {
  double exploration_c = 1.0;
  int root_children = 4;
  int nonroot_children = 2;
  int total_expansions = 32;  // generated child nodes

  void validate() const;
};

/// Q + c·sqrt(ln n_parent / n_s). Throws InvalidArgument for zero counts.
double uct_value(double q, std::uint64_t n_parent, std::uint64_t n_s, double c);

/// Running-mean update along a leaf-to-root chain:
/// N ← N + 1, Q ← ((N − 1)·Q + v) / N.
void backpropagate(std::span<TreeNode* const> path, double value);
void backpropagate(SearchTree& tree, NodeId leaf, double value);

struct BackpropEvent {
  NodeId leaf = 0;
  double value = 0.0;
};

// ---------------------------------------------------------------------------

struct SearchResult {
  std::vector<Solution> solutions;
  /// Per-solution voting weight: the reward aggregation applied to the node
  /// rewards along the path, so no extra reward calls are needed.
  std::vector<double> weights;
  std::vector<NodeId> leaves;
  BudgetReport report;
  SearchTree tree;
  std::vector<RebaseIteration> iterations;  // REBASE only
  std::vector<BackpropEvent> events;        // MCTS only
};

/// Reward-balanced search. Returns exactly target_n solutions; paths cut off
/// at max_depth come back incomplete.
SearchResult rebase(const RewardModel& reward, const RebaseConfig& config, Rng& rng,
                    const AccountingConfig& accounting = {});

/// MCTS with PRM leaf values (no rollouts). Returns every terminal leaf
/// reached; non-terminal leaves still count toward the token budget.
SearchResult mcts(const RewardModel& reward, const MctsConfig& config, Rng& rng,
                  const AccountingConfig& accounting = {});

}  // namespace scalinglab
