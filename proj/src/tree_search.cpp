#include "scalinglab/tree_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scalinglab/error.hpp"

namespace scalinglab {

SearchTree::SearchTree(StepId root_step) {
  TreeNode root;
  root.step = root_step;
  nodes_.push_back(std::move(root));
}

NodeId SearchTree::add_child(NodeId parent, StepId step, bool terminal) {
  auto& p = nodes_.at(parent);
  if (p.terminal) throw Error(ErrorCode::InvalidArgument, "terminal nodes cannot have children");
  TreeNode child;
  child.id = static_cast<NodeId>(nodes_.size());
  child.parent = parent;
  child.step = step;
  child.depth = p.depth + 1;
  child.terminal = terminal;
  p.children.push_back(child.id);
  nodes_.push_back(std::move(child));
  return nodes_.back().id;
}

std::vector<StepId> SearchTree::prefix(NodeId id) const {
  std::vector<StepId> steps;
  for (auto at = id; nodes_.at(at).parent; at = *nodes_[at].parent) steps.push_back(nodes_[at].step);
  std::reverse(steps.begin(), steps.end());
  return steps;
}

std::vector<NodeId> SearchTree::path_to_root(NodeId id) const {
  std::vector<NodeId> path{id};
  while (nodes_.at(path.back()).parent) path.push_back(*nodes_[path.back()].parent);
  return path;
}

std::vector<TreeNode*> SearchTree::path_nodes(NodeId id) {
  std::vector<TreeNode*> out;
  for (auto n : path_to_root(id)) out.push_back(&nodes_[n]);
  return out;
}

namespace {

std::uint64_t prefix_tokens(const PolicySpec& policy, std::span<const StepId> steps) {
  std::uint64_t t = 0;
  for (auto s : steps) t += policy.tokens(s);
  return t;
}

// Scores node `id` with the PRM and charges the reward model for reading its prefix.
double evaluate(const RewardModel& reward, SearchTree& tree, NodeId id, BudgetReport& report) {
  auto steps = tree.prefix(id);
  double v = reward.score_prefix(steps);
  tree.node(id).reward = v;
  report.add_reward_calls();
  report.add_reward_tokens(prefix_tokens(reward.problem().policy(), steps));
  return v;
}

void collect_leaf(const RewardModel& reward, const SearchTree& tree, NodeId leaf, SearchResult& out) {
  const auto& policy = reward.problem().policy();
  auto steps = tree.prefix(leaf);
  out.solutions.push_back(make_solution(policy, steps));
  std::vector<double> scores;
  scores.reserve(steps.size());
  for (auto n : tree.path_to_root(leaf)) {
    if (tree.node(n).parent) scores.push_back(*tree.node(n).reward);
  }
  std::reverse(scores.begin(), scores.end());
  out.weights.push_back(aggregate_step_scores(scores, reward.spec().aggregation));
  out.leaves.push_back(leaf);
}

}  // namespace

// ---------------------------------------------------------------------------
// REBASE

void RebaseConfig::validate() const {
  if (target_n < 1) throw Error(ErrorCode::InvalidArgument, "rebase target_n must be >= 1");
  if (!(balance_temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "balance temperature must be > 0");
  if (max_depth < 0) throw Error(ErrorCode::InvalidArgument, "rebase max_depth must be >= 0");
}

std::vector<std::uint64_t> allocate_widths(std::span<const double> rewards, std::uint64_t budget,
                                           double balance_temperature) {
  if (rewards.empty()) throw Error(ErrorCode::EmptyInput, "allocate_widths needs at least one reward");
  if (!(balance_temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "balance temperature must be > 0");
  const std::size_t n = rewards.size();
  double top = *std::max_element(rewards.begin(), rewards.end());
  std::vector<double> raw(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    raw[j] = std::exp((rewards[j] - top) / balance_temperature);
    total += raw[j];
  }
  std::vector<std::uint64_t> widths(n);
  std::vector<double> remainder(n);
  std::uint64_t assigned = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double share = static_cast<double>(budget) * raw[j] / total;
    double whole = std::floor(share);
    widths[j] = static_cast<std::uint64_t>(whole);
    remainder[j] = share - whole;
    assigned += widths[j];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return rewards[a] > rewards[b];
  });
  // Floors leave fewer than n units unassigned, so one pass suffices; the
  // modulo only matters if floating-point slack ever breaks that.
  for (std::size_t k = 0; assigned < budget; k = (k + 1) % n) {
    ++widths[order[k]];
    ++assigned;
  }
  return widths;
}

SearchResult rebase(const RewardModel& reward, const RebaseConfig& config, Rng& rng,
                    const AccountingConfig& accounting) {
  config.validate();
  const auto& policy = reward.problem().policy();
  const int max_depth = config.max_depth == 0 ? policy.max_depth() : std::min(config.max_depth, policy.max_depth());

  SearchResult out{{}, {}, {}, accounting.report_for(policy.param_count()), SearchTree(policy.start()), {}, {}};
  auto& tree = out.tree;
  auto& report = out.report;

  auto spawn = [&](NodeId parent, std::uint64_t count, std::vector<NodeId>& into) {
    StepId from = tree.node(parent).step;
    for (std::uint64_t k = 0; k < count; ++k) {
      StepId step = sample_step(policy, from, rng);
      into.push_back(tree.add_child(parent, step, policy.is_terminal(step)));
      report.add_policy_tokens(policy.tokens(step));
    }
  };

  std::uint64_t budget = config.target_n;
  std::vector<NodeId> frontier;
  spawn(0, budget, frontier);

  for (int depth = 1;; ++depth) {
    RebaseIteration it;
    it.depth = depth;
    std::vector<NodeId> open;
    for (auto id : frontier) {
      evaluate(reward, tree, id, report);
      if (tree.node(id).terminal) {
        collect_leaf(reward, tree, id, out);
        ++it.completed;
      } else {
        open.push_back(id);
      }
    }
    budget -= it.completed;
    it.budget = budget;
    if (budget == 0 || depth >= max_depth) {
      // Depth exhausted: whatever budget is left becomes truncated solutions.
      for (auto id : open) collect_leaf(reward, tree, id, out);
      out.iterations.push_back(std::move(it));
      break;
    }
    for (auto id : open) it.rewards.push_back(*tree.node(id).reward);
    it.widths = allocate_widths(it.rewards, budget, config.balance_temperature);
    std::vector<NodeId> next;
    next.reserve(budget);
    for (std::size_t j = 0; j < open.size(); ++j) spawn(open[j], it.widths[j], next);
    out.iterations.push_back(std::move(it));
    frontier = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MCTS

void MctsConfig::validate() const {
  if (!(exploration_c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "exploration constant must be >= 0");
  if (root_children < 1 || nonroot_children < 1 || total_expansions < 1) {
    throw Error(ErrorCode::InvalidArgument, "MCTS widths and expansion budget must be positive");
  }
}

double uct_value(double q, std::uint64_t n_parent, std::uint64_t n_s, double c) {
  if (n_parent < 1 || n_s < 1) throw Error(ErrorCode::InvalidArgument, "UCT needs visit counts >= 1");
  return q + c * std::sqrt(std::log(static_cast<double>(n_parent)) / static_cast<double>(n_s));
}

void backpropagate(std::span<TreeNode* const> path, double value) {
  for (auto* n : path) {
    n->visit_count += 1;
    n->quality = (static_cast<double>(n->visit_count - 1) * n->quality + value) / static_cast<double>(n->visit_count);
  }
}

void backpropagate(SearchTree& tree, NodeId leaf, double value) {
  backpropagate(tree.path_nodes(leaf), value);
}

SearchResult mcts(const RewardModel& reward, const MctsConfig& config, Rng& rng, const AccountingConfig& accounting) {
  config.validate();
  const auto& policy = reward.problem().policy();
  SearchResult out{{}, {}, {}, accounting.report_for(policy.param_count()), SearchTree(policy.start()), {}, {}};
  auto& tree = out.tree;
  auto& report = out.report;

  // A node is closed once its subtree has nothing left to expand: it is
  // terminal, or all of its children are closed.
  std::vector<char> closed{0};
  int remaining = config.total_expansions;

  while (remaining > 0 && !closed[0]) {
    NodeId at = 0;
    while (!tree.node(at).children.empty()) {
      const auto& node = tree.node(at);
      std::optional<NodeId> pick;
      double best = 0.0;
      for (auto c : node.children) {
        if (closed[c]) continue;
        const auto& child = tree.node(c);
        if (child.visit_count == 0) {
          pick = c;
          break;
        }
        double u = uct_value(child.quality, node.visit_count, child.visit_count, config.exploration_c);
        if (!pick || u > best) {
          pick = c;
          best = u;
        }
      }
      at = *pick;
    }

    const int width = std::min(at == 0 ? config.root_children : config.nonroot_children, remaining);
    const StepId from = tree.node(at).step;
    for (int k = 0; k < width; ++k) {
      StepId step = sample_step(policy, from, rng);
      NodeId child = tree.add_child(at, step, policy.is_terminal(step));
      closed.push_back(policy.is_terminal(step) ? 1 : 0);
      report.add_policy_tokens(policy.tokens(step));
      double v = evaluate(reward, tree, child, report);
      backpropagate(tree, child, v);
      out.events.push_back({child, v});
      --remaining;
    }

    for (auto n = at;;) {
      const auto& kids = tree.node(n).children;
      if (!std::all_of(kids.begin(), kids.end(), [&](NodeId c) { return closed[c] != 0; })) break;
      closed[n] = 1;
      if (!tree.node(n).parent) break;
      n = *tree.node(n).parent;
    }
  }

  for (const auto& n : tree.nodes()) {
    if (n.terminal) collect_leaf(reward, tree, n.id, out);
  }
  return out;
}

}  // namespace scalinglab
