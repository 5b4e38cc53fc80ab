#include "scalinglab/inference.hpp"

#include <algorithm>
#include <vector>

#include "scalinglab/error.hpp"
#include "scalinglab/strategies.hpp"
#include "scalinglab/tree_search.hpp"

namespace scalinglab {

std::string_view to_string(Generator g) noexcept {
  switch (g) {
    case Generator::Greedy: return "greedy";
    case Generator::Sampling: return "sampling";
    case Generator::Rebase: return "rebase";
    case Generator::Mcts: return "mcts";
  }
  return "sampling";
}

std::string_view to_string(Selection s) noexcept {
  switch (s) {
    case Selection::Majority: return "mv";
    case Selection::Weighted: return "wv";
    case Selection::BestOfN: return "bon";
  }
  return "mv";
}

std::string StrategySpec::label() const {
  if (!name.empty()) return name;
  if (generator == Generator::Greedy) return "greedy";
  return std::string(to_string(generator)) + "+" + std::string(to_string(selection));
}

void StrategySpec::validate() const {
  if (!(balance_temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "balance_temperature must be > 0");
  if (rebase_max_depth < 0) throw Error(ErrorCode::InvalidArgument, "max_depth must be >= 0");
  if (!(exploration_c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "exploration_c must be >= 0");
  if (root_children && *root_children < 1) throw Error(ErrorCode::InvalidArgument, "root_children must be >= 1");
  if (nonroot_children < 1) throw Error(ErrorCode::InvalidArgument, "nonroot_children must be >= 1");
}

StrategySpec parse_strategy(std::string_view label) {
  StrategySpec spec;
  if (label == "greedy") {
    spec.generator = Generator::Greedy;
    return spec;
  }
  auto plus = label.find('+');
  if (plus == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "bad strategy '" + std::string(label) + "'");
  auto gen = label.substr(0, plus);
  auto sel = label.substr(plus + 1);
  if (gen == "sampling") spec.generator = Generator::Sampling;
  else if (gen == "rebase") spec.generator = Generator::Rebase;
  else if (gen == "mcts") spec.generator = Generator::Mcts;
  else throw Error(ErrorCode::InvalidArgument, "unknown generator '" + std::string(gen) + "'");
  if (sel == "mv") spec.selection = Selection::Majority;
  else if (sel == "wv") spec.selection = Selection::Weighted;
  else if (sel == "bon") spec.selection = Selection::BestOfN;
  else throw Error(ErrorCode::InvalidArgument, "unknown selection '" + std::string(sel) + "'");
  return spec;
}

namespace {

std::optional<Answer> select(Selection selection, std::span<const Solution> solutions, std::span<const double> weights,
                             std::size_t& effective_votes) {
  effective_votes = static_cast<std::size_t>(
      std::count_if(solutions.begin(), solutions.end(), [](const Solution& s) { return s.complete(); }));
  if (solutions.empty() || effective_votes == 0) return std::nullopt;
  switch (selection) {
    case Selection::Majority: return majority_vote(solutions).winner;
    case Selection::Weighted: return weighted_majority_vote(solutions, weights).winner;
    case Selection::BestOfN: return best_of_n(solutions, weights).answer;
  }
  return std::nullopt;
}

}  // namespace

InferenceOutcome run_inference(const RewardModel& reward, const StrategySpec& strategy, std::uint64_t n, Rng& rng,
                               const AccountingConfig& accounting) {
  strategy.validate();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  const auto& problem = reward.problem();
  const auto& policy = problem.policy();
  InferenceOutcome out{std::nullopt, false, 0, 0, accounting.report_for(policy.param_count())};

  switch (strategy.generator) {
    case Generator::Greedy: {
      auto sol = greedy_solution(policy);
      out.report.add_policy_tokens(sol.tokens);
      out.candidates = 1;
      out.effective_votes = sol.complete() ? 1 : 0;
      out.answer = sol.answer;
      break;
    }
    case Generator::Sampling: {
      auto solutions = sample_n(policy, n, rng);
      std::vector<double> weights(solutions.size(), 0.0);
      for (std::size_t i = 0; i < solutions.size(); ++i) {
        const auto& s = solutions[i];
        out.report.add_policy_tokens(s.tokens);
        if (strategy.selection == Selection::Majority || !s.complete()) continue;
        weights[i] = reward.score_solution(s);
        // One PRM pass over the full solution yields every step score.
        out.report.add_reward_calls();
        out.report.add_reward_tokens(s.tokens);
      }
      out.candidates = solutions.size();
      out.answer = select(strategy.selection, solutions, weights, out.effective_votes);
      break;
    }
    case Generator::Rebase: {
      RebaseConfig config;
      config.target_n = n;
      config.balance_temperature = strategy.balance_temperature;
      config.max_depth = strategy.rebase_max_depth;
      auto result = rebase(reward, config, rng, accounting);
      out.report = result.report;
      out.candidates = result.solutions.size();
      out.answer = select(strategy.selection, result.solutions, result.weights, out.effective_votes);
      break;
    }
    case Generator::Mcts: {
      MctsConfig config;
      config.exploration_c = strategy.exploration_c;
      config.total_expansions = static_cast<int>(n);
      config.root_children = strategy.root_children.value_or(std::max<int>(1, static_cast<int>(n / 8)));
      config.nonroot_children = strategy.nonroot_children;
      auto result = mcts(reward, config, rng, accounting);
      out.report = result.report;
      out.candidates = result.solutions.size();
      out.answer = select(strategy.selection, result.solutions, result.weights, out.effective_votes);
      break;
    }
  }
  out.correct = out.answer && *out.answer == problem.truth();
  return out;
}

}  // namespace scalinglab
