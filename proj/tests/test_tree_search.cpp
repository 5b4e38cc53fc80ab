#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "fixtures.hpp"
#include "scalinglab/error.hpp"
#include "scalinglab/json_io.hpp"
#include "scalinglab/tree_search.hpp"

using namespace scalinglab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Plain softmax shares, computed without the max shift.
std::vector<double> softmax_shares(const std::vector<double>& r, double t, std::uint64_t budget) {
  std::vector<double> e;
  double z = 0.0;
  for (double x : r) {
    e.push_back(std::exp(x / t));
    z += e.back();
  }
  for (auto& x : e) x = x / z * static_cast<double>(budget);
  return e;
}

std::uint64_t total(const std::vector<std::uint64_t>& w) { return std::accumulate(w.begin(), w.end(), 0ULL); }

}  // namespace

TEST_CASE("allocate_widths examples") {
  CHECK(allocate_widths(std::vector<double>{0.5, 0.5}, 8, 0.1) == std::vector<std::uint64_t>{4, 4});
  CHECK(allocate_widths(std::vector<double>{0.3, 0.3}, 5, 0.1) == std::vector<std::uint64_t>{3, 2});

  // shares 7/3 exactly when the reward gap is T·ln(7/3)
  double gap = 0.1 * std::log(7.0 / 3.0);
  CHECK(allocate_widths(std::vector<double>{0.5 + gap, 0.5}, 10, 0.1) == std::vector<std::uint64_t>{7, 3});

  CHECK(allocate_widths(std::vector<double>{0.9, 0.1, 0.1}, 10, 1e-3) == std::vector<std::uint64_t>{10, 0, 0});
  // large temperature flattens toward uniform
  CHECK(allocate_widths(std::vector<double>{0.9, 0.1, 0.5}, 9, 1e6) == std::vector<std::uint64_t>{3, 3, 3});

  CHECK_THROWS_AS(allocate_widths(std::vector<double>{}, 3, 0.1), Error);
  CHECK_THROWS_AS(allocate_widths(std::vector<double>{1.0}, 3, 0.0), Error);
}

TEST_CASE("allocate_widths against an independent softmax (property)") {
  Rng gen(99);
  for (int trial = 0; trial < 3000; ++trial) {
    std::size_t k = 1 + gen.next_u64() % 6;
    std::uint64_t budget = gen.next_u64() % 40;
    double t = 0.05 + gen.uniform();
    std::vector<double> r(k);
    for (auto& x : r) x = gen.uniform();
    auto w = allocate_widths(r, budget, t);
    auto shares = softmax_shares(r, t, budget);
    REQUIRE(total(w) == budget);
    for (std::size_t j = 0; j < k; ++j) {
      // largest-remainder rounding keeps each width within one of its share
      CHECK(static_cast<double>(w[j]) >= std::floor(shares[j] - 1e-9));
      CHECK(static_cast<double>(w[j]) <= std::ceil(shares[j] + 1e-9));
      for (std::size_t i = 0; i < k; ++i) {
        if (r[i] > r[j]) CHECK(w[i] >= w[j]);
      }
    }
  }
}

TEST_CASE("uct_value") {
  CHECK(uct_value(0.5, 8, 2, 1.0) == doctest::Approx(1.519669).epsilon(1e-6));
  CHECK(uct_value(0.5, 8, 2, 0.0) == 0.5);
  CHECK(uct_value(0.2, 1, 1, 3.0) == 0.2);  // ln 1 = 0
  CHECK_THROWS_AS(uct_value(0.5, 0, 1, 1.0), Error);
  CHECK_THROWS_AS(uct_value(0.5, 4, 0, 1.0), Error);
}

TEST_CASE("backpropagate") {
  SearchTree tree(StepId{0});
  auto a = tree.add_child(0, StepId{1}, false);
  auto b = tree.add_child(a, StepId{2}, true);
  tree.node(a).visit_count = 1;
  tree.node(a).quality = 0.7;
  backpropagate(tree, a, 0.3);
  CHECK(tree.node(a).visit_count == 2);
  CHECK(tree.node(a).quality == doctest::Approx(0.5));
  CHECK(tree.node(0).visit_count == 1);
  CHECK(tree.node(0).quality == doctest::Approx(0.3));

  SearchTree fresh(StepId{0});
  auto leaf = fresh.add_child(0, StepId{1}, false);
  for (double v : {0.2, 0.4, 0.9}) backpropagate(fresh, leaf, v);
  CHECK(fresh.node(leaf).visit_count == 3);
  CHECK(fresh.node(leaf).quality == doctest::Approx(0.5));
  CHECK(fresh.node(0).quality == doctest::Approx(0.5));
  CHECK(fresh.node(0).visit_count == 3);

  CHECK_THROWS_AS(tree.add_child(b, StepId{3}, false), Error);
  CHECK(tree.prefix(b) == std::vector<StepId>{StepId{1}, StepId{2}});
  CHECK(tree.path_to_root(b) == std::vector<NodeId>{b, a, 0});
}

TEST_CASE("rebase") {
  SUBCASE("depth-one policy finishes everything in one round") {
    auto prob = fixtures::problem("p", "A", fixtures::two_answer_policy(0.6));
    RewardModel reward(RewardSpec{}, prob);
    Rng rng(5);
    auto res = rebase(reward, RebaseConfig{4, 0.1, 0, Rounding::LargestRemainder}, rng);
    CHECK(res.solutions.size() == 4);
    for (const auto& s : res.solutions) CHECK(s.complete());
    REQUIRE(res.iterations.size() == 1);
    CHECK(res.iterations[0].completed == 4);
    CHECK(res.iterations[0].budget == 0);
    CHECK(res.report.policy_tokens() == 4 * 32);
    CHECK(res.report.reward_calls() == 4);
  }

  SUBCASE("returns exactly N with budget bookkeeping") {
    auto prob = fixtures::problem("p", "A", fixtures::mid_quality_policy());
    RewardModel reward(RewardSpec{2.0, 0.05, 3, Aggregation::Last}, prob);
    for (std::uint64_t n : {1, 2, 7, 16, 33}) {
      Rng rng(n);
      auto res = rebase(reward, RebaseConfig{n, 0.2, 0, Rounding::LargestRemainder}, rng);
      CHECK(res.solutions.size() == n);
      CHECK(res.weights.size() == n);
      std::uint64_t budget = n, sol_tokens = 0;
      for (const auto& it : res.iterations) {
        budget -= it.completed;
        CHECK(it.budget == budget);
        CHECK(total(it.widths) == (it.widths.empty() ? 0 : budget));
      }
      for (const auto& s : res.solutions) {
        CHECK(s.complete());  // every mid_quality path finishes at depth 3
        sol_tokens += s.tokens;
      }
      CHECK(res.report.policy_tokens() >= sol_tokens);
    }
  }

  SUBCASE("max_depth cap yields truncated solutions") {
    auto prob = fixtures::problem("p", "A", fixtures::mid_quality_policy());
    RewardModel reward(RewardSpec{}, prob);
    Rng rng(1);
    auto res = rebase(reward, RebaseConfig{6, 0.1, 1, Rounding::LargestRemainder}, rng);
    CHECK(res.solutions.size() == 6);
    for (const auto& s : res.solutions) CHECK_FALSE(s.complete());
  }

  SUBCASE("oracle reward at low temperature concentrates on the best branch") {
    auto prob = fixtures::problem("p", "A", fixtures::mid_quality_policy());
    RewardModel reward(RewardSpec{kInf, 0.0, 0, Aggregation::Last}, prob);
    Rng rng(42);
    auto res = rebase(reward, RebaseConfig{16, 1e-3, 0, Rounding::LargestRemainder}, rng);
    REQUIRE(res.iterations.size() >= 2);
    // the widest allocation at depth 1 goes to the highest-reward node
    const auto& first = res.iterations[0];
    auto best = std::max_element(first.rewards.begin(), first.rewards.end()) - first.rewards.begin();
    CHECK(first.widths[best] == *std::max_element(first.widths.begin(), first.widths.end()));
    int truth = 0;
    for (const auto& s : res.solutions) truth += s.answer == Answer("A");
    CHECK(truth >= 12);
  }

  CHECK_THROWS_AS(RebaseConfig({0, 0.1, 0, Rounding::LargestRemainder}).validate(), Error);
}

TEST_CASE("mcts") {
  SUBCASE("depth-one policy returns the root's children") {
    auto prob = fixtures::problem("p", "A", fixtures::two_answer_policy(0.5));
    RewardModel reward(RewardSpec{}, prob);
    Rng rng(3);
    auto res = mcts(reward, MctsConfig{1.0, 4, 2, 32}, rng);
    CHECK(res.solutions.size() == 4);
    CHECK(res.tree.size() == 5);
    CHECK(res.events.size() == 4);
    CHECK(res.tree.root().visit_count == 4);
  }

  SUBCASE("visit counts and qualities replay from the event log") {
    auto prob = fixtures::problem("p", "A", fixtures::mid_quality_policy());
    RewardModel reward(RewardSpec{1.0, 0.1, 8, Aggregation::Min}, prob);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      auto res = mcts(reward, MctsConfig{1.0, 4, 2, 24}, rng);
      const auto& tree = res.tree;
      std::map<NodeId, std::pair<std::uint64_t, double>> replay;
      for (const auto& ev : res.events) {
        for (auto n : tree.path_to_root(ev.leaf)) {
          replay[n].first += 1;
          replay[n].second += ev.value;
        }
      }
      for (const auto& node : tree.nodes()) {
        auto [count, sum] = replay[node.id];
        CHECK(node.visit_count == count);
        if (count > 0) CHECK(std::abs(node.quality - sum / static_cast<double>(count)) <= 1e-12);
        if (!node.children.empty()) {
          std::uint64_t child_visits = 0;
          for (auto c : node.children) child_visits += tree.node(c).visit_count;
          CHECK(node.visit_count == child_visits + (node.id == 0 ? 0 : 1));
        }
      }
      CHECK(res.events.size() + 1 == tree.size());
      CHECK(tree.size() - 1 <= 24);
      CHECK(res.report.reward_calls() == res.events.size());
      for (const auto& s : res.solutions) CHECK(s.complete());
    }
  }

  CHECK_THROWS_AS(MctsConfig({1.0, 0, 2, 8}).validate(), Error);
}

TEST_CASE("tree JSON") {
  auto prob = fixtures::problem("p", "A", fixtures::two_answer_policy(0.5));
  RewardModel reward(RewardSpec{}, prob);
  Rng rng(3);
  auto res = mcts(reward, MctsConfig{1.0, 2, 2, 8}, rng);
  auto j = tree_to_json(res.tree, prob.policy());
  REQUIRE(j.is_array());
  CHECK(j.size() == res.tree.size());
  CHECK(j[0]["parent"].is_null());
  CHECK(j[1]["parent"] == 0);
}
