#include "scalinglab/toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <unordered_map>

#include "scalinglab/error.hpp"

namespace scalinglab {

Answer::Answer(std::string value, std::size_t max_length) : value_(std::move(value)) {
  if (value_.empty()) throw Error(ErrorCode::InvalidArgument, "answer must be non-empty");
  if (value_.size() > max_length) {
    throw Error(ErrorCode::InvalidArgument,
                "answer '" + value_ + "' longer than " + std::to_string(max_length));
  }
}

PolicySpec::PolicySpec(const PolicyDraft& draft) {
  if (draft.states.empty()) throw Error(ErrorCode::InvalidPolicy, "no states");
  std::unordered_map<std::string, std::uint32_t> index;
  for (const auto& name : draft.states) {
    if (name.empty()) throw Error(ErrorCode::InvalidPolicy, "empty state name");
    auto [it, inserted] = index.emplace(name, static_cast<std::uint32_t>(names_.size()));
    if (!inserted) throw Error(ErrorCode::InvalidPolicy, "duplicate state '" + name + "'");
    names_.push_back(name);
  }
  auto lookup = [&](const std::string& name, const char* what) {
    auto it = index.find(name);
    if (it == index.end()) {
      throw Error(ErrorCode::InvalidPolicy, std::string(what) + " refers to unknown state '" + name + "'");
    }
    return StepId{it->second};
  };

  start_ = lookup(draft.start, "start");
  transitions_.resize(names_.size());
  answers_.resize(names_.size());
  tokens_.assign(names_.size(), kDefaultTokensPerStep);

  for (const auto& [from, edges] : draft.transitions) {
    auto id = lookup(from, "transitions");
    for (const auto& [to, p] : edges) transitions_[id.value].push_back({lookup(to, "transition"), p});
  }
  for (const auto& [state, answer] : draft.terminals) answers_[lookup(state, "terminals").value].emplace(answer);
  for (const auto& [state, tokens] : draft.tokens_per_step) {
    if (tokens == 0) throw Error(ErrorCode::InvalidPolicy, "tokens_per_step must be positive for '" + state + "'");
    tokens_[lookup(state, "tokens_per_step").value] = tokens;
  }
  max_depth_ = draft.max_depth;
  param_count_ = draft.param_count;
  validate();
}

void PolicySpec::validate() const {
  if (max_depth_ < 1) throw Error(ErrorCode::InvalidPolicy, "max_depth must be positive");
  if (param_count_ < 1) throw Error(ErrorCode::InvalidPolicy, "param_count must be >= 1");
  for (std::size_t s = 0; s < names_.size(); ++s) {
    const auto& edges = transitions_[s];
    if (answers_[s]) {
      if (!edges.empty()) throw Error(ErrorCode::InvalidPolicy, "terminal '" + names_[s] + "' has transitions");
      continue;
    }
    double sum = 0.0;
    for (const auto& t : edges) {
      if (!(t.probability >= 0.0) || !std::isfinite(t.probability)) {
        throw Error(ErrorCode::InvalidPolicy, "negative or non-finite probability out of '" + names_[s] + "'");
      }
      sum += t.probability;
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
      throw Error(ErrorCode::InvalidPolicy,
                  "probabilities out of '" + names_[s] + "' sum to " + std::to_string(sum));
    }
  }
  if (answers_[start_.value]) throw Error(ErrorCode::InvalidPolicy, "start state cannot be terminal");

  // Reachable set per depth; a non-terminal state still reachable at
  // max_depth means some path fails to finish in time (this also rules out
  // reachable positive-probability cycles).
  std::vector<char> frontier(names_.size(), 0);
  frontier[start_.value] = 1;
  for (int depth = 0;; ++depth) {
    std::vector<char> next(names_.size(), 0);
    bool any = false;
    for (std::size_t s = 0; s < names_.size(); ++s) {
      if (!frontier[s] || answers_[s]) continue;
      if (depth == max_depth_) {
        throw Error(ErrorCode::InvalidPolicy,
                    "state '" + names_[s] + "' is still non-terminal at max_depth " + std::to_string(max_depth_));
      }
      for (const auto& t : transitions_[s]) {
        if (t.probability > 0.0) {
          next[t.target.value] = 1;
          any = true;
        }
      }
    }
    if (!any) break;
    frontier.swap(next);
  }
}

std::optional<StepId> PolicySpec::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return StepId{static_cast<std::uint32_t>(i)};
  }
  return std::nullopt;
}

StepId PolicySpec::at(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw Error(ErrorCode::InvalidArgument, "unknown state '" + std::string(name) + "'");
}

PolicySpec PolicySpec::reweighted(const std::vector<std::vector<double>>& probabilities,
                                  std::uint64_t param_count) const {
  if (probabilities.size() != transitions_.size()) {
    throw Error(ErrorCode::LengthMismatch, "reweighted: one probability row per state required");
  }
  PolicySpec copy = *this;
  for (std::size_t s = 0; s < transitions_.size(); ++s) {
    if (probabilities[s].size() != transitions_[s].size()) {
      throw Error(ErrorCode::LengthMismatch, "reweighted: row size differs for '" + names_[s] + "'");
    }
    for (std::size_t k = 0; k < transitions_[s].size(); ++k) copy.transitions_[s][k].probability = probabilities[s][k];
  }
  copy.param_count_ = param_count;
  copy.validate();
  return copy;
}

PolicyDraft PolicySpec::to_draft() const {
  PolicyDraft d;
  d.states = names_;
  d.start = names_[start_.value];
  for (std::size_t s = 0; s < names_.size(); ++s) {
    if (!transitions_[s].empty()) {
      auto& row = d.transitions[names_[s]];
      for (const auto& t : transitions_[s]) row.emplace_back(names_[t.target.value], t.probability);
    }
    if (answers_[s]) d.terminals[names_[s]] = answers_[s]->str();
    d.tokens_per_step[names_[s]] = tokens_[s];
  }
  d.max_depth = max_depth_;
  d.param_count = param_count_;
  return d;
}

namespace {

bool answer_reachable(const PolicySpec& policy, const Answer& truth) {
  std::vector<char> seen(policy.size(), 0);
  std::vector<StepId> stack{policy.start()};
  seen[policy.start().value] = 1;
  while (!stack.empty()) {
    auto s = stack.back();
    stack.pop_back();
    if (policy.answer(s) == truth) return true;
    for (const auto& t : policy.transitions(s)) {
      if (t.probability > 0.0 && !seen[t.target.value]) {
        seen[t.target.value] = 1;
        stack.push_back(t.target);
      }
    }
  }
  return false;
}

}  // namespace

Problem::Problem(std::string id, Answer truth, PolicySpec policy, bool truth_unreachable)
    : id_(std::move(id)), truth_(std::move(truth)), policy_(std::move(policy)), truth_unreachable_(truth_unreachable) {
  if (id_.empty()) throw Error(ErrorCode::InvalidArgument, "problem id must be non-empty");
  if (!truth_unreachable_ && !answer_reachable(policy_, truth_)) {
    throw Error(ErrorCode::InvalidArgument,
                "problem '" + id_ + "': truth '" + truth_.str() + "' is not reachable and not flagged unreachable");
  }
}

Problem Problem::with_policy(PolicySpec policy) const {
  return Problem(id_, truth_, std::move(policy), truth_unreachable_);
}

Dataset::Dataset(std::vector<Problem> problems) : problems_(std::move(problems)) {
  if (problems_.empty()) throw Error(ErrorCode::EmptyInput, "dataset must contain at least one problem");
  std::set<std::string> ids;
  for (const auto& p : problems_) {
    if (!ids.insert(p.id()).second) throw Error(ErrorCode::InvalidArgument, "duplicate problem id '" + p.id() + "'");
  }
}

Solution make_solution(const PolicySpec& policy, std::span<const StepId> steps) {
  Solution sol;
  StepId at = policy.start();
  for (auto step : steps) {
    if (step.value >= policy.size()) throw Error(ErrorCode::InvalidPrefix, "step id out of range");
    const Transition* edge = nullptr;
    for (const auto& t : policy.transitions(at)) {
      if (t.target == step) {
        edge = &t;
        break;
      }
    }
    if (edge == nullptr || !(edge->probability > 0.0)) {
      throw Error(ErrorCode::InvalidPrefix,
                  "no transition '" + policy.name(at) + "' -> '" + policy.name(step) + "'");
    }
    sol.steps.push_back(step);
    sol.tokens += policy.tokens(step);
    sol.log_prob += std::log(edge->probability);
    at = step;
  }
  if (!sol.steps.empty()) sol.answer = policy.answer(sol.steps.back());
  return sol;
}

StepId sample_step(const PolicySpec& policy, StepId from, Rng& rng) {
  auto edges = policy.transitions(from);
  double u = rng.uniform();
  double acc = 0.0;
  const Transition* last_positive = nullptr;
  for (const auto& t : edges) {
    if (!(t.probability > 0.0)) continue;
    acc += t.probability;
    last_positive = &t;
    if (u < acc) return t.target;
  }
  // u landed in the rounding slack above the cumulative sum
  return last_positive->target;
}

Solution sample_solution(const PolicySpec& policy, Rng& rng) {
  return sample_solution(policy, rng, policy.max_depth());
}

Solution sample_solution(const PolicySpec& policy, Rng& rng, int depth_limit) {
  Solution sol;
  StepId at = policy.start();
  for (int depth = 0; depth < depth_limit && !policy.is_terminal(at); ++depth) {
    auto edges = policy.transitions(at);
    double u = rng.uniform();
    double acc = 0.0;
    const Transition* chosen = nullptr;
    for (const auto& t : edges) {
      if (!(t.probability > 0.0)) continue;
      acc += t.probability;
      chosen = &t;
      if (u < acc) break;
    }
    sol.steps.push_back(chosen->target);
    sol.tokens += policy.tokens(chosen->target);
    sol.log_prob += std::log(chosen->probability);
    at = chosen->target;
  }
  if (policy.is_terminal(at)) sol.answer = policy.answer(at);
  return sol;
}

Solution greedy_solution(const PolicySpec& policy) {
  Solution sol;
  StepId at = policy.start();
  while (!policy.is_terminal(at)) {
    const Transition* best = nullptr;
    for (const auto& t : policy.transitions(at)) {
      if (best == nullptr || t.probability > best->probability ||
          (t.probability == best->probability && t.target < best->target)) {
        best = &t;
      }
    }
    sol.steps.push_back(best->target);
    sol.tokens += policy.tokens(best->target);
    sol.log_prob += std::log(best->probability);
    at = best->target;
  }
  sol.answer = policy.answer(at);
  return sol;
}

std::uint64_t count_paths(const PolicySpec& policy, StepId from, std::uint64_t cap) {
  const std::uint64_t limit = cap + 1;
  std::vector<std::optional<std::uint64_t>> memo(policy.size());
  std::function<std::uint64_t(StepId)> count = [&](StepId s) -> std::uint64_t {
    if (memo[s.value]) return *memo[s.value];
    std::uint64_t total = 0;
    if (policy.is_terminal(s)) {
      total = 1;
    } else {
      for (const auto& t : policy.transitions(s)) {
        if (!(t.probability > 0.0)) continue;
        total = std::min(limit, total + count(t.target));
      }
    }
    memo[s.value] = total;
    return total;
  };
  return count(from);
}

namespace {

void enumerate_from(const PolicySpec& policy, Solution& path, StepId at, double prob,
                    std::vector<WeightedPath>& out) {
  if (policy.is_terminal(at)) {
    Solution done = path;
    done.answer = policy.answer(at);
    out.push_back({std::move(done), prob});
    return;
  }
  for (const auto& t : policy.transitions(at)) {
    if (!(t.probability > 0.0)) continue;
    path.steps.push_back(t.target);
    path.tokens += policy.tokens(t.target);
    double saved = path.log_prob;
    path.log_prob += std::log(t.probability);
    enumerate_from(policy, path, t.target, prob * t.probability, out);
    path.log_prob = saved;
    path.tokens -= policy.tokens(t.target);
    path.steps.pop_back();
  }
}

}  // namespace

std::vector<WeightedPath> enumerate_continuations(const PolicySpec& policy, std::span<const StepId> prefix,
                                                  std::uint64_t cap) {
  Solution path = make_solution(policy, prefix);
  path.answer.reset();
  StepId at = prefix.empty() ? policy.start() : prefix.back();
  auto n = count_paths(policy, at, cap);
  if (n > cap) {
    throw Error(ErrorCode::CapExceeded,
                "more than " + std::to_string(cap) + " paths from '" + policy.name(at) + "'");
  }
  std::vector<WeightedPath> out;
  out.reserve(n);
  enumerate_from(policy, path, at, 1.0, out);
  return out;
}

std::vector<WeightedPath> enumerate_paths(const PolicySpec& policy, std::uint64_t cap) {
  return enumerate_continuations(policy, {}, cap);
}

AnswerDistribution marginal_answer_distribution(const PolicySpec& policy, std::uint64_t cap) {
  AnswerDistribution dist;
  for (const auto& p : enumerate_paths(policy, cap)) dist[*p.solution.answer] += p.probability;
  return dist;
}

std::vector<double> success_table(const PolicySpec& policy, const Answer& truth) {
  std::vector<std::optional<double>> memo(policy.size());
  std::function<double(StepId)> q = [&](StepId s) -> double {
    if (memo[s.value]) return *memo[s.value];
    double v = 0.0;
    if (policy.is_terminal(s)) {
      v = policy.answer(s) == truth ? 1.0 : 0.0;
    } else {
      for (const auto& t : policy.transitions(s)) {
        if (t.probability > 0.0) v += t.probability * q(t.target);
      }
    }
    memo[s.value] = v;
    return v;
  };
  // States off the reachable graph may sit on cycles; only walk reachable ones.
  std::vector<double> out(policy.size(), 0.0);
  std::vector<char> seen(policy.size(), 0);
  std::vector<StepId> stack{policy.start()};
  seen[policy.start().value] = 1;
  while (!stack.empty()) {
    auto s = stack.back();
    stack.pop_back();
    out[s.value] = q(s);
    for (const auto& t : policy.transitions(s)) {
      if (t.probability > 0.0 && !seen[t.target.value]) {
        seen[t.target.value] = 1;
        stack.push_back(t.target);
      }
    }
  }
  return out;
}

double family_mixing_weight(std::uint64_t size, std::uint64_t reference_size, const FamilyParams& params) {
  if (size == 0 || reference_size == 0) throw Error(ErrorCode::InvalidArgument, "model sizes must be positive");
  double ratio = static_cast<double>(reference_size) / static_cast<double>(size);
  double q = 1.0 - (1.0 - params.q0) * std::pow(ratio, params.beta);
  return std::clamp(q, 0.0, 1.0);
}

std::vector<PolicySpec> make_policy_family(const PolicySpec& base, const Answer& truth,
                                           std::span<const std::uint64_t> sizes, const FamilyParams& params) {
  if (sizes.empty()) throw Error(ErrorCode::EmptyInput, "make_policy_family: no sizes");
  std::uint64_t reference = params.reference_size;
  if (reference == 0) reference = *std::min_element(sizes.begin(), sizes.end());

  auto q_star = success_table(base, truth);
  std::vector<PolicySpec> family;
  family.reserve(sizes.size());
  for (auto size : sizes) {
    double w = family_mixing_weight(size, reference, params);
    std::vector<std::vector<double>> rows(base.size());
    for (std::uint32_t s = 0; s < base.size(); ++s) {
      auto edges = base.transitions(StepId{s});
      auto& row = rows[s];
      row.reserve(edges.size());
      double here = q_star[s];
      for (const auto& t : edges) {
        double toward = here > 0.0 ? t.probability * q_star[t.target.value] / here : t.probability;
        row.push_back((1.0 - w) * t.probability + w * toward);
      }
      // renormalize away accumulated rounding so validation sees an exact row
      double sum = 0.0;
      for (double p : row) sum += p;
      if (sum > 0.0) {
        for (double& p : row) p /= sum;
      }
    }
    family.push_back(base.reweighted(rows, size));
  }
  return family;
}

Dataset generate_dataset(const GeneratorSpec& spec) {
  if (spec.problems < 1 || spec.depth < 1 || spec.width < 1 || spec.branching < 1 || spec.answers < 1) {
    throw Error(ErrorCode::InvalidArgument, "generator parameters must be positive");
  }
  if (spec.answers > 26) throw Error(ErrorCode::InvalidArgument, "generator supports at most 26 answers");
  const int branching = std::min(spec.branching, spec.width);

  std::vector<Problem> problems;
  problems.reserve(spec.problems);
  for (std::size_t i = 0; i < spec.problems; ++i) {
    Rng rng(hash64({spec.seed, 0x9e01ULL, i}));
    auto state_name = [](int layer, int k) { return "s" + std::to_string(layer) + "_" + std::to_string(k); };

    PolicyDraft draft;
    draft.start = "root";
    draft.states.push_back("root");
    draft.max_depth = spec.depth;
    draft.param_count = spec.param_count;
    for (int layer = 1; layer <= spec.depth; ++layer) {
      for (int k = 0; k < spec.width; ++k) {
        auto name = state_name(layer, k);
        draft.states.push_back(name);
        draft.tokens_per_step[name] = spec.tokens_per_step;
        bool terminal = layer == spec.depth || rng.uniform() < spec.early_stop;
        if (terminal) {
          int a = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(spec.answers));
          draft.terminals[name] = std::string(1, static_cast<char>('A' + a));
        }
      }
    }
    auto link = [&](const std::string& from, int next_layer) {
      // choose `branching` distinct targets by partial Fisher-Yates
      std::vector<int> pool(spec.width);
      for (int k = 0; k < spec.width; ++k) pool[k] = k;
      std::vector<std::pair<std::string, double>> edges;
      double total = 0.0;
      for (int b = 0; b < branching; ++b) {
        auto j = b + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(spec.width - b));
        std::swap(pool[b], pool[j]);
        double w = -std::log(1.0 - rng.uniform());
        edges.emplace_back(state_name(next_layer, pool[b]), w);
        total += w;
      }
      std::sort(edges.begin(), edges.end());
      for (auto& e : edges) e.second /= total;
      draft.transitions[from] = std::move(edges);
    };
    link("root", 1);
    for (int layer = 1; layer < spec.depth; ++layer) {
      for (int k = 0; k < spec.width; ++k) {
        auto name = state_name(layer, k);
        if (!draft.terminals.count(name)) link(name, layer + 1);
      }
    }

    PolicySpec policy(draft);
    auto dist = marginal_answer_distribution(policy);
    std::vector<std::pair<double, Answer>> ranked;
    for (const auto& [answer, p] : dist) ranked.emplace_back(p, answer);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t pick = 0;
    if (ranked.size() > 1 && rng.uniform() >= spec.truth_is_mode) {
      pick = 1 + static_cast<std::size_t>(rng.next_u64() % (ranked.size() - 1));
    }
    problems.emplace_back("p" + std::to_string(i), ranked[pick].second, std::move(policy));
  }
  return Dataset(std::move(problems));
}

}  // namespace scalinglab
