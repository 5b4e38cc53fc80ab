#pragma once

// Hand-built policies shared by the unit and acceptance suites.

#include <cmath>
#include <string>
#include <vector>

#include "scalinglab/toyworld.hpp"

namespace fixtures {

using namespace scalinglab;

/// start -> s1 -> term(A), all probabilities 1.
inline PolicySpec chain_policy() {
  PolicyDraft d;
  d.states = {"start", "s1", "term"};
  d.start = "start";
  d.transitions = {{"start", {{"s1", 1.0}}}, {"s1", {{"term", 1.0}}}};
  d.terminals = {{"term", "A"}};
  d.max_depth = 2;
  return PolicySpec(d);
}

/// root -(0.7)-> t_A; root -(0.3)-> mid; mid -(0.5)-> t_A; mid -(0.5)-> t_B.
/// Marginal answers {A: 0.85, B: 0.15}.
inline PolicySpec three_path_policy(std::uint64_t params = 1) {
  PolicyDraft d;
  d.states = {"root", "t_A", "mid", "t_B"};
  d.start = "root";
  d.transitions = {{"root", {{"t_A", 0.7}, {"mid", 0.3}}}, {"mid", {{"t_A", 0.5}, {"t_B", 0.5}}}};
  d.terminals = {{"t_A", "A"}, {"t_B", "B"}};
  d.max_depth = 2;
  d.param_count = params;
  return PolicySpec(d);
}

/// One step straight to an answer: root -(p)-> t_A, root -(1-p)-> t_B.
inline PolicySpec two_answer_policy(double p_a) {
  PolicyDraft d;
  d.states = {"root", "t_A", "t_B"};
  d.start = "root";
  d.transitions = {{"root", {{"t_A", p_a}, {"t_B", 1.0 - p_a}}}};
  d.terminals = {{"t_A", "A"}, {"t_B", "B"}};
  d.max_depth = 1;
  return PolicySpec(d);
}

/// Two-step version of two_answer_policy with two reasoning routes per
/// answer, so path-level reward noise differs between routes.
inline PolicySpec two_route_policy(double p_a) {
  PolicyDraft d;
  d.states = {"root", "a1", "a2", "b1", "b2", "t_A", "t_B"};
  d.start = "root";
  d.transitions = {{"root", {{"a1", p_a / 2}, {"a2", p_a / 2}, {"b1", (1 - p_a) / 2}, {"b2", (1 - p_a) / 2}}},
                   {"a1", {{"t_A", 1.0}}},
                   {"a2", {{"t_A", 1.0}}},
                   {"b1", {{"t_B", 1.0}}},
                   {"b2", {{"t_B", 1.0}}}};
  d.terminals = {{"t_A", "A"}, {"t_B", "B"}};
  d.max_depth = 2;
  return PolicySpec(d);
}

/// `depth` layers of two states, each linking to both states of the next
/// layer with probability 1/2: 2^depth complete paths.
inline PolicySpec binary_policy(int depth) {
  PolicyDraft d;
  d.states = {"root"};
  d.start = "root";
  auto name = [](int layer, int k) { return "l" + std::to_string(layer) + "_" + std::to_string(k); };
  for (int layer = 1; layer <= depth; ++layer) {
    for (int k = 0; k < 2; ++k) d.states.push_back(name(layer, k));
  }
  d.transitions["root"] = {{name(1, 0), 0.5}, {name(1, 1), 0.5}};
  for (int layer = 1; layer < depth; ++layer) {
    for (int k = 0; k < 2; ++k) d.transitions[name(layer, k)] = {{name(layer + 1, 0), 0.5}, {name(layer + 1, 1), 0.5}};
  }
  d.terminals = {{name(depth, 0), "A"}, {name(depth, 1), "B"}};
  d.max_depth = depth;
  return PolicySpec(d);
}

/// Mid-quality search instance: four first steps of very different promise,
/// then a second step and a terminal. Truth A has marginal probability 0.297
/// and is not the mode (B: 0.487), so sampling alone mostly finds B.
inline PolicySpec mid_quality_policy() {
  PolicyDraft d;
  d.states = {"root", "good", "ok", "bad", "worse", "g2", "o2", "b2", "w2", "t_A", "t_B", "t_C"};
  d.start = "root";
  d.transitions = {
      {"root", {{"good", 0.2}, {"ok", 0.2}, {"bad", 0.3}, {"worse", 0.3}}},
      {"good", {{"g2", 0.9}, {"b2", 0.1}}},
      {"ok", {{"o2", 1.0}}},
      {"bad", {{"b2", 0.8}, {"w2", 0.2}}},
      {"worse", {{"w2", 1.0}}},
      {"g2", {{"t_A", 0.95}, {"t_B", 0.05}}},
      {"o2", {{"t_A", 0.5}, {"t_B", 0.5}}},
      {"b2", {{"t_A", 0.1}, {"t_B", 0.9}}},
      {"w2", {{"t_B", 0.4}, {"t_C", 0.6}}},
  };
  d.terminals = {{"t_A", "A"}, {"t_B", "B"}, {"t_C", "C"}};
  d.max_depth = 3;
  return PolicySpec(d);
}

inline Problem problem(std::string id, std::string truth, PolicySpec policy) {
  return Problem(std::move(id), Answer(std::move(truth)), std::move(policy));
}

}  // namespace fixtures
