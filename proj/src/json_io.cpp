#include "scalinglab/json_io.hpp"

#include <algorithm>

#include "scalinglab/error.hpp"

namespace scalinglab {

void require_keys(const Json& object, std::initializer_list<std::string_view> allowed, const std::string& path) {
  if (!object.is_object()) throw Error(ErrorCode::ConfigInvalid, path + ": expected an object");
  for (const auto& item : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw Error(ErrorCode::ConfigInvalid, path + ": unknown key '" + item.key() + "'");
    }
  }
}

namespace {

template <typename T>
T get_as(const Json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
}

const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw Error(ErrorCode::ConfigInvalid, path + ": missing '" + key + "'");
  return j.at(key);
}

}  // namespace

PolicySpec policy_from_json(const Json& j, const std::string& path) {
  require_keys(j, {"states", "start", "transitions", "terminals", "tokens_per_step", "max_depth", "param_count"}, path);
  PolicyDraft d;
  d.states = get_as<std::vector<std::string>>(field(j, "states", path), path + ".states");
  d.start = get_as<std::string>(field(j, "start", path), path + ".start");

  const auto& tr = field(j, "transitions", path);
  if (!tr.is_object()) throw Error(ErrorCode::ConfigInvalid, path + ".transitions: expected an object");
  for (const auto& [from, edges] : tr.items()) {
    auto where = path + ".transitions." + from;
    if (!edges.is_array()) throw Error(ErrorCode::ConfigInvalid, where + ": expected an array");
    auto& row = d.transitions[from];
    for (const auto& e : edges) {
      if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::ConfigInvalid, where + ": edges are [state, prob]");
      row.emplace_back(get_as<std::string>(e[0], where), get_as<double>(e[1], where));
    }
  }
  d.terminals = get_as<std::map<std::string, std::string>>(field(j, "terminals", path), path + ".terminals");
  if (j.contains("tokens_per_step")) {
    const auto& t = j.at("tokens_per_step");
    if (t.is_number_integer()) {
      auto each = get_as<std::uint32_t>(t, path + ".tokens_per_step");
      for (const auto& s : d.states) d.tokens_per_step[s] = each;
    } else {
      d.tokens_per_step = get_as<std::map<std::string, std::uint32_t>>(t, path + ".tokens_per_step");
    }
  }
  d.max_depth = get_as<int>(field(j, "max_depth", path), path + ".max_depth");
  if (j.contains("param_count")) d.param_count = get_as<std::uint64_t>(j.at("param_count"), path + ".param_count");
  return PolicySpec(d);
}

Json policy_to_json(const PolicySpec& policy) {
  auto d = policy.to_draft();
  Json transitions = Json::object();
  for (const auto& [from, edges] : d.transitions) {
    Json row = Json::array();
    for (const auto& [to, p] : edges) row.push_back({to, p});
    transitions[from] = std::move(row);
  }
  return Json{{"states", d.states},
              {"start", d.start},
              {"transitions", std::move(transitions)},
              {"terminals", d.terminals},
              {"tokens_per_step", d.tokens_per_step},
              {"max_depth", d.max_depth},
              {"param_count", d.param_count}};
}

Problem problem_from_json(const Json& j, const std::string& path) {
  require_keys(j, {"id", "truth", "policy", "truth_unreachable"}, path);
  auto id = get_as<std::string>(field(j, "id", path), path + ".id");
  auto truth = get_as<std::string>(field(j, "truth", path), path + ".truth");
  bool unreachable = j.contains("truth_unreachable") ? get_as<bool>(j.at("truth_unreachable"), path) : false;
  return Problem(id, Answer(truth), policy_from_json(field(j, "policy", path), path + ".policy"), unreachable);
}

Json problem_to_json(const Problem& problem) {
  Json j{{"id", problem.id()}, {"truth", problem.truth().str()}, {"policy", policy_to_json(problem.policy())}};
  if (problem.truth_unreachable()) j["truth_unreachable"] = true;
  return j;
}

Dataset dataset_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigInvalid, path + ": expected an array of problems");
  std::vector<Problem> problems;
  for (std::size_t i = 0; i < j.size(); ++i) {
    problems.push_back(problem_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return Dataset(std::move(problems));
}

Json dataset_to_json(const Dataset& dataset) {
  Json arr = Json::array();
  for (const auto& p : dataset.problems()) arr.push_back(problem_to_json(p));
  return arr;
}

Json limit_report_to_json(const LimitReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.per_problem) {
    rows.push_back({{"problem_id", r.problem_id},
                    {"limit_indicator", r.limit_indicator},
                    {"margin", r.margin},
                    {"degenerate", r.degenerate},
                    {"argmax", r.argmax ? Json(r.argmax->str()) : Json(nullptr)}});
  }
  return Json{{"per_problem", std::move(rows)}, {"dataset_limit", report.dataset_limit}};
}

Json pareto_to_json(std::span<const ParetoPoint> points) {
  Json arr = Json::array();
  for (const auto& p : points) arr.push_back({{"flops", p.flops}, {"error", p.error}, {"label", p.label}});
  return arr;
}

Json tree_to_json(const SearchTree& tree, const PolicySpec& policy) {
  Json arr = Json::array();
  for (const auto& n : tree.nodes()) {
    arr.push_back({{"id", n.id},
                   {"parent", n.parent ? Json(*n.parent) : Json(nullptr)},
                   {"step", policy.name(n.step)},
                   {"depth", n.depth},
                   {"reward", n.reward ? Json(*n.reward) : Json(nullptr)},
                   {"N", n.visit_count},
                   {"Q", n.quality},
                   {"terminal", n.terminal}});
  }
  return arr;
}

}  // namespace scalinglab
