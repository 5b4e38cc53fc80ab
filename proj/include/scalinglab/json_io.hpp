#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "scalinglab/analysis.hpp"
#include "scalinglab/toyworld.hpp"
#include "scalinglab/tree_search.hpp"

namespace scalinglab {

using Json = nlohmann::json;

/// Throws ConfigInvalid naming `path` if `object` is not an object or has a
/// key outside `allowed`.
void require_keys(const Json& object, std::initializer_list<std::string_view> allowed, const std::string& path);

/// {"states", "start", "transitions", "terminals", "tokens_per_step",
/// "max_depth", "param_count"}. tokens_per_step may be a single integer.
/// Malformed documents throw ConfigInvalid; invariant violations InvalidPolicy.
PolicySpec policy_from_json(const Json& j, const std::string& path = "policy");
Json policy_to_json(const PolicySpec& policy);

/// {"id", "truth", "policy", optional "truth_unreachable"}.
Problem problem_from_json(const Json& j, const std::string& path = "problem");
Json problem_to_json(const Problem& problem);

/// JSON array of problems.
Dataset dataset_from_json(const Json& j, const std::string& path = "dataset");
Json dataset_to_json(const Dataset& dataset);

Json limit_report_to_json(const LimitReport& report);
Json pareto_to_json(std::span<const ParetoPoint> points);

/// Node dump: id, parent, step, depth, reward, N, Q, terminal.
Json tree_to_json(const SearchTree& tree, const PolicySpec& policy);

}  // namespace scalinglab
