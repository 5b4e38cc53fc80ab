#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scalinglab/inference.hpp"
#include "scalinglab/reward.hpp"
#include "scalinglab/toyworld.hpp"

namespace scalinglab {

// ---------------------------------------------------------------------------
// Saturation limits of voting as n → ∞

/// Relative tolerance under which two answer masses count as tied.
inline constexpr double kTieTolerance = 1e-12;

struct ProblemLimit {
  std::string problem_id;
  int limit_indicator = 0;
  double margin = 0.0;  // δ: gap between the top two answer masses
  bool degenerate = false;
  std::optional<Answer> argmax;
};

struct LimitReport {
  std::vector<ProblemLimit> per_problem;
  double dataset_limit = 0.0;
};

/// Fraction of problems whose marginal answer mode is the truth.
LimitReport mv_limit(const Dataset& dataset, std::uint64_t cap = kDefaultPathCap);

/// Same, with each path's probability multiplied by its solution score.
LimitReport wv_limit(const Dataset& dataset, const RewardSpec& reward, std::uint64_t cap = kDefaultPathCap);

using PathWeight = std::function<double(const Problem&, const Solution&)>;
LimitReport wv_limit(const Dataset& dataset, const PathWeight& weight, std::uint64_t cap = kDefaultPathCap);

struct MarginReport {
  double margin = 0.0;
  bool single_answer = false;
  bool degenerate = false;
  std::optional<Answer> argmax;
};

/// Top-two gap of an answer-mass map. A single answer reports its own mass.
MarginReport margin_of(const std::map<Answer, double>& masses);
MarginReport answer_margin(const PolicySpec& policy, std::uint64_t cap = kDefaultPathCap);

// ---------------------------------------------------------------------------
// Empirical convergence

struct CurvePoint {
  std::uint64_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation over replicates
};

/// Dataset accuracy of `strategy` at each n, over `replicates` independent
/// streams per n. Stream for (n, replicate, problem) is derived from `seed`.
std::vector<CurvePoint> convergence_curve(const Dataset& dataset, const StrategySpec& strategy,
                                          const RewardSpec& reward, std::span<const std::uint64_t> n_grid,
                                          std::size_t replicates, std::uint64_t seed);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of y on x. Throws InsufficientPoints below `min_points`.
LineFit fit_line(std::span<const double> x, std::span<const double> y, std::size_t min_points = 2);

/// Fits ln(limit − mean) = slope·n + intercept over points with a positive
/// gap. The rate constant c of an O(c^−n) gap is exp(−slope).
LineFit fit_exponential_gap(std::span<const CurvePoint> curve, double limit);

// ---------------------------------------------------------------------------
// Compute-optimal analysis

struct ParetoPoint {
  double flops = 0.0;
  double error = 0.0;
  std::string label;
  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

/// Non-dominated points sorted by (flops, error, label). Throws EmptyInput.
std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points);

struct GridRow {
  std::uint64_t model_size = 0;
  std::string strategy;
  std::uint64_t n_samples = 0;
  std::uint32_t replicate = 0;
  double accuracy = 0.0;
  std::uint64_t policy_tokens = 0;
  std::uint64_t reward_tokens = 0;
  double flops = 0.0;
  friend bool operator==(const GridRow&, const GridRow&) = default;
};

using ExperimentGrid = std::vector<GridRow>;

/// One configuration averaged over its replicates.
struct ConfigSummary {
  std::uint64_t model_size = 0;
  std::string strategy;
  std::uint64_t n_samples = 0;
  double error = 0.0;
  double flops = 0.0;
  std::size_t replicates = 0;

  std::string label() const;
};

/// Sorted by (model_size, strategy, n_samples).
std::vector<ConfigSummary> summarize(std::span<const GridRow> grid);

std::vector<ParetoPoint> grid_points(std::span<const GridRow> grid);

/// Lowest-error configuration whose mean FLOPs fit in `budget`; ties go to
/// fewer FLOPs, then label order. Throws NoFeasibleConfig.
ConfigSummary optimal_config(std::span<const GridRow> grid, double budget);

struct SizeRegression {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least squares of log10(C) on log10(N) over (C, N) pairs.
SizeRegression fit_size_regression(std::span<const std::pair<double, double>> optima);

/// (C, N) pairs read off the Pareto frontier of the grid: for every frontier
/// configuration, its FLOPs and model size.
std::vector<std::pair<double, double>> frontier_optima(std::span<const GridRow> grid);

}  // namespace scalinglab
