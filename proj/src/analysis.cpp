#include "scalinglab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "scalinglab/error.hpp"

namespace scalinglab {

MarginReport margin_of(const std::map<Answer, double>& masses) {
  MarginReport out;
  if (masses.empty()) {
    out.degenerate = true;
    return out;
  }
  double top = -1.0;
  double second = 0.0;
  for (const auto& [answer, m] : masses) {
    if (m > top) {
      second = std::max(second, top);
      top = m;
    } else {
      second = std::max(second, m);
    }
  }
  const double tol = kTieTolerance * std::max(std::abs(top), 1e-300);
  for (const auto& [answer, m] : masses) {
    if (m >= top - tol) {
      out.argmax = answer;
      break;
    }
  }
  if (masses.size() == 1) {
    out.single_answer = true;
    out.margin = top;
    out.degenerate = !(top > 0.0);
    return out;
  }
  out.margin = top - second;
  out.degenerate = out.margin <= tol;
  if (out.degenerate) out.margin = 0.0;
  return out;
}

MarginReport answer_margin(const PolicySpec& policy, std::uint64_t cap) {
  return margin_of(marginal_answer_distribution(policy, cap));
}

namespace {

LimitReport finish(std::vector<ProblemLimit> rows) {
  LimitReport report;
  double hits = 0.0;
  for (const auto& r : rows) hits += r.limit_indicator;
  report.dataset_limit = hits / static_cast<double>(rows.size());
  report.per_problem = std::move(rows);
  return report;
}

ProblemLimit limit_row(const Problem& problem, const std::map<Answer, double>& masses) {
  auto m = margin_of(masses);
  ProblemLimit row;
  row.problem_id = problem.id();
  row.margin = m.margin;
  row.degenerate = m.degenerate;
  row.argmax = m.argmax;
  row.limit_indicator = (m.argmax && *m.argmax == problem.truth()) ? 1 : 0;
  return row;
}

}  // namespace

LimitReport mv_limit(const Dataset& dataset, std::uint64_t cap) {
  std::vector<ProblemLimit> rows;
  for (const auto& p : dataset.problems()) {
    try {
      rows.push_back(limit_row(p, marginal_answer_distribution(p.policy(), cap)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CapExceeded) throw;
      throw Error(ErrorCode::CapExceeded, "problem '" + p.id() + "': " + e.what());
    }
  }
  return finish(std::move(rows));
}

LimitReport wv_limit(const Dataset& dataset, const PathWeight& weight, std::uint64_t cap) {
  std::vector<ProblemLimit> rows;
  for (const auto& p : dataset.problems()) {
    std::map<Answer, double> masses;
    try {
      for (const auto& path : enumerate_paths(p.policy(), cap)) {
        masses[*path.solution.answer] += path.probability * weight(p, path.solution);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CapExceeded) throw;
      throw Error(ErrorCode::CapExceeded, "problem '" + p.id() + "': " + e.what());
    }
    rows.push_back(limit_row(p, masses));
  }
  return finish(std::move(rows));
}

LimitReport wv_limit(const Dataset& dataset, const RewardSpec& reward, std::uint64_t cap) {
  reward.validate();
  return wv_limit(
      dataset, [&](const Problem& p, const Solution& s) { return score_solution(reward, p, s); }, cap);
}

std::vector<CurvePoint> convergence_curve(const Dataset& dataset, const StrategySpec& strategy,
                                          const RewardSpec& reward, std::span<const std::uint64_t> n_grid,
                                          std::size_t replicates, std::uint64_t seed) {
  if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1");
  if (!std::is_sorted(n_grid.begin(), n_grid.end())) throw Error(ErrorCode::InvalidArgument, "n_grid must ascend");
  std::vector<RewardModel> models;
  models.reserve(dataset.size());
  for (const auto& p : dataset.problems()) models.emplace_back(reward, p);

  std::vector<CurvePoint> curve;
  for (auto n : n_grid) {
    std::vector<double> acc(replicates);
    for (std::size_t rep = 0; rep < replicates; ++rep) {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < models.size(); ++i) {
        Rng rng(hash64({seed, n, rep, i}));
        hits += run_inference(models[i], strategy, n, rng).correct ? 1 : 0;
      }
      acc[rep] = static_cast<double>(hits) / static_cast<double>(models.size());
    }
    double mean = 0.0;
    for (double a : acc) mean += a;
    mean /= static_cast<double>(replicates);
    double ss = 0.0;
    for (double a : acc) ss += (a - mean) * (a - mean);
    double sd = replicates > 1 ? std::sqrt(ss / static_cast<double>(replicates - 1)) : 0.0;
    curve.push_back({n, mean, sd});
  }
  return curve;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y, std::size_t min_points) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "fit_line: x and y differ in length");
  if (x.size() < std::max<std::size_t>(min_points, 2)) {
    throw Error(ErrorCode::InsufficientPoints, "need at least " + std::to_string(std::max<std::size_t>(min_points, 2)) +
                                                   " points, got " + std::to_string(x.size()));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InsufficientPoints, "all x values coincide");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = x.size();
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

LineFit fit_exponential_gap(std::span<const CurvePoint> curve, double limit) {
  std::vector<double> x, y;
  for (const auto& p : curve) {
    double gap = limit - p.mean;
    if (gap > 0.0) {
      x.push_back(static_cast<double>(p.n));
      y.push_back(std::log(gap));
    }
  }
  if (x.size() < 3) {
    throw Error(ErrorCode::InsufficientPoints, "fewer than 3 points with a positive gap to the limit");
  }
  return fit_line(x, y, 3);
}

std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "pareto_frontier of no points");
  for (const auto& p : points) {
    if (!std::isfinite(p.flops) || !std::isfinite(p.error)) {
      throw Error(ErrorCode::InvalidArgument, "non-finite point '" + p.label + "'");
    }
  }
  std::vector<ParetoPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return std::tie(a.flops, a.error, a.label) < std::tie(b.flops, b.error, b.label);
  });
  std::vector<ParetoPoint> out;
  std::optional<double> best_cheaper;  // min error over strictly smaller flops
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].flops == sorted[i].flops) ++j;
    const double group_min = sorted[i].error;  // groups are error-sorted
    if (!best_cheaper || group_min < *best_cheaper) {
      for (std::size_t k = i; k < j && sorted[k].error == group_min; ++k) out.push_back(sorted[k]);
    }
    best_cheaper = best_cheaper ? std::min(*best_cheaper, group_min) : group_min;
    i = j;
  }
  return out;
}

std::string ConfigSummary::label() const {
  return std::to_string(model_size) + "/" + strategy + "/" + std::to_string(n_samples);
}

std::vector<ConfigSummary> summarize(std::span<const GridRow> grid) {
  std::map<std::tuple<std::uint64_t, std::string, std::uint64_t>, ConfigSummary> groups;
  for (const auto& row : grid) {
    auto& s = groups[{row.model_size, row.strategy, row.n_samples}];
    s.model_size = row.model_size;
    s.strategy = row.strategy;
    s.n_samples = row.n_samples;
    s.error += 1.0 - row.accuracy;
    s.flops += row.flops;
    ++s.replicates;
  }
  std::vector<ConfigSummary> out;
  out.reserve(groups.size());
  for (auto& [key, s] : groups) {
    s.error /= static_cast<double>(s.replicates);
    s.flops /= static_cast<double>(s.replicates);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ParetoPoint> grid_points(std::span<const GridRow> grid) {
  std::vector<ParetoPoint> out;
  for (const auto& s : summarize(grid)) out.push_back({s.flops, s.error, s.label()});
  return out;
}

ConfigSummary optimal_config(std::span<const GridRow> grid, double budget) {
  std::optional<ConfigSummary> best;
  for (auto& s : summarize(grid)) {
    if (!(s.flops <= budget)) continue;
    // summaries arrive in label order, so strict comparisons keep the first on full ties
    if (!best || s.error < best->error || (s.error == best->error && s.flops < best->flops)) best = std::move(s);
  }
  if (!best) throw Error(ErrorCode::NoFeasibleConfig, "no configuration fits a budget of " + std::to_string(budget));
  return *best;
}

SizeRegression fit_size_regression(std::span<const std::pair<double, double>> optima) {
  if (optima.size() < 2) throw Error(ErrorCode::InsufficientPoints, "size regression needs at least 2 optima");
  std::vector<double> x, y;
  for (const auto& [c, n] : optima) {
    if (!(c > 0.0) || !(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "FLOPs and model sizes must be positive");
    x.push_back(std::log10(n));
    y.push_back(std::log10(c));
  }
  auto fit = fit_line(x, y);
  return {fit.slope, fit.intercept};
}

std::vector<std::pair<double, double>> frontier_optima(std::span<const GridRow> grid) {
  auto summaries = summarize(grid);
  std::map<std::string, const ConfigSummary*> by_label;
  std::vector<ParetoPoint> points;
  for (const auto& s : summaries) {
    by_label[s.label()] = &s;
    points.push_back({s.flops, s.error, s.label()});
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& p : pareto_frontier(points)) {
    out.emplace_back(p.flops, static_cast<double>(by_label.at(p.label)->model_size));
  }
  return out;
}

}  // namespace scalinglab
