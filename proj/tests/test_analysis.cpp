#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "scalinglab/analysis.hpp"
#include "scalinglab/error.hpp"

using namespace scalinglab;

namespace {

Dataset single(std::string truth, PolicySpec p) {
  std::vector<Problem> v;
  v.push_back(fixtures::problem("p0", std::move(truth), std::move(p)));
  return Dataset(std::move(v));
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

// O(n^2) reference frontier.
std::vector<ParetoPoint> brute_frontier(const std::vector<ParetoPoint>& pts) {
  std::vector<ParetoPoint> out;
  for (const auto& p : pts) {
    bool dominated = std::any_of(pts.begin(), pts.end(), [&](const ParetoPoint& q) {
      return q.flops <= p.flops && q.error <= p.error && (q.flops < p.flops || q.error < p.error);
    });
    if (!dominated) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return std::tie(a.flops, a.error, a.label) < std::tie(b.flops, b.error, b.label);
  });
  return out;
}

GridRow row(std::uint64_t size, std::string strategy, std::uint64_t n, std::uint32_t rep, double acc, double flops) {
  return GridRow{size, std::move(strategy), n, rep, acc, 0, 0, flops};
}

}  // namespace

TEST_CASE("mv_limit") {
  CHECK(mv_limit(single("A", fixtures::three_path_policy())).dataset_limit == 1.0);
  CHECK(mv_limit(single("B", fixtures::three_path_policy())).dataset_limit == 0.0);

  std::vector<Problem> v;
  v.push_back(fixtures::problem("a", "A", fixtures::two_answer_policy(0.7)));
  v.push_back(fixtures::problem("b", "A", fixtures::two_answer_policy(0.3)));
  v.push_back(fixtures::problem("c", "A", fixtures::two_answer_policy(0.5)));
  auto rep = mv_limit(Dataset(std::move(v)));
  REQUIRE(rep.per_problem.size() == 3);
  CHECK(rep.per_problem[0].margin == doctest::Approx(0.4));
  CHECK(rep.per_problem[0].limit_indicator == 1);
  CHECK(rep.per_problem[1].limit_indicator == 0);
  CHECK(rep.per_problem[2].degenerate);
  CHECK(rep.per_problem[2].argmax == Answer("A"));  // lexicographic tie-break
  CHECK(rep.dataset_limit == doctest::Approx(2.0 / 3.0));

  CHECK(code_of([] { mv_limit(single("A", fixtures::binary_policy(12)), 100); }) == ErrorCode::CapExceeded);
}

TEST_CASE("wv_limit") {
  auto ds = single("A", fixtures::two_answer_policy(0.6));
  auto w = [](double wa, double wb) {
    return PathWeight([=](const Problem&, const Solution& s) { return s.answer == Answer("A") ? wa : wb; });
  };
  // masses 0.36 vs 0.30
  auto keeps = wv_limit(ds, w(0.6, 0.75));
  CHECK(keeps.dataset_limit == 1.0);
  CHECK(keeps.per_problem[0].margin == doctest::Approx(0.06));
  // masses 0.36 vs 0.40
  CHECK(wv_limit(ds, w(0.6, 1.0)).dataset_limit == 0.0);

  SUBCASE("constant weight reproduces mv_limit") {
    GeneratorSpec g;
    g.problems = 12;
    g.seed = 4;
    auto gen = generate_dataset(g);
    auto mv = mv_limit(gen);
    auto wv = wv_limit(gen, w(0.37, 0.37));
    RewardSpec flat{0.0, 0.0, 0, Aggregation::Last};  // scores every solution 0.5
    auto wv_flat = wv_limit(gen, flat);
    CHECK(wv.dataset_limit == mv.dataset_limit);
    CHECK(wv_flat.dataset_limit == mv.dataset_limit);
    for (std::size_t i = 0; i < mv.per_problem.size(); ++i) {
      CHECK(wv.per_problem[i].argmax == mv.per_problem[i].argmax);
      CHECK(wv_flat.per_problem[i].limit_indicator == mv.per_problem[i].limit_indicator);
    }
  }
  SUBCASE("weight scale does not move the limit") {
    CHECK(wv_limit(ds, w(0.06, 0.075)).dataset_limit == 1.0);
    CHECK(wv_limit(ds, w(6.0, 10.0)).dataset_limit == 0.0);
  }
  SUBCASE("oracle reward picks the truth whenever it is reachable") {
    RewardSpec oracle{std::numeric_limits<double>::infinity(), 0.0, 0, Aggregation::Last};
    CHECK(wv_limit(single("B", fixtures::three_path_policy()), oracle).dataset_limit == 1.0);
  }
}

TEST_CASE("answer_margin") {
  auto m = answer_margin(fixtures::three_path_policy());
  CHECK(m.margin == doctest::Approx(0.70));
  CHECK(m.argmax == Answer("A"));
  auto one = answer_margin(fixtures::chain_policy());
  CHECK(one.single_answer);
  CHECK(one.margin == 1.0);
  auto even = answer_margin(fixtures::two_answer_policy(0.5));
  CHECK(even.degenerate);
  CHECK(even.margin == 0.0);
}

TEST_CASE("fit_line and fit_exponential_gap") {
  std::vector<CurvePoint> curve;
  for (std::uint64_t n = 1; n <= 15; n += 2) curve.push_back({n, 1.0 - 0.4 * std::pow(0.8, double(n)), 0.0});
  auto fit = fit_exponential_gap(curve, 1.0);
  CHECK(fit.slope == doctest::Approx(std::log(0.8)).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(0.4)).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK(fit.points == curve.size());

  std::vector<CurvePoint> flat{{1, 1.0, 0}, {3, 1.0, 0}, {5, 0.9, 0}};
  CHECK(code_of([&] { fit_exponential_gap(flat, 1.0); }) == ErrorCode::InsufficientPoints);
  std::vector<double> x{1.0}, y{2.0};
  CHECK(code_of([&] { fit_line(x, y); }) == ErrorCode::InsufficientPoints);
}

TEST_CASE("pareto_frontier") {
  std::vector<ParetoPoint> pts{{1, 0.5, "a"}, {2, 0.4, "b"}, {2, 0.6, "c"}, {3, 0.4, "d"}, {4, 0.1, "e"}};
  auto f = pareto_frontier(pts);
  REQUIRE(f.size() == 3);
  CHECK(f[0].label == "a");
  CHECK(f[1].label == "b");
  CHECK(f[2].label == "e");
  CHECK(code_of([] { pareto_frontier(std::vector<ParetoPoint>{}); }) == ErrorCode::EmptyInput);

  Rng gen(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ParetoPoint> p;
    std::size_t n = 1 + gen.next_u64() % 40;
    for (std::size_t i = 0; i < n; ++i) {
      // coarse values make exact ties common
      p.push_back({double(gen.next_u64() % 8), double(gen.next_u64() % 8) / 8.0, "x" + std::to_string(i)});
    }
    CHECK(pareto_frontier(p) == brute_frontier(p));
  }
}

TEST_CASE("summaries and optimal_config") {
  ExperimentGrid grid{
      row(1, "sampling+mv", 4, 0, 0.5, 100), row(1, "sampling+mv", 4, 1, 0.7, 140),  // err .4, flops 120
      row(1, "rebase+wv", 4, 0, 0.8, 200),                                            // err .2
      row(2, "sampling+mv", 1, 0, 0.6, 90),                                           // err .4, flops 90
  };
  auto s = summarize(grid);
  REQUIRE(s.size() == 3);
  CHECK(s[0].label() == "1/rebase+wv/4");
  CHECK(s[1].error == doctest::Approx(0.4));
  CHECK(s[1].flops == 120.0);
  CHECK(s[1].replicates == 2);

  CHECK(optimal_config(grid, 1000).label() == "1/rebase+wv/4");
  CHECK(optimal_config(grid, 150).label() == "2/sampling+mv/1");  // equal error, fewer flops
  CHECK(code_of([&] { optimal_config(grid, 50); }) == ErrorCode::NoFeasibleConfig);

  auto opt = frontier_optima(grid);
  REQUIRE(opt.size() == 2);
  CHECK(opt[0] == std::pair<double, double>{90.0, 2.0});
  CHECK(opt[1] == std::pair<double, double>{200.0, 1.0});
}

TEST_CASE("fit_size_regression") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {1e8, 3e8, 1e9, 7e9, 3.4e10}) pts.emplace_back(std::pow(10.0, 2.03) * std::pow(n, 1.19), n);
  auto fit = fit_size_regression(pts);
  CHECK(std::abs(fit.slope - 1.19) <= 1e-9);
  CHECK(std::abs(fit.intercept - 2.03) <= 1e-9);
  std::vector<std::pair<double, double>> one{{1.0, 1.0}};
  CHECK(code_of([&] { fit_size_regression(one); }) == ErrorCode::InsufficientPoints);
}

TEST_CASE("convergence_curve") {
  auto ds = single("A", fixtures::two_answer_policy(0.6));
  std::vector<std::uint64_t> grid{1, 3};
  auto curve = convergence_curve(ds, parse_strategy("sampling+mv"), RewardSpec{}, grid, 4000, 77);
  REQUIRE(curve.size() == 2);
  double sigma1 = std::sqrt(0.6 * 0.4 / 4000);
  double sigma3 = std::sqrt(0.648 * 0.352 / 4000);
  CHECK(std::abs(curve[0].mean - 0.6) <= 4 * sigma1);
  CHECK(std::abs(curve[1].mean - 0.648) <= 4 * sigma3);
  CHECK(curve[1].std == doctest::Approx(std::sqrt(0.648 * 0.352)).epsilon(0.05));

  auto again = convergence_curve(ds, parse_strategy("sampling+mv"), RewardSpec{}, grid, 4000, 77);
  CHECK(again[1].mean == curve[1].mean);
}
