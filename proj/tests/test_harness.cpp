#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <filesystem>
#include <set>
#include <sstream>

#include "scalinglab/error.hpp"
#include "scalinglab/harness.hpp"

using namespace scalinglab;

namespace {

Json small_config() {
  return Json::parse(R"({
    "dataset": {"generator": {"problems": 4, "depth": 3, "width": 3, "seed": 5}},
    "model_sizes": [1000000, 4000000],
    "strategies": [{"kind": "greedy"}, {"kind": "sampling+mv"}, {"kind": "rebase+wv"}, {"kind": "mcts+bon"}],
    "n_grid": [4, 1, 2, 2],
    "replicates": 2,
    "reward": {"alpha": 2.0, "eta": 0.05, "seed": 3},
    "reward_params": 1000000,
    "master_seed": 9
  })");
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

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("parse_config") {
  auto c = parse_config(small_config());
  CHECK(c.n_grid == std::vector<std::uint64_t>{1, 2, 4});
  CHECK(c.replicates == 2);
  CHECK(c.strategies.size() == 4);
  CHECK(c.generator.has_value());
  CHECK(c.sized_datasets().size() == 2);
  CHECK(c.accounting.reward_params == 1000000);

  auto bad = [](auto mutate) {
    auto j = small_config();
    mutate(j);
    return code_of([&] { parse_config(j); });
  };
  CHECK(bad([](Json& j) { j["unknown"] = 1; }) == ErrorCode::ConfigInvalid);
  CHECK(bad([](Json& j) { j["reward"]["beta"] = 1; }) == ErrorCode::ConfigInvalid);
  CHECK(bad([](Json& j) { j["reward"]["eta"] = 0.9; }) == ErrorCode::ConfigInvalid);
  CHECK(bad([](Json& j) { j["strategies"][1]["kind"] = "sampling+xx"; }) == ErrorCode::ConfigInvalid);
  CHECK(bad([](Json& j) { j["strategies"].push_back({{"kind", "greedy"}}); }) == ErrorCode::ConfigInvalid);
  CHECK(bad([](Json& j) { j["strategies"][1]["name"] = "a,b"; }) == ErrorCode::ConfigInvalid);
  CHECK(bad([](Json& j) { j["model_sizes"] = Json::array({5, 5}); }) == ErrorCode::ConfigInvalid);
  CHECK(bad([](Json& j) { j["n_grid"] = Json::array({0}); }) == ErrorCode::ConfigInvalid);
  CHECK(bad([](Json& j) { j.erase("dataset"); }) == ErrorCode::ConfigInvalid);
  CHECK(bad([](Json& j) { j["dataset"]["generator"]["depht"] = 3; }) == ErrorCode::ConfigInvalid);

  CHECK(config_hash(small_config()) == config_hash(Json::parse(small_config().dump(2))));
  auto other = small_config();
  other["master_seed"] = 10;
  CHECK(config_hash(other) != config_hash(small_config()));
}

TEST_CASE("run_experiment") {
  auto c = parse_config(small_config());
  auto a = run_experiment(c, 1);

  // greedy: 2 sizes × 2 replicates at n = 1; others: 2 × 3 × 3 × 2
  CHECK(a.grid.size() == 4 + 2 * 3 * 3 * 2);
  std::set<std::tuple<std::uint64_t, std::string, std::uint64_t, std::uint32_t>> keys;
  for (const auto& r : a.grid) {
    keys.insert({r.model_size, r.strategy, r.n_samples, r.replicate});
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    CHECK(r.flops > 0.0);
    if (r.strategy == "greedy") {
      CHECK(r.n_samples == 1);
      CHECK(r.reward_tokens == 0);
    }
    if (r.strategy == "sampling+mv") CHECK(r.reward_tokens == 0);
    if (r.strategy == "rebase+wv") CHECK(r.reward_tokens > 0);
  }
  CHECK(keys.size() == a.grid.size());
  CHECK(std::is_sorted(a.grid.begin(), a.grid.end(), [](const GridRow& x, const GridRow& y) {
    return std::tie(x.model_size, x.strategy, x.n_samples, x.replicate) <
           std::tie(y.model_size, y.strategy, y.n_samples, y.replicate);
  }));

  SUBCASE("thread count does not change results") {
    auto b = run_experiment(c, 3);
    CHECK(b.grid == a.grid);
    CHECK(format_csv(b.grid) == format_csv(a.grid));
    CHECK(b.manifest.stream_digest == a.manifest.stream_digest);
  }
  SUBCASE("replicates differ, seeds matter") {
    bool differs = false;
    for (std::size_t i = 0; i + 1 < a.grid.size(); ++i) {
      const auto& x = a.grid[i];
      const auto& y = a.grid[i + 1];
      if (x.model_size == y.model_size && x.strategy == y.strategy && x.n_samples == y.n_samples &&
          x.policy_tokens != y.policy_tokens) {
        differs = true;
      }
    }
    CHECK(differs);
    auto j = small_config();
    j["master_seed"] = 10;
    CHECK(run_experiment(parse_config(j), 1).grid != a.grid);
  }
  SUBCASE("manifest") {
    auto m = a.manifest.to_json();
    CHECK(m["config_hash"] == config_hash(small_config()));
    CHECK(m["seeds"]["master_seed"] == 9);
    CHECK(m["seeds"]["dataset_seed"] == 5);
    CHECK(m["code_version"] == std::string(code_version()));
    CHECK(a.manifest.streams == sweep_streams(c).size());
  }
}

TEST_CASE("stream keys are distinct") {
  auto c = parse_config(small_config());
  auto s = sweep_streams(c);
  CHECK(std::set<std::uint64_t>(s.begin(), s.end()).size() == s.size());
  CHECK(cell_stream(1, 0, 0, 4, 0, "p0") != cell_stream(1, 0, 0, 4, 0, "p1"));
  CHECK(cell_stream(1, 0, 0, 4, 0, "p0") == cell_stream(1, 0, 0, 4, 0, "p0"));
}

TEST_CASE("CSV") {
  ExperimentGrid grid{
      {2, "sampling+mv", 4, 1, 0.25, 100, 0, 2.5e9},
      {1, "rebase+wv", 8, 0, 0.75, 300, 120, 1.23456789e12},
  };
  sort_grid(grid);
  CHECK(grid[0].model_size == 1);
  auto text = format_csv(grid);
  CHECK(text.substr(0, text.find('\n')) == kCsvHeader);
  auto back = parse_csv(text);
  CHECK(back == grid);
  CHECK(format_csv(back) == text);

  CHECK(code_of([] { parse_csv("model_size,strategy\n1,x\n"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { parse_csv(std::string(kCsvHeader) + "\n1,x,2\n"); }) == ErrorCode::InvalidArgument);

  auto dir = std::filesystem::temp_directory_path() / "scalinglab_csv_test";
  std::filesystem::create_directories(dir);
  emit_csv(grid, dir / "g.csv");
  CHECK(read_csv(dir / "g.csv") == grid);
  CHECK(code_of([&] { read_csv(dir / "missing.csv"); }) == ErrorCode::IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("render_plot") {
  auto c = parse_config(small_config());
  auto grid = run_experiment(c, 1).grid;
  for (auto kind : {PlotKind::ErrorVsFlops, PlotKind::Frontier}) {
    auto svg = render_plot(grid, kind);
    // one series per (size, strategy)
    CHECK(count(svg, "<polyline class=\"series\"") == 2 * 4);
    std::istringstream in(svg);
    boost::property_tree::ptree tree;
    CHECK_NOTHROW(boost::property_tree::read_xml(in, tree));
    CHECK(tree.count("svg") == 1);
    CHECK((count(svg, "class=\"frontier\"") > 0) == (kind == PlotKind::Frontier));
  }
  CHECK(parse_plot_kind("frontier") == PlotKind::Frontier);

  ExperimentGrid flat{{1, "a", 1, 0, 0.5, 1, 0, 10.0}, {1, "a", 2, 0, 0.6, 1, 0, 10.0}};
  CHECK(code_of([&] { render_plot(flat, PlotKind::ErrorVsFlops); }) == ErrorCode::DegenerateAxis);
  CHECK(code_of([] { render_plot(ExperimentGrid{}, PlotKind::ErrorVsFlops); }) == ErrorCode::EmptyInput);
}
