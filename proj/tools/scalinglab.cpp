// scalinglab command-line interface.
//
//   scalinglab run     --config <path> --out-dir <dir> [--jobs N]
//   scalinglab limits  --config <path>
//   scalinglab pareto  --csv <path>
//   scalinglab regress --csv <path>
//   scalinglab plot    --csv <path> --kind <error_vs_flops|frontier> [--out <svg>]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "scalinglab/analysis.hpp"
#include "scalinglab/error.hpp"
#include "scalinglab/harness.hpp"
#include "scalinglab/json_io.hpp"

namespace fs = std::filesystem;
using namespace scalinglab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

int cmd_run(const std::string& config_path, const std::string& out_dir, std::size_t jobs) {
  auto config = load_config(config_path);
  fs::create_directories(out_dir);
  auto result = run_experiment(config, jobs);
  auto csv = fs::path(out_dir) / config.outputs.csv;
  emit_csv(result.grid, csv);
  write_json(fs::path(out_dir) / config.outputs.manifest, result.manifest.to_json());
  std::cout << "wrote " << result.grid.size() << " rows to " << csv.string() << '\n';
  return 0;
}

int cmd_limits(const std::string& config_path) {
  auto config = load_config(config_path);
  auto datasets = config.sized_datasets();
  Json out = Json::array();
  for (std::size_t k = 0; k < datasets.size(); ++k) {
    out.push_back({{"model_size", config.model_sizes[k]},
                   {"majority_vote", limit_report_to_json(mv_limit(datasets[k]))},
                   {"weighted_vote", limit_report_to_json(wv_limit(datasets[k], config.reward))}});
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_pareto(const std::string& csv) {
  auto grid = read_csv(csv);
  auto frontier = pareto_frontier(grid_points(grid));
  std::cout << pareto_to_json(frontier).dump(2) << '\n';
  return 0;
}

int cmd_regress(const std::string& csv) {
  auto grid = read_csv(csv);
  auto optima = frontier_optima(grid);
  auto fit = fit_size_regression(optima);
  Json result{{"slope", fit.slope}, {"intercept", fit.intercept}, {"points", optima.size()}};
  std::cout << "log10(C) = " << fit.slope << " * log10(N) + " << fit.intercept << '\n';

  // Record the coefficients next to the run that produced the grid.
  auto manifest = fs::path(csv).parent_path() / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    Json doc = Json::parse(in, nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) {
      doc["size_regression"] = result;
      write_json(manifest, doc);
    }
  }
  return 0;
}

int cmd_plot(const std::string& csv, const std::string& kind_name, std::string out) {
  auto kind = parse_plot_kind(kind_name);
  auto grid = read_csv(csv);
  if (out.empty()) {
    auto p = fs::path(csv);
    out = (p.parent_path() / (p.stem().string() + "_" + kind_name + ".svg")).string();
  }
  emit_plot(grid, kind, out);
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compute-optimal inference simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, csv, kind, out;
  std::size_t jobs = default_jobs();

  auto* run = app.add_subcommand("run", "Run an experiment sweep and write CSV + manifest");
  run->add_option("--config", config_path, "Experiment config JSON")->required();
  run->add_option("--out-dir", out_dir, "Output directory")->required();
  run->add_option("--jobs", jobs, "Worker threads (default: $SCALINGLAB_JOBS or 1)")->check(CLI::PositiveNumber);

  auto* limits = app.add_subcommand("limits", "Print the n -> infinity voting accuracy limits");
  limits->add_option("--config", config_path, "Experiment config JSON")->required();

  auto* pareto = app.add_subcommand("pareto", "Print the Pareto frontier of a result grid");
  pareto->add_option("--csv", csv, "Grid CSV")->required();

  auto* regress = app.add_subcommand("regress", "Fit log10(C) against log10(N) over frontier optima");
  regress->add_option("--csv", csv, "Grid CSV")->required();

  auto* plot = app.add_subcommand("plot", "Render an SVG plot of a result grid");
  plot->add_option("--csv", csv, "Grid CSV")->required();
  plot->add_option("--kind", kind, "error_vs_flops or frontier")->required();
  plot->add_option("--out", out, "Output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, jobs);
    if (*limits) return cmd_limits(config_path);
    if (*pareto) return cmd_pareto(csv);
    if (*regress) return cmd_regress(csv);
    if (*plot) return cmd_plot(csv, kind, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigInvalid ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
