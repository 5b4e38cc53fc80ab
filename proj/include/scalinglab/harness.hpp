#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalinglab/accounting.hpp"
#include "scalinglab/analysis.hpp"
#include "scalinglab/inference.hpp"
#include "scalinglab/json_io.hpp"
#include "scalinglab/reward.hpp"
#include "scalinglab/toyworld.hpp"

namespace scalinglab {

inline constexpr std::string_view kCsvHeader =
    "model_size,strategy,n_samples,replicate,accuracy,policy_tokens,reward_tokens,flops";
inline constexpr std::string_view kJobsEnvVar = "SCALINGLAB_JOBS";

std::string_view code_version() noexcept;

struct OutputPaths {
  std::string csv = "grid.csv";
  std::string manifest = "manifest.json";
};

struct ExperimentConfig {
  std::optional<Dataset> dataset;          // inline problems
  std::optional<GeneratorSpec> generator;  // or a generated dataset
  std::vector<std::uint64_t> model_sizes;
  FamilyParams family;
  std::vector<StrategySpec> strategies;
  std::vector<std::uint64_t> n_grid;
  std::size_t replicates = 1;
  RewardSpec reward;
  AccountingConfig accounting;
  std::uint64_t master_seed = 0;
  OutputPaths outputs;
  Json source;  // the parsed document, hashed into the manifest

  /// The dataset before model-size mixing.
  Dataset base_dataset() const;
  /// Family parameters with the reference size resolved.
  FamilyParams family_params() const;
  /// One dataset per entry of model_sizes, in order.
  std::vector<Dataset> sized_datasets() const;
};

/// Parses and validates a config document. Unknown keys anywhere are
/// rejected. Throws ConfigInvalid with the offending field path.
ExperimentConfig parse_config(const Json& document);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunManifest {
  std::string config_hash;
  std::string code_version;
  std::string timestamp;
  std::uint64_t master_seed = 0;
  std::uint64_t reward_seed = 0;
  std::optional<std::uint64_t> dataset_seed;
  std::size_t streams = 0;
  std::string stream_digest;

  Json to_json() const;
};

/// Hex digest of the canonical (key-sorted, compact) dump of `document`.
std::string config_hash(const Json& document);

/// Stream key of one (model size, strategy, n, replicate, problem) cell.
std::uint64_t cell_stream(std::uint64_t master_seed, std::size_t model_index, std::size_t strategy_index,
                          std::uint64_t n, std::size_t replicate, std::string_view problem_id);

/// Every stream key a sweep will use, in cell order.
std::vector<std::uint64_t> sweep_streams(const ExperimentConfig& config);

struct ExperimentResult {
  ExperimentGrid grid;
  RunManifest manifest;
};

/// Runs every (model size, strategy, n, replicate) cell on `jobs` worker
/// threads; the grid comes back sorted by (model_size, strategy, n, replicate).
/// Greedy strategies run once per (model size, replicate) with n = 1.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t jobs = 1);

/// `--jobs` default: SCALINGLAB_JOBS if set to a positive integer, else 1.
std::size_t default_jobs();

void sort_grid(ExperimentGrid& grid);
std::string format_csv(std::span<const GridRow> grid);
ExperimentGrid parse_csv(std::string_view text);
/// Throws IoError.
void emit_csv(std::span<const GridRow> grid, const std::filesystem::path& path);
ExperimentGrid read_csv(const std::filesystem::path& path);

enum class PlotKind { ErrorVsFlops, Frontier };
PlotKind parse_plot_kind(std::string_view s);

/// Log-log SVG: one polyline per (model_size, strategy) through the
/// replicate-averaged points; Frontier also overlays the Pareto frontier.
/// Throws EmptyInput, or DegenerateAxis if every FLOPs value is equal.
std::string render_plot(std::span<const GridRow> grid, PlotKind kind);
void emit_plot(std::span<const GridRow> grid, PlotKind kind, const std::filesystem::path& path);

}  // namespace scalinglab
