#include "scalinglab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "scalinglab/error.hpp"

#ifndef SCALINGLAB_VERSION
#define SCALINGLAB_VERSION "0.0.0"
#endif

namespace scalinglab {

std::string_view code_version() noexcept { return "scalinglab " SCALINGLAB_VERSION; }

// ---------------------------------------------------------------------------
// Config

namespace {

std::uint64_t get_count(const Json& j, const std::string& path) {
  if (j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0)) return j.get<std::uint64_t>();
  if (j.is_number_float()) {
    double v = j.get<double>();
    if (v >= 0.0 && v < 1.8e19 && std::floor(v) == v) return static_cast<std::uint64_t>(v);
  }
  throw Error(ErrorCode::ConfigInvalid, path + ": expected a non-negative integer");
}

double get_real(const Json& j, const std::string& path) {
  if (!j.is_number()) throw Error(ErrorCode::ConfigInvalid, path + ": expected a number");
  return j.get<double>();
}

bool get_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw Error(ErrorCode::ConfigInvalid, path + ": expected true or false");
  return j.get<bool>();
}

std::string get_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw Error(ErrorCode::ConfigInvalid, path + ": expected a string");
  return j.get<std::string>();
}

std::vector<std::uint64_t> get_positive_list(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ConfigInvalid, path + ": expected a non-empty array");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto v = get_count(j[i], path + "[" + std::to_string(i) + "]");
    if (v == 0) throw Error(ErrorCode::ConfigInvalid, path + "[" + std::to_string(i) + "]: must be positive");
    out.push_back(v);
  }
  return out;
}

// Rewraps library validation errors as config errors at `path`.
template <typename F>
auto at_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
}

GeneratorSpec parse_generator(const Json& j, const std::string& path) {
  require_keys(j, {"problems", "depth", "width", "branching", "answers", "early_stop", "truth_is_mode",
                   "tokens_per_step", "seed"},
               path);
  GeneratorSpec g;
  if (j.contains("problems")) g.problems = get_count(j["problems"], path + ".problems");
  if (j.contains("depth")) g.depth = static_cast<int>(get_count(j["depth"], path + ".depth"));
  if (j.contains("width")) g.width = static_cast<int>(get_count(j["width"], path + ".width"));
  if (j.contains("branching")) g.branching = static_cast<int>(get_count(j["branching"], path + ".branching"));
  if (j.contains("answers")) g.answers = static_cast<int>(get_count(j["answers"], path + ".answers"));
  if (j.contains("early_stop")) g.early_stop = get_real(j["early_stop"], path + ".early_stop");
  if (j.contains("truth_is_mode")) g.truth_is_mode = get_real(j["truth_is_mode"], path + ".truth_is_mode");
  if (j.contains("tokens_per_step")) {
    g.tokens_per_step = static_cast<std::uint32_t>(get_count(j["tokens_per_step"], path + ".tokens_per_step"));
  }
  if (j.contains("seed")) g.seed = get_count(j["seed"], path + ".seed");
  if (g.problems < 1 || g.depth < 1 || g.width < 1 || g.branching < 1 || g.answers < 1 || g.tokens_per_step < 1) {
    throw Error(ErrorCode::ConfigInvalid, path + ": counts must be positive");
  }
  if (!(g.early_stop >= 0.0 && g.early_stop < 1.0)) throw Error(ErrorCode::ConfigInvalid, path + ".early_stop: must lie in [0, 1)");
  if (!(g.truth_is_mode >= 0.0 && g.truth_is_mode <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, path + ".truth_is_mode: must lie in [0, 1]");
  }
  return g;
}

StrategySpec parse_strategy_entry(const Json& j, const std::string& path) {
  require_keys(j, {"kind", "name", "balance_temperature", "max_depth", "exploration_c", "root_children",
                   "nonroot_children"},
               path);
  if (!j.contains("kind")) throw Error(ErrorCode::ConfigInvalid, path + ": missing 'kind'");
  auto kind = get_string(j["kind"], path + ".kind");
  auto spec = at_path(path + ".kind", [&] { return parse_strategy(kind); });
  if (j.contains("name")) spec.name = get_string(j["name"], path + ".name");
  if (j.contains("balance_temperature")) {
    spec.balance_temperature = get_real(j["balance_temperature"], path + ".balance_temperature");
  }
  if (j.contains("max_depth")) spec.rebase_max_depth = static_cast<int>(get_count(j["max_depth"], path + ".max_depth"));
  if (j.contains("exploration_c")) spec.exploration_c = get_real(j["exploration_c"], path + ".exploration_c");
  if (j.contains("root_children")) {
    spec.root_children = static_cast<int>(get_count(j["root_children"], path + ".root_children"));
  }
  if (j.contains("nonroot_children")) {
    spec.nonroot_children = static_cast<int>(get_count(j["nonroot_children"], path + ".nonroot_children"));
  }
  auto label = spec.label();
  if (label.find_first_of(",\"\n\r") != std::string::npos) {
    throw Error(ErrorCode::ConfigInvalid, path + ".name: must not contain commas, quotes or newlines");
  }
  at_path(path, [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

}  // namespace

Dataset ExperimentConfig::base_dataset() const {
  if (dataset) return *dataset;
  if (generator) return generate_dataset(*generator);
  throw Error(ErrorCode::ConfigInvalid, "dataset: neither inline problems nor a generator");
}

std::vector<Dataset> ExperimentConfig::sized_datasets() const {
  auto base = base_dataset();
  std::vector<std::vector<Problem>> per_size(model_sizes.size());
  for (const auto& problem : base.problems()) {
    auto family = make_policy_family(problem.policy(), problem.truth(), model_sizes, family_params());
    for (std::size_t k = 0; k < family.size(); ++k) per_size[k].push_back(problem.with_policy(std::move(family[k])));
  }
  std::vector<Dataset> out;
  for (auto& problems : per_size) out.emplace_back(std::move(problems));
  return out;
}

FamilyParams ExperimentConfig::family_params() const {
  FamilyParams p = family;
  if (p.reference_size == 0) p.reference_size = *std::min_element(model_sizes.begin(), model_sizes.end());
  return p;
}

ExperimentConfig parse_config(const Json& document) {
  require_keys(document, {"dataset", "model_sizes", "family", "strategies", "n_grid", "replicates", "reward",
                          "reward_params", "include_reward_flops", "flops_per_param_token", "master_seed", "outputs"},
               "config");
  ExperimentConfig c;
  c.source = document;

  if (!document.contains("dataset")) throw Error(ErrorCode::ConfigInvalid, "config: missing 'dataset'");
  const auto& ds = document["dataset"];
  if (ds.is_array()) {
    c.dataset = at_path("dataset", [&] { return dataset_from_json(ds, "dataset"); });
  } else {
    require_keys(ds, {"generator"}, "dataset");
    if (!ds.contains("generator")) throw Error(ErrorCode::ConfigInvalid, "dataset: expected an array or {\"generator\": ...}");
    c.generator = parse_generator(ds["generator"], "dataset.generator");
  }

  if (!document.contains("model_sizes")) throw Error(ErrorCode::ConfigInvalid, "config: missing 'model_sizes'");
  c.model_sizes = get_positive_list(document["model_sizes"], "model_sizes");
  if (std::set<std::uint64_t>(c.model_sizes.begin(), c.model_sizes.end()).size() != c.model_sizes.size()) {
    throw Error(ErrorCode::ConfigInvalid, "model_sizes: duplicate entries");
  }

  if (document.contains("family")) {
    const auto& f = document["family"];
    require_keys(f, {"q0", "beta", "reference_size"}, "family");
    if (f.contains("q0")) c.family.q0 = get_real(f["q0"], "family.q0");
    if (f.contains("beta")) c.family.beta = get_real(f["beta"], "family.beta");
    if (f.contains("reference_size")) c.family.reference_size = get_count(f["reference_size"], "family.reference_size");
    if (!(c.family.q0 >= 0.0 && c.family.q0 <= 1.0)) throw Error(ErrorCode::ConfigInvalid, "family.q0: must lie in [0, 1]");
    if (!(c.family.beta >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "family.beta: must be >= 0");
  }

  if (!document.contains("strategies") || !document["strategies"].is_array() || document["strategies"].empty()) {
    throw Error(ErrorCode::ConfigInvalid, "strategies: expected a non-empty array");
  }
  std::set<std::string> labels;
  for (std::size_t i = 0; i < document["strategies"].size(); ++i) {
    auto path = "strategies[" + std::to_string(i) + "]";
    auto spec = parse_strategy_entry(document["strategies"][i], path);
    if (!labels.insert(spec.label()).second) {
      throw Error(ErrorCode::ConfigInvalid, path + ": duplicate strategy label '" + spec.label() + "' (set 'name')");
    }
    c.strategies.push_back(std::move(spec));
  }

  if (!document.contains("n_grid")) throw Error(ErrorCode::ConfigInvalid, "config: missing 'n_grid'");
  c.n_grid = get_positive_list(document["n_grid"], "n_grid");
  std::sort(c.n_grid.begin(), c.n_grid.end());
  c.n_grid.erase(std::unique(c.n_grid.begin(), c.n_grid.end()), c.n_grid.end());

  if (document.contains("replicates")) c.replicates = get_count(document["replicates"], "replicates");
  if (c.replicates < 1) throw Error(ErrorCode::ConfigInvalid, "replicates: must be >= 1");

  if (document.contains("reward")) {
    const auto& r = document["reward"];
    require_keys(r, {"alpha", "eta", "seed", "aggregation"}, "reward");
    if (r.contains("alpha")) c.reward.alpha = get_real(r["alpha"], "reward.alpha");
    if (r.contains("eta")) c.reward.eta = get_real(r["eta"], "reward.eta");
    if (r.contains("seed")) c.reward.seed = get_count(r["seed"], "reward.seed");
    if (r.contains("aggregation")) {
      auto name = get_string(r["aggregation"], "reward.aggregation");
      c.reward.aggregation = at_path("reward.aggregation", [&] { return parse_aggregation(name); });
    }
    at_path("reward", [&] {
      c.reward.validate();
      return 0;
    });
  }

  if (document.contains("reward_params")) c.accounting.reward_params = get_count(document["reward_params"], "reward_params");
  if (c.accounting.reward_params < 1) throw Error(ErrorCode::ConfigInvalid, "reward_params: must be positive");
  if (document.contains("include_reward_flops")) {
    c.accounting.include_reward_flops = get_bool(document["include_reward_flops"], "include_reward_flops");
  }
  if (document.contains("flops_per_param_token")) {
    c.accounting.flops_per_param_token = get_real(document["flops_per_param_token"], "flops_per_param_token");
    if (!(c.accounting.flops_per_param_token > 0.0)) {
      throw Error(ErrorCode::ConfigInvalid, "flops_per_param_token: must be positive");
    }
  }
  if (document.contains("master_seed")) c.master_seed = get_count(document["master_seed"], "master_seed");

  if (document.contains("outputs")) {
    const auto& o = document["outputs"];
    require_keys(o, {"csv", "manifest"}, "outputs");
    if (o.contains("csv")) c.outputs.csv = get_string(o["csv"], "outputs.csv");
    if (o.contains("manifest")) c.outputs.manifest = get_string(o["manifest"], "outputs.manifest");
  }

  // Surface dataset and family problems now rather than mid-run.
  at_path("dataset", [&] { return c.sized_datasets().size(); });
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Manifest and streams

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string config_hash(const Json& document) {
  auto text = document.dump();
  return hex64(hash_string(text)) + hex64(mix64(hash_string(text) ^ text.size()));
}

Json RunManifest::to_json() const {
  return Json{{"config_hash", config_hash},
              {"code_version", code_version},
              {"timestamp", timestamp},
              {"seeds",
               {{"master_seed", master_seed},
                {"reward_seed", reward_seed},
                {"dataset_seed", dataset_seed ? Json(*dataset_seed) : Json(nullptr)},
                {"streams", streams},
                {"stream_digest", stream_digest}}}};
}

std::uint64_t cell_stream(std::uint64_t master_seed, std::size_t model_index, std::size_t strategy_index,
                          std::uint64_t n, std::size_t replicate, std::string_view problem_id) {
  return hash64({master_seed, model_index, strategy_index, n, replicate, hash_string(problem_id)});
}

namespace {

struct Cell {
  std::size_t model = 0;
  std::size_t strategy = 0;
  std::uint64_t n = 0;
  std::size_t replicate = 0;
};

std::vector<Cell> sweep_cells(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < config.model_sizes.size(); ++m) {
    for (std::size_t s = 0; s < config.strategies.size(); ++s) {
      bool greedy = config.strategies[s].generator == Generator::Greedy;
      std::vector<std::uint64_t> ns = greedy ? std::vector<std::uint64_t>{1} : config.n_grid;
      for (auto n : ns) {
        for (std::size_t r = 0; r < config.replicates; ++r) cells.push_back({m, s, n, r});
      }
    }
  }
  return cells;
}

}  // namespace

std::vector<std::uint64_t> sweep_streams(const ExperimentConfig& config) {
  auto base = config.base_dataset();
  std::vector<std::uint64_t> out;
  for (const auto& cell : sweep_cells(config)) {
    for (const auto& p : base.problems()) {
      out.push_back(cell_stream(config.master_seed, cell.model, cell.strategy, cell.n, cell.replicate, p.id()));
    }
  }
  return out;
}

std::size_t default_jobs() {
  if (const char* env = std::getenv(kJobsEnvVar.data())) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t jobs) {
  const auto datasets = config.sized_datasets();
  std::vector<std::vector<RewardModel>> rewards(datasets.size());
  for (std::size_t m = 0; m < datasets.size(); ++m) {
    for (const auto& p : datasets[m].problems()) rewards[m].emplace_back(config.reward, p);
  }

  const auto cells = sweep_cells(config);
  ExperimentGrid grid(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      auto i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const auto& cell = cells[i];
      try {
        const auto& strategy = config.strategies[cell.strategy];
        const auto& models = rewards[cell.model];
        std::vector<BudgetReport> reports;
        reports.reserve(models.size());
        std::size_t hits = 0;
        for (const auto& model : models) {
          Rng rng(cell_stream(config.master_seed, cell.model, cell.strategy, cell.n, cell.replicate,
                              model.problem().id()));
          auto outcome = run_inference(model, strategy, cell.n, rng, config.accounting);
          hits += outcome.correct ? 1 : 0;
          reports.push_back(outcome.report);
        }
        auto total = merge(reports);
        auto& row = grid[i];
        row.model_size = config.model_sizes[cell.model];
        row.strategy = strategy.label();
        row.n_samples = cell.n;
        row.replicate = static_cast<std::uint32_t>(cell.replicate);
        row.accuracy = static_cast<double>(hits) / static_cast<double>(models.size());
        row.policy_tokens = total.policy_tokens();
        row.reward_tokens = total.reward_tokens();
        row.flops = total.flops();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(cells.size());
        return;
      }
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  sort_grid(grid);

  ExperimentResult result;
  result.grid = std::move(grid);
  auto& mf = result.manifest;
  mf.config_hash = config_hash(config.source);
  mf.code_version = std::string(code_version());
  mf.timestamp = utc_timestamp();
  mf.master_seed = config.master_seed;
  mf.reward_seed = config.reward.seed;
  if (config.generator) mf.dataset_seed = config.generator->seed;
  auto streams = sweep_streams(config);
  mf.streams = streams.size();
  std::uint64_t digest = 0;
  for (auto s : streams) digest = hash_combine(digest, s);
  mf.stream_digest = hex64(digest);
  return result;
}

// ---------------------------------------------------------------------------
// CSV

void sort_grid(ExperimentGrid& grid) {
  std::sort(grid.begin(), grid.end(), [](const GridRow& a, const GridRow& b) {
    return std::tie(a.model_size, a.strategy, a.n_samples, a.replicate) <
           std::tie(b.model_size, b.strategy, b.n_samples, b.replicate);
  });
}

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string format_csv(std::span<const GridRow> grid) {
  ExperimentGrid rows(grid.begin(), grid.end());
  sort_grid(rows);
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.model_size) + ',' + r.strategy + ',' + std::to_string(r.n_samples) + ',' +
           std::to_string(r.replicate) + ',' + format_real(r.accuracy) + ',' + std::to_string(r.policy_tokens) + ',' +
           std::to_string(r.reward_tokens) + ',' + format_real(r.flops) + '\n';
  }
  return out;
}

ExperimentGrid parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(ErrorCode::InvalidArgument, "CSV header must be '" + std::string(kCsvHeader) + "'");
  }
  ExperimentGrid grid;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw Error(ErrorCode::InvalidArgument, "CSV line " + std::to_string(line_no) + ": expected 8 fields");
    try {
      GridRow r;
      r.model_size = std::stoull(f[0]);
      r.strategy = f[1];
      r.n_samples = std::stoull(f[2]);
      r.replicate = static_cast<std::uint32_t>(std::stoul(f[3]));
      r.accuracy = std::stod(f[4]);
      r.policy_tokens = std::stoull(f[5]);
      r.reward_tokens = std::stoull(f[6]);
      r.flops = std::stod(f[7]);
      grid.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidArgument, "CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return grid;
}

void emit_csv(std::span<const GridRow> grid, const std::filesystem::path& path) {
  if (grid.empty()) throw Error(ErrorCode::EmptyInput, "emit_csv: empty grid");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << format_csv(grid);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

ExperimentGrid read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

// ---------------------------------------------------------------------------
// SVG

PlotKind parse_plot_kind(std::string_view s) {
  if (s == "error_vs_flops") return PlotKind::ErrorVsFlops;
  if (s == "frontier") return PlotKind::Frontier;
  throw Error(ErrorCode::InvalidArgument, "unknown plot kind '" + std::string(s) + "'");
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr double kErrorFloor = 1e-4;
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string render_plot(std::span<const GridRow> grid, PlotKind kind) {
  if (grid.empty()) throw Error(ErrorCode::EmptyInput, "plot of an empty grid");
  auto summaries = summarize(grid);
  double fmin = summaries.front().flops, fmax = fmin;
  for (const auto& s : summaries) {
    if (!(s.flops > 0.0)) throw Error(ErrorCode::DegenerateAxis, "FLOPs must be positive on a log axis");
    fmin = std::min(fmin, s.flops);
    fmax = std::max(fmax, s.flops);
  }
  if (fmin == fmax) throw Error(ErrorCode::DegenerateAxis, "every configuration has the same FLOPs");

  auto ly = [](double err) { return std::log10(std::max(err, kErrorFloor)); };
  double x0 = std::log10(fmin), x1 = std::log10(fmax);
  double y0 = ly(summaries.front().error), y1 = y0;
  for (const auto& s : summaries) {
    y0 = std::min(y0, ly(s.error));
    y1 = std::max(y1, ly(s.error));
  }
  if (y1 - y0 < 1e-9) {
    y0 -= 0.5;
    y1 += 0.5;
  }

  constexpr double W = 800, H = 560, left = 80, right = 220, top = 30, bottom = 60;
  auto px = [&](double lx) { return left + (lx - x0) / (x1 - x0) * (W - left - right); };
  auto py = [&](double lyv) { return top + (y1 - lyv) / (y1 - y0) * (H - top - bottom); };
  auto num = [](double v) { return format_real(std::round(v * 100.0) / 100.0); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(x0)); d <= static_cast<int>(std::floor(x1)); ++d) {
    svg << "<text x=\"" << num(px(d)) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\">1e" << d
        << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(y0)); d <= static_cast<int>(std::floor(y1)); ++d) {
    svg << "<text x=\"" << left - 8 << "\" y=\"" << num(py(d) + 4) << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  svg << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 15
      << "\" text-anchor=\"middle\">inference FLOPs (log scale)</text>\n"
      << "<text x=\"20\" y=\"" << (top + H - bottom) / 2 << "\" transform=\"rotate(-90 20 " << (top + H - bottom) / 2
      << ")\" text-anchor=\"middle\">error rate (log scale)</text>\n";

  std::map<std::pair<std::uint64_t, std::string>, std::vector<const ConfigSummary*>> series;
  for (const auto& s : summaries) series[{s.model_size, s.strategy}].push_back(&s);
  std::size_t color = 0;
  for (auto& [key, pts] : series) {
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->flops < b->flops; });
    const char* stroke = kPalette[color % std::size(kPalette)];
    svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      svg << (i ? " " : "") << num(px(std::log10(pts[i]->flops))) << ',' << num(py(ly(pts[i]->error)));
    }
    svg << "\"/>\n";
    double legend_y = top + 16.0 * static_cast<double>(color);
    svg << "<text x=\"" << W - right + 12 << "\" y=\"" << legend_y + 10 << "\" fill=\"" << stroke << "\">"
        << xml_escape(std::to_string(key.first) + " " + key.second) << "</text>\n";
    ++color;
  }

  if (kind == PlotKind::Frontier) {
    std::vector<ParetoPoint> points;
    for (const auto& s : summaries) points.push_back({s.flops, s.error, s.label()});
    svg << "<g class=\"frontier\">\n";
    for (const auto& p : pareto_frontier(points)) {
      svg << "<circle cx=\"" << num(px(std::log10(p.flops))) << "\" cy=\"" << num(py(ly(p.error)))
          << "\" r=\"4\" fill=\"black\"><title>" << xml_escape(p.label) << "</title></circle>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(std::span<const GridRow> grid, PlotKind kind, const std::filesystem::path& path) {
  auto text = render_plot(grid, kind);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

}  // namespace scalinglab
