#pragma once

// Command implementations behind the `crlab` executable. Each command takes
// a fully resolved RunOptions, writes its outputs plus a JSON manifest next
// to them, and returns the manifest. A manifest can be fed back through
// `replay` to regenerate the same outputs.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crlab/memory_capacity.hpp"
#include "crlab/models.hpp"
#include "crlab/numerics.hpp"
#include "crlab/parallel.hpp"
#include "crlab/selection.hpp"
#include "crlab/tasks.hpp"
#include "crlab/topology.hpp"

#ifndef CRLAB_VERSION
#define CRLAB_VERSION "0.0.0"
#endif

namespace crlab::cli {

inline constexpr std::uint64_t kDefaultSeed = 42;

struct RunOptions {
  std::string command;
  std::string task = "narma";  // narma | file
  std::string model = "SCR";
  std::string topology = "100";
  std::vector<double> w_c = {0.7};
  std::vector<double> w_j = {0.7};
  std::vector<int> tau = {5};
  std::vector<double> alpha = {1.0};
  std::vector<double> lambda = {1e-8};
  std::vector<double> input_scale = {0.1};
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t esn_seed = kDefaultSeed;
  double connectivity = 0.1;
  long washout = 200;
  std::string out;
  unsigned workers = 1;
  std::string grid;
  std::string preset;  // fast | full, used when no grid file is given
  std::vector<int> sizes;
  std::vector<std::string> models;
  std::string data;
  int kmax = 200;
  long mc_train = 5000;
  long mc_test = 1000;
  long mc_washout = 100;
  double mc_low = -1.0;
  double mc_high = 1.0;
  bool jumps = false;  // eigen: add jump edges
  std::string state_mode = "reset";
};

inline nlohmann::json to_json(const RunOptions& o) {
  return {{"command", o.command},       {"task", o.task},
          {"model", o.model},           {"topology", o.topology},
          {"w_c", o.w_c},               {"w_j", o.w_j},
          {"tau", o.tau},               {"alpha", o.alpha},
          {"lambda", o.lambda},         {"input_scale", o.input_scale},
          {"seed", o.seed},             {"esn_seed", o.esn_seed},
          {"connectivity", o.connectivity}, {"washout", o.washout},
          {"out", o.out},               {"workers", o.workers},
          {"grid", o.grid},             {"preset", o.preset},
          {"sizes", o.sizes},           {"models", o.models},
          {"data", o.data},             {"kmax", o.kmax},
          {"mc_train", o.mc_train},     {"mc_test", o.mc_test},
          {"mc_washout", o.mc_washout}, {"mc_low", o.mc_low},
          {"mc_high", o.mc_high},       {"jumps", o.jumps},
          {"state_mode", o.state_mode}};
}

inline RunOptions options_from_json(const nlohmann::json& j) {
  RunOptions o;
  auto read = [&](const char* key, auto& field) {
    if (j.contains(key)) {
      try {
        j.at(key).get_to(field);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest: options.") + key + ": " + e.what());
      }
    }
  };
  read("command", o.command);
  read("task", o.task);
  read("model", o.model);
  read("topology", o.topology);
  read("w_c", o.w_c);
  read("w_j", o.w_j);
  read("tau", o.tau);
  read("alpha", o.alpha);
  read("lambda", o.lambda);
  read("input_scale", o.input_scale);
  read("seed", o.seed);
  read("esn_seed", o.esn_seed);
  read("connectivity", o.connectivity);
  read("washout", o.washout);
  read("out", o.out);
  read("workers", o.workers);
  read("grid", o.grid);
  read("preset", o.preset);
  read("sizes", o.sizes);
  read("models", o.models);
  read("data", o.data);
  read("kmax", o.kmax);
  read("mc_train", o.mc_train);
  read("mc_test", o.mc_test);
  read("mc_washout", o.mc_washout);
  read("mc_low", o.mc_low);
  read("mc_high", o.mc_high);
  read("jumps", o.jumps);
  read("state_mode", o.state_mode);
  return o;
}

namespace detail {

inline std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline void require_out(const RunOptions& o) {
  if (o.out.empty()) throw ConfigError(o.command + ": --out is required");
}

template <typename T>
const T& single(const std::vector<T>& v, const char* flag) {
  if (v.size() != 1) throw ConfigError(std::string("expected exactly one value for ") + flag);
  return v.front();
}

inline StateMode parse_state_mode(const std::string& s) {
  if (s == "reset") return StateMode::Reset;
  if (s == "continuous") return StateMode::Continuous;
  throw ConfigError("--state-mode must be 'reset' or 'continuous', got '" + s + "'");
}

inline void write_text(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("failed while writing '" + path + "'");
}

inline std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

// Writes every output and the manifest, or nothing: if any write fails the
// files already written are removed.
inline nlohmann::json commit(const RunOptions& o, const std::vector<std::pair<std::string, std::string>>& files,
                             nlohmann::json provenance) {
  nlohmann::json manifest = {{"command", o.command},       {"options", to_json(o)},
                             {"seeds", {{"seed", o.seed}, {"esn_seed", o.esn_seed}}},
                             {"provenance", std::move(provenance)},
                             {"tool_version", CRLAB_VERSION}, {"timestamp", timestamp_utc()}};
  std::vector<std::string> outputs;
  for (const auto& f : files) outputs.push_back(f.first);
  manifest["outputs"] = outputs;
  std::vector<std::string> written;
  try {
    for (const auto& [path, content] : files) {
      write_text(path, content);
      written.push_back(path);
    }
    write_text(manifest_path(o.out), manifest.dump(2) + "\n");
  } catch (...) {
    for (const auto& p : written) std::filesystem::remove(p);
    throw;
  }
  return manifest;
}

inline SupervisedTask load_task(const RunOptions& o, nlohmann::json& provenance) {
  if (o.task == "narma") {
    auto task = generate_narma10(10000, o.seed, SplitSpec{2000, 5000, 3000, o.washout});
    provenance = {{"task", "narma10"}, {"source", task.provenance}, {"length", 10000}};
    return task;
  }
  if (o.task == "file") {
    if (o.data.empty()) {
      throw ConfigError("file task needs --data <path> (UTF-8 text, one number per line, '#' comments)");
    }
    const auto raw = load_series(o.data);
    const auto series = normalize(raw, -1.0, 1.0);
    auto split = laser_split();
    split.washout = o.washout;
    auto task = next_step_task(series, split, "file:" + o.data);
    provenance = {{"task", "next-step"}, {"source", "file"}, {"path", o.data},
                  {"values", raw.size()}, {"normalized", "[-1,1]"}};
    return task;
  }
  throw ConfigError("--task must be 'narma' or 'file', got '" + o.task + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// eigen: spectrum of a deterministic reservoir as CSV (re, im)

inline Matrix eigen_reservoir(const RunOptions& o) {
  const auto lengths = parse_topology(o.topology);
  std::vector<CycleSpec> cycles;
  if (o.w_c.size() == 1) {
    cycles = uniform_cycles(lengths, o.w_c.front());
  } else if (o.w_c.size() == lengths.size()) {
    for (std::size_t i = 0; i < lengths.size(); ++i) cycles.push_back({lengths[i], o.w_c[i]});
  } else {
    throw ConfigError("--wc takes one weight or one per cycle (" + std::to_string(lengths.size()) +
                      " cycles in '" + o.topology + "')");
  }
  std::optional<JumpSpec> jumps;
  if (o.jumps) jumps = JumpSpec{detail::single(o.w_j, "--wj"), detail::single(o.tau, "--tau")};
  if (cycles.size() == 1 && jumps) return build_crj(cycles[0].length, cycles[0].weight, *jumps);
  return build_concentric(cycles, jumps);
}

inline nlohmann::json cmd_eigen(const RunOptions& o) {
  detail::require_out(o);
  const auto spectrum = eigenvalues(eigen_reservoir(o));
  std::string csv = "re,im\n";
  for (const auto& z : spectrum) csv += format_number(z.real()) + "," + format_number(z.imag()) + "\n";
  return detail::commit(o, {{o.out, csv}}, {{"source", "deterministic construction"}});
}

// ---------------------------------------------------------------------------
// bench: one configuration end to end

inline TrialConfig bench_config(const RunOptions& o) {
  TrialConfig c;
  c.kind = parse_model_kind(o.model);
  c.topology = o.topology;
  c.input_scale = detail::single(o.input_scale, "--input-scale");
  c.w_c = detail::single(o.w_c, "--wc");
  if (uses_jumps(c.kind)) {
    c.w_j = detail::single(o.w_j, "--wj");
    c.tau_j = detail::single(o.tau, "--tau");
  }
  c.alpha = detail::single(o.alpha, "--alpha");
  c.lambda = detail::single(o.lambda, "--lambda");
  if (c.kind == ModelKind::RandomESN) {
    c.connectivity = o.connectivity;
    c.esn_seed = o.esn_seed;
  }
  return c;
}

inline nlohmann::json cmd_bench(const RunOptions& o, TrialResult* result_out = nullptr) {
  detail::require_out(o);
  const auto config = bench_config(o);
  nlohmann::json provenance;
  const auto task = detail::load_task(o, provenance);
  const auto result = run_trial(config, task, detail::parse_state_mode(o.state_mode));
  if (result.failed) throw Error("bench: trial failed: " + result.message);
  if (result_out) *result_out = result;
  std::ostringstream csv;
  write_csv(csv, {result});
  provenance["result"] = to_json(result);
  return detail::commit(o, {{o.out, csv.str()}}, provenance);
}

// ---------------------------------------------------------------------------
// mc: memory capacity, best configuration over any listed values

struct McRun {
  TrialConfig config;
  MCResult result;
};

inline std::vector<TrialConfig> mc_configs(const RunOptions& o) {
  const auto kind = parse_model_kind(o.model);
  const std::vector<double> wj = uses_jumps(kind) ? o.w_j : std::vector<double>{0.0};
  const std::vector<int> taus = uses_jumps(kind) ? o.tau : std::vector<int>{0};
  std::vector<TrialConfig> out;
  for (double v : o.input_scale)
    for (double wc : o.w_c)
      for (double j : wj)
        for (int tau : taus)
          for (double a : o.alpha) {
            TrialConfig c;
            c.kind = kind;
            c.topology = o.topology;
            c.input_scale = v;
            c.w_c = wc;
            c.w_j = j;
            c.tau_j = tau;
            c.alpha = a;
            c.lambda = detail::single(o.lambda, "--lambda");
            if (kind == ModelKind::RandomESN) {
              c.connectivity = o.connectivity;
              c.esn_seed = o.esn_seed;
            }
            out.push_back(c);
          }
  if (out.empty()) throw ConfigError("mc: empty configuration list");
  return out;
}

inline McSettings mc_settings(const RunOptions& o) {
  McSettings s;
  s.k_max = o.kmax;
  s.train_len = o.mc_train;
  s.test_len = o.mc_test;
  s.washout = o.mc_washout;
  s.lambda = detail::single(o.lambda, "--lambda");
  return s;
}

inline TimeSeries mc_stream(const RunOptions& o, nlohmann::json& provenance) {
  const long length = o.mc_train + o.mc_test;
  if (!o.data.empty()) {
    auto s = load_series(o.data);
    provenance = {{"stream", "file"}, {"path", o.data}, {"values", s.size()}};
    return s;
  }
  provenance = {{"stream", "generated"}, {"distribution", "uniform"}, {"low", o.mc_low},
                {"high", o.mc_high},      {"seed", o.seed},            {"length", length}};
  return iid_stream(static_cast<std::size_t>(length), o.seed, o.mc_low, o.mc_high);
}

// Evaluates every configuration (in parallel when workers > 1) and returns
// the runs in configuration order.
inline std::vector<McRun> run_mc_sweep(const std::vector<TrialConfig>& configs, const TimeSeries& stream,
                                       const McSettings& settings, unsigned workers) {
  std::vector<McRun> runs(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t i) {
    runs[i] = {configs[i], estimate_mc(make_esn(configs[i]), stream, settings)};
  });
  return runs;
}

inline const McRun& best_mc(const std::vector<McRun>& runs) {
  if (runs.empty()) throw ConfigError("mc: no runs");
  const McRun* best = &runs.front();
  for (const auto& r : runs)
    if (r.result.total > best->result.total) best = &r;
  return *best;
}

inline nlohmann::json cmd_mc(const RunOptions& o, McRun* best_out = nullptr) {
  detail::require_out(o);
  nlohmann::json provenance;
  const auto stream = mc_stream(o, provenance);
  const auto settings = mc_settings(o);
  const auto runs = run_mc_sweep(mc_configs(o), stream, settings, o.workers);
  const auto& best = best_mc(runs);
  if (best_out) *best_out = best;

  std::string csv = "k,mc_k\n";
  for (int k = 1; k <= best.result.k_max; ++k) {
    csv += std::to_string(k) + "," + format_number(best.result.per_delay[static_cast<std::size_t>(k - 1)]) + "\n";
  }
  nlohmann::json evaluated = nlohmann::json::array();
  for (const auto& r : runs) evaluated.push_back({{"config", to_json(r.config)}, {"total_mc", r.result.total}});
  const nlohmann::json summary = {
      {"total_mc", best.result.total},
      {"k_max", best.result.k_max},
      {"config", to_json(best.config)},
      {"settings",
       {{"train_len", settings.train_len}, {"test_len", settings.test_len},
        {"washout", settings.washout}, {"lambda", settings.lambda}}},
      {"raw_mc_k", best.result.raw_per_delay},
      {"stream", provenance},
      {"evaluated", evaluated}};
  return detail::commit(o, {{o.out, csv}, {o.out + ".summary.json", summary.dump(2) + "\n"}}, provenance);
}

// ---------------------------------------------------------------------------
// grid: full sweep on one task

inline GridSpec resolve_grid(const RunOptions& o) {
  GridSpec g;
  if (!o.grid.empty()) {
    std::ifstream in(o.grid);
    if (!in) throw ConfigError("cannot open grid file '" + o.grid + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("grid file '" + o.grid + "': " + e.what());
    }
    g = grid_from_json(j);
  } else if (o.preset == "fast") {
    g = fast_grid();
  } else if (o.preset == "full") {
    g = default_grid();
  } else {
    throw ConfigError("grid: give --grid <file.json> or --preset fast|full");
  }
  if (!o.sizes.empty()) g.reservoir_sizes = o.sizes;
  if (!o.models.empty()) {
    g.model_kinds.clear();
    for (const auto& m : o.models) g.model_kinds.push_back(parse_model_kind(m));
  }
  return g;
}

inline nlohmann::json cmd_grid(const RunOptions& o, std::vector<TrialResult>* results_out = nullptr) {
  detail::require_out(o);
  const auto grid = resolve_grid(o);
  nlohmann::json provenance;
  const auto task = detail::load_task(o, provenance);
  const auto configs = enumerate_all(grid);
  const auto results = run_sweep(configs, task, o.workers, detail::parse_state_mode(o.state_mode));
  const auto& best = select_best(results);
  std::ostringstream csv;
  write_csv(csv, results);
  provenance["grid"] = to_json(grid);
  provenance["trials"] = results.size();
  if (results_out) *results_out = results;
  return detail::commit(o, {{o.out, csv.str()}, {o.out + ".best.json", to_json(best).dump(2) + "\n"}},
                        provenance);
}

// ---------------------------------------------------------------------------

inline nlohmann::json run(const RunOptions& o) {
  if (o.command == "eigen") return cmd_eigen(o);
  if (o.command == "bench") return cmd_bench(o);
  if (o.command == "mc") return cmd_mc(o);
  if (o.command == "grid") return cmd_grid(o);
  throw ConfigError("unknown command '" + o.command + "'");
}

// Re-runs the command recorded in a manifest, optionally redirecting output.
inline nlohmann::json replay(const std::string& manifest_file, const std::string& out_override = {}) {
  std::ifstream in(manifest_file);
  if (!in) throw ConfigError("cannot open manifest '" + manifest_file + "'");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("manifest '" + manifest_file + "': " + e.what());
  }
  if (!manifest.contains("options")) throw ConfigError("manifest '" + manifest_file + "' has no options");
  auto o = options_from_json(manifest.at("options"));
  if (!out_override.empty()) o.out = out_override;
  return run(o);
}

}  // namespace crlab::cli
