#pragma once

// Grid-search model selection: hyperparameter grids, trial execution on a
// supervised task, validation-only winner selection and CSV persistence.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crlab/dynamics.hpp"
#include "crlab/error.hpp"
#include "crlab/models.hpp"
#include "crlab/parallel.hpp"
#include "crlab/readout.hpp"
#include "crlab/tasks.hpp"

namespace crlab {

struct GridSpec {
  std::vector<double> input_weights;
  std::vector<double> cycle_weights;
  std::vector<double> jump_weights;
  std::vector<int> reservoir_sizes;
  std::vector<double> lambdas;
  std::vector<double> leak_rates;
  std::vector<int> jump_sizes;
  std::map<int, std::vector<std::string>> topologies_per_size;
  std::vector<ModelKind> model_kinds;
  // randomESN only
  double connectivity = 0.1;
  std::uint64_t esn_seed = 42;
};

inline std::vector<double> ridge_lambdas() {
  std::vector<double> out;
  for (int k = -15; k <= 0; ++k) out.push_back(std::stod("1e" + std::to_string(k)));
  return out;
}

// The full model-selection grid: hyperparameter lists and concentric
// topologies per reservoir size.
inline GridSpec default_grid() {
  GridSpec g;
  g.input_weights = {.1, .2, .3, .4, .5};
  g.cycle_weights = {.4, .5, .6, .7, .8, .9, 1};
  g.jump_weights = {.1, .2, .3, .4, .5, .6, .7, .8, .9, 1};
  g.reservoir_sizes = {100, 150, 200, 300, 350, 600};
  g.lambdas = ridge_lambdas();
  g.leak_rates = {.1, .2, .5, .6, .7, .8, .9, 1};
  g.jump_sizes = {5, 10, 15, 20, 30, 45};
  g.topologies_per_size = {
      {100, {"50-50", "60-40", "40-60"}},
      {150, {"50-50-50", "75-75", "90-60"}},
      {200, {"100-50-50", "50-100-50", "50-50-100", "100-100"}},
      {300, {"100-100-100", "150-100-50", "150-50-100", "50-150-100", "50-100-150", "100-50-150",
             "100-150-50"}},
      {350, {"100-200-50", "100-50-200", "50-100-200", "50-200-100", "200-100-50", "200-50-100"}},
      {600, {"200-200-200", "300-300", "400-200", "200-400", "150-150-150-150"}},
  };
  g.model_kinds = {ModelKind::SCR, ModelKind::CESN, ModelKind::CRJ, ModelKind::CJESN};
  return g;
}

namespace detail {

template <typename T>
std::vector<T> first_middle_last(const std::vector<T>& v) {
  if (v.size() <= 3) return v;
  return {v.front(), v[(v.size() - 1) / 2], v.back()};
}

}  // namespace detail

// First, middle and last value of every hyperparameter list; sizes and
// topologies are kept whole.
inline GridSpec fast_grid() {
  GridSpec g = default_grid();
  g.input_weights = detail::first_middle_last(g.input_weights);
  g.cycle_weights = detail::first_middle_last(g.cycle_weights);
  g.jump_weights = detail::first_middle_last(g.jump_weights);
  g.lambdas = detail::first_middle_last(g.lambdas);
  g.leak_rates = detail::first_middle_last(g.leak_rates);
  g.jump_sizes = detail::first_middle_last(g.jump_sizes);
  return g;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const GridSpec& g) {
  nlohmann::json topo = nlohmann::json::object();
  for (const auto& [n, list] : g.topologies_per_size) topo[std::to_string(n)] = list;
  std::vector<std::string> kinds;
  for (auto k : g.model_kinds) kinds.emplace_back(to_string(k));
  return {{"input_weights", g.input_weights}, {"cycle_weights", g.cycle_weights},
          {"jump_weights", g.jump_weights},   {"reservoir_sizes", g.reservoir_sizes},
          {"lambdas", g.lambdas},             {"leak_rates", g.leak_rates},
          {"jump_sizes", g.jump_sizes},       {"topologies_per_size", topo},
          {"model_kinds", kinds},             {"connectivity", g.connectivity},
          {"esn_seed", g.esn_seed}};
}

namespace detail {

template <typename T>
T json_get(const nlohmann::json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("grid file: " + path + ": " + e.what());
  }
}

template <typename T>
std::vector<T> json_list(const nlohmann::json& root, const std::string& field, bool required) {
  const std::string path = "grid." + field;
  if (!root.contains(field)) {
    if (required) throw ConfigError("grid file: " + path + ": missing field");
    return {};
  }
  const auto& arr = root.at(field);
  if (!arr.is_array()) throw ConfigError("grid file: " + path + ": expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string item = path + "[" + std::to_string(i) + "]";
    if constexpr (std::is_arithmetic_v<T>) {
      if (!arr[i].is_number()) throw ConfigError("grid file: " + item + ": expected a number");
    }
    out.push_back(json_get<T>(arr[i], item));
  }
  return out;
}

}  // namespace detail

inline void validate(const GridSpec& g) {
  for (const auto& [n, list] : g.topologies_per_size) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path =
          "grid.topologies_per_size." + std::to_string(n) + "[" + std::to_string(i) + "]";
      std::vector<int> lengths;
      try {
        lengths = parse_topology(list[i]);
      } catch (const ParseError& e) {
        throw ConfigError("grid file: " + path + ": " + e.what());
      }
      int sum = 0;
      for (int len : lengths) sum += len;
      if (sum != n) {
        throw ConfigError("grid file: " + path + ": topology '" + list[i] + "' sums to " +
                          std::to_string(sum) + ", not " + std::to_string(n));
      }
    }
  }
  if (!(g.connectivity > 0.0 && g.connectivity <= 1.0)) {
    throw ConfigError("grid file: grid.connectivity: must lie in (0, 1]");
  }
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("grid file: grid: expected an object");
  GridSpec g;
  g.input_weights = detail::json_list<double>(j, "input_weights", true);
  g.cycle_weights = detail::json_list<double>(j, "cycle_weights", true);
  g.jump_weights = detail::json_list<double>(j, "jump_weights", false);
  g.reservoir_sizes = detail::json_list<int>(j, "reservoir_sizes", true);
  g.lambdas = detail::json_list<double>(j, "lambdas", true);
  g.leak_rates = detail::json_list<double>(j, "leak_rates", true);
  g.jump_sizes = detail::json_list<int>(j, "jump_sizes", false);
  for (const auto& name : detail::json_list<std::string>(j, "model_kinds", true)) {
    try {
      g.model_kinds.push_back(parse_model_kind(name));
    } catch (const ParseError& e) {
      throw ConfigError(std::string("grid file: grid.model_kinds: ") + e.what());
    }
  }
  if (j.contains("topologies_per_size")) {
    const auto& topo = j.at("topologies_per_size");
    if (!topo.is_object()) throw ConfigError("grid file: grid.topologies_per_size: expected an object");
    for (const auto& [key, value] : topo.items()) {
      const std::string path = "grid.topologies_per_size." + key;
      int n = 0;
      const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), n);
      if (ec != std::errc() || ptr != key.data() + key.size() || n <= 0) {
        throw ConfigError("grid file: " + path + ": key must be a positive reservoir size");
      }
      g.topologies_per_size[n] = detail::json_get<std::vector<std::string>>(value, path);
    }
  }
  if (j.contains("connectivity")) {
    g.connectivity = detail::json_get<double>(j.at("connectivity"), "grid.connectivity");
  }
  if (j.contains("esn_seed")) g.esn_seed = detail::json_get<std::uint64_t>(j.at("esn_seed"), "grid.esn_seed");
  validate(g);
  return g;
}

// ---------------------------------------------------------------------------
// Enumeration

// Cartesian product over the fields `kind` consumes, in lexicographic order
// topology, input weight, cycle weight, jump weight, jump size, leak rate,
// lambda (lambda varies fastest).
inline std::vector<TrialConfig> enumerate_grid(const GridSpec& g, ModelKind kind, int n_r) {
  auto need = [&](bool empty, const char* field) {
    if (empty) {
      throw ConfigError(std::string("grid: ") + to_string(kind).data() + " needs a nonempty '" +
                        field + "' list");
    }
  };
  need(g.input_weights.empty(), "input_weights");
  need(g.cycle_weights.empty(), "cycle_weights");
  need(g.lambdas.empty(), "lambdas");
  need(g.leak_rates.empty(), "leak_rates");
  const bool jumps = uses_jumps(kind);
  if (jumps) {
    need(g.jump_weights.empty(), "jump_weights");
    need(g.jump_sizes.empty(), "jump_sizes");
  }
  std::vector<std::string> topologies;
  if (is_concentric(kind)) {
    const auto it = g.topologies_per_size.find(n_r);
    need(it == g.topologies_per_size.end() || it->second.empty(),
         ("topologies_per_size." + std::to_string(n_r)).c_str());
    topologies = it->second;
  } else {
    if (n_r < 2) throw ConfigError("grid: reservoir size must be >= 2");
    topologies = {std::to_string(n_r)};
  }
  const std::vector<double> jw = jumps ? g.jump_weights : std::vector<double>{0.0};
  const std::vector<int> js = jumps ? g.jump_sizes : std::vector<int>{0};

  std::vector<TrialConfig> out;
  for (const auto& topo : topologies)
    for (double v : g.input_weights)
      for (double wc : g.cycle_weights)
        for (double wj : jw)
          for (int tau : js)
            for (double alpha : g.leak_rates)
              for (double lambda : g.lambdas) {
                TrialConfig c;
                c.kind = kind;
                c.topology = topo;
                c.input_scale = v;
                c.w_c = wc;
                c.w_j = wj;
                c.tau_j = tau;
                c.alpha = alpha;
                c.lambda = lambda;
                if (kind == ModelKind::RandomESN) {
                  c.connectivity = g.connectivity;
                  c.esn_seed = g.esn_seed;
                }
                out.push_back(std::move(c));
              }
  return out;
}

// Every kind listed in the grid at every listed size.
inline std::vector<TrialConfig> enumerate_all(const GridSpec& g) {
  std::vector<TrialConfig> out;
  for (auto kind : g.model_kinds)
    for (int n : g.reservoir_sizes) {
      auto part = enumerate_grid(g, kind, n);
      out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Trials

struct TrialResult {
  TrialConfig config;
  double train_mse = std::numeric_limits<double>::infinity();
  double valid_err = std::numeric_limits<double>::infinity();
  double test_err = std::numeric_limits<double>::infinity();
  double valid_mse = std::numeric_limits<double>::infinity();
  double test_mse = std::numeric_limits<double>::infinity();
  double wall_ms = 0.0;
  bool failed = false;
  std::string message;
};

namespace detail {

inline std::vector<double> row(const Matrix& m) { return {m.data(), m.data() + m.size()}; }

}  // namespace detail

// Evaluates configurations that share one reservoir (they differ only in
// lambda): the states are harvested once and each lambda gets its own solve.
// Results are identical to evaluating each configuration on its own.
inline std::vector<TrialResult> run_trial_group(const std::vector<TrialConfig>& group,
                                                const SupervisedTask& task,
                                                StateMode mode = StateMode::Reset) {
  using clock = std::chrono::steady_clock;
  std::vector<TrialResult> results(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) results[i].config = group[i];
  if (group.empty()) return results;
  for (const auto& c : group) {
    if (!c.same_states(group.front())) throw ConfigError("run_trial_group: configurations differ beyond lambda");
  }
  const auto start = clock::now();
  auto fail_all = [&](const std::string& why) {
    for (auto& r : results) {
      r.failed = true;
      r.message = why;
    }
  };
  std::vector<StateMatrix> states;
  std::optional<RidgeProblem> ridge;
  try {
    const Reservoir reservoir(make_esn(group.front(), 1));
    states = harvest_segments(reservoir, task.input_matrix(), task.segments(), mode);
    const auto train_targets = task.segment_targets(0);
    const Matrix y = Eigen::Map<const Eigen::RowVectorXd>(train_targets.data(),
                                                          static_cast<Eigen::Index>(train_targets.size()));
    if (!states[0].states.allFinite()) throw Error("non-finite reservoir states");
    ridge.emplace(states[0].states, y);
  } catch (const Error& e) {
    fail_all(e.what());
  }
  const double shared_ms =
      std::chrono::duration<double, std::milli>(clock::now() - start).count() / static_cast<double>(group.size());

  for (auto& r : results) {
    if (r.failed) {
      r.wall_ms = shared_ms;
      continue;
    }
    const auto t0 = clock::now();
    try {
      const auto readout = ridge->solve(r.config.lambda);
      const auto fit = detail::row(predict(readout, states[0]));
      const auto valid = detail::row(predict(readout, states[1]));
      const auto test = detail::row(predict(readout, states[2]));
      r.train_mse = mse(fit, task.segment_targets(0));
      const auto v = evaluate(valid, task.segment_targets(1));
      const auto t = evaluate(test, task.segment_targets(2));
      if (!std::isfinite(v.nmse) || !std::isfinite(t.nmse)) throw Error("non-finite prediction error");
      r.valid_err = v.nmse;
      r.test_err = t.nmse;
      r.valid_mse = v.mse;
      r.test_mse = t.mse;
    } catch (const Error& e) {
      r = TrialResult{r.config};
      r.failed = true;
      r.message = e.what();
    }
    r.wall_ms = shared_ms + std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  }
  return results;
}

inline TrialResult run_trial(const TrialConfig& config, const SupervisedTask& task,
                             StateMode mode = StateMode::Reset) {
  return run_trial_group({config}, task, mode).front();
}

// Runs every configuration; result i belongs to configs[i] regardless of the
// number of workers.
inline std::vector<TrialResult> run_sweep(const std::vector<TrialConfig>& configs,
                                          const SupervisedTask& task, unsigned workers = 1,
                                          StateMode mode = StateMode::Reset) {
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
  for (std::size_t i = 0; i < configs.size();) {
    std::size_t j = i + 1;
    while (j < configs.size() && configs[j].same_states(configs[i])) ++j;
    groups.emplace_back(i, j);
    i = j;
  }
  std::vector<TrialResult> results(configs.size());
  parallel_for(groups.size(), workers, [&](std::size_t g) {
    const auto [begin, end] = groups[g];
    const std::vector<TrialConfig> group(configs.begin() + static_cast<long>(begin),
                                         configs.begin() + static_cast<long>(end));
    auto out = run_trial_group(group, task, mode);
    for (std::size_t k = 0; k < out.size(); ++k) results[begin + k] = std::move(out[k]);
  });
  return results;
}

// Minimum validation error; ties go to the smaller reservoir, then to the
// lexicographically smaller configuration. Test errors are never read.
inline const TrialResult& select_best(const std::vector<TrialResult>& results) {
  if (results.empty()) throw ConfigError("select_best: no results");
  auto better = [](const TrialResult& a, const TrialResult& b) {
    if (a.valid_err != b.valid_err) return a.valid_err < b.valid_err;
    const int na = a.config.n_r(), nb = b.config.n_r();
    if (na != nb) return na < nb;
    return a.config.key() < b.config.key();
  };
  const TrialResult* best = &results.front();
  for (const auto& r : results)
    if (better(r, *best)) best = &r;
  return *best;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kTrialCsvHeader =
    "model_kind,topology,v,w_c,w_j,tau_j,alpha,lambda,valid_err,test_err,wall_ms";

// Shortest decimal text that reads back to the same double.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline std::string csv_row(const TrialResult& r) {
  const auto& c = r.config;
  const bool jumps = uses_jumps(c.kind);
  std::string out;
  out += to_string(c.kind);
  out += ',' + c.topology;
  out += ',' + format_number(c.input_scale);
  out += ',' + format_number(c.w_c);
  out += ',' + (jumps ? format_number(c.w_j) : std::string());
  out += ',' + (jumps ? std::to_string(c.tau_j) : std::string());
  out += ',' + format_number(c.alpha);
  out += ',' + format_number(c.lambda);
  out += ',' + format_number(r.valid_err);
  out += ',' + format_number(r.test_err);
  out += ',' + format_number(std::round(r.wall_ms * 1000.0) / 1000.0);
  return out;
}

inline void write_csv(std::ostream& os, const std::vector<TrialResult>& results) {
  os << kTrialCsvHeader << '\n';
  for (const auto& r : results) os << csv_row(r) << '\n';
}

inline nlohmann::json to_json(const TrialConfig& c) {
  nlohmann::json j = {{"model_kind", to_string(c.kind)}, {"topology", c.topology},
                      {"n_r", c.n_r()},                  {"v", c.input_scale},
                      {"w_c", c.w_c},                    {"alpha", c.alpha},
                      {"lambda", c.lambda}};
  if (uses_jumps(c.kind)) {
    j["w_j"] = c.w_j;
    j["tau_j"] = c.tau_j;
  }
  if (c.kind == ModelKind::RandomESN) {
    j["connectivity"] = c.connectivity;
    j["esn_seed"] = c.esn_seed;
  }
  return j;
}

inline nlohmann::json to_json(const TrialResult& r) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  nlohmann::json j = {{"config", to_json(r.config)},  {"valid_err", num(r.valid_err)},
                      {"test_err", num(r.test_err)},  {"valid_mse", num(r.valid_mse)},
                      {"test_mse", num(r.test_mse)},  {"wall_ms", r.wall_ms},
                      {"failed", r.failed}};
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

}  // namespace crlab
