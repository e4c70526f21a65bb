#pragma once

// Short-term memory capacity. A readout with one output per delay k = 1..K
// is trained to reproduce u(t-k) from the state x(t); MC_k is the squared
// correlation between u(t-k) and that output on held-out data, normalised by
// Var(u(t)) Var(y(t)), and MC is the sum over k.

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "crlab/dynamics.hpp"
#include "crlab/error.hpp"
#include "crlab/readout.hpp"
#include "crlab/tasks.hpp"

namespace crlab {

struct McSettings {
  int k_max = 200;
  long train_len = 5000;
  long test_len = 1000;
  long washout = 100;
  double lambda = 1e-9;
};

struct MCResult {
  std::vector<double> per_delay;      // clipped to [0, 1], index k-1
  std::vector<double> raw_per_delay;  // before clipping
  double total = 0.0;
  int k_max = 0;
  McSettings settings;
};

namespace detail {

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

// Cov^2(delayed, y) / (Var(current) Var(y)) with population statistics over
// aligned samples; 0 when y is constant.
inline double squared_correlation(std::span<const double> delayed, std::span<const double> current,
                                  std::span<const double> y) {
  if (delayed.size() != y.size() || current.size() != y.size()) {
    throw DimensionError("mc_k: series are not aligned");
  }
  if (y.size() < 2) throw ConfigError("mc_k: need at least 2 overlapping samples");
  const double var_y = variance(y);
  if (!(var_y > 0.0)) return 0.0;
  const double var_u = variance(current);
  if (!(var_u > 0.0)) return 0.0;
  const double md = detail::mean(delayed), my = detail::mean(y);
  double cov = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) cov += (delayed[i] - md) * (y[i] - my);
  cov /= static_cast<double>(y.size());
  return cov * cov / (var_u * var_y);
}

// u and y are indexed by the same time axis; y(t) estimates u(t-k). Uses every
// t with t-k inside the series.
inline double mc_k(std::span<const double> u, std::span<const double> y, std::size_t k) {
  if (u.size() != y.size()) throw DimensionError("mc_k: u and y differ in length");
  if (u.size() < k + 2) throw ConfigError("mc_k: insufficient overlap for delay " + std::to_string(k));
  const std::size_t n = u.size() - k;
  return squared_correlation(u.subspan(0, n), u.subspan(k), y.subspan(k));
}

// MC from precomputed states: column i of `states` is x at stream index i.
// Training uses indices max(washout, K) .. train_len-1 so every delayed
// target exists; testing uses the following test_len indices.
inline MCResult estimate_mc_from_states(const Matrix& states, std::span<const double> stream,
                                        const McSettings& settings) {
  const long k_max = settings.k_max;
  if (k_max < 1) throw ConfigError("estimate_mc: k_max must be >= 1");
  if (settings.train_len + settings.test_len > static_cast<long>(stream.size())) {
    throw ConfigError("estimate_mc: train + test length exceeds the stream");
  }
  if (states.cols() < settings.train_len + settings.test_len) {
    throw DimensionError("estimate_mc: fewer states than stream samples");
  }
  const long first = std::max(settings.washout, k_max);
  const long train_cols = settings.train_len - first;
  if (train_cols < 2) throw ConfigError("estimate_mc: training portion too short for k_max and washout");
  if (settings.test_len < 2) throw ConfigError("estimate_mc: test portion too short");

  Matrix targets(k_max, train_cols);
  for (long k = 1; k <= k_max; ++k)
    for (long c = 0; c < train_cols; ++c) targets(k - 1, c) = stream[first + c - k];
  const auto readout = train_ridge(Matrix(states.middleCols(first, train_cols)), targets,
                                   settings.lambda);
  const Matrix out = predict(readout, Matrix(states.middleCols(settings.train_len, settings.test_len)));

  MCResult result;
  result.k_max = static_cast<int>(k_max);
  result.settings = settings;
  const auto current = stream.subspan(static_cast<std::size_t>(settings.train_len),
                                      static_cast<std::size_t>(settings.test_len));
  std::vector<double> y(static_cast<std::size_t>(settings.test_len));
  for (long k = 1; k <= k_max; ++k) {
    for (long c = 0; c < settings.test_len; ++c) y[static_cast<std::size_t>(c)] = out(k - 1, c);
    const auto delayed = stream.subspan(static_cast<std::size_t>(settings.train_len - k),
                                        static_cast<std::size_t>(settings.test_len));
    const double raw = squared_correlation(delayed, current, y);
    result.raw_per_delay.push_back(raw);
    result.per_delay.push_back(std::clamp(raw, 0.0, 1.0));
    result.total += result.per_delay.back();
  }
  return result;
}

inline MCResult estimate_mc(const ESNConfig& cfg, const TimeSeries& stream, const McSettings& settings) {
  if (cfg.n_u() != 1) throw DimensionError("estimate_mc: memory capacity uses a single input channel");
  const long used = settings.train_len + settings.test_len;
  if (used > static_cast<long>(stream.size())) {
    throw ConfigError("estimate_mc: train + test length exceeds the stream");
  }
  const Matrix inputs = Eigen::Map<const Eigen::RowVectorXd>(stream.values.data(), used);
  const StateMatrix x = harvest(cfg, inputs, 0);
  return estimate_mc_from_states(x.states, stream.values, settings);
}

}  // namespace crlab
