#pragma once

// Benchmark data: NARMA-10 generation, one-value-per-line series files,
// normalisation, train/validation/test splitting and i.i.d. streams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "crlab/dynamics.hpp"
#include "crlab/error.hpp"
#include "crlab/random.hpp"

namespace crlab {

struct TimeSeries {
  std::vector<double> values;
  std::string name;

  std::size_t size() const { return values.size(); }
};

struct SplitSpec {
  long train_len = 0;
  long valid_len = 0;
  long test_len = 0;
  long washout = 200;

  long total() const { return train_len + valid_len + test_len; }
};

inline SplitSpec narma_split() { return {2000, 5000, 3000, 200}; }
inline SplitSpec laser_split() { return {2000, 5000, 3092, 200}; }

// Input and target streams of equal length, with contiguous
// train -> validation -> test segments at the front.
struct SupervisedTask {
  TimeSeries inputs;
  TimeSeries targets;
  SplitSpec split;
  std::string provenance;

  std::vector<Segment> segments() const {
    return {{0, split.train_len, split.washout},
            {split.train_len, split.valid_len, split.washout},
            {split.train_len + split.valid_len, split.test_len, split.washout}};
  }

  // Inputs as a 1 x T matrix.
  Matrix input_matrix() const {
    return Eigen::Map<const Eigen::RowVectorXd>(inputs.values.data(),
                                                static_cast<Eigen::Index>(inputs.size()));
  }

  // Targets retained after washout in segment `index` (0 train, 1 valid, 2 test).
  std::span<const double> segment_targets(int index) const {
    const auto seg = segments().at(static_cast<std::size_t>(index));
    return std::span<const double>(targets.values).subspan(
        static_cast<std::size_t>(seg.begin + seg.washout),
        static_cast<std::size_t>(seg.length - seg.washout));
  }
};

inline void validate(const SplitSpec& split) {
  if (split.train_len < 0 || split.valid_len < 0 || split.test_len < 0 || split.washout < 0) {
    throw ConfigError("split: lengths must be non-negative");
  }
  for (long len : {split.train_len, split.valid_len, split.test_len}) {
    if (len < split.washout) throw ConfigError("split: every segment must be at least the washout long");
  }
}

inline SupervisedTask make_task(TimeSeries inputs, TimeSeries targets, SplitSpec split,
                                std::string provenance = {}) {
  validate(split);
  if (inputs.size() != targets.size()) {
    throw DimensionError("make_task: inputs and targets differ in length");
  }
  if (static_cast<std::size_t>(split.total()) > inputs.size()) {
    throw ConfigError("make_task: split needs " + std::to_string(split.total()) +
                      " samples but the series has " + std::to_string(inputs.size()));
  }
  return {std::move(inputs), std::move(targets), split, std::move(provenance)};
}

// Next-value prediction: input(t) = series(t), target(t) = series(t + 1).
inline SupervisedTask next_step_task(const TimeSeries& series, SplitSpec split,
                                     std::string provenance = {}) {
  if (series.size() < 2) throw ConfigError("next_step_task: series needs at least 2 values");
  TimeSeries in{{series.values.begin(), series.values.end() - 1}, series.name};
  TimeSeries out{{series.values.begin() + 1, series.values.end()}, series.name + "+1"};
  return make_task(std::move(in), std::move(out), split, std::move(provenance));
}

// Affine map of [min, max] onto [lo, hi].
inline TimeSeries normalize(const TimeSeries& series, double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("normalize: upper bound must exceed lower bound");
  if (series.values.empty()) throw ConfigError("normalize: empty series");
  const auto [mn, mx] = std::minmax_element(series.values.begin(), series.values.end());
  const double min = *mn, max = *mx;
  if (!(max > min)) throw Error("normalize: series '" + series.name + "' is constant");
  TimeSeries out{std::vector<double>(series.size()), series.name};
  for (std::size_t i = 0; i < series.size(); ++i) {
    out.values[i] = lo + (hi - lo) * (series.values[i] - min) / (max - min);
  }
  return out;
}

inline TimeSeries load_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open series file '" + path +
                "' (expected UTF-8 text, one number per line, '#' comments)");
  }
  TimeSeries series{{}, path};
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(value)) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": cannot parse '" + token +
                       "' as a number");
    }
    series.values.push_back(value);
  }
  if (series.values.empty()) throw ParseError(path + ": file contains no values");
  return series;
}

inline TimeSeries iid_stream(std::size_t length, std::uint64_t seed, double low, double high) {
  if (length < 1) throw ConfigError("iid_stream: length must be >= 1");
  if (!(high > low)) throw ConfigError("iid_stream: high must exceed low");
  UniformSource rng(seed);
  TimeSeries s{std::vector<double>(length), "iid"};
  for (auto& v : s.values) v = rng.uniform(low, high);
  return s;
}

// ---------------------------------------------------------------------------
// NARMA-10
//   y(t+1) = 0.3 y(t) + 0.05 y(t) sum_{i=0..9} y(t-i) + 1.5 s(t-9) s(t) + 0.1
// with s(t) ~ U[0, 0.5] and zero history for t <= 0.

struct NarmaSeries {
  std::vector<double> input;   // s(1..T)
  std::vector<double> output;  // y(1..T), unnormalised
  std::uint64_t seed_used = 0;
};

// Returns false when |y| exceeds the divergence bound.
inline bool narma10_recurrence(std::span<const double> s, std::vector<double>& y) {
  const std::size_t n = s.size();
  y.assign(n, 0.0);
  auto y_at = [&](long t) { return t >= 1 ? y[static_cast<std::size_t>(t - 1)] : 0.0; };
  auto s_at = [&](long t) { return t >= 1 ? s[static_cast<std::size_t>(t - 1)] : 0.0; };
  for (long t = 0; t + 1 <= static_cast<long>(n); ++t) {
    double window = 0.0;
    for (long i = 0; i <= 9; ++i) window += y_at(t - i);
    const double next = 0.3 * y_at(t) + 0.05 * y_at(t) * window + 1.5 * s_at(t - 9) * s_at(t) + 0.1;
    if (!std::isfinite(next) || std::abs(next) > 10.0) return false;
    y[static_cast<std::size_t>(t)] = next;
  }
  return true;
}

inline NarmaSeries narma10_raw(std::size_t length, std::uint64_t seed) {
  if (length < 20) throw ConfigError("narma10: length must be >= 20");
  constexpr int kAttempts = 10;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    NarmaSeries out;
    out.seed_used = seed + static_cast<std::uint64_t>(attempt);
    UniformSource rng(out.seed_used);
    out.input.resize(length);
    for (auto& v : out.input) v = rng.uniform(0.0, 0.5);
    if (narma10_recurrence(out.input, out.output)) return out;
  }
  throw Error("narma10: series diverged for " + std::to_string(kAttempts) +
              " consecutive seeds starting at " + std::to_string(seed));
}

// Inputs are the raw s(t); targets are y(t) normalised into [0, 1].
inline SupervisedTask generate_narma10(std::size_t length, std::uint64_t seed,
                                       SplitSpec split = narma_split()) {
  auto raw = narma10_raw(length, seed);
  TimeSeries y = normalize(TimeSeries{std::move(raw.output), "narma10.y"}, 0.0, 1.0);
  return make_task(TimeSeries{std::move(raw.input), "narma10.s"}, std::move(y), split,
                   "generated:narma10:seed=" + std::to_string(raw.seed_used));
}

}  // namespace crlab
