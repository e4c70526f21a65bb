#pragma once

// Reservoir and input weight construction for the standard random ESN and
// the deterministic cycle families: SCR (one loop), CRJ (loop plus regular
// bidirectional jumps) and concentric reservoirs (several loops, optionally
// with jumps between adjacent loops).
//
// Node numbering in comments and in the *_jump_pairs helpers is 1-based;
// matrices are 0-based. Cycles are listed outermost first, and the nodes of
// cycle i occupy a contiguous index range following the loop direction.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crlab/error.hpp"
#include "crlab/numerics.hpp"
#include "crlab/random.hpp"

#ifndef CRLAB_PI_DIGITS_PATH
#define CRLAB_PI_DIGITS_PATH "data/pi_digits.txt"
#endif

namespace crlab {

struct CycleSpec {
  int length = 0;
  double weight = 0.0;
};

struct JumpSpec {
  double weight = 0.0;
  int step = 0;
};

enum class TopologyKind { RandomSparse, SimpleCycle, CycleWithJumps, Concentric };

struct ReservoirTopology {
  TopologyKind kind = TopologyKind::SimpleCycle;
  std::vector<CycleSpec> cycles;
  std::optional<JumpSpec> jumps;
  // RandomSparse only.
  int size = 0;
  double connectivity = 0.1;
  double target_radius = 0.9;
  std::uint64_t seed = 0;

  int reservoir_size() const {
    if (kind == TopologyKind::RandomSparse) return size;
    int n = 0;
    for (const auto& c : cycles) n += c.length;
    return n;
  }
};

struct InputWeightSpec {
  double magnitude = 0.1;
};

struct WeightSet {
  Matrix w_in;
  Matrix w_h;

  int reservoir_size() const { return static_cast<int>(w_h.rows()); }
  int input_size() const { return static_cast<int>(w_in.cols()); }
};

// ---------------------------------------------------------------------------
// Pi digit signs

inline std::string pi_digits_path() {
  if (const char* env = std::getenv("CRLAB_PI_DIGITS"); env != nullptr && *env != '\0') return env;
  return CRLAB_PI_DIGITS_PATH;
}

inline std::string load_pi_digits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open pi digit file '" + path + "' (set CRLAB_PI_DIGITS)");
  std::string digits;
  char c = 0;
  while (in.get(c)) {
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
    } else if (c != '\n' && c != '\r') {
      throw ParseError("pi digit file '" + path + "' contains a non-digit character");
    }
  }
  return digits;
}

// Digits after the decimal point, loaded once per process.
inline const std::string& pi_digits() {
  static const std::string digits = load_pi_digits(pi_digits_path());
  return digits;
}

// Sign k (1-based) is -1 when the k-th decimal digit of pi is 0..4, +1 for 5..9.
inline std::vector<int> pi_signs(std::size_t n) {
  if (n == 0) throw ConfigError("pi_signs: at least one sign must be requested");
  const auto& digits = pi_digits();
  if (n > digits.size()) {
    throw ConfigError("pi_signs: requested " + std::to_string(n) + " signs but only " +
                      std::to_string(digits.size()) + " digits are available");
  }
  std::vector<int> signs(n);
  for (std::size_t k = 0; k < n; ++k) signs[k] = digits[k] >= '5' ? 1 : -1;
  return signs;
}

// Dense N_R x N_U matrix with every entry of magnitude v; signs follow the pi
// sequence in row-major order.
inline Matrix build_input_weights(int n_r, int n_u, InputWeightSpec spec) {
  if (n_r < 1 || n_u < 1) throw DimensionError("build_input_weights: n_r and n_u must be >= 1");
  if (!(spec.magnitude > 0.0) || !std::isfinite(spec.magnitude)) {
    throw ConfigError("build_input_weights: input magnitude must be positive and finite");
  }
  const auto signs = pi_signs(static_cast<std::size_t>(n_r) * static_cast<std::size_t>(n_u));
  Matrix w(n_r, n_u);
  for (int i = 0; i < n_r; ++i)
    for (int j = 0; j < n_u; ++j) w(i, j) = signs[static_cast<std::size_t>(i) * n_u + j] * spec.magnitude;
  return w;
}

// ---------------------------------------------------------------------------
// Deterministic reservoirs

namespace detail {

inline void place_cycle(Matrix& w, int offset, int length, double weight) {
  for (int i = 0; i + 1 < length; ++i) w(offset + i + 1, offset + i) = weight;
  w(offset, offset + length - 1) = weight;
}

inline void add_bidirectional(Matrix& w, int a, int b, double weight) {
  w(a, b) += weight;
  w(b, a) += weight;
}

}  // namespace detail

inline Matrix build_scr(int n_r, double w_c) {
  if (n_r < 2) throw ConfigError("build_scr: a cycle needs at least 2 neurons");
  Matrix w = Matrix::Zero(n_r, n_r);
  detail::place_cycle(w, 0, n_r, w_c);
  return w;
}

// Jump anchors are nodes 1, 1+step, 1+2*step, ... <= n_r. Consecutive anchors
// are linked, and the last anchor links back to node 1 (with a shorter span
// when step does not divide n_r).
inline std::vector<std::pair<int, int>> crj_jump_pairs(int n_r, int step) {
  if (n_r < 2) throw ConfigError("build_crj: a cycle needs at least 2 neurons");
  if (step < 2 || step >= n_r) {
    throw ConfigError("build_crj: jump step must satisfy 2 <= step < n_r (got " +
                      std::to_string(step) + " with n_r = " + std::to_string(n_r) + ")");
  }
  std::vector<int> anchors;
  for (int a = 1; a <= n_r; a += step) anchors.push_back(a);
  std::vector<std::pair<int, int>> pairs;
  std::set<std::pair<int, int>> seen;
  auto link = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    if (a != b && seen.insert(key).second) pairs.emplace_back(a, b);
  };
  for (std::size_t k = 0; k + 1 < anchors.size(); ++k) link(anchors[k], anchors[k + 1]);
  link(anchors.back(), 1);
  return pairs;
}

// Jump edges add to whatever the cycle already placed; only the closing jump
// (n_r, 1) can overlap the loop's own (n_r -> 1) edge.
inline Matrix build_crj(int n_r, double w_c, JumpSpec jumps) {
  Matrix w = build_scr(n_r, w_c);
  for (const auto& [a, b] : crj_jump_pairs(n_r, jumps.step)) {
    detail::add_bidirectional(w, a - 1, b - 1, jumps.weight);
  }
  return w;
}

// Global 1-based node pairs joined by jumps: local position p of cycle i is
// linked to local position p of cycle i+1 for p = 1, 1+step, ... while p fits
// in both cycles.
inline std::vector<std::pair<int, int>> concentric_jump_pairs(const std::vector<CycleSpec>& cycles,
                                                              int step) {
  if (step < 1) throw ConfigError("build_concentric: jump step must be >= 1");
  std::vector<std::pair<int, int>> pairs;
  int offset = 0;
  for (std::size_t c = 0; c + 1 < cycles.size(); ++c) {
    const int next_offset = offset + cycles[c].length;
    const int shorter = std::min(cycles[c].length, cycles[c + 1].length);
    for (int p = 1; p <= shorter; p += step) pairs.emplace_back(offset + p, next_offset + p);
    offset = next_offset;
  }
  return pairs;
}

inline Matrix build_concentric(const std::vector<CycleSpec>& cycles,
                               const std::optional<JumpSpec>& jumps = std::nullopt) {
  if (cycles.empty()) throw ConfigError("build_concentric: at least one cycle is required");
  int n = 0;
  for (const auto& c : cycles) {
    if (c.length < 2) throw ConfigError("build_concentric: every cycle needs at least 2 neurons");
    if (!std::isfinite(c.weight)) throw ConfigError("build_concentric: cycle weight must be finite");
    n += c.length;
  }
  Matrix w = Matrix::Zero(n, n);
  int offset = 0;
  for (const auto& c : cycles) {
    detail::place_cycle(w, offset, c.length, c.weight);
    offset += c.length;
  }
  if (jumps) {
    for (const auto& [a, b] : concentric_jump_pairs(cycles, jumps->step)) {
      detail::add_bidirectional(w, a - 1, b - 1, jumps->weight);
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Random sparse reservoir

inline Matrix build_random_esn(int n_r, double connectivity, double target_radius,
                               std::uint64_t seed) {
  if (n_r < 1) throw ConfigError("build_random_esn: n_r must be >= 1");
  if (!(connectivity > 0.0 && connectivity <= 1.0)) {
    throw ConfigError("build_random_esn: connectivity must lie in (0, 1]");
  }
  if (!(target_radius > 0.0 && target_radius < 1.0)) {
    throw ConfigError("build_random_esn: target spectral radius must lie in (0, 1)");
  }
  constexpr int kAttempts = 10;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    UniformSource rng(seed + static_cast<std::uint64_t>(attempt));
    Matrix w = Matrix::Zero(n_r, n_r);
    for (int i = 0; i < n_r; ++i)
      for (int j = 0; j < n_r; ++j)
        if (rng.bernoulli(connectivity)) w(i, j) = rng.uniform(-1.0, 1.0);
    const double radius = spectral_radius(w);
    if (radius <= 1e-12) continue;
    w *= target_radius / radius;
    return w;
  }
  throw Error("build_random_esn: every draw had zero spectral radius after " +
              std::to_string(kAttempts) + " attempts");
}

// Input weights of the standard random ESN: uniform in [-v, v].
inline Matrix build_random_input_weights(int n_r, int n_u, InputWeightSpec spec, std::uint64_t seed) {
  if (n_r < 1 || n_u < 1) throw DimensionError("build_random_input_weights: n_r and n_u must be >= 1");
  if (!(spec.magnitude > 0.0) || !std::isfinite(spec.magnitude)) {
    throw ConfigError("build_random_input_weights: input magnitude must be positive and finite");
  }
  UniformSource rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Matrix w(n_r, n_u);
  for (int i = 0; i < n_r; ++i)
    for (int j = 0; j < n_u; ++j) w(i, j) = rng.uniform(-spec.magnitude, spec.magnitude);
  return w;
}

// ---------------------------------------------------------------------------
// Topology strings "n1-n2-..."

inline std::vector<int> parse_topology(std::string_view text) {
  if (text.empty()) throw ParseError("topology: empty string");
  std::vector<int> lengths;
  std::size_t pos = 0;
  while (true) {
    const auto dash = text.find('-', pos);
    const auto token = text.substr(pos, dash == std::string_view::npos ? text.npos : dash - pos);
    if (token.empty()) throw ParseError("topology '" + std::string(text) + "': empty cycle length");
    long value = 0;
    for (char c : token) {
      if (c < '0' || c > '9') {
        throw ParseError("topology '" + std::string(text) + "': '" + std::string(token) +
                         "' is not a positive integer");
      }
      value = value * 10 + (c - '0');
      if (value > 1'000'000) throw ParseError("topology '" + std::string(text) + "': length too large");
    }
    if (value <= 0) throw ParseError("topology '" + std::string(text) + "': cycle lengths must be positive");
    lengths.push_back(static_cast<int>(value));
    if (dash == std::string_view::npos) break;
    pos = dash + 1;
  }
  return lengths;
}

inline std::string format_topology(const std::vector<int>& lengths) {
  std::string out;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(lengths[i]);
  }
  return out;
}

inline std::vector<CycleSpec> uniform_cycles(const std::vector<int>& lengths, double weight) {
  std::vector<CycleSpec> cycles;
  cycles.reserve(lengths.size());
  for (int n : lengths) cycles.push_back({n, weight});
  return cycles;
}

// ---------------------------------------------------------------------------

inline void validate(const ReservoirTopology& t) {
  switch (t.kind) {
    case TopologyKind::RandomSparse:
      if (t.size < 1) throw ConfigError("random reservoir needs a positive size");
      break;
    case TopologyKind::SimpleCycle:
      if (t.cycles.size() != 1) throw ConfigError("simple cycle reservoir needs exactly one cycle");
      break;
    case TopologyKind::CycleWithJumps:
      if (t.cycles.size() != 1) throw ConfigError("cycle reservoir with jumps needs exactly one cycle");
      if (!t.jumps) throw ConfigError("cycle reservoir with jumps needs a jump specification");
      break;
    case TopologyKind::Concentric:
      if (t.cycles.size() < 2) throw ConfigError("concentric reservoir needs at least two cycles");
      break;
  }
}

inline Matrix build_reservoir(const ReservoirTopology& t) {
  validate(t);
  switch (t.kind) {
    case TopologyKind::RandomSparse:
      return build_random_esn(t.size, t.connectivity, t.target_radius, t.seed);
    case TopologyKind::SimpleCycle:
      return build_scr(t.cycles[0].length, t.cycles[0].weight);
    case TopologyKind::CycleWithJumps:
      return build_crj(t.cycles[0].length, t.cycles[0].weight, *t.jumps);
    case TopologyKind::Concentric:
      return build_concentric(t.cycles, t.jumps);
  }
  throw ConfigError("unknown topology kind");
}

// Deterministic kinds take pi-signed input weights of equal magnitude; the
// random reservoir draws its input weights uniformly from its own seed.
inline WeightSet build_weights(const ReservoirTopology& t, int n_u, InputWeightSpec input) {
  WeightSet w;
  w.w_h = build_reservoir(t);
  const int n_r = static_cast<int>(w.w_h.rows());
  w.w_in = t.kind == TopologyKind::RandomSparse ? build_random_input_weights(n_r, n_u, input, t.seed)
                                                : build_input_weights(n_r, n_u, input);
  return w;
}

// Structural audit of a deterministic reservoir: every loop edge carries its
// cycle weight, the diagonal is zero, and every other nonzero is a listed jump
// edge. Returns human-readable violations; empty means the structure matches.
inline std::vector<std::string> audit_structure(const Matrix& w, const ReservoirTopology& t) {
  std::vector<std::string> issues;
  if (t.kind == TopologyKind::RandomSparse) {
    if (w.rows() != t.size || w.cols() != t.size) issues.push_back("size mismatch");
    return issues;
  }
  const int n = t.reservoir_size();
  if (w.rows() != n || w.cols() != n) {
    issues.push_back("matrix is " + detail::shape(w) + ", expected " + std::to_string(n) + "x" +
                     std::to_string(n));
    return issues;
  }
  Matrix expected = Matrix::Zero(n, n);
  int offset = 0;
  for (const auto& c : t.cycles) {
    detail::place_cycle(expected, offset, c.length, c.weight);
    offset += c.length;
  }
  if (t.jumps) {
    const auto pairs = t.kind == TopologyKind::CycleWithJumps
                           ? crj_jump_pairs(n, t.jumps->step)
                           : concentric_jump_pairs(t.cycles, t.jumps->step);
    for (const auto& [a, b] : pairs) detail::add_bidirectional(expected, a - 1, b - 1, t.jumps->weight);
  }
  for (int i = 0; i < n; ++i) {
    if (w(i, i) != 0.0) issues.push_back("nonzero diagonal at node " + std::to_string(i + 1));
    for (int j = 0; j < n; ++j) {
      if (w(i, j) != expected(i, j)) {
        std::ostringstream msg;
        msg << "entry (" << i + 1 << "," << j + 1 << ") is " << w(i, j) << ", expected "
            << expected(i, j);
        issues.push_back(msg.str());
      }
    }
  }
  return issues;
}

}  // namespace crlab
