#pragma once

// Leaky-integrator state update
//   x(t) = (1 - alpha) x(t-1) + alpha tanh(W_in u(t) + W_h x(t-1))
// and state harvesting with washout.

#include <cmath>
#include <string>
#include <vector>

#include "crlab/error.hpp"
#include "crlab/numerics.hpp"
#include "crlab/topology.hpp"

namespace crlab {

struct ESNConfig {
  WeightSet weights;
  double leak_rate = 1.0;

  int n_r() const { return weights.reservoir_size(); }
  int n_u() const { return weights.input_size(); }
};

struct ReservoirState {
  Vector x;
  long t = 0;
};

// Retained states as columns; column c holds x(first_time + c).
struct StateMatrix {
  Matrix states;
  long first_time = 0;

  Eigen::Index columns() const { return states.cols(); }
  Eigen::Index rows() const { return states.rows(); }
};

enum class StateMode {
  Reset,       // every segment starts from the zero state
  Continuous,  // one pass over the whole stream; segments still drop their washout
};

inline void validate(const ESNConfig& cfg) {
  const auto& w = cfg.weights;
  if (w.w_h.rows() == 0 || w.w_h.rows() != w.w_h.cols()) {
    throw DimensionError("ESN config: reservoir matrix must be square and non-empty");
  }
  if (w.w_in.rows() != w.w_h.rows() || w.w_in.cols() < 1) {
    throw DimensionError("ESN config: input matrix is " + detail::shape(w.w_in) +
                         " but reservoir has " + std::to_string(w.w_h.rows()) + " neurons");
  }
  if (!(cfg.leak_rate >= 0.0 && cfg.leak_rate <= 1.0)) {
    throw ConfigError("ESN config: leak rate must lie in [0, 1]");
  }
}

// Precomputed update kernel for one configuration. The reservoir matrix is
// stored row-compressed since cycle reservoirs have one to three nonzeros
// per row.
class Reservoir {
 public:
  explicit Reservoir(const ESNConfig& cfg)
      : w_in_(cfg.weights.w_in), w_h_(cfg.weights.w_h), leak_(cfg.leak_rate) {
    validate(cfg);
  }

  int size() const { return static_cast<int>(w_h_.rows()); }
  int input_size() const { return static_cast<int>(w_in_.cols()); }

  // Advances x in place by one step driven by u; `pre` is scratch of length N_R.
  void advance(Vector& x, const double* u, Vector& pre) const {
    const Eigen::Index n = w_in_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < w_in_.cols(); ++j) acc += w_in_(i, j) * u[j];
      pre[i] = acc;
    }
    w_h_.accumulate(x.data(), pre.data());
    const double keep = 1.0 - leak_;
    for (Eigen::Index i = 0; i < n; ++i) x[i] = keep * x[i] + leak_ * std::tanh(pre[i]);
  }

 private:
  Matrix w_in_;
  SparseRows w_h_;
  double leak_;
};

inline ReservoirState step(const ReservoirState& state, const Vector& u, const ESNConfig& cfg) {
  validate(cfg);
  if (u.size() != cfg.n_u()) {
    throw DimensionError("step: input has length " + std::to_string(u.size()) + ", expected " +
                         std::to_string(cfg.n_u()));
  }
  if (state.x.size() != cfg.n_r()) {
    throw DimensionError("step: state has length " + std::to_string(state.x.size()) +
                         ", expected " + std::to_string(cfg.n_r()));
  }
  ReservoirState next{state.x, state.t + 1};
  Vector scratch(cfg.n_r());
  Reservoir(cfg).advance(next.x, u.data(), scratch);
  return next;
}

namespace detail {

inline void require_inputs(const Reservoir& r, const Matrix& inputs) {
  if (inputs.rows() != r.input_size()) {
    throw DimensionError("harvest: inputs have " + std::to_string(inputs.rows()) +
                         " channels, expected " + std::to_string(r.input_size()));
  }
}

}  // namespace detail

// Runs the reservoir from the zero state over inputs (one column per time
// step, times 1..T) and keeps the states for t > washout.
inline StateMatrix harvest(const Reservoir& reservoir, const Matrix& inputs, long washout) {
  detail::require_inputs(reservoir, inputs);
  const long length = static_cast<long>(inputs.cols());
  if (washout < 0 || washout > length) {
    throw ConfigError("harvest: washout " + std::to_string(washout) + " exceeds sequence length " +
                      std::to_string(length));
  }
  StateMatrix out{Matrix(reservoir.size(), length - washout), washout + 1};
  Vector x = Vector::Zero(reservoir.size());
  Vector scratch(reservoir.size());
  for (long t = 0; t < length; ++t) {
    reservoir.advance(x, inputs.col(t).data(), scratch);
    if (t >= washout) out.states.col(t - washout) = x;
  }
  return out;
}

inline StateMatrix harvest(const ESNConfig& cfg, const Matrix& inputs, long washout) {
  return harvest(Reservoir(cfg), inputs, washout);
}

// Contiguous piece [begin, begin + length) of a stream (0-based), of which the
// first `washout` states are discarded.
struct Segment {
  long begin = 0;
  long length = 0;
  long washout = 0;
};

// Harvests each segment. In Reset mode each segment is run on its own from
// the zero state; in Continuous mode the stream is run once from time 0.
inline std::vector<StateMatrix> harvest_segments(const Reservoir& reservoir, const Matrix& inputs,
                                                 const std::vector<Segment>& segments,
                                                 StateMode mode) {
  detail::require_inputs(reservoir, inputs);
  for (const auto& s : segments) {
    if (s.begin < 0 || s.length < 0 || s.begin + s.length > inputs.cols()) {
      throw ConfigError("harvest: segment exceeds the input stream");
    }
    if (s.washout < 0 || s.washout > s.length) {
      throw ConfigError("harvest: segment washout exceeds segment length");
    }
  }
  std::vector<StateMatrix> out;
  out.reserve(segments.size());
  if (mode == StateMode::Reset) {
    for (const auto& s : segments) {
      auto m = harvest(reservoir, inputs.middleCols(s.begin, s.length), s.washout);
      m.first_time += s.begin;
      out.push_back(std::move(m));
    }
    return out;
  }
  long end = 0;
  for (const auto& s : segments) end = std::max(end, s.begin + s.length);
  const StateMatrix all = harvest(reservoir, inputs.leftCols(end), 0);
  for (const auto& s : segments) {
    const long kept = s.length - s.washout;
    out.push_back({all.states.middleCols(s.begin + s.washout, kept), s.begin + s.washout + 1});
  }
  return out;
}

}  // namespace crlab
