#pragma once

// Model families and the flat per-trial configuration shared by the
// prediction sweeps and the memory-capacity sweeps.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>

#include "crlab/dynamics.hpp"
#include "crlab/error.hpp"
#include "crlab/topology.hpp"

namespace crlab {

enum class ModelKind { SCR, CRJ, CESN, CJESN, RandomESN };

inline constexpr std::array<ModelKind, 5> kAllModelKinds = {
    ModelKind::SCR, ModelKind::CRJ, ModelKind::CESN, ModelKind::CJESN, ModelKind::RandomESN};

inline std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SCR: return "SCR";
    case ModelKind::CRJ: return "CRJ";
    case ModelKind::CESN: return "cESN";
    case ModelKind::CJESN: return "cjESN";
    case ModelKind::RandomESN: return "randomESN";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view text) {
  for (auto kind : kAllModelKinds)
    if (to_string(kind) == text) return kind;
  throw ParseError("unknown model kind '" + std::string(text) +
                   "' (expected SCR, CRJ, cESN, cjESN or randomESN)");
}

inline bool uses_jumps(ModelKind k) { return k == ModelKind::CRJ || k == ModelKind::CJESN; }
inline bool is_concentric(ModelKind k) { return k == ModelKind::CESN || k == ModelKind::CJESN; }

// One point of a hyperparameter grid. Fields a kind does not use hold 0.
// For randomESN the cycle weight is the target spectral radius.
struct TrialConfig {
  ModelKind kind = ModelKind::SCR;
  std::string topology;  // "n1-n2-..."; a single size for flat models
  double input_scale = 0.1;
  double w_c = 0.5;
  double w_j = 0.0;
  int tau_j = 0;
  double alpha = 1.0;
  double lambda = 1e-6;
  double connectivity = 0.1;   // randomESN only
  std::uint64_t esn_seed = 0;  // randomESN only

  int n_r() const {
    int n = 0;
    for (int len : parse_topology(topology)) n += len;
    return n;
  }

  auto key() const {
    return std::make_tuple(to_string(kind), topology, input_scale, w_c, w_j, tau_j, alpha, lambda,
                           connectivity, esn_seed);
  }

  // Same reservoir and input weights, hence same harvested states.
  bool same_states(const TrialConfig& o) const {
    return kind == o.kind && topology == o.topology && input_scale == o.input_scale &&
           w_c == o.w_c && w_j == o.w_j && tau_j == o.tau_j && alpha == o.alpha &&
           connectivity == o.connectivity && esn_seed == o.esn_seed;
  }
};

inline ReservoirTopology make_topology(const TrialConfig& c) {
  const auto lengths = parse_topology(c.topology);
  ReservoirTopology t;
  switch (c.kind) {
    case ModelKind::SCR:
    case ModelKind::CRJ:
      if (lengths.size() != 1) {
        throw ConfigError(std::string(to_string(c.kind)) + " takes a single cycle, got topology '" +
                          c.topology + "'");
      }
      t.kind = c.kind == ModelKind::SCR ? TopologyKind::SimpleCycle : TopologyKind::CycleWithJumps;
      t.cycles = uniform_cycles(lengths, c.w_c);
      break;
    case ModelKind::CESN:
    case ModelKind::CJESN:
      t.kind = TopologyKind::Concentric;
      t.cycles = uniform_cycles(lengths, c.w_c);
      if (t.cycles.size() < 2) {
        throw ConfigError(std::string(to_string(c.kind)) + " needs at least two cycles, got '" +
                          c.topology + "'");
      }
      break;
    case ModelKind::RandomESN:
      if (lengths.size() != 1) throw ConfigError("randomESN takes a single size, got '" + c.topology + "'");
      t.kind = TopologyKind::RandomSparse;
      t.size = lengths[0];
      t.connectivity = c.connectivity;
      t.target_radius = c.w_c;
      t.seed = c.esn_seed;
      break;
  }
  if (uses_jumps(c.kind)) t.jumps = JumpSpec{c.w_j, c.tau_j};
  return t;
}

inline ESNConfig make_esn(const TrialConfig& c, int n_u = 1) {
  ESNConfig cfg{build_weights(make_topology(c), n_u, InputWeightSpec{c.input_scale}), c.alpha};
  validate(cfg);
  return cfg;
}

}  // namespace crlab
