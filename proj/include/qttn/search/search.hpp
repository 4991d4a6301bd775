#pragma once

// Variational ground-state search: single-tensor sweeps with a Lanczos
// solver per node, per-sweep precision schedule, optional skipping of
// exact (untruncated) tensors and tiled truncation ranks.

#include <chrono>
#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "qttn/model/ising.hpp"
#include "qttn/search/lanczos.hpp"
#include "qttn/ttn/environment.hpp"
#include "qttn/ttn/state.hpp"

namespace qttn {

class PrecisionSchedule {
 public:
  PrecisionSchedule() : PrecisionSchedule("DDDDDD") {}
  /// One character per sweep from {S, C, D, Z}; throws ArgumentError otherwise.
  explicit PrecisionSchedule(std::string pattern);
  const std::string& pattern() const { return pattern_; }
  std::size_t size() const { return pattern_.size(); }
  Precision at(std::size_t sweep) const { return precision_from_char(pattern_.at(sweep)); }

 private:
  std::string pattern_;
};

struct TilingPolicy {
  bool enabled = false;
  std::size_t tile_bytes = 128;

  /// tile_bytes / bytes per scalar, or 0 when disabled.
  std::size_t tile_entries(Precision p) const;
  void validate() const;
};

struct SweepConfig {
  PrecisionSchedule schedule;
  std::size_t chi = 16;
  bool skip_ergt = false;
  TilingPolicy tiling;
  LanczosSettings lanczos;
  double svd_cutoff = kDefaultSvdCutoff;
  SvdAlgorithm svd_algorithm = SvdAlgorithm::direct;
  std::uint64_t seed = 1;
  BackendId backend;
  bool symmetric = false;
  LeafMapping mapping = LeafMapping::morton;

  void validate() const;
};

struct SweepRecord {
  std::size_t sweep_index = 0;
  Precision precision = Precision::D;
  double energy_after = 0.0;
  double wall_time_s = 0.0;
  std::size_t local_opts_performed = 0;
  std::size_t local_opts_skipped = 0;
  double max_truncation_error = 0.0;
  /// Time spent inside local optimizations only.
  double local_opt_time_s = 0.0;
  std::size_t lanczos_iterations = 0;
};

using TelemetryCallback = std::function<void(const SweepRecord&)>;

using AnyState = std::variant<TTNState<DenseTensor<float>>, TTNState<DenseTensor<cfloat>>,
                              TTNState<DenseTensor<double>>, TTNState<DenseTensor<cdouble>>,
                              TTNState<Z2Tensor<float>>, TTNState<Z2Tensor<cfloat>>, TTNState<Z2Tensor<double>>,
                              TTNState<Z2Tensor<cdouble>>>;

Precision precision_of(const AnyState& s);
bool is_symmetric(const AnyState& s);

/// Converts every tensor and restores the isometry condition in the new precision.
/// Complex to real conversion throws PrecisionError when imaginary parts are not negligible.
AnyState convert_state(const AnyState& s, Precision p);

/// Random initial state for the model lattice (drawn in double, cast to `p`).
AnyState initial_state(const IsingModelSpec& spec, const SweepConfig& config, Precision p);

double expectation(const AnyState& s, const std::vector<PauliString>& terms);

struct SearchResult {
  AnyState state;
  std::vector<SweepRecord> sweeps;
  double final_energy = 0.0;
  double total_wall_time_s = 0.0;
};

/// Thrown when a sweep fails; keeps the telemetry of completed sweeps.
class SearchFailure : public SolverError {
 public:
  SearchFailure(const std::string& what, std::vector<SweepRecord> partial)
      : SolverError(what), partial_(std::move(partial)) {}
  const std::vector<SweepRecord>& partial() const { return partial_; }

 private:
  std::vector<SweepRecord> partial_;
};

SearchResult find_ground_state(const IsingModelSpec& spec, const SweepConfig& config,
                               const TelemetryCallback& telemetry = {});

/// Runs the schedule of `config` from a given state.
SearchResult run_sweeps(AnyState state, const std::vector<PauliString>& terms, const SweepConfig& config,
                        const TelemetryCallback& telemetry = {});

/// Rough upper bound on resident bytes: state, environments and Lanczos vectors.
std::size_t estimate_peak_memory_bytes(const AnyState& s, std::size_t lanczos_max_iter);

// ---------------------------------------------------------------------------
// Checkpoints: "QTCK" | version u16 | symmetric u8 | precision u8 | sites u64
// | chi u64 | center u64 | energy f64 | node tensors in node order.

inline constexpr std::uint16_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const AnyState& s, double energy);
std::pair<AnyState, double> read_checkpoint(std::istream& is);

// ---------------------------------------------------------------------------
// Templates shared by the driver and the tests.

struct LocalOptResult {
  double eigenvalue = 0.0;
  std::size_t iterations = 0;
  double seconds = 0.0;
};

/// Replaces the center tensor by the lowest eigenvector of the effective
/// Hamiltonian; the new center tensor is normalized.
template <NodeTensor Ten>
LocalOptResult local_optimize(TTNState<Ten>& state, Environment<Ten>& env, std::size_t node,
                              const LanczosSettings& cfg, std::uint64_t seed) {
  if (state.center() != node) throw ArgumentError("local_optimize: node must be the isometry center");
  const auto t0 = std::chrono::steady_clock::now();
  const auto op = env.effective_operator(state);
  const BackendId be = state.backend();
  const auto& x = state.tensor(node);
  auto res = lanczos_lowest([&](const Ten& v) { return op.apply(v, be); }, x, ops::degrees_of_freedom(x), cfg,
                            seed);
  state.set_tensor(node, std::move(res.vector));
  LocalOptResult out;
  out.eigenvalue = res.eigenvalue;
  out.iterations = res.iterations;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// One sweep in depth-first preorder from the top node.
template <NodeTensor Ten>
SweepRecord sweep(TTNState<Ten>& state, Environment<Ten>& env, const SweepConfig& config, std::size_t sweep_index) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepRecord rec;
  rec.sweep_index = sweep_index;
  rec.precision = TTNState<Ten>::precision();
  TruncationParams params{config.chi, config.svd_cutoff, config.tiling.tile_entries(rec.precision)};
  const auto& topo = state.topology();
  bool have_energy = false;
  for (const std::size_t node : topo.sweep_order()) {
    const auto path = topo.path(state.center(), node);
    for (std::size_t i = 1; i < path.size(); ++i) {
      const auto rep = state.move_center_svd(path[i], params, config.svd_algorithm, true);
      rec.max_truncation_error = std::max(rec.max_truncation_error, rep.truncation_error);
    }
    if (config.skip_ergt && is_ergt(state, node)) {
      ++rec.local_opts_skipped;
      continue;
    }
    try {
      const auto r = local_optimize(state, env, node, config.lanczos,
                                    config.seed * 1000003ull + sweep_index * 7919ull + node);
      rec.energy_after = r.eigenvalue;
      rec.local_opt_time_s += r.seconds;
      rec.lanczos_iterations += r.iterations;
      ++rec.local_opts_performed;
      have_energy = true;
    } catch (const SolverError& e) {
      throw SolverError("sweep " + std::to_string(sweep_index) + ", node " + std::to_string(node) + ": " + e.what());
    }
  }
  if (!have_energy) rec.energy_after = env.energy(state);
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace qttn
