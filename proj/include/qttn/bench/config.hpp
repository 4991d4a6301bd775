#pragma once

// JSON run configuration for the benchmark CLI. Unknown keys are rejected so
// that every result is reproducible from its configuration alone.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qttn/search/search.hpp"

namespace qttn::bench {

inline constexpr int kConfigSchemaVersion = 1;

/// Invalid configuration; `field` names the offending key.
class ConfigError : public ArgumentError {
 public:
  ConfigError(std::string field, const std::string& message)
      : ArgumentError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  IsingModelSpec model;
  std::size_t chi = 16;
  std::string pattern = "DDDDDD";
  BackendKind backend = BackendKind::optimized;
  int threads = 1;
  bool skip_ergt = false;
  bool tiling = false;
  std::size_t tile_bytes = 128;
  bool symmetry = false;
  LeafMapping mapping = LeafMapping::morton;
  std::uint64_t seed = 1;
  std::size_t lanczos_max_iter = 100;
  double lanczos_tol = 1e-7;
  double svd_cutoff = kDefaultSvdCutoff;
  SvdAlgorithm svd_algorithm = SvdAlgorithm::direct;
  std::string checkpoint;      // empty: no checkpoint
  std::optional<double> bound;  // relative error bound for `verify`
  std::string label;           // empty: derived from the knobs

  /// Threads actually handed to the kernels: min(threads, host cores).
  int effective_threads() const;
  SweepConfig sweep_config() const;
  /// Label used in reports.
  std::string display_label() const;
  /// Label derived from the grid knobs only.
  std::string auto_label() const;
  /// Every knob that can change a result.
  nlohmann::ordered_json echo() const;
};

/// Keys that may hold lists in a grid configuration, in expansion order.
const std::vector<std::string>& grid_keys();
/// Keys accepted in a configuration.
const std::vector<std::string>& config_keys();

/// Parses a single-run configuration. `default_threads` applies when "threads" is absent.
RunConfig parse_run_config(const nlohmann::json& j, int default_threads);

/// Expands list-valued grid keys into the cartesian product (last key varies fastest).
std::vector<RunConfig> expand_grid(const nlohmann::json& j, int default_threads);

nlohmann::json load_json_file(const std::string& path);

/// Thread count from TTN_THREADS, or 1 when unset. Throws ConfigError on a malformed value.
int default_thread_count();

int host_cores();

}  // namespace qttn::bench
