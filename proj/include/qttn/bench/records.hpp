#pragma once

// Benchmark records: one JSON object per line.

#include <string>
#include <vector>

#include "json.hpp"
#include "qttn/bench/config.hpp"

namespace qttn::bench {

inline constexpr int kRecordSchemaVersion = 1;

struct BenchmarkRecord {
  RunConfig config;
  std::vector<SweepRecord> sweeps;
  double total_wall_time_s = 0.0;
  double final_energy = 0.0;
  std::size_t peak_memory_estimate_bytes = 0;
  bool ok = true;
  std::string error;
};

nlohmann::ordered_json to_json(const SweepRecord& r);
nlohmann::ordered_json to_json(const BenchmarkRecord& r);

/// Fields needed by `report`, read back from a record line.
struct RecordSummary {
  std::string label;
  nlohmann::ordered_json config;
  double final_energy = 0.0;
  double total_wall_time_s = 0.0;
  bool ok = true;
};

RecordSummary summary_from_json(const nlohmann::json& j);
std::vector<RecordSummary> read_records(const std::string& path);
void append_record(const std::string& path, const BenchmarkRecord& r);

/// Runs one configuration: solver, timing, optional checkpoint.
/// Solver failures are captured in the record (ok = false).
BenchmarkRecord execute(const RunConfig& cfg);

}  // namespace qttn::bench
