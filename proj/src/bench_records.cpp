#include "qttn/bench/records.hpp"

#include <chrono>
#include <fstream>

#include "qttn/tensor/binary_io.hpp"
#include "qttn/version.hpp"

namespace qttn::bench {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_json(const SweepRecord& r) {
  ordered_json j;
  j["sweep_index"] = r.sweep_index;
  j["precision"] = std::string(1, to_char(r.precision));
  j["energy_after"] = r.energy_after;
  j["wall_time_s"] = r.wall_time_s;
  j["local_opts_performed"] = r.local_opts_performed;
  j["local_opts_skipped"] = r.local_opts_skipped;
  j["max_truncation_error"] = r.max_truncation_error;
  j["local_opt_time_s"] = r.local_opt_time_s;
  j["lanczos_iterations"] = r.lanczos_iterations;
  return j;
}

ordered_json to_json(const BenchmarkRecord& r) {
  ordered_json j;
  j["schema_version"] = kRecordSchemaVersion;
  j["artifact_version"] = kArtifactVersion;
  j["label"] = r.config.display_label();
  j["status"] = r.ok ? "ok" : "failed";
  if (!r.ok) j["error"] = r.error;
  auto cfg = r.config.echo();
  cfg["host_cores"] = host_cores();
  j["config"] = std::move(cfg);
  ordered_json sweeps = ordered_json::array();
  for (const auto& s : r.sweeps) sweeps.push_back(to_json(s));
  j["sweeps"] = std::move(sweeps);
  j["total_wall_time_s"] = r.total_wall_time_s;
  if (r.ok) j["final_energy"] = r.final_energy;
  else j["final_energy"] = nullptr;
  j["peak_memory_estimate_bytes"] = r.peak_memory_estimate_bytes;
  return j;
}

namespace {

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(key, "missing in record");
  return j.at(key);
}

double number_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw ConfigError(key, "record field must be a number");
  return v.get<double>();
}

}  // namespace

RecordSummary summary_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<record>", "record must be a JSON object");
  const auto& sv = field(j, "schema_version");
  if (!sv.is_number_integer() || sv.get<int>() != kRecordSchemaVersion)
    throw ConfigError("schema_version", "unsupported record schema version");
  RecordSummary s;
  const auto& label = field(j, "label");
  if (!label.is_string()) throw ConfigError("label", "record field must be a string");
  s.label = label.get<std::string>();
  const auto& cfg = field(j, "config");
  if (!cfg.is_object()) throw ConfigError("config", "record field must be an object");
  s.config = cfg;
  const auto& status = field(j, "status");
  if (!status.is_string()) throw ConfigError("status", "record field must be a string");
  s.ok = status.get<std::string>() == "ok";
  s.total_wall_time_s = number_field(j, "total_wall_time_s");
  if (s.ok) s.final_energy = number_field(j, "final_energy");
  return s;
}

std::vector<RecordSummary> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--records", "cannot open '" + path + "'");
  std::vector<RecordSummary> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(summary_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ConfigError("--records", "line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("--records", "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void append_record(const std::string& path, const BenchmarkRecord& r) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError("--out", "cannot open '" + path + "' for appending");
  out << to_json(r).dump() << '\n';
  out.flush();
  if (!out) throw ConfigError("--out", "failed to write '" + path + "'");
}

BenchmarkRecord execute(const RunConfig& cfg) {
  BenchmarkRecord rec;
  rec.config = cfg;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto res = find_ground_state(cfg.model, cfg.sweep_config());
    rec.sweeps = std::move(res.sweeps);
    rec.final_energy = res.final_energy;
    rec.total_wall_time_s = res.total_wall_time_s;
    rec.peak_memory_estimate_bytes = estimate_peak_memory_bytes(res.state, cfg.lanczos_max_iter);
    if (!cfg.checkpoint.empty()) {
      std::ofstream os(cfg.checkpoint, std::ios::binary);
      if (!os) throw io::FormatError("cannot open checkpoint '" + cfg.checkpoint + "'");
      write_checkpoint(os, res.state, res.final_energy);
    }
    return rec;
  } catch (const SearchFailure& e) {
    rec.sweeps = e.partial();
    rec.error = e.what();
  } catch (const Error& e) {
    rec.error = e.what();
  }
  rec.ok = false;
  rec.total_wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace qttn::bench
