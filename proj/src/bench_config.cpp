#include "qttn/bench/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "qttn/version.hpp"

namespace qttn::bench {

using nlohmann::json;

const std::vector<std::string>& grid_keys() {
  static const std::vector<std::string> keys{"chi", "pattern", "backend", "threads", "skip_ergt", "tiling", "symmetry"};
  return keys;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "schema_version", "N",         "J",           "g",          "chi",          "pattern",      "backend",
      "threads",        "skip_ergt", "tiling",      "tile_bytes", "symmetry",     "mapping",      "seed",
      "lanczos_max_iter", "lanczos_tol", "svd_cutoff", "svd_algorithm", "checkpoint", "bound", "label"};
  return keys;
}

int host_cores() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

int default_thread_count() {
  const char* v = std::getenv("TTN_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096) throw ConfigError("TTN_THREADS", "must be a positive integer");
  return static_cast<int>(n);
}

namespace {

std::uint64_t get_uint(const json& j, const char* key, std::uint64_t min) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(key, "must be an integer");
  if (v.is_number_unsigned()) {
    const auto x = v.get<std::uint64_t>();
    if (x < min) throw ConfigError(key, "must be >= " + std::to_string(min));
    return x;
  }
  const auto x = v.get<std::int64_t>();
  if (x < 0 || static_cast<std::uint64_t>(x) < min) throw ConfigError(key, "must be >= " + std::to_string(min));
  return static_cast<std::uint64_t>(x);
}

double get_number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(key, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, "must be finite");
  return x;
}

double get_positive(const json& j, const char* key) {
  const double x = get_number(j, key);
  if (!(x > 0.0)) throw ConfigError(key, "must be > 0");
  return x;
}

bool get_bool(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(key, "must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(key, "must be a string");
  return v.get<std::string>();
}

void check_keys(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
  const auto& known = config_keys();
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError(k, "unknown key");
}

}  // namespace

RunConfig parse_run_config(const json& j, int default_threads) {
  check_keys(j);
  for (const auto& [k, v] : j.items())
    if (v.is_array()) throw ConfigError(k, "lists are only allowed in grid configurations");
  RunConfig c;
  if (j.contains("schema_version") && get_uint(j, "schema_version", 0) != kConfigSchemaVersion)
    throw ConfigError("schema_version", "unsupported schema version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  for (const char* req : {"N", "chi", "pattern"})
    if (!j.contains(req)) throw ConfigError(req, "required");

  c.model.N = get_uint(j, "N", 2);
  if (c.model.N > (1u << 10)) throw ConfigError("N", "too large");
  const std::size_t sites = c.model.N * c.model.N;
  if ((sites & (sites - 1)) != 0) throw ConfigError("N", "N*N must be a power of two (binary tree)");
  if (j.contains("J")) c.model.J = get_number(j, "J");
  if (j.contains("g")) c.model.g = get_number(j, "g");
  c.chi = get_uint(j, "chi", 2);
  c.pattern = get_string(j, "pattern");
  try {
    PrecisionSchedule check(c.pattern);
  } catch (const ArgumentError& e) {
    throw ConfigError("pattern", e.what());
  }
  if (j.contains("backend")) {
    try {
      c.backend = backend_from_string(get_string(j, "backend"));
    } catch (const ConfigError&) {
      throw;
    } catch (const ArgumentError& e) {
      throw ConfigError("backend", e.what());
    }
  }
  c.threads = j.contains("threads") ? static_cast<int>(get_uint(j, "threads", 1)) : default_threads;
  if (c.threads < 1) throw ConfigError("threads", "must be >= 1");
  if (j.contains("skip_ergt")) c.skip_ergt = get_bool(j, "skip_ergt");
  if (j.contains("tiling")) c.tiling = get_bool(j, "tiling");
  if (j.contains("tile_bytes")) {
    c.tile_bytes = get_uint(j, "tile_bytes", 16);
    if (c.tile_bytes % 16 != 0) throw ConfigError("tile_bytes", "must be a multiple of 16");
  }
  if (j.contains("symmetry")) c.symmetry = get_bool(j, "symmetry");
  if (j.contains("mapping")) {
    try {
      c.mapping = leaf_mapping_from_string(get_string(j, "mapping"));
    } catch (const ConfigError&) {
      throw;
    } catch (const ArgumentError& e) {
      throw ConfigError("mapping", e.what());
    }
  }
  if (j.contains("seed")) c.seed = get_uint(j, "seed", 0);
  if (j.contains("lanczos_max_iter")) c.lanczos_max_iter = get_uint(j, "lanczos_max_iter", 1);
  if (j.contains("lanczos_tol")) c.lanczos_tol = get_positive(j, "lanczos_tol");
  if (j.contains("svd_cutoff")) c.svd_cutoff = get_positive(j, "svd_cutoff");
  if (j.contains("svd_algorithm")) {
    try {
      c.svd_algorithm = svd_algorithm_from_string(get_string(j, "svd_algorithm"));
    } catch (const ConfigError&) {
      throw;
    } catch (const ArgumentError& e) {
      throw ConfigError("svd_algorithm", e.what());
    }
  }
  if (j.contains("checkpoint")) c.checkpoint = get_string(j, "checkpoint");
  if (j.contains("bound")) c.bound = get_positive(j, "bound");
  if (j.contains("label")) c.label = get_string(j, "label");
  return c;
}

std::vector<RunConfig> expand_grid(const json& j, int default_threads) {
  check_keys(j);
  const auto& gk = grid_keys();
  for (const auto& [k, v] : j.items())
    if (v.is_array() && std::find(gk.begin(), gk.end(), k) == gk.end())
      throw ConfigError(k, "this key cannot be a list");
  std::vector<std::pair<std::string, json>> axes;
  for (const auto& k : gk) {
    if (!j.contains(k) || !j.at(k).is_array()) continue;
    if (j.at(k).empty()) throw ConfigError(k, "list must not be empty");
    axes.emplace_back(k, j.at(k));
  }
  std::vector<RunConfig> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    json cell = j;
    for (std::size_t a = 0; a < axes.size(); ++a) cell[axes[a].first] = axes[a].second[idx[a]];
    RunConfig c = parse_run_config(cell, default_threads);
    if (!c.label.empty()) c.label += "/" + c.auto_label();
    out.push_back(std::move(c));
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
}

int RunConfig::effective_threads() const { return std::min(threads, host_cores()); }

SweepConfig RunConfig::sweep_config() const {
  SweepConfig s;
  s.schedule = PrecisionSchedule(pattern);
  s.chi = chi;
  s.skip_ergt = skip_ergt;
  s.tiling = TilingPolicy{tiling, tile_bytes};
  s.lanczos = LanczosSettings{lanczos_max_iter, lanczos_tol};
  s.svd_cutoff = svd_cutoff;
  s.svd_algorithm = svd_algorithm;
  s.seed = seed;
  s.backend = BackendId{backend, effective_threads()};
  s.symmetric = symmetry;
  s.mapping = mapping;
  return s;
}

std::string RunConfig::auto_label() const {
  return "chi=" + std::to_string(chi) + " pattern=" + pattern + " backend=" + std::string(to_string(backend)) +
         " threads=" + std::to_string(threads) + " skip_ergt=" + (skip_ergt ? "1" : "0") +
         " tiling=" + (tiling ? "1" : "0") + " symmetry=" + (symmetry ? "1" : "0");
}

std::string RunConfig::display_label() const { return label.empty() ? auto_label() : label; }

nlohmann::ordered_json RunConfig::echo() const {
  nlohmann::ordered_json e;
  e["N"] = model.N;
  e["J"] = model.J;
  e["g"] = model.g;
  e["chi"] = chi;
  e["pattern"] = pattern;
  e["backend"] = std::string(to_string(backend));
  e["threads"] = threads;
  e["effective_threads"] = effective_threads();
  e["skip_ergt"] = skip_ergt;
  e["tiling"] = tiling;
  e["tile_bytes"] = tile_bytes;
  e["symmetry"] = symmetry;
  e["mapping"] = std::string(to_string(mapping));
  e["seed"] = seed;
  e["lanczos_max_iter"] = lanczos_max_iter;
  e["lanczos_tol"] = lanczos_tol;
  e["svd_cutoff"] = svd_cutoff;
  e["svd_algorithm"] = std::string(to_string(svd_algorithm));
  e["artifact_version"] = kArtifactVersion;
  return e;
}

}  // namespace qttn::bench
