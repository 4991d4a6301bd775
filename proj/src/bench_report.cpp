#include "qttn/bench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace qttn::bench {

using nlohmann::ordered_json;

namespace {

// Config fields that follow from others and must not take part in matching.
bool derived_field(const std::string& k) { return k == "effective_threads" || k == "host_cores"; }

bool value_matches(const ordered_json& v, const std::string& s) {
  if (v.is_string()) return v.get<std::string>() == s;
  if (v.is_boolean()) return v.get<bool>() ? (s == "true" || s == "1") : (s == "false" || s == "0");
  if (v.is_number()) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0' && x == v.get<double>();
  }
  return v.dump() == s;
}

bool same_except(const ordered_json& a, const ordered_json& b, const std::string& key) {
  for (const auto& [k, v] : a.items()) {
    if (k == key || derived_field(k)) continue;
    if (!b.contains(k) || b.at(k) != v) return false;
  }
  for (const auto& [k, v] : b.items())
    if (k != key && !derived_field(k) && !a.contains(k)) return false;
  return true;
}

std::size_t chi_of(const RecordSummary& r) {
  if (r.config.contains("chi") && r.config.at("chi").is_number_unsigned()) return r.config.at("chi").get<std::size_t>();
  return 0;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<ReportRow> build_report(const std::vector<RecordSummary>& records, const std::string& baseline,
                                    double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("--epsilon", "must be > 0");
  std::vector<const RecordSummary*> ok;
  for (const auto& r : records)
    if (r.ok) ok.push_back(&r);
  if (ok.empty()) throw ConfigError("--records", "no successful records to report");

  double best = std::numeric_limits<double>::infinity();
  for (const auto* r : ok) best = std::min(best, r->final_energy);

  // Resolve the baseline for each row.
  std::vector<const RecordSummary*> base(ok.size(), nullptr);
  if (!baseline.empty()) {
    const auto eq = baseline.find('=');
    const bool by_label = std::any_of(ok.begin(), ok.end(), [&](const auto* r) { return r->label == baseline; });
    if (by_label) {
      const auto* b = *std::find_if(ok.begin(), ok.end(), [&](const auto* r) { return r->label == baseline; });
      std::fill(base.begin(), base.end(), b);
    } else if (eq != std::string::npos && eq > 0) {
      const std::string key = baseline.substr(0, eq), value = baseline.substr(eq + 1);
      bool known = false, any = false;
      for (const auto* r : ok) {
        if (!r->config.contains(key)) continue;
        known = true;
        any = any || value_matches(r->config.at(key), value);
      }
      if (!known) throw ConfigError("--baseline", "unknown config key '" + key + "'");
      if (!any) throw ConfigError("--baseline", "no record has " + baseline);
      for (std::size_t i = 0; i < ok.size(); ++i)
        for (const auto* r : ok)
          if (r->config.contains(key) && value_matches(r->config.at(key), value) &&
              same_except(ok[i]->config, r->config, key)) {
            base[i] = r;
            break;
          }
    } else {
      throw ConfigError("--baseline", "unknown baseline '" + baseline + "'");
    }
  }

  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < ok.size(); ++i) {
    const auto& r = *ok[i];
    ReportRow row;
    row.label = r.label;
    row.chi = chi_of(r);
    row.final_energy = r.final_energy;
    row.energy_above_best = std::max(r.final_energy - best, epsilon);
    row.total_wall_time_s = r.total_wall_time_s;
    if (base[i] && r.total_wall_time_s > 0.0) row.speedup = base[i]->total_wall_time_s / r.total_wall_time_s;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_csv(const std::vector<ReportRow>& rows) {
  std::string out = "label,chi,final_energy,energy_above_best,total_wall_time_s,speedup\n";
  for (const auto& r : rows) {
    out += csv_field(r.label) + ',' + std::to_string(r.chi) + ',' + fmt("%.10f", r.final_energy) + ',' +
           fmt("%.6e", r.energy_above_best) + ',' + fmt("%.6f", r.total_wall_time_s) + ',' +
           (r.speedup ? fmt("%.4f", *r.speedup) : std::string()) + '\n';
  }
  return out;
}

std::string render_table(const std::vector<ReportRow>& rows) {
  std::size_t w = 5;
  for (const auto& r : rows) w = std::max(w, r.label.size());
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-*s %5s %18s %14s %12s %9s\n", static_cast<int>(w), "label", "chi", "energy",
                "above_best", "time_s", "speedup");
  out += buf;
  for (const auto& r : rows) {
    const std::string sp = r.speedup ? fmt("%.2fx", *r.speedup) : std::string("-");
    std::snprintf(buf, sizeof buf, "%-*s %5zu %18.10f %14.6e %12.4f %9s\n", static_cast<int>(w), r.label.c_str(),
                  r.chi, r.final_energy, r.energy_above_best, r.total_wall_time_s, sp.c_str());
    out += buf;
  }
  return out;
}

std::string render_plot_data(const std::vector<ReportRow>& rows) {
  std::string out = "# time_s energy_above_best chi\n";
  for (const auto& r : rows)
    out += fmt("%.6f", r.total_wall_time_s) + ' ' + fmt("%.6e", r.energy_above_best) + ' ' + std::to_string(r.chi) +
           '\n';
  return out;
}

}  // namespace qttn::bench
