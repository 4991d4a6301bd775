#pragma once

// Time-versus-energy report: energy above the best record (floored at
// epsilon) and speedup relative to a baseline.

#include <optional>
#include <string>
#include <vector>

#include "qttn/bench/records.hpp"

namespace qttn::bench {

inline constexpr double kDefaultEpsilon = 1e-4;

struct ReportRow {
  std::string label;
  std::size_t chi = 0;
  double final_energy = 0.0;
  double energy_above_best = 0.0;
  double total_wall_time_s = 0.0;
  std::optional<double> speedup;  // baseline time / row time
};

/// Baseline is either `key=value` (each row is compared to the record that
/// differs from it only in `key`, which must equal `value`) or an exact label.
/// Throws ConfigError for an unknown baseline. Failed records are skipped.
std::vector<ReportRow> build_report(const std::vector<RecordSummary>& records, const std::string& baseline,
                                    double epsilon = kDefaultEpsilon);

std::string render_csv(const std::vector<ReportRow>& rows);
std::string render_table(const std::vector<ReportRow>& rows);
/// Lines of "time energy_above_best chi" for external plotting.
std::string render_plot_data(const std::vector<ReportRow>& rows);

}  // namespace qttn::bench
