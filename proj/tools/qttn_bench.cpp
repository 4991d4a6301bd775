// Benchmark driver: run / grid / report / verify.
// Exit codes: 0 success, 1 verify bound breached, 2 bad configuration, 3 solver failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "qttn/bench/config.hpp"
#include "qttn/bench/records.hpp"
#include "qttn/bench/report.hpp"
#include "qttn/exact/exact.hpp"

namespace {

using namespace qttn;
using namespace qttn::bench;

constexpr int kExitBreach = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

void print_summary(const BenchmarkRecord& r) {
  if (r.ok)
    std::printf("%s: E = %.12f  time = %.3f s  sweeps = %zu\n", r.config.display_label().c_str(), r.final_energy,
                r.total_wall_time_s, r.sweeps.size());
  else
    std::printf("%s: FAILED after %zu sweeps: %s\n", r.config.display_label().c_str(), r.sweeps.size(),
                r.error.c_str());
}

int cmd_run(const std::string& config, const std::string& out) {
  const RunConfig cfg = parse_run_config(load_json_file(config), default_thread_count());
  const BenchmarkRecord rec = execute(cfg);
  append_record(out, rec);
  print_summary(rec);
  return rec.ok ? 0 : kExitSolver;
}

int cmd_grid(const std::string& config, const std::string& out, int workers) {
  const auto cells = expand_grid(load_json_file(config), default_thread_count());
  if (workers < 1) throw ConfigError("--workers", "must be >= 1");
  int widest = 1;
  for (const auto& c : cells) widest = std::max(widest, c.effective_threads());
  const int allowed = std::max(1, host_cores() / widest);
  if (workers > allowed) {
    std::fprintf(stderr, "note: limiting workers to %d (%d cores, up to %d threads per cell)\n", allowed,
                 host_cores(), widest);
    workers = allowed;
  }
  workers = std::min<int>(workers, static_cast<int>(cells.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failed{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const BenchmarkRecord rec = execute(cells[i]);
      if (!rec.ok) ++failed;
      std::lock_guard lock(io);
      append_record(out, rec);
      print_summary(rec);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::printf("grid: %zu cells, %zu failed\n", cells.size(), failed.load());
  return failed ? kExitSolver : 0;
}

int cmd_report(const std::string& records, const std::string& baseline, double epsilon, const std::string& csv,
               const std::string& plot) {
  const auto rows = build_report(read_records(records), baseline, epsilon);
  std::fputs(render_table(rows).c_str(), stdout);
  auto write = [](const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!(os << text)) throw ConfigError("--out", "cannot write '" + path + "'");
  };
  if (!csv.empty()) write(csv, render_csv(rows));
  if (!plot.empty()) write(plot, render_plot_data(rows));
  return 0;
}

int cmd_verify(const std::string& config, const std::string& out, std::optional<double> bound_flag) {
  const RunConfig cfg = parse_run_config(load_json_file(config), default_thread_count());
  if (cfg.model.N > 4) throw ConfigError("N", "verify supports N <= 4");
  const double bound = bound_flag ? *bound_flag : cfg.bound.value_or(1e-8);
  if (!(bound > 0.0)) throw ConfigError("--bound", "must be > 0");
  const BenchmarkRecord rec = execute(cfg);
  if (!out.empty()) append_record(out, rec);
  if (!rec.ok) {
    print_summary(rec);
    return kExitSolver;
  }
  const double e0 = exact::ground_energy(
      exact::DenseProblem{cfg.model.num_sites(), build_hamiltonian(cfg.model, cfg.mapping)});
  const double rel = std::abs(rec.final_energy - e0) / std::abs(e0);
  std::printf("ttn   energy: %.14f\nexact energy: %.14f\nrelative error: %.3e (bound %.1e)\n%s\n", rec.final_energy,
              e0, rel, bound, rel <= bound ? "PASS" : "FAIL");
  return rel <= bound ? 0 : kExitBreach;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree tensor network ground-state benchmark"};
  app.require_subcommand(1);

  std::string config, out = "records.jsonl", baseline, csv, plot, records;
  double epsilon = kDefaultEpsilon;
  int workers = 1;
  std::optional<double> bound;

  auto* run = app.add_subcommand("run", "Run one configuration and append its record");
  run->add_option("--config", config, "JSON configuration")->required();
  run->add_option("--out", out, "JSON-lines records file (appended)");

  auto* grid = app.add_subcommand("grid", "Run the cartesian product of list-valued keys");
  grid->add_option("--config", config, "JSON configuration with lists")->required();
  grid->add_option("--out", out, "JSON-lines records file (appended)");
  grid->add_option("--workers", workers, "Concurrent cells (workers x threads <= cores)");

  auto* report = app.add_subcommand("report", "Energy-above-best and speedup table");
  report->add_option("records,--records", records, "JSON-lines records file");
  report->add_option("--baseline", baseline, "Baseline: exact label or key=value (e.g. threads=1)");
  report->add_option("--epsilon", epsilon, "Floor for energy above best");
  report->add_option("--out", csv, "CSV output path");
  report->add_option("--plot", plot, "Plot-data output path");

  auto* verify = app.add_subcommand("verify", "Compare against exact diagonalization");
  std::string verify_out;
  verify->add_option("--config", config, "JSON configuration (N <= 4)")->required();
  verify->add_option("--out", verify_out, "Optional records file");
  verify->add_option("--bound", bound, "Relative error bound (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, out);
    if (*grid) return cmd_grid(config, out, workers);
    if (*report) {
      if (records.empty()) throw ConfigError("--records", "required");
      return cmd_report(records, baseline, epsilon, csv, plot);
    }
    if (*verify) return cmd_verify(config, verify_out, bound);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const qttn::ArgumentError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return 0;
}
