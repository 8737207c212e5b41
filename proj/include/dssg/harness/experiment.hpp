#pragma once

// Seeded experiment runs: per-seed traces and final iterates on disk plus a
// summary with per-metric median and IQR across seeds.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "dssg/catalog.hpp"
#include "dssg/diagnostics.hpp"
#include "dssg/harness/baseline.hpp"
#include "dssg/harness/config.hpp"
#include "dssg/solver.hpp"

namespace dssg {

enum ExitStatus : int { kExitClean = 0, kExitConfig = 1, kExitRuntime = 2 };

inline constexpr const char* kOutputDirEnv = "DSSG_OUTPUT_DIR";

/// Output directory: explicit value, else run.output, else $DSSG_OUTPUT_DIR, else "dssg_out".
inline std::string resolve_output_dir(const std::string& explicit_dir, const ExperimentConfig& config) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (!config.get("run.output").empty()) return config.get("run.output");
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "dssg_out";
}

struct SeedSummary {
  std::uint64_t seed = 0;
  double final_consensus_error = 0.0;
  double final_stationarity = 0.0;
  double final_objective = 0.0;
  bool final_stationarity_exact = true;
  RunAlarms alarms;
};

struct Quartiles {
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

/// Linear-interpolation quartiles (type 7).
inline Quartiles quartiles(std::vector<double> v) {
  Quartiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  return q;
}

namespace detail {

inline std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_final(const std::string& path, const RunTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "agent";
  for (std::size_t k = 0; k < trace.dimension; ++k) out << ",x_" << k;
  out << '\n';
  for (Eigen::Index i = 0; i < trace.final_x.rows(); ++i) {
    out << i + 1;
    for (Eigen::Index k = 0; k < trace.final_x.cols(); ++k) out << ',' << real(trace.final_x(i, k));
    out << '\n';
  }
  out << "mean";
  for (Eigen::Index k = 0; k < trace.final_x_bar.size(); ++k) out << ',' << real(trace.final_x_bar(k));
  out << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline void write_figure_csv(const std::string& path, const RunTrace& trace, double TraceRecord::*field,
                             const char* name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "nu," << name << '\n';
  for (const auto& r : trace.records) {
    if (std::isnan(r.*field)) continue;
    out << r.nu << ',' << real(r.*field) << '\n';
  }
}

inline SeedSummary summarize(std::uint64_t seed, const RunTrace& t) {
  return {seed, t.final_consensus_error, t.final_stationarity, t.final_objective, t.final_stationarity_exact,
          t.alarms};
}

inline void write_summary(std::ostream& os, const std::vector<SeedSummary>& rows) {
  os << "seed,final_consensus_error,final_stationarity,final_stationarity_exact,final_objective,"
        "bound_violations,boundedness_alarm,stationarity_fallbacks,branch_switches,early_stopped\n";
  for (const auto& r : rows) {
    os << r.seed << ',' << real(r.final_consensus_error) << ',' << real(r.final_stationarity) << ','
       << (r.final_stationarity_exact ? 1 : 0) << ',' << real(r.final_objective) << ',' << r.alarms.bound_violations
       << ',' << (r.alarms.boundedness_alarm ? 1 : 0) << ',' << r.alarms.stationarity_fallbacks << ','
       << r.alarms.branch_switches << ',' << (r.alarms.early_stopped ? 1 : 0) << '\n';
  }
  os << "\nmetric,median,q1,q3,iqr\n";
  const std::pair<const char*, double SeedSummary::*> metrics[] = {
      {"final_consensus_error", &SeedSummary::final_consensus_error},
      {"final_stationarity", &SeedSummary::final_stationarity},
      {"final_objective", &SeedSummary::final_objective}};
  for (const auto& [name, field] : metrics) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.*field);
    const auto q = quartiles(v);
    os << name << ',' << real(q.median) << ',' << real(q.q1) << ',' << real(q.q3) << ',' << real(q.iqr()) << '\n';
  }
}

}  // namespace detail

struct ExperimentResult {
  std::string output_dir;
  std::vector<SeedSummary> seeds;
};

/// Runs every seed of a validated configuration and writes
///   data.csv, trace_seed<k>.csv, final_seed<k>.csv, summary.csv
/// and, with run.figure_csvs = true, figure_{consensus,stationarity,objective}_seed<k>.csv.
inline ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                       const std::vector<std::uint64_t>& seed_override = {},
                                       std::ostream* log = nullptr) {
  const BuiltExperiment ex = build_experiment(config);
  const auto seeds = seed_override.empty() ? ex.seeds : seed_override;
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  const fs::path dir(out_dir);

  {
    std::ofstream data(dir / "data.csv", std::ios::binary);
    if (!data) throw IoError("cannot write data.csv");
    write_data_csv(data, ex.problem);
  }

  ExperimentResult result;
  result.output_dir = out_dir;
  for (auto seed : seeds) {
    const RunTrace trace = run(ex.problem, *ex.mixing, ex.oracle, *ex.schedule, ex.x0, ex.iterations, seed, ex.options);
    const std::string tag = "seed" + std::to_string(seed);
    emit_csv(trace, (dir / ("trace_" + tag + ".csv")).string());
    detail::write_final((dir / ("final_" + tag + ".csv")).string(), trace);
    if (ex.figure_csvs) {
      detail::write_figure_csv((dir / ("figure_consensus_" + tag + ".csv")).string(), trace,
                               &TraceRecord::consensus_error, "consensus_error");
      detail::write_figure_csv((dir / ("figure_stationarity_" + tag + ".csv")).string(), trace,
                               &TraceRecord::stationarity_at_mean, "stationarity_at_mean");
      detail::write_figure_csv((dir / ("figure_objective_" + tag + ".csv")).string(), trace,
                               &TraceRecord::objective_at_mean, "objective_at_mean");
    }
    result.seeds.push_back(detail::summarize(seed, trace));
    if (log) {
      const auto& s = result.seeds.back();
      *log << "seed " << seed << ": consensus_error " << detail::real(s.final_consensus_error) << ", stationarity "
           << detail::real(s.final_stationarity) << ", objective " << detail::real(s.final_objective);
      if (s.alarms.bound_violations) *log << ", bound_violations " << s.alarms.bound_violations;
      if (s.alarms.boundedness_alarm) *log << ", boundedness alarm at " << s.alarms.boundedness_alarm_at;
      *log << '\n';
    }
  }

  std::ofstream summary(dir / "summary.csv", std::ios::binary);
  if (!summary) throw IoError("cannot write summary.csv");
  detail::write_summary(summary, result.seeds);
  return result;
}

/// Centralised baseline for the first configured seed (or `seed` if given).
inline RunTrace run_baseline(const ExperimentConfig& config, std::optional<std::uint64_t> seed = std::nullopt) {
  const BuiltExperiment ex = build_experiment(config);
  return run_centralized_baseline(ex.problem, ex.oracle, *ex.schedule, ex.x0, ex.iterations,
                                  seed.value_or(ex.seeds.front()), ex.options);
}

}  // namespace dssg
