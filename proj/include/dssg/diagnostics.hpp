#pragma once

// Per-iteration diagnostics: consensus error, the decomposition of the mean
// update into gradient-at-mean, consensus bias and noise, the partial sums
// M0/B0 of the latter two, their oscillation over algorithm-time windows, and
// the CSV trace format.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dssg/error.hpp"
#include "dssg/linalg.hpp"
#include "dssg/objectives.hpp"
#include "dssg/state.hpp"

namespace dssg {

struct ConsensusError {
  double max = 0.0;  // max_i |x_i - x_bar|
  double rms = 0.0;  // sqrt(mean_i |x_i - x_bar|^2)
};

inline ConsensusError consensus_error(const AgentMatrix& x, const Vector& x_bar) {
  ConsensusError e;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double d2 = (x.row(i).transpose() - x_bar).squaredNorm();
    sq += d2;
    e.max = std::max(e.max, std::sqrt(d2));
  }
  e.rms = std::sqrt(sq / static_cast<double>(x.rows()));
  return e;
}

inline ConsensusError consensus_error(const SolverState& state) { return consensus_error(state.x, state.x_bar); }

/// Splits the realised mean update direction (1/n) sum_i y_i into
/// g_at_mean = (1/n) sum_i g_i(x_bar), beta_k = (1/n) sum_i (g_i(x_i) - g_i(x_bar))
/// and delta_m = (1/n) sum_i noise_i, where g_i(.) is agent i's selected branch.
inline UpdateDecomposition decompose_update(const StepRecord& record, const DistributedProblem& problem) {
  const std::size_t n = record.samples.size();
  if (n != problem.agent_count()) throw DimensionMismatch("decompose_update: sample count != agent count");
  const auto m = static_cast<Eigen::Index>(problem.dimension);
  UpdateDecomposition d;
  d.g_at_mean = Vector::Zero(m);
  d.beta_k = Vector::Zero(m);
  d.delta_m = Vector::Zero(m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& agent = problem.agents[i];
    const auto& s = record.samples[i];
    const Vector at_mean = agent.gradient(s.selection, record.x_bar_before);
    if (i == 0) {
      d.g_at_mean = at_mean;
      d.beta_k = s.g - at_mean;
      d.delta_m = s.noise;
    } else {
      d.g_at_mean += at_mean;
      d.beta_k += s.g - at_mean;
      d.delta_m += s.noise;
    }
    const auto active = agent.active_sets(record.x_bar_before);
    bool switched = false;
    for (std::size_t k = 0; k < active.size() && !switched; ++k) {
      for (BranchId b : s.selection[k]) {
        if (!std::binary_search(active[k].begin(), active[k].end(), b)) {
          switched = true;
          break;
        }
      }
    }
    d.branch_switches += switched;
  }
  const double nd = static_cast<double>(n);
  d.g_at_mean /= nd;
  d.beta_k /= nd;
  d.delta_m /= nd;
  return d;
}

struct TraceRecord {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  std::uint64_t nu = 0;
  double gamma = 0.0;
  double consensus_error = 0.0;
  double consensus_rms = 0.0;
  double objective_at_mean = 0.0;
  double stationarity_at_mean = kUnset;  // NaN on iterations without a stationarity check
  double stationarity_exact = kUnset;    // 1 exact, 0 convex-average fallback
  double convex_average_norm = kUnset;
  double beta_k_norm = 0.0;
  double delta_m_norm = 0.0;
  double boundedness_max = 0.0;  // max_i |x_i|
  std::uint64_t bound_violations = 0;
  std::uint64_t branch_switches = 0;
  Vector m0_partial;  // sum_{k<nu} gamma^k delta_m_k
  Vector b0_partial;  // sum_{k<nu} gamma^k beta_k
};

struct RunAlarms {
  std::uint64_t bound_violations = 0;
  bool boundedness_alarm = false;
  std::uint64_t boundedness_alarm_at = 0;
  std::uint64_t stationarity_fallbacks = 0;
  std::uint64_t branch_switches = 0;
  bool early_stopped = false;
};

struct RunTrace {
  std::size_t dimension = 0;
  std::vector<TraceRecord> records;

  // State after the last step; empty when the trace was parsed from CSV.
  AgentMatrix final_x;
  Vector final_x_bar;
  Vector final_m0;
  Vector final_b0;
  double final_consensus_error = 0.0;
  double final_objective = 0.0;
  double final_stationarity = 0.0;
  bool final_stationarity_exact = true;
  RunAlarms alarms;
};

enum class PartialSum { M0, B0 };

namespace detail {

inline const Vector& partial_at(const RunTrace& trace, std::size_t k, PartialSum which) {
  if (k < trace.records.size()) {
    return which == PartialSum::M0 ? trace.records[k].m0_partial : trace.records[k].b0_partial;
  }
  return which == PartialSum::M0 ? trace.final_m0 : trace.final_b0;
}

// Algorithm times t_k = sum_{i<k} gamma^i for every index whose partial sum is known.
inline std::vector<double> algorithm_times(const RunTrace& trace) {
  std::vector<double> t{0.0};
  const bool has_final = trace.final_m0.size() > 0;
  const std::size_t known = trace.records.size() + (has_final ? 1 : 0);
  for (std::size_t k = 1; k < known; ++k) t.push_back(t.back() + trace.records[k - 1].gamma);
  if (trace.records.empty()) t.clear();
  return t;
}

// Smallest k with t_k > t, or t.size() if none.
inline std::size_t first_index_after(const std::vector<double>& times, double t) {
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

}  // namespace detail

/// max over s in [0, T] of |S(jT + s) - S(jT)| for S = M0 or B0, where S(t) is
/// the partial sum up to the first iteration whose cumulative stepsize exceeds t.
inline double oscillation_monitor(const RunTrace& trace, double T, std::size_t window, PartialSum which) {
  if (!(T > 0.0)) throw WindowOutOfRange("window length must be positive");
  const auto times = detail::algorithm_times(trace);
  const std::size_t lo = detail::first_index_after(times, static_cast<double>(window) * T);
  const std::size_t hi = detail::first_index_after(times, static_cast<double>(window + 1) * T);
  if (hi >= times.size()) {
    throw WindowOutOfRange("window " + std::to_string(window) + " of length " + std::to_string(T) +
                           " extends past algorithm time " + (times.empty() ? "0" : std::to_string(times.back())));
  }
  const Vector& anchor = detail::partial_at(trace, lo, which);
  double worst = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) worst = std::max(worst, (detail::partial_at(trace, k, which) - anchor).norm());
  return worst;
}

/// oscillation_monitor for every window the trace fully covers.
inline std::vector<double> oscillation_window_maxima(const RunTrace& trace, double T, PartialSum which) {
  std::vector<double> out;
  for (std::size_t j = 0;; ++j) {
    try {
      out.push_back(oscillation_monitor(trace, T, j, which));
    } catch (const WindowOutOfRange&) {
      break;
    }
  }
  return out;
}

// CSV trace format. Columns, in order:
//   nu, gamma, consensus_error, consensus_rms, objective_at_mean,
//   stationarity_at_mean, stationarity_exact, convex_average_norm,
//   beta_k_norm, delta_m_norm, boundedness_max, bound_violations,
//   branch_switches, M0_0..M0_{m-1}, B0_0..B0_{m-1}
// Reals use 17 significant digits; unset values print as "nan".

inline const std::vector<std::string>& trace_scalar_columns() {
  static const std::vector<std::string> cols{
      "nu",           "gamma",          "consensus_error", "consensus_rms",    "objective_at_mean",
      "stationarity_at_mean", "stationarity_exact", "convex_average_norm", "beta_k_norm", "delta_m_norm",
      "boundedness_max", "bound_violations", "branch_switches"};
  return cols;
}

inline std::vector<std::string> trace_columns(std::size_t dimension) {
  auto cols = trace_scalar_columns();
  for (std::size_t k = 0; k < dimension; ++k) cols.push_back("M0_" + std::to_string(k));
  for (std::size_t k = 0; k < dimension; ++k) cols.push_back("B0_" + std::to_string(k));
  return cols;
}

namespace detail {

inline void put_real(std::ostream& os, double v) {
  char buf[40];
  if (std::isnan(v)) {
    os << "nan";
    return;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

inline double parse_real(const std::string& cell) {
  if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') throw FormatError("trace CSV: bad number '" + cell + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const RunTrace& trace) {
  const auto cols = trace_columns(trace.dimension);
  for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
  os << '\n';
  for (const auto& r : trace.records) {
    os << r.nu;
    for (double v : {r.gamma, r.consensus_error, r.consensus_rms, r.objective_at_mean, r.stationarity_at_mean,
                     r.stationarity_exact, r.convex_average_norm, r.beta_k_norm, r.delta_m_norm, r.boundedness_max}) {
      os << ',';
      detail::put_real(os, v);
    }
    os << ',' << r.bound_violations << ',' << r.branch_switches;
    for (const Vector* v : {&r.m0_partial, &r.b0_partial}) {
      for (Eigen::Index k = 0; k < v->size(); ++k) {
        os << ',';
        detail::put_real(os, (*v)(k));
      }
    }
    os << '\n';
  }
}

inline void emit_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, trace);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline RunTrace parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("trace CSV: missing header");
  const auto header = detail::split_csv_line(line);
  const std::size_t scalars = trace_scalar_columns().size();
  if (header.size() < scalars || (header.size() - scalars) % 2 != 0) {
    throw SchemaMismatch("trace CSV: unexpected column count " + std::to_string(header.size()));
  }
  RunTrace trace;
  trace.dimension = (header.size() - scalars) / 2;
  if (header != trace_columns(trace.dimension)) throw SchemaMismatch("trace CSV: header does not match schema");
  const auto m = static_cast<Eigen::Index>(trace.dimension);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) throw FormatError("trace CSV: ragged row");
    TraceRecord r;
    r.nu = std::stoull(cells[0]);
    double* reals[] = {&r.gamma, &r.consensus_error, &r.consensus_rms, &r.objective_at_mean,
                       &r.stationarity_at_mean, &r.stationarity_exact, &r.convex_average_norm,
                       &r.beta_k_norm, &r.delta_m_norm, &r.boundedness_max};
    for (std::size_t k = 0; k < 10; ++k) *reals[k] = detail::parse_real(cells[k + 1]);
    r.bound_violations = std::stoull(cells[11]);
    r.branch_switches = std::stoull(cells[12]);
    r.m0_partial.resize(m);
    r.b0_partial.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      r.m0_partial(k) = detail::parse_real(cells[scalars + static_cast<std::size_t>(k)]);
      r.b0_partial(k) = detail::parse_real(cells[scalars + trace.dimension + static_cast<std::size_t>(k)]);
    }
    trace.records.push_back(std::move(r));
  }
  return trace;
}

inline RunTrace read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_csv(in);
}

}  // namespace dssg
