#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dssg/diagnostics.hpp"
#include "dssg/error.hpp"

namespace dssg {

struct MetricDeviation {
  std::string metric;
  double max_deviation = 0.0;
};

struct ComparisonReport {
  std::vector<MetricDeviation> metrics;
  std::optional<double> tolerance;  // unset: informational only

  double worst() const {
    double w = 0.0;
    for (const auto& m : metrics) w = std::max(w, m.max_deviation);
    return w;
  }
  bool passed() const { return !tolerance || worst() <= *tolerance; }
};

namespace detail {

inline std::vector<double> flatten(const TraceRecord& r) {
  std::vector<double> row{static_cast<double>(r.nu), r.gamma, r.consensus_error, r.consensus_rms,
                          r.objective_at_mean, r.stationarity_at_mean, r.stationarity_exact,
                          r.convex_average_norm, r.beta_k_norm, r.delta_m_norm, r.boundedness_max,
                          static_cast<double>(r.bound_violations), static_cast<double>(r.branch_switches)};
  for (Eigen::Index k = 0; k < r.m0_partial.size(); ++k) row.push_back(r.m0_partial(k));
  for (Eigen::Index k = 0; k < r.b0_partial.size(); ++k) row.push_back(r.b0_partial(k));
  return row;
}

inline double deviation(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return 0.0;
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::infinity();
  if (a == b) return 0.0;
  return std::abs(a - b);
}

}  // namespace detail

/// Per-column max |a - b| between two traces of equal length and schema.
/// `metric` is a column name or "all".
inline ComparisonReport compare_runs(const RunTrace& a, const RunTrace& b, const std::string& metric = "all",
                                     std::optional<double> tolerance = std::nullopt) {
  if (a.dimension != b.dimension) throw SchemaMismatch("traces have different dimensions");
  if (a.records.size() != b.records.size()) {
    throw SchemaMismatch("traces have different lengths (" + std::to_string(a.records.size()) + " vs " +
                         std::to_string(b.records.size()) + ")");
  }
  const auto cols = trace_columns(a.dimension);
  std::vector<std::size_t> selected;
  for (std::size_t k = 0; k < cols.size(); ++k)
    if (metric == "all" || cols[k] == metric) selected.push_back(k);
  if (selected.empty()) throw SchemaMismatch("unknown metric '" + metric + "'");

  ComparisonReport report;
  report.tolerance = tolerance;
  for (auto k : selected) report.metrics.push_back({cols[k], 0.0});
  for (std::size_t r = 0; r < a.records.size(); ++r) {
    const auto ra = detail::flatten(a.records[r]);
    const auto rb = detail::flatten(b.records[r]);
    for (std::size_t s = 0; s < selected.size(); ++s) {
      auto& dev = report.metrics[s].max_deviation;
      dev = std::max(dev, detail::deviation(ra[selected[s]], rb[selected[s]]));
    }
  }
  return report;
}

}  // namespace dssg
