#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dssg/diagnostics.hpp"
#include "dssg/objectives.hpp"
#include "dssg/oracle.hpp"
#include "dssg/random.hpp"
#include "dssg/solver.hpp"
#include "dssg/state.hpp"

namespace dssg {

/// Centralised stochastic subgradient method on the averaged objective:
/// theta+ = theta - gamma (1/n) sum_i y_i(theta), with y_i drawn from the same
/// per-agent streams the distributed run uses. Produces the same trace schema;
/// with one agent the trace is bit-identical to the distributed one.
inline RunTrace run_centralized_baseline(const DistributedProblem& problem, const NoisyOracle& oracle,
                                         const StepsizeSchedule& schedule, const Vector& x0, std::uint64_t n_iters,
                                         std::uint64_t seed, const SolverOptions& options = {}) {
  problem.validate();
  require_dimension(x0, problem.dimension, "run_centralized_baseline");
  if (n_iters == 0) throw BadParams("n_iters must be at least 1");
  const auto m = static_cast<Eigen::Index>(problem.dimension);
  const std::size_t n = problem.agent_count();
  const auto& diag = options.diagnostics;

  RunTrace trace;
  trace.dimension = problem.dimension;
  Vector theta = x0;
  Vector m0 = Vector::Zero(m);
  const Vector b0 = Vector::Zero(m);  // consensus is exact, so beta_k = 0
  std::size_t streak = 0;

  for (std::uint64_t nu = 0; nu < n_iters && !trace.alarms.early_stopped; ++nu) {
    TraceRecord tr;
    tr.nu = nu;
    tr.gamma = schedule(nu);
    tr.objective_at_mean = problem.value(theta);
    if (nu % diag.stationarity_every == 0) {
      const auto st = stationarity_measure(problem, theta, diag.stationarity_band);
      tr.stationarity_at_mean = st.value;
      tr.stationarity_exact = st.exact ? 1.0 : 0.0;
      tr.convex_average_norm = st.convex_average_norm;
      if (!st.exact) ++trace.alarms.stationarity_fallbacks;
      if (options.stop_tolerance > 0.0) {
        streak = st.value < options.stop_tolerance ? streak + 1 : 0;
        if (streak >= options.stop_patience) trace.alarms.early_stopped = true;
      }
    }
    tr.boundedness_max = theta.norm();
    if (tr.boundedness_max > options.safeguard_radius && !trace.alarms.boundedness_alarm) {
      trace.alarms.boundedness_alarm = true;
      trace.alarms.boundedness_alarm_at = nu;
    }

    Vector y_mean, noise_mean;
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng = agent_stream(seed, i, nu);
      const OracleSample s = oracle.sample(problem.agents[i], theta, options.tie_rule, rng);
      tr.bound_violations += s.bound_violated;
      if (i == 0) {
        y_mean = s.y;
        noise_mean = s.noise;
      } else {
        y_mean += s.y;
        noise_mean += s.noise;
      }
    }
    y_mean /= static_cast<double>(n);
    noise_mean /= static_cast<double>(n);

    theta = theta - tr.gamma * y_mean;
    if (options.projection_radius > 0.0 && theta.norm() > options.projection_radius) {
      theta *= options.projection_radius / theta.norm();
    }

    tr.delta_m_norm = noise_mean.norm();
    tr.m0_partial = m0;
    tr.b0_partial = b0;
    m0 += tr.gamma * noise_mean;
    trace.alarms.bound_violations += tr.bound_violations;
    trace.records.push_back(std::move(tr));
  }

  trace.final_x = theta.transpose();
  trace.final_x_bar = theta;
  trace.final_m0 = m0;
  trace.final_b0 = b0;
  trace.final_objective = problem.value(theta);
  const auto st = stationarity_measure(problem, theta, diag.stationarity_band);
  trace.final_stationarity = st.value;
  trace.final_stationarity_exact = st.exact;
  return trace;
}

}  // namespace dssg
