#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dssg/error.hpp"
#include "dssg/linalg.hpp"
#include "dssg/oracle.hpp"

namespace dssg {

/// gamma^nu = a / (b + nu)^p. Only constructible through validate_schedule.
class StepsizeSchedule {
 public:
  double a() const { return a_; }
  double b() const { return b_; }
  double p() const { return p_; }

  double operator()(std::uint64_t nu) const { return a_ / std::pow(b_ + static_cast<double>(nu), p_); }

 private:
  StepsizeSchedule(double a, double b, double p) : a_(a), b_(b), p_(p) {}
  friend StepsizeSchedule validate_schedule(double a, double b, double p);

  double a_, b_, p_;
};

/// Accepts iff a > 0, b >= 1 and p in (1/2, 1]; for that family sum gamma = inf
/// and sum gamma^2 < inf hold analytically.
inline StepsizeSchedule validate_schedule(double a, double b, double p) {
  if (!(a > 0.0) || !std::isfinite(a)) throw AssumptionViolated("stepsize scale a must be positive and finite");
  if (!(b >= 1.0) || !std::isfinite(b)) throw AssumptionViolated("stepsize offset b must be >= 1");
  if (!(p > 0.5)) {
    throw AssumptionViolated("sum of squared stepsizes diverges for p = " + std::to_string(p) +
                             " (square-summability needs p > 1/2)");
  }
  if (!(p <= 1.0)) {
    throw AssumptionViolated("sum of stepsizes converges for p = " + std::to_string(p) +
                             " (non-summability needs p <= 1)");
  }
  return {a, b, p};
}

enum class UpdateRule {
  AdaptThenCombine,  // x+ = (W (x) I)(x - gamma y)
  OwnGradient,       // x+_i = sum_j W_ij (x_j - gamma y_i)
};

struct SolverState {
  AgentMatrix x;  // n x m
  Vector x_bar;
  std::uint64_t nu = 0;
  std::uint64_t seed = 0;
};

/// g_at_mean + beta_k + delta_m equals the mean of the agents' oracle outputs.
struct UpdateDecomposition {
  Vector g_at_mean;
  Vector beta_k;
  Vector delta_m;
  std::size_t branch_switches = 0;  // agents whose selected branch is inactive at the mean iterate
};

struct StepRecord {
  std::uint64_t nu = 0;
  double gamma = 0.0;
  AgentMatrix x_before;
  Vector x_bar_before;
  std::vector<OracleSample> samples;
  UpdateDecomposition decomposition;
};

}  // namespace dssg
