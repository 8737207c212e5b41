#pragma once

// Distributed stochastic subgradient iteration: every agent queries its noisy
// oracle, takes a local step and gossip-averages with its neighbours.

#include <cinttypes>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "dssg/diagnostics.hpp"
#include "dssg/error.hpp"
#include "dssg/linalg.hpp"
#include "dssg/network.hpp"
#include "dssg/objectives.hpp"
#include "dssg/oracle.hpp"
#include "dssg/random.hpp"
#include "dssg/state.hpp"

namespace dssg {

struct DiagnosticsOptions {
  std::size_t stationarity_every = 10;
  ActiveBand stationarity_band = ActiveBand::absolute_only(1e-3);
};

struct SolverOptions {
  UpdateRule update = UpdateRule::AdaptThenCombine;
  TieRule tie_rule = TieRule::LowestIndex;
  double projection_radius = 0.0;  // > 0 projects every agent onto the ball after mixing
  double safeguard_radius = std::numeric_limits<double>::infinity();
  double stop_tolerance = 0.0;     // > 0 enables early stopping on stationarity at the mean
  std::size_t stop_patience = 100;  // consecutive stationarity checks below stop_tolerance
  DiagnosticsOptions diagnostics;
};

inline SolverState initial_state(std::size_t n_agents, const Vector& x0, std::uint64_t seed) {
  SolverState s;
  s.x.resize(static_cast<Eigen::Index>(n_agents), x0.size());
  for (Eigen::Index i = 0; i < s.x.rows(); ++i) s.x.row(i) = x0.transpose();
  s.x_bar = x0;
  s.nu = 0;
  s.seed = seed;
  return s;
}

namespace detail {

inline void check_compatible(const SolverState& state, const DistributedProblem& problem, const MixingMatrix& mixing) {
  if (problem.agent_count() != mixing.size()) {
    throw DimensionMismatch("problem has " + std::to_string(problem.agent_count()) + " agents, mixing matrix " +
                            std::to_string(mixing.size()));
  }
  if (static_cast<std::size_t>(state.x.rows()) != problem.agent_count() ||
      static_cast<std::size_t>(state.x.cols()) != problem.dimension) {
    throw DimensionMismatch("solver state shape does not match the problem");
  }
}

inline void project_rows(AgentMatrix& x, double radius) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double nrm = x.row(i).norm();
    if (nrm > radius) x.row(i) *= radius / nrm;
  }
}

}  // namespace detail

/// One synchronous round. Oracle samples for agent i at iteration nu come from
/// agent_stream(seed, i, nu), so the result does not depend on agent order.
inline StepRecord step(SolverState& state, const DistributedProblem& problem, const MixingMatrix& mixing,
                       const NoisyOracle& oracle, const StepsizeSchedule& schedule, const SolverOptions& options = {}) {
  detail::check_compatible(state, problem, mixing);
  const std::size_t n = problem.agent_count();
  StepRecord rec;
  rec.nu = state.nu;
  rec.gamma = schedule(state.nu);
  rec.x_before = state.x;
  rec.x_bar_before = state.x_bar;
  rec.samples.reserve(n);

  AgentMatrix y(state.x.rows(), state.x.cols());
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = agent_stream(state.seed, i, state.nu);
    const Vector xi = state.x.row(static_cast<Eigen::Index>(i)).transpose();
    try {
      rec.samples.push_back(oracle.sample(problem.agents[i], xi, options.tie_rule, rng));
    } catch (const BoundInfeasible&) {
      throw;
    } catch (const Error& e) {
      throw OracleFailure("agent " + std::to_string(i) + ": " + e.what());
    }
    y.row(static_cast<Eigen::Index>(i)) = rec.samples.back().y.transpose();
  }

  AgentMatrix next;
  if (options.update == UpdateRule::AdaptThenCombine) {
    const AgentMatrix local = state.x - rec.gamma * y;
    mixing.mix(local, next);
  } else {
    mixing.mix(state.x, next);
    next -= rec.gamma * y;
  }
  if (options.projection_radius > 0.0) detail::project_rows(next, options.projection_radius);

  state.x = std::move(next);
  state.x_bar = row_average(state.x);
  ++state.nu;
  rec.decomposition = decompose_update(rec, problem);
  return rec;
}

using StepCallback = std::function<void(const StepRecord&, const TraceRecord&)>;

/// Runs the iteration while accumulating the diagnostics trace. Supports
/// checkpoint/resume with bit-identical continuation.
class Solver {
 public:
  Solver(const DistributedProblem& problem, const MixingMatrix& mixing, NoisyOracle oracle, StepsizeSchedule schedule,
         SolverOptions options = {})
      : problem_(problem), mixing_(mixing), oracle_(oracle), schedule_(schedule), options_(options) {
    problem_.validate();
    if (problem_.agent_count() != mixing_.size()) {
      throw DimensionMismatch("problem has " + std::to_string(problem_.agent_count()) + " agents, mixing matrix " +
                              std::to_string(mixing_.size()));
    }
    mixing_.spectral().require();
    if (options_.diagnostics.stationarity_every == 0) throw BadParams("stationarity_every must be positive");
  }

  /// All agents start at x0 (equal initialisation).
  void initialize(const Vector& x0, std::uint64_t seed) {
    require_dimension(x0, problem_.dimension, "Solver::initialize");
    state_ = initial_state(problem_.agent_count(), x0, seed);
    const auto m = static_cast<Eigen::Index>(problem_.dimension);
    m0_ = Vector::Zero(m);
    b0_ = Vector::Zero(m);
    records_.clear();
    alarms_ = {};
    stop_streak_ = 0;
    stopped_ = false;
  }

  const SolverState& state() const { return state_; }
  bool stopped() const { return stopped_; }
  const std::vector<TraceRecord>& records() const { return records_; }

  StepRecord step() {
    TraceRecord tr;
    tr.nu = state_.nu;
    tr.gamma = schedule_(state_.nu);
    const ConsensusError ce = consensus_error(state_);
    tr.consensus_error = ce.max;
    tr.consensus_rms = ce.rms;
    tr.objective_at_mean = problem_.value(state_.x_bar);
    if (state_.nu % options_.diagnostics.stationarity_every == 0) check_stationarity(tr);
    for (Eigen::Index i = 0; i < state_.x.rows(); ++i) tr.boundedness_max = std::max(tr.boundedness_max, state_.x.row(i).norm());
    if (tr.boundedness_max > options_.safeguard_radius && !alarms_.boundedness_alarm) {
      alarms_.boundedness_alarm = true;
      alarms_.boundedness_alarm_at = state_.nu;
    }

    StepRecord rec = dssg::step(state_, problem_, mixing_, oracle_, schedule_, options_);

    for (const auto& s : rec.samples) tr.bound_violations += s.bound_violated;
    tr.branch_switches = rec.decomposition.branch_switches;
    tr.beta_k_norm = rec.decomposition.beta_k.norm();
    tr.delta_m_norm = rec.decomposition.delta_m.norm();
    tr.m0_partial = m0_;
    tr.b0_partial = b0_;
    m0_ += rec.gamma * rec.decomposition.delta_m;
    b0_ += rec.gamma * rec.decomposition.beta_k;
    alarms_.bound_violations += tr.bound_violations;
    alarms_.branch_switches += tr.branch_switches;
    records_.push_back(tr);
    if (callback_) callback_(rec, records_.back());
    return rec;
  }

  /// Advances up to n_iters iterations; returns early once the stopping rule fires.
  void advance(std::uint64_t n_iters, StepCallback callback = {}) {
    callback_ = std::move(callback);
    for (std::uint64_t k = 0; k < n_iters && !stopped_; ++k) step();
    callback_ = {};
  }

  RunTrace trace() const {
    RunTrace t;
    t.dimension = problem_.dimension;
    t.records = records_;
    t.final_x = state_.x;
    t.final_x_bar = state_.x_bar;
    t.final_m0 = m0_;
    t.final_b0 = b0_;
    t.final_consensus_error = consensus_error(state_).max;
    t.final_objective = problem_.value(state_.x_bar);
    const auto st = stationarity_measure(problem_, state_.x_bar, options_.diagnostics.stationarity_band);
    t.final_stationarity = st.value;
    t.final_stationarity_exact = st.exact;
    t.alarms = alarms_;
    return t;
  }

  // Checkpoint: iteration index, seed (which with the index fixes every random
  // stream), agent iterates and diagnostic accumulators, all as hex floats.
  void save_checkpoint(std::ostream& os) const {
    os << "dssg-checkpoint 1\n";
    os << "nu " << state_.nu << "\nseed " << state_.seed << "\n";
    os << "shape " << state_.x.rows() << ' ' << state_.x.cols() << "\n";
    os << "stop_streak " << stop_streak_ << ' ' << (stopped_ ? 1 : 0) << "\n";
    os << "alarms " << alarms_.bound_violations << ' ' << alarms_.boundedness_alarm << ' '
       << alarms_.boundedness_alarm_at << ' ' << alarms_.stationarity_fallbacks << ' ' << alarms_.branch_switches
       << ' ' << alarms_.early_stopped << "\n";
    for (Eigen::Index i = 0; i < state_.x.rows(); ++i) {
      os << "x";
      for (Eigen::Index k = 0; k < state_.x.cols(); ++k) put_hex(os, state_.x(i, k));
      os << "\n";
    }
    os << "xbar";
    for (Eigen::Index k = 0; k < state_.x_bar.size(); ++k) put_hex(os, state_.x_bar(k));
    os << "\nm0";
    for (Eigen::Index k = 0; k < m0_.size(); ++k) put_hex(os, m0_(k));
    os << "\nb0";
    for (Eigen::Index k = 0; k < b0_.size(); ++k) put_hex(os, b0_(k));
    os << "\n";
  }

  /// Restores a checkpoint. Trace records before the checkpoint are not restored.
  void load_checkpoint(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "dssg-checkpoint" || version != 1) throw FormatError("not a checkpoint");
    SolverState s;
    Eigen::Index rows = 0, cols = 0;
    expect(is, "nu");
    is >> s.nu;
    expect(is, "seed");
    is >> s.seed;
    expect(is, "shape");
    is >> rows >> cols;
    if (static_cast<std::size_t>(rows) != problem_.agent_count() || static_cast<std::size_t>(cols) != problem_.dimension) {
      throw DimensionMismatch("checkpoint shape does not match the problem");
    }
    int stopped = 0;
    expect(is, "stop_streak");
    is >> stop_streak_ >> stopped;
    expect(is, "alarms");
    is >> alarms_.bound_violations >> alarms_.boundedness_alarm >> alarms_.boundedness_alarm_at >>
        alarms_.stationarity_fallbacks >> alarms_.branch_switches >> alarms_.early_stopped;
    s.x.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      expect(is, "x");
      for (Eigen::Index k = 0; k < cols; ++k) s.x(i, k) = get_hex(is);
    }
    s.x_bar.resize(cols);
    m0_.resize(cols);
    b0_.resize(cols);
    expect(is, "xbar");
    for (Eigen::Index k = 0; k < cols; ++k) s.x_bar(k) = get_hex(is);
    expect(is, "m0");
    for (Eigen::Index k = 0; k < cols; ++k) m0_(k) = get_hex(is);
    expect(is, "b0");
    for (Eigen::Index k = 0; k < cols; ++k) b0_(k) = get_hex(is);
    if (!is) throw FormatError("truncated checkpoint");
    state_ = std::move(s);
    stopped_ = stopped != 0;
    records_.clear();
  }

 private:
  void check_stationarity(TraceRecord& tr) {
    const auto st = stationarity_measure(problem_, state_.x_bar, options_.diagnostics.stationarity_band);
    tr.stationarity_at_mean = st.value;
    tr.stationarity_exact = st.exact ? 1.0 : 0.0;
    tr.convex_average_norm = st.convex_average_norm;
    if (!st.exact) ++alarms_.stationarity_fallbacks;
    if (options_.stop_tolerance > 0.0) {
      stop_streak_ = st.value < options_.stop_tolerance ? stop_streak_ + 1 : 0;
      if (stop_streak_ >= options_.stop_patience) {
        stopped_ = true;
        alarms_.early_stopped = true;
      }
    }
  }

  static void put_hex(std::ostream& os, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, " %a", v);
    os << buf;
  }

  static double get_hex(std::istream& is) {
    std::string tok;
    is >> tok;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0') throw FormatError("bad number in checkpoint: '" + tok + "'");
    return v;
  }

  static void expect(std::istream& is, const char* key) {
    std::string tok;
    if (!(is >> tok) || tok != key) throw FormatError(std::string("checkpoint: expected '") + key + "'");
  }

  const DistributedProblem& problem_;
  const MixingMatrix& mixing_;
  NoisyOracle oracle_;
  StepsizeSchedule schedule_;
  SolverOptions options_;

  SolverState state_;
  Vector m0_, b0_;
  std::vector<TraceRecord> records_;
  RunAlarms alarms_;
  std::size_t stop_streak_ = 0;
  bool stopped_ = false;
  StepCallback callback_;
};

/// Executes n_iters iterations from the equal start x0 and returns the trace.
inline RunTrace run(const DistributedProblem& problem, const MixingMatrix& mixing, const NoisyOracle& oracle,
                    const StepsizeSchedule& schedule, const Vector& x0, std::uint64_t n_iters, std::uint64_t seed,
                    const SolverOptions& options = {}, StepCallback callback = {}) {
  if (n_iters == 0) throw BadParams("n_iters must be at least 1");
  Solver solver(problem, mixing, oracle, schedule, options);
  solver.initialize(x0, seed);
  solver.advance(n_iters, std::move(callback));
  return solver.trace();
}

}  // namespace dssg
