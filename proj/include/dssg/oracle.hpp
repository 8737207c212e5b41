#pragma once

// Stochastic subgradient oracle: y = g + noise with g a Clarke selection of the
// agent's objective and noise a zero-mean, variance- and norm-bounded perturbation.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dssg/error.hpp"
#include "dssg/linalg.hpp"
#include "dssg/objectives.hpp"
#include "dssg/random.hpp"

namespace dssg {

enum class NoiseKind { None, GaussianTruncated, UniformBall, Minibatch };

inline std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::GaussianTruncated: return "gaussian";
    case NoiseKind::UniformBall: return "uniform_ball";
    case NoiseKind::Minibatch: return "minibatch";
  }
  return "?";
}

struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  double variance = 0.0;  // R: bound on E|noise|^2 (gaussian / uniform_ball draw exactly this before truncation)
  double bound = std::numeric_limits<double>::infinity();  // B: per-realisation bound on |y|
  double batch_fraction = 1.0;                              // minibatch only
};

struct OracleSample {
  Vector y;
  Vector g;
  Vector noise;
  Selection selection;
  bool bound_violated = false;
};

class NoisyOracle {
 public:
  NoisyOracle() = default;

  explicit NoisyOracle(NoiseModel model) : model_(model) {
    if (!(model_.variance >= 0.0)) throw BadParams("noise variance must be nonnegative");
    if (!(model_.bound > 0.0)) throw BadParams("noise bound B must be positive");
    if (!(model_.batch_fraction > 0.0 && model_.batch_fraction <= 1.0)) {
      throw BadParams("batch fraction must lie in (0,1]");
    }
  }

  const NoiseModel& model() const { return model_; }
  double bound() const { return model_.bound; }
  double variance() const { return model_.variance; }

  /// Draws one estimate at x. All randomness (tie-breaking, noise, batch) comes
  /// from `rng`, in that order.
  OracleSample sample(const AgentObjective& f, const Vector& x, TieRule rule, Rng& rng) const {
    require_dimension(x, f.dimension(), "NoisyOracle::sample");
    OracleSample s;
    s.selection = f.select(x, rule, &rng);
    s.g = f.gradient(s.selection, x);
    const double g_norm = s.g.norm();
    if (g_norm > model_.bound) {
      throw BoundInfeasible("clean subgradient norm " + std::to_string(g_norm) + " exceeds B = " +
                            std::to_string(model_.bound));
    }
    const auto m = static_cast<Eigen::Index>(f.dimension());
    s.noise = Vector::Zero(m);

    switch (model_.kind) {
      case NoiseKind::None:
        break;
      case NoiseKind::GaussianTruncated:
        if (model_.variance > 0.0) {
          std::normal_distribution<double> normal(0.0, std::sqrt(model_.variance / static_cast<double>(m)));
          for (Eigen::Index k = 0; k < m; ++k) s.noise(k) = normal(rng);
          clip(s.noise, model_.bound - g_norm);
        }
        break;
      case NoiseKind::UniformBall:
        if (model_.variance > 0.0) {
          // E|u|^2 = rho^2 m/(m+2) for u uniform in the ball of radius rho.
          const double md = static_cast<double>(m);
          const double rho = std::sqrt(model_.variance * (md + 2.0) / md);
          std::normal_distribution<double> normal;
          std::uniform_real_distribution<double> unif;
          for (Eigen::Index k = 0; k < m; ++k) s.noise(k) = normal(rng);
          const double dir_norm = s.noise.norm();
          const double radius = rho * std::pow(unif(rng), 1.0 / md);
          if (dir_norm > 0.0) s.noise *= radius / dir_norm;
          clip(s.noise, model_.bound - g_norm);
        }
        break;
      case NoiseKind::Minibatch:
        s.noise = minibatch_estimate(f, s.selection, x, rng) - s.g;
        break;
    }
    s.y = s.g + s.noise;
    if (model_.kind != NoiseKind::Minibatch) {
      // Clipping is exact only in real arithmetic; shave off rounding overshoot.
      for (int k = 0; k < 16 && s.y.norm() > model_.bound; ++k) {
        s.noise *= 1.0 - 1e-15 * (1 << k);
        s.y = s.g + s.noise;
      }
    }
    s.bound_violated = s.y.norm() > model_.bound;
    return s;
  }

  /// Number of data terms a minibatch draws for an objective with `data_terms` terms.
  std::size_t batch_size(std::size_t data_terms) const {
    const auto b = static_cast<std::size_t>(std::llround(model_.batch_fraction * static_cast<double>(data_terms)));
    return std::clamp<std::size_t>(b, 1, std::max<std::size_t>(data_terms, 1));
  }

  /// Scaled minibatch gradient for a given subset of data terms (sorted indices).
  static Vector minibatch_gradient(const AgentObjective& f, const Selection& sel, const Vector& x,
                                   const std::vector<std::size_t>& batch) {
    Vector est = Vector::Zero(static_cast<Eigen::Index>(f.dimension()));
    const double scale = static_cast<double>(f.data_term_count()) / static_cast<double>(batch.size());
    for (auto k : batch) f.accumulate_term_gradient(k, sel[k], x, scale, est);
    for (std::size_t k = f.data_term_count(); k < f.term_count(); ++k) f.accumulate_term_gradient(k, sel[k], x, 1.0, est);
    return est;
  }

 private:
  static void clip(Vector& noise, double radius) {
    const double n = noise.norm();
    if (n > radius) noise *= (radius > 0.0 ? radius / n : 0.0);
  }

  Vector minibatch_estimate(const AgentObjective& f, const Selection& sel, const Vector& x, Rng& rng) const {
    const std::size_t total = f.data_term_count();
    if (total == 0) return f.gradient(sel, x);
    const std::size_t b = batch_size(total);
    if (b >= total) return f.gradient(sel, x);
    std::vector<std::size_t> all(total);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> batch;
    batch.reserve(b);
    std::sample(all.begin(), all.end(), std::back_inserter(batch), b, rng);
    std::sort(batch.begin(), batch.end());
    return minibatch_gradient(f, sel, x, batch);
  }

  NoiseModel model_;
};

/// Anything that can stand in for NoisyOracle in verify_assumption2.
template <class O>
concept SubgradientOracle = requires(const O& o, const AgentObjective& f, const Vector& x, Rng& rng) {
  { o.sample(f, x, TieRule::LowestIndex, rng) } -> std::same_as<OracleSample>;
  { o.bound() } -> std::convertible_to<double>;
  { o.variance() } -> std::convertible_to<double>;
};

struct ProbeReport {
  Vector point;
  double mean_noise_norm = 0.0;
  double second_moment = 0.0;
  double max_y_norm = 0.0;
  bool hard_failure = false;         // some |y| > B
  bool statistical_warning = false;  // |empirical mean| > 4 sqrt(R / n_samples)
};

struct Assumption2Report {
  std::vector<ProbeReport> probes;

  bool hard_failure() const {
    return std::any_of(probes.begin(), probes.end(), [](const auto& p) { return p.hard_failure; });
  }
  bool statistical_warning() const {
    return std::any_of(probes.begin(), probes.end(), [](const auto& p) { return p.statistical_warning; });
  }
};

/// Monte Carlo check of the oracle's noise at each probe point.
template <SubgradientOracle O>
Assumption2Report verify_assumption2(const O& oracle, const AgentObjective& f, std::span<const Vector> probe_points,
                                     std::size_t n_samples, Rng& rng, TieRule rule = TieRule::LowestIndex) {
  Assumption2Report report;
  const double threshold = 4.0 * std::sqrt(oracle.variance() / static_cast<double>(n_samples));
  for (const auto& x : probe_points) {
    ProbeReport p;
    p.point = x;
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(f.dimension()));
    double sq = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
      const OracleSample s = oracle.sample(f, x, rule, rng);
      mean += s.noise;
      sq += s.noise.squaredNorm();
      p.max_y_norm = std::max(p.max_y_norm, s.y.norm());
    }
    mean /= static_cast<double>(n_samples);
    p.mean_noise_norm = mean.norm();
    p.second_moment = sq / static_cast<double>(n_samples);
    p.hard_failure = p.max_y_norm > oracle.bound();
    p.statistical_warning = p.mean_noise_norm > threshold;
    report.probes.push_back(std::move(p));
  }
  return report;
}

}  // namespace dssg
