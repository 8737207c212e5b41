#pragma once

// Per-agent objectives written as maxima of smooth pieces, their active sets and
// Clarke subgradient selections.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dssg/error.hpp"
#include "dssg/linalg.hpp"
#include "dssg/random.hpp"

namespace dssg {

using BranchId = std::uint64_t;

/// Width of the band below the maximum inside which a piece counts as active:
/// absolute + relative * |f(x)|.
struct ActiveBand {
  double absolute = 1e-9;
  double relative = 1e-9;

  double at(double fx) const { return absolute + relative * std::abs(fx); }

  static ActiveBand exact() { return {0.0, 0.0}; }
  static ActiveBand absolute_only(double tol) { return {tol, 0.0}; }
};

enum class TieRule { LowestIndex, UniformRandom, ConvexAverage };

/// A function that agrees, around every point, with one of a family of smooth
/// pieces indexed by BranchId. Each piece's gradient is defined everywhere, so a
/// branch chosen at one point can be evaluated at another.
class PiecewiseSmoothTerm {
 public:
  virtual ~PiecewiseSmoothTerm() = default;

  virtual std::size_t dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  /// Branches attaining value(x) within band.at(value(x)); ascending, never empty.
  virtual std::vector<BranchId> active_branches(const Vector& x, const ActiveBand& band) const = 0;
  virtual double branch_value(BranchId branch, const Vector& x) const = 0;
  /// out += scale * grad(piece `branch`)(x)
  virtual void accumulate_branch_gradient(BranchId branch, const Vector& x, double scale, Vector& out) const = 0;
  /// Lipschitz constant shared by every piece's gradient; +inf when no global bound exists.
  virtual double lipschitz() const = 0;
};

using TermPtr = std::shared_ptr<const PiecewiseSmoothTerm>;

struct SmoothComponent {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double lipschitz_grad_bound = 0.0;
};

/// f(x) = max_j f_j(x) over an explicit list of smooth components.
class MaxOfSmoothObjective final : public PiecewiseSmoothTerm {
 public:
  MaxOfSmoothObjective(std::size_t dimension, std::vector<SmoothComponent> components, ActiveBand band = {})
      : dim_(dimension), components_(std::move(components)), band_(band) {
    if (components_.empty()) throw BadParams("max-of-smooth objective needs at least one component");
  }

  std::size_t dimension() const override { return dim_; }
  std::size_t size() const { return components_.size(); }
  const SmoothComponent& component(std::size_t j) const { return components_.at(j); }
  const ActiveBand& band() const { return band_; }

  double value(const Vector& x) const override {
    require_dimension(x, dim_, "MaxOfSmoothObjective::value");
    double best = components_[0].value(x);
    for (std::size_t j = 1; j < components_.size(); ++j) best = std::max(best, components_[j].value(x));
    return best;
  }

  std::vector<std::size_t> active_set(const Vector& x) const { return active_set(x, band_); }

  std::vector<std::size_t> active_set(const Vector& x, const ActiveBand& band) const {
    require_dimension(x, dim_, "MaxOfSmoothObjective::active_set");
    std::vector<double> vals(components_.size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < components_.size(); ++j) {
      vals[j] = components_[j].value(x);
      best = std::max(best, vals[j]);
    }
    const double cutoff = best - band.at(best);
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < vals.size(); ++j)
      if (vals[j] >= cutoff) active.push_back(j);
    return active;
  }

  std::vector<BranchId> active_branches(const Vector& x, const ActiveBand& band) const override {
    const auto set = active_set(x, band);
    return {set.begin(), set.end()};
  }

  double branch_value(BranchId branch, const Vector& x) const override { return components_.at(branch).value(x); }

  void accumulate_branch_gradient(BranchId branch, const Vector& x, double scale, Vector& out) const override {
    out += scale * components_.at(branch).gradient(x);
  }

  double lipschitz() const override {
    double l = 0.0;
    for (const auto& c : components_) l = std::max(l, c.lipschitz_grad_bound);
    return l;
  }

  /// Gradient of an active component chosen by `rule` (or the average of all
  /// active gradients). `rng` is only drawn from for UniformRandom at ties.
  Vector clarke_element(const Vector& x, TieRule rule = TieRule::LowestIndex, Rng* rng = nullptr) const;

 private:
  std::size_t dim_;
  std::vector<SmoothComponent> components_;
  ActiveBand band_;
};

/// Branches chosen per term; more than one entry means their gradients are averaged.
using Selection = std::vector<std::vector<BranchId>>;

namespace detail {

inline std::vector<BranchId> apply_tie_rule(std::vector<BranchId> active, TieRule rule, Rng* rng) {
  if (active.size() <= 1 || rule == TieRule::ConvexAverage) return active;
  if (rule == TieRule::UniformRandom) {
    if (rng == nullptr) throw BadParams("uniform-random tie rule needs a random stream");
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    return {active[pick(*rng)]};
  }
  return {active.front()};
}

inline void accumulate_selected(const PiecewiseSmoothTerm& term, const std::vector<BranchId>& branches,
                                const Vector& x, double scale, Vector& out) {
  const double w = scale / static_cast<double>(branches.size());
  for (BranchId b : branches) term.accumulate_branch_gradient(b, x, w, out);
}

}  // namespace detail

inline Vector MaxOfSmoothObjective::clarke_element(const Vector& x, TieRule rule, Rng* rng) const {
  const auto chosen = detail::apply_tie_rule(active_branches(x, band_), rule, rng);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
  detail::accumulate_selected(*this, chosen, x, 1.0, g);
  return g;
}

/// f_i as a sum of piecewise-smooth terms. Data terms come first and are the
/// ones a minibatch oracle subsamples; fixed terms (regularisers) are always
/// evaluated. A sum of maxima is itself a maximum over products of branches.
class AgentObjective {
 public:
  AgentObjective(std::size_t dimension, std::vector<TermPtr> data_terms, std::vector<TermPtr> fixed_terms = {},
                 ActiveBand band = {})
      : dim_(dimension), n_data_(data_terms.size()), band_(band) {
    terms_ = std::move(data_terms);
    for (auto& t : fixed_terms) terms_.push_back(std::move(t));
    if (terms_.empty()) throw BadParams("agent objective needs at least one term");
    for (const auto& t : terms_) {
      if (!t || t->dimension() != dim_) throw DimensionMismatch("agent objective term has wrong dimension");
    }
  }

  std::size_t dimension() const { return dim_; }
  std::size_t term_count() const { return terms_.size(); }
  std::size_t data_term_count() const { return n_data_; }
  const PiecewiseSmoothTerm& term(std::size_t k) const { return *terms_.at(k); }
  const ActiveBand& band() const { return band_; }

  double value(const Vector& x) const {
    require_dimension(x, dim_, "AgentObjective::value");
    double total = 0.0;
    for (const auto& t : terms_) total += t->value(x);
    return total;
  }

  std::vector<std::vector<BranchId>> active_sets(const Vector& x, const ActiveBand& band) const {
    require_dimension(x, dim_, "AgentObjective::active_sets");
    std::vector<std::vector<BranchId>> sets;
    sets.reserve(terms_.size());
    for (const auto& t : terms_) sets.push_back(t->active_branches(x, band));
    return sets;
  }

  std::vector<std::vector<BranchId>> active_sets(const Vector& x) const { return active_sets(x, band_); }

  Selection select(const Vector& x, TieRule rule, Rng* rng = nullptr) const {
    Selection sel = active_sets(x, band_);
    for (auto& s : sel) s = detail::apply_tie_rule(std::move(s), rule, rng);
    return sel;
  }

  /// Gradient of the selected pieces at x (x need not be where they were selected).
  Vector gradient(const Selection& selection, const Vector& x) const {
    require_dimension(x, dim_, "AgentObjective::gradient");
    Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
    for (std::size_t k = 0; k < terms_.size(); ++k) detail::accumulate_selected(*terms_[k], selection[k], x, 1.0, g);
    return g;
  }

  void accumulate_term_gradient(std::size_t k, const std::vector<BranchId>& branches, const Vector& x, double scale,
                                Vector& out) const {
    detail::accumulate_selected(*terms_.at(k), branches, x, scale, out);
  }

  Vector clarke_element(const Vector& x, TieRule rule = TieRule::LowestIndex, Rng* rng = nullptr) const {
    return gradient(select(x, rule, rng), x);
  }

  /// Sum of the terms' gradient Lipschitz constants.
  double lipschitz() const {
    double l = 0.0;
    for (const auto& t : terms_) l += t->lipschitz();
    return l;
  }

 private:
  std::size_t dim_;
  std::size_t n_data_;
  std::vector<TermPtr> terms_;
  ActiveBand band_;
};

/// One row of a problem's synthetic data, kept for CSV dumps.
struct DataRow {
  std::size_t agent = 0;
  Vector features;
  double target = 0.0;
};

/// F(theta) = sum_i f_i(theta) with f_i known only to agent i.
struct DistributedProblem {
  std::string name;
  std::size_t dimension = 0;
  std::vector<AgentObjective> agents;
  std::vector<DataRow> data;
  std::optional<Vector> known_minimizer;
  std::optional<Vector> suggested_start;

  std::size_t agent_count() const { return agents.size(); }

  double value(const Vector& x) const {
    require_dimension(x, dimension, "DistributedProblem::value");
    double total = 0.0;
    for (const auto& a : agents) total += a.value(x);
    return total;
  }

  /// Largest per-agent gradient Lipschitz constant.
  double lipschitz() const {
    double l = 0.0;
    for (const auto& a : agents) l = std::max(l, a.lipschitz());
    return l;
  }

  void validate() const {
    if (agents.empty()) throw BadParams("problem has no agents");
    for (const auto& a : agents) {
      if (a.dimension() != dimension) throw DimensionMismatch("agents disagree on the variable dimension");
    }
  }
};

inline constexpr std::size_t kMaxExactCombinations = 16;

struct StationarityResult {
  double value = 0.0;
  bool exact = true;             // false: fell back to the convex-average element
  std::size_t combinations = 1;  // number of branch products enumerated (or that would have been)
  double convex_average_norm = 0.0;
};

/// Norm of the minimal-norm element of the Clarke subdifferential of F at x,
/// with pieces counted as active inside `band`. Exact when at most
/// kMaxExactCombinations branch products exist; otherwise reports the norm of
/// the convex-average element and clears `exact`.
inline StationarityResult stationarity_measure(const DistributedProblem& problem, const Vector& x,
                                               const std::optional<ActiveBand>& band = std::nullopt) {
  require_dimension(x, problem.dimension, "stationarity_measure");
  const auto m = static_cast<Eigen::Index>(problem.dimension);
  Vector base = Vector::Zero(m);
  Vector average = Vector::Zero(m);
  std::vector<std::vector<Vector>> factors;  // one entry per term with a tie
  std::size_t combos = 1;
  bool overflow = false;

  for (const auto& agent : problem.agents) {
    const auto sets = agent.active_sets(x, band.value_or(agent.band()));
    for (std::size_t k = 0; k < sets.size(); ++k) {
      agent.accumulate_term_gradient(k, sets[k], x, 1.0, average);
      if (sets[k].size() == 1) {
        agent.accumulate_term_gradient(k, sets[k], x, 1.0, base);
        continue;
      }
      if (overflow || combos * sets[k].size() > kMaxExactCombinations) {
        overflow = true;
        combos = std::numeric_limits<std::size_t>::max();
        continue;
      }
      combos *= sets[k].size();
      std::vector<Vector> grads;
      for (BranchId b : sets[k]) {
        Vector g = Vector::Zero(m);
        agent.term(k).accumulate_branch_gradient(b, x, 1.0, g);
        grads.push_back(std::move(g));
      }
      factors.push_back(std::move(grads));
    }
  }

  StationarityResult result;
  result.convex_average_norm = average.norm();
  result.combinations = combos;
  if (overflow) {
    result.exact = false;
    result.value = result.convex_average_norm;
    return result;
  }
  std::vector<Vector> points{base};
  for (const auto& f : factors) {
    std::vector<Vector> next;
    next.reserve(points.size() * f.size());
    for (const auto& p : points)
      for (const auto& g : f) next.push_back(p + g);
    points = std::move(next);
  }
  result.value = min_norm_point(points).norm();
  return result;
}

}  // namespace dssg
