#pragma once

// Named test problems, each agent's objective expressed in max-of-smooth form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dssg/error.hpp"
#include "dssg/linalg.hpp"
#include "dssg/objectives.hpp"
#include "dssg/random.hpp"

namespace dssg {

/// String-valued parameter bag that remembers which keys were read, so
/// leftovers can be rejected.
class Params {
 public:
  Params() = default;
  explicit Params(std::map<std::string, std::string> values) : values_(std::move(values)) {}
  Params(std::initializer_list<std::pair<const std::string, std::string>> values) : values_(values) {}

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_double(key, it->second);
  }

  std::size_t get_count(const std::string& key, std::size_t fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    if (v < 0 || v != std::floor(v)) throw BadParams(key + " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  std::vector<double> get_list(const std::string& key) const {
    used_.insert(key);
    std::vector<double> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    return out;
  }

  void reject_unused(const std::string& context) const {
    for (const auto& [k, v] : values_) {
      if (!used_.count(k)) throw BadParams(context + ": unknown parameter '" + k + "'");
    }
  }

 private:
  static double parse_double(const std::string& key, const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &pos);
    } catch (const std::exception&) {
      throw BadParams(key + ": not a number: '" + text + "'");
    }
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size()) throw BadParams(key + ": trailing characters in '" + text + "'");
    return v;
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// |a^T x - offset| with a sparse a. Branch 0 is the piece +(a^T x - offset), branch 1 its negation.
class AbsAffineTerm final : public PiecewiseSmoothTerm {
 public:
  AbsAffineTerm(std::size_t dimension, std::vector<std::size_t> indices, std::vector<double> coeffs, double offset)
      : dim_(dimension), idx_(std::move(indices)), coef_(std::move(coeffs)), offset_(offset) {
    if (idx_.size() != coef_.size()) throw BadParams("AbsAffineTerm: index/coefficient length mismatch");
    for (auto i : idx_)
      if (i >= dim_) throw DimensionMismatch("AbsAffineTerm: index out of range");
  }

  static std::shared_ptr<AbsAffineTerm> dense(const Vector& a, double offset) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(a.size()));
    std::vector<double> coef(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      idx[k] = k;
      coef[k] = a(static_cast<Eigen::Index>(k));
    }
    return std::make_shared<AbsAffineTerm>(idx.size(), std::move(idx), std::move(coef), offset);
  }

  std::size_t dimension() const override { return dim_; }

  double residual(const Vector& x) const {
    double r = 0.0;
    for (std::size_t k = 0; k < idx_.size(); ++k) r += coef_[k] * x(static_cast<Eigen::Index>(idx_[k]));
    return r - offset_;
  }

  double value(const Vector& x) const override { return std::abs(residual(x)); }

  std::vector<BranchId> active_branches(const Vector& x, const ActiveBand& band) const override {
    const double r = residual(x);
    if (2.0 * std::abs(r) <= band.at(std::abs(r))) return {0, 1};
    return {r >= 0.0 ? BranchId{0} : BranchId{1}};
  }

  double branch_value(BranchId branch, const Vector& x) const override {
    return branch == 0 ? residual(x) : -residual(x);
  }

  void accumulate_branch_gradient(BranchId branch, const Vector&, double scale, Vector& out) const override {
    const double s = branch == 0 ? scale : -scale;
    for (std::size_t k = 0; k < idx_.size(); ++k) out(static_cast<Eigen::Index>(idx_[k])) += s * coef_[k];
  }

  double lipschitz() const override { return 0.0; }

 private:
  std::size_t dim_;
  std::vector<std::size_t> idx_;
  std::vector<double> coef_;
  double offset_;
};

/// |(a^T x)^2 - y|, the robust phase-retrieval loss of one measurement.
class SquaredResidualAbsTerm final : public PiecewiseSmoothTerm {
 public:
  SquaredResidualAbsTerm(Vector a, double y) : a_(std::move(a)), y_(y) {}

  std::size_t dimension() const override { return static_cast<std::size_t>(a_.size()); }

  double residual(const Vector& x) const {
    const double p = a_.dot(x);
    return p * p - y_;
  }

  double value(const Vector& x) const override { return std::abs(residual(x)); }

  std::vector<BranchId> active_branches(const Vector& x, const ActiveBand& band) const override {
    const double r = residual(x);
    if (2.0 * std::abs(r) <= band.at(std::abs(r))) return {0, 1};
    return {r >= 0.0 ? BranchId{0} : BranchId{1}};
  }

  double branch_value(BranchId branch, const Vector& x) const override {
    return branch == 0 ? residual(x) : -residual(x);
  }

  void accumulate_branch_gradient(BranchId branch, const Vector& x, double scale, Vector& out) const override {
    const double s = branch == 0 ? scale : -scale;
    out += (s * 2.0 * a_.dot(x)) * a_;
  }

  double lipschitz() const override { return 2.0 * a_.squaredNorm(); }

 private:
  Vector a_;
  double y_;
};

/// Layout of the one-hidden-layer network parameters:
/// [V (hidden x inputs, row-major) | c (hidden) | w (hidden) | b].
struct ReluNetLayout {
  std::size_t inputs = 0;
  std::size_t hidden = 0;

  std::size_t size() const { return hidden * inputs + 2 * hidden + 1; }
  std::size_t v(std::size_t k, std::size_t l) const { return k * inputs + l; }
  std::size_t c(std::size_t k) const { return hidden * inputs + k; }
  std::size_t w(std::size_t k) const { return hidden * inputs + hidden + k; }
  std::size_t b() const { return hidden * inputs + 2 * hidden; }
};

/// weight * |sigmoid(sum_k w_k relu(v_k . z + c_k) + b) - y| for one sample.
/// A branch fixes which hidden units pass (bit k) and the sign of the residual
/// (bit `hidden`, set for the negated piece). Pieces are smooth but their
/// gradients have no global Lipschitz bound.
class ReluNetSampleTerm final : public PiecewiseSmoothTerm {
 public:
  ReluNetSampleTerm(ReluNetLayout layout, Vector features, double target, double weight)
      : layout_(layout), z_(std::move(features)), y_(target), weight_(weight) {
    if (static_cast<std::size_t>(z_.size()) != layout_.inputs) throw DimensionMismatch("relu sample feature size");
    if (layout_.hidden >= 63) throw BadParams("relu net supports at most 62 hidden units");
  }

  std::size_t dimension() const override { return layout_.size(); }

  double value(const Vector& x) const override {
    const auto pre = preactivations(x);
    double out = x(static_cast<Eigen::Index>(layout_.b()));
    for (std::size_t k = 0; k < layout_.hidden; ++k)
      out += x(static_cast<Eigen::Index>(layout_.w(k))) * std::max(0.0, pre[k]);
    return weight_ * std::abs(sigmoid(out) - y_);
  }

  std::vector<BranchId> active_branches(const Vector& x, const ActiveBand& band) const override {
    const auto pre = preactivations(x);
    double out = x(static_cast<Eigen::Index>(layout_.b()));
    BranchId base = 0;
    for (std::size_t k = 0; k < layout_.hidden; ++k) {
      if (pre[k] > 0.0) {
        base |= BranchId{1} << k;
        out += x(static_cast<Eigen::Index>(layout_.w(k))) * pre[k];
      }
    }
    const double r = sigmoid(out) - y_;
    if (r < 0.0) base |= BranchId{1} << layout_.hidden;
    const double tol = band.at(weight_ * std::abs(r));

    std::vector<std::size_t> free_bits;
    for (std::size_t k = 0; k < layout_.hidden && free_bits.size() < kMaxAmbiguousBits; ++k)
      if (std::abs(pre[k]) <= tol) free_bits.push_back(k);
    if (2.0 * weight_ * std::abs(r) <= tol && free_bits.size() < kMaxAmbiguousBits) free_bits.push_back(layout_.hidden);

    BranchId fixed = base;
    for (auto bit : free_bits) fixed &= ~(BranchId{1} << bit);
    std::vector<BranchId> out_branches;
    for (std::uint64_t combo = 0; combo < (std::uint64_t{1} << free_bits.size()); ++combo) {
      BranchId b = fixed;
      for (std::size_t k = 0; k < free_bits.size(); ++k)
        if (combo & (std::uint64_t{1} << k)) b |= BranchId{1} << free_bits[k];
      out_branches.push_back(b);
    }
    std::sort(out_branches.begin(), out_branches.end());
    return out_branches;
  }

  double branch_value(BranchId branch, const Vector& x) const override {
    const auto pre = preactivations(x);
    const double s = (branch >> layout_.hidden) & 1u ? -1.0 : 1.0;
    return weight_ * s * (sigmoid(masked_output(branch, pre, x)) - y_);
  }

  void accumulate_branch_gradient(BranchId branch, const Vector& x, double scale, Vector& out) const override {
    const auto pre = preactivations(x);
    const double s = (branch >> layout_.hidden) & 1u ? -1.0 : 1.0;
    const double sig = sigmoid(masked_output(branch, pre, x));
    const double common = scale * weight_ * s * sig * (1.0 - sig);
    out(static_cast<Eigen::Index>(layout_.b())) += common;
    for (std::size_t k = 0; k < layout_.hidden; ++k) {
      if (!((branch >> k) & 1u)) continue;
      const double wk = x(static_cast<Eigen::Index>(layout_.w(k)));
      out(static_cast<Eigen::Index>(layout_.w(k))) += common * pre[k];
      out(static_cast<Eigen::Index>(layout_.c(k))) += common * wk;
      for (std::size_t l = 0; l < layout_.inputs; ++l)
        out(static_cast<Eigen::Index>(layout_.v(k, l))) += common * wk * z_(static_cast<Eigen::Index>(l));
    }
  }

  double lipschitz() const override { return std::numeric_limits<double>::infinity(); }

 private:
  static constexpr std::size_t kMaxAmbiguousBits = 10;

  static double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

  std::vector<double> preactivations(const Vector& x) const {
    std::vector<double> pre(layout_.hidden);
    for (std::size_t k = 0; k < layout_.hidden; ++k) {
      double acc = x(static_cast<Eigen::Index>(layout_.c(k)));
      for (std::size_t l = 0; l < layout_.inputs; ++l)
        acc += x(static_cast<Eigen::Index>(layout_.v(k, l))) * z_(static_cast<Eigen::Index>(l));
      pre[k] = acc;
    }
    return pre;
  }

  double masked_output(BranchId branch, const std::vector<double>& pre, const Vector& x) const {
    double out = x(static_cast<Eigen::Index>(layout_.b()));
    for (std::size_t k = 0; k < layout_.hidden; ++k)
      if ((branch >> k) & 1u) out += x(static_cast<Eigen::Index>(layout_.w(k))) * pre[k];
    return out;
  }

  ReluNetLayout layout_;
  Vector z_;
  double y_;
  double weight_;
};

namespace detail {

inline Vector gaussian_vector(Rng& rng, std::size_t m, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(static_cast<Eigen::Index>(m));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
  return v;
}

inline Eigen::MatrixXd random_orthogonal(Rng& rng, std::size_t m) {
  Eigen::MatrixXd g(m, m);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
}

inline std::size_t require_positive(const Params& p, const std::string& key, std::size_t fallback) {
  const auto v = p.get_count(key, fallback);
  if (v == 0) throw BadParams(key + " must be positive");
  return v;
}

inline DistributedProblem make_abs_sum(const Params& p, std::uint64_t seed) {
  const auto n = require_positive(p, "agents", 3);
  const auto m = require_positive(p, "dim", 1);
  const double scale = p.get_double("scale", 2.0);
  auto centers = p.get_list("centers");
  if (!centers.empty() && centers.size() != n * m) {
    throw BadParams("centers must list agents*dim values (agent-major)");
  }
  if (centers.empty()) {
    Rng rng = construction_stream(seed, 10);
    std::normal_distribution<double> normal(0.0, scale);
    centers.resize(n * m);
    for (auto& c : centers) c = normal(rng);
  }
  DistributedProblem prob;
  prob.name = "abs_sum";
  prob.dimension = m;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<TermPtr> terms;
    Vector row(static_cast<Eigen::Index>(m));
    for (std::size_t d = 0; d < m; ++d) {
      terms.push_back(std::make_shared<AbsAffineTerm>(m, std::vector<std::size_t>{d}, std::vector<double>{1.0},
                                                      centers[i * m + d]));
      row(static_cast<Eigen::Index>(d)) = centers[i * m + d];
    }
    prob.agents.emplace_back(m, std::move(terms));
    prob.data.push_back({i, row, 0.0});
  }
  Vector median(static_cast<Eigen::Index>(m));
  for (std::size_t d = 0; d < m; ++d) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = centers[i * m + d];
    std::sort(col.begin(), col.end());
    median(static_cast<Eigen::Index>(d)) = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  prob.known_minimizer = median;
  return prob;
}

inline DistributedProblem make_max_quadratics(const Params& p, std::uint64_t seed) {
  const auto n = require_positive(p, "agents", 2);
  const auto m = require_positive(p, "dim", 2);
  const auto count = require_positive(p, "components", 3);
  Rng rng = construction_stream(seed, 11);
  std::uniform_real_distribution<double> convex_eig(0.5, 2.0);
  std::uniform_real_distribution<double> any_eig(-1.0, 2.0);

  DistributedProblem prob;
  prob.name = "max_quadratics";
  prob.dimension = m;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<SmoothComponent> comps;
    for (std::size_t j = 0; j < count; ++j) {
      const Eigen::MatrixXd u = random_orthogonal(rng, m);
      Vector eig(static_cast<Eigen::Index>(m));
      // Component 0 is strongly convex, so every f_i (and F) is coercive.
      for (Eigen::Index k = 0; k < eig.size(); ++k) eig(k) = j == 0 ? convex_eig(rng) : any_eig(rng);
      Eigen::MatrixXd q = u * eig.asDiagonal() * u.transpose();
      q = 0.5 * (q + q.transpose());
      const Vector b = gaussian_vector(rng, m);
      comps.push_back({[q, b](const Vector& x) { return 0.5 * x.dot(q * x) + b.dot(x); },
                       [q, b](const Vector& x) -> Vector { return q * x + b; }, eig.cwiseAbs().maxCoeff()});
    }
    std::vector<TermPtr> terms{std::make_shared<MaxOfSmoothObjective>(m, std::move(comps))};
    prob.agents.emplace_back(m, std::move(terms));
  }
  return prob;
}

inline DistributedProblem make_robust_regression(const Params& p, std::uint64_t seed) {
  const auto n = require_positive(p, "agents", 4);
  const auto m = require_positive(p, "dim", 3);
  const auto samples = require_positive(p, "samples", 20);
  const double outliers = p.get_double("outlier_fraction", 0.1);
  const double noise = p.get_double("noise", 0.0);
  if (outliers < 0.0 || outliers > 1.0) throw BadParams("outlier_fraction must lie in [0,1]");
  Rng rng = construction_stream(seed, 12);
  const Vector truth = gaussian_vector(rng, m);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution is_outlier(outliers);
  std::uniform_real_distribution<double> magnitude(5.0, 10.0);
  std::bernoulli_distribution coin(0.5);

  DistributedProblem prob;
  prob.name = "robust_regression_l1";
  prob.dimension = m;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<TermPtr> terms;
    for (std::size_t s = 0; s < samples; ++s) {
      const Vector a = gaussian_vector(rng, m);
      double y = a.dot(truth) + noise * normal(rng);
      if (is_outlier(rng)) y += (coin(rng) ? 1.0 : -1.0) * magnitude(rng);
      terms.push_back(AbsAffineTerm::dense(a, y));
      prob.data.push_back({i, a, y});
    }
    prob.agents.emplace_back(m, std::move(terms));
  }
  if (outliers == 0.0 && noise == 0.0) prob.known_minimizer = truth;
  return prob;
}

inline DistributedProblem make_phase_retrieval(const Params& p, std::uint64_t seed) {
  const auto n = require_positive(p, "agents", 4);
  const auto m = require_positive(p, "dim", 3);
  const auto samples = require_positive(p, "samples", 10);
  const double noise = p.get_double("noise", 0.0);
  Rng rng = construction_stream(seed, 13);
  const Vector truth = gaussian_vector(rng, m);
  std::normal_distribution<double> normal;

  DistributedProblem prob;
  prob.name = "phase_retrieval_toy";
  prob.dimension = m;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<TermPtr> terms;
    for (std::size_t s = 0; s < samples; ++s) {
      const Vector a = gaussian_vector(rng, m);
      const double proj = a.dot(truth);
      const double y = proj * proj + noise * normal(rng);
      terms.push_back(std::make_shared<SquaredResidualAbsTerm>(a, y));
      prob.data.push_back({i, a, y});
    }
    prob.agents.emplace_back(m, std::move(terms));
  }
  if (noise == 0.0) prob.known_minimizer = truth;
  return prob;
}

inline std::vector<DataRow> read_feature_csv(const std::string& path, std::size_t n_agents) {
  std::ifstream in(path);
  if (!in) throw BadParams("cannot open data_file '" + path + "'");
  std::vector<DataRow> rows;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header
      throw BadParams("data_file: non-numeric row");
    }
    if (vals.size() < 2) throw BadParams("data_file: rows need features and a label");
    if (width == 0) width = vals.size();
    if (vals.size() != width) throw BadParams("data_file: ragged rows");
    DataRow r;
    r.agent = rows.size() % n_agents;
    r.features = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(width - 1));
    r.target = vals.back();
    rows.push_back(std::move(r));
  }
  if (rows.size() < n_agents) throw BadParams("data_file: fewer rows than agents");
  return rows;
}

inline Vector relu_net_forward_params(Rng& rng, const ReluNetLayout& layout, double scale) {
  return gaussian_vector(rng, layout.size(), scale);
}

inline double relu_net_output(const ReluNetLayout& layout, const Vector& theta, const Vector& z) {
  double out = theta(static_cast<Eigen::Index>(layout.b()));
  for (std::size_t k = 0; k < layout.hidden; ++k) {
    double pre = theta(static_cast<Eigen::Index>(layout.c(k)));
    for (std::size_t l = 0; l < layout.inputs; ++l)
      pre += theta(static_cast<Eigen::Index>(layout.v(k, l))) * z(static_cast<Eigen::Index>(l));
    out += theta(static_cast<Eigen::Index>(layout.w(k))) * std::max(0.0, pre);
  }
  return 1.0 / (1.0 + std::exp(-out));
}

inline DistributedProblem make_tiny_relu_net(const Params& p, std::uint64_t seed) {
  const auto n = require_positive(p, "agents", 4);
  const auto hidden = require_positive(p, "hidden", 4);
  auto inputs = require_positive(p, "inputs", 4);
  const auto samples = require_positive(p, "samples", 20);
  const double lambda = p.get_double("lambda", 1e-3);
  const double target_noise = p.get_double("target_noise", 0.05);
  const double init_scale = p.get_double("init_scale", 0.5);
  const std::string data_file = p.get_string("data_file", "");
  if (lambda < 0.0) throw BadParams("lambda must be nonnegative");

  Rng rng = construction_stream(seed, 14);
  std::vector<DataRow> rows;
  if (!data_file.empty()) {
    rows = read_feature_csv(data_file, n);
    inputs = static_cast<std::size_t>(rows.front().features.size());
  }
  const ReluNetLayout layout{inputs, hidden};
  if (data_file.empty()) {
    const Vector teacher = relu_net_forward_params(rng, layout, 1.0);
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = 0; s < samples; ++s) {
        DataRow r;
        r.agent = i;
        r.features = gaussian_vector(rng, inputs);
        r.target = relu_net_output(layout, teacher, r.features) + target_noise * normal(rng);
        rows.push_back(std::move(r));
      }
    }
  }

  DistributedProblem prob;
  prob.name = "tiny_relu_net";
  prob.dimension = layout.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t local = 0;
    for (const auto& r : rows) local += r.agent == i;
    std::vector<TermPtr> data_terms;
    for (const auto& r : rows) {
      if (r.agent != i) continue;
      data_terms.push_back(std::make_shared<ReluNetSampleTerm>(layout, r.features, r.target, 1.0 / local));
    }
    std::vector<TermPtr> reg;
    if (lambda > 0.0) {
      for (std::size_t k = 0; k < layout.size(); ++k)
        reg.push_back(std::make_shared<AbsAffineTerm>(layout.size(), std::vector<std::size_t>{k},
                                                      std::vector<double>{lambda}, 0.0));
    }
    prob.agents.emplace_back(layout.size(), std::move(data_terms), std::move(reg));
  }
  prob.data = std::move(rows);
  Rng init = construction_stream(seed, 15);
  prob.suggested_start = relu_net_forward_params(init, layout, init_scale);
  return prob;
}

}  // namespace detail

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"abs_sum", "max_quadratics", "robust_regression_l1",
                                              "phase_retrieval_toy", "tiny_relu_net"};
  return names;
}

/// Builds a named problem; deterministic given `seed`. Unknown names raise
/// UnknownProblem, unknown or invalid parameters raise BadParams.
inline DistributedProblem catalog_problem(const std::string& name, const Params& params, std::uint64_t seed) {
  DistributedProblem prob;
  if (name == "abs_sum") {
    prob = detail::make_abs_sum(params, seed);
  } else if (name == "max_quadratics") {
    prob = detail::make_max_quadratics(params, seed);
  } else if (name == "robust_regression_l1") {
    prob = detail::make_robust_regression(params, seed);
  } else if (name == "phase_retrieval_toy") {
    prob = detail::make_phase_retrieval(params, seed);
  } else if (name == "tiny_relu_net") {
    prob = detail::make_tiny_relu_net(params, seed);
  } else {
    throw UnknownProblem("'" + name + "'");
  }
  params.reject_unused(name);
  prob.validate();
  return prob;
}

inline void write_data_csv(std::ostream& os, const DistributedProblem& prob) {
  std::size_t width = prob.data.empty() ? 0 : static_cast<std::size_t>(prob.data.front().features.size());
  os << "agent";
  for (std::size_t k = 0; k < width; ++k) os << ",x" << k;
  os << ",target\n";
  char buf[32];
  for (const auto& r : prob.data) {
    os << r.agent;
    for (Eigen::Index k = 0; k < r.features.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", r.features(k));
      os << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", r.target);
    os << ',' << buf << '\n';
  }
}

}  // namespace dssg
