#pragma once

// Communication graph and gossip mixing matrix.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dssg/error.hpp"
#include "dssg/linalg.hpp"
#include "dssg/random.hpp"

namespace dssg {

using Edge = std::pair<std::size_t, std::size_t>;

/// Fixed undirected simple graph over agents 0..n-1.
class Graph {
 public:
  Graph() = default;

  /// Validates endpoints, rejects self-loops and duplicate edges. Endpoints are 0-based.
  Graph(std::size_t n_agents, const std::vector<Edge>& edges) : n_(n_agents), neighbors_(n_agents) {
    if (n_agents == 0) throw InvalidEdge("graph needs at least one agent");
    for (const auto& [a, b] : edges) {
      if (a >= n_agents || b >= n_agents) {
        throw InvalidEdge("endpoint out of range in edge (" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")");
      }
      if (a == b) throw InvalidEdge("self-loop at agent " + std::to_string(a + 1));
      const Edge e{std::min(a, b), std::max(a, b)};
      if (std::find(edges_.begin(), edges_.end(), e) != edges_.end()) {
        throw InvalidEdge("duplicate edge (" + std::to_string(e.first + 1) + "," + std::to_string(e.second + 1) + ")");
      }
      edges_.push_back(e);
      neighbors_[a].push_back(b);
      neighbors_[b].push_back(a);
    }
    std::sort(edges_.begin(), edges_.end());
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
  }

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  std::size_t degree(std::size_t i) const { return neighbors_.at(i).size(); }

  bool has_edge(std::size_t a, std::size_t b) const {
    if (a >= n_ || b >= n_) return false;
    return std::binary_search(neighbors_[a].begin(), neighbors_[a].end(), b);
  }

  bool is_connected() const {
    if (n_ == 0) return false;
    std::vector<bool> seen(n_, false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t v : neighbors_[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++reached;
          frontier.push(v);
        }
      }
    }
    return reached == n_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

inline Graph build_graph(std::size_t n_agents, const std::vector<Edge>& edges) { return Graph(n_agents, edges); }

inline Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph(n, edges);
}

inline Graph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(n, edges);
}

inline constexpr int kRandomGraphRetries = 100;

/// Erdos-Renyi draw, redrawn until connected (at most kRandomGraphRetries draws).
inline Graph random_graph(std::size_t n_agents, double edge_probability, std::uint64_t seed) {
  if (!(edge_probability >= 0.0 && edge_probability <= 1.0)) {
    throw BadParams("edge probability must lie in [0,1]");
  }
  Rng rng = construction_stream(seed, 1);
  std::bernoulli_distribution coin(edge_probability);
  for (int attempt = 0; attempt < kRandomGraphRetries; ++attempt) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n_agents; ++i)
      for (std::size_t j = i + 1; j < n_agents; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
    Graph g(n_agents, edges);
    if (g.is_connected()) return g;
  }
  throw DisconnectedAfterRetries("no connected draw in " + std::to_string(kRandomGraphRetries) + " attempts (n=" +
                                 std::to_string(n_agents) + ", p=" + std::to_string(edge_probability) + ")");
}

/// Eigenvalues of a symmetric doubly stochastic matrix and the derived beta.
struct SpectralReport {
  std::vector<double> eigenvalues;  // nonincreasing
  double beta = 0.0;

  bool satisfied() const { return beta < 1.0; }

  void require() const {
    if (!satisfied()) {
      throw AssumptionViolated("beta = " + std::to_string(beta) +
                               " >= 1; the mixing matrix does not contract disagreement (disconnected or periodic)");
    }
  }
};

inline constexpr double kStochasticTol = 1e-12;
inline constexpr double kSpectralTol = 1e-10;

namespace detail {

inline void check_doubly_stochastic(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols() || w.rows() == 0) throw AssumptionViolated("mixing matrix must be square and nonempty");
  const Eigen::Index n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (w(i, j) < 0.0) throw AssumptionViolated("negative mixing weight");
      if (std::abs(w(i, j) - w(j, i)) > kStochasticTol) throw AssumptionViolated("mixing matrix not symmetric");
      row += w(i, j);
      col += w(j, i);
    }
    if (std::abs(row - 1.0) > kStochasticTol || std::abs(col - 1.0) > kStochasticTol) {
      throw AssumptionViolated("mixing matrix not doubly stochastic at index " + std::to_string(i));
    }
  }
}

}  // namespace detail

/// beta = max(|lambda_2|, |lambda_n|) of a symmetric doubly stochastic matrix.
/// Does not throw for beta >= 1; callers decide via SpectralReport::require().
inline SpectralReport spectral_beta(const Eigen::MatrixXd& w) {
  detail::check_doubly_stochastic(w);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw AssumptionViolated("eigendecomposition failed");
  SpectralReport report;
  const Vector& ev = solver.eigenvalues();
  report.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(), std::greater<>());
  if (std::abs(report.eigenvalues.front() - 1.0) > kSpectralTol) {
    throw AssumptionViolated("leading eigenvalue " + std::to_string(report.eigenvalues.front()) + " != 1");
  }
  if (report.eigenvalues.size() > 1) {
    report.beta = std::max(std::abs(report.eigenvalues[1]), std::abs(report.eigenvalues.back()));
  }
  return report;
}

/// Symmetric doubly stochastic weights respecting the graph's sparsity pattern.
class MixingMatrix {
 public:
  MixingMatrix(Graph graph, Eigen::MatrixXd weights) : graph_(std::move(graph)), weights_(std::move(weights)) {
    const auto n = static_cast<Eigen::Index>(graph_.size());
    if (weights_.rows() != n || weights_.cols() != n) {
      throw DimensionMismatch("mixing matrix is " + std::to_string(weights_.rows()) + "x" +
                              std::to_string(weights_.cols()) + " for a graph of " + std::to_string(n) + " agents");
    }
    detail::check_doubly_stochastic(weights_);
    rows_.resize(graph_.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = weights_(i, j);
        if (i != j && w > 0.0 && !graph_.has_edge(i, j)) {
          throw AssumptionViolated("positive weight between non-neighbours " + std::to_string(i + 1) + " and " +
                                   std::to_string(j + 1));
        }
        if (w > 0.0) rows_[i].emplace_back(static_cast<std::size_t>(j), w);
      }
    }
    spectral_ = spectral_beta(weights_);
  }

  std::size_t size() const { return graph_.size(); }
  const Graph& graph() const { return graph_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  double beta() const { return spectral_.beta; }
  const SpectralReport& spectral() const { return spectral_; }

  /// out = (W (x) I) in, with each row accumulated over neighbours in ascending index order.
  void mix(const AgentMatrix& in, AgentMatrix& out) const {
    out.resize(in.rows(), in.cols());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& row = rows_[i];
      const auto r = static_cast<Eigen::Index>(i);
      out.row(r) = row.front().second * in.row(static_cast<Eigen::Index>(row.front().first));
      for (std::size_t k = 1; k < row.size(); ++k) {
        out.row(r) += row[k].second * in.row(static_cast<Eigen::Index>(row[k].first));
      }
    }
  }

  AgentMatrix mix(const AgentMatrix& in) const {
    AgentMatrix out;
    mix(in, out);
    return out;
  }

 private:
  Graph graph_;
  Eigen::MatrixXd weights_;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
  SpectralReport spectral_;
};

/// Metropolis-Hastings weights: W_ij = 1/(1 + max(deg_i, deg_j)) on edges, remainder on the diagonal.
/// The lazy variant returns (I + W)/2, whose spectrum is nonnegative.
inline MixingMatrix metropolis_weights(const Graph& graph, bool lazy = false) {
  if (!graph.is_connected()) throw NotConnected("Metropolis weights require a connected graph");
  const auto n = static_cast<Eigen::Index>(graph.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : graph.edges()) {
    const double v = 1.0 / (1.0 + static_cast<double>(std::max(graph.degree(a), graph.degree(b))));
    w(a, b) = v;
    w(b, a) = v;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  if (lazy) {
    w = 0.5 * (Eigen::MatrixXd::Identity(n, n) + w);
  }
  return MixingMatrix(graph, std::move(w));
}

// Plain-text network format: "n m", then m lines "i j" (1-based), then optionally n rows of n weights.

inline void write_network(std::ostream& os, const Graph& graph, const Eigen::MatrixXd* weights = nullptr) {
  os << graph.size() << ' ' << graph.edge_count() << '\n';
  for (const auto& [a, b] : graph.edges()) os << a + 1 << ' ' << b + 1 << '\n';
  if (weights != nullptr) {
    for (Eigen::Index i = 0; i < weights->rows(); ++i) {
      for (Eigen::Index j = 0; j < weights->cols(); ++j) os << (j ? " " : "") << std::setprecision(17) << (*weights)(i, j);
      os << '\n';
    }
  }
}

struct NetworkFile {
  Graph graph;
  std::optional<Eigen::MatrixXd> weights;
};

inline NetworkFile read_network(std::istream& is) {
  std::size_t n = 0, m = 0;
  if (!(is >> n >> m)) throw FormatError("network file: expected header 'n m'");
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    long long a = 0, b = 0;
    if (!(is >> a >> b)) throw FormatError("network file: expected edge line " + std::to_string(k + 1));
    if (a < 1 || b < 1) throw InvalidEdge("endpoint below 1 in edge line " + std::to_string(k + 1));
    edges.emplace_back(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1));
  }
  NetworkFile out{Graph(n, edges), std::nullopt};
  double first = 0.0;
  if (is >> first) {
    Eigen::MatrixXd w(n, n);
    w(0, 0) = first;
    for (std::size_t idx = 1; idx < n * n; ++idx) {
      if (!(is >> w(static_cast<Eigen::Index>(idx / n), static_cast<Eigen::Index>(idx % n)))) {
        throw FormatError("network file: weight block must hold n*n values");
      }
    }
    out.weights = std::move(w);
  }
  return out;
}

}  // namespace dssg
