#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "dssg/error.hpp"

namespace dssg {

using Vector = Eigen::VectorXd;
/// Stacked agent iterates: row i holds agent i's copy of the decision variable.
using AgentMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline void require_dimension(const Vector& x, std::size_t expected, const char* where) {
  if (static_cast<std::size_t>(x.size()) != expected) {
    throw DimensionMismatch(std::string(where) + ": expected dimension " + std::to_string(expected) +
                            ", got " + std::to_string(x.size()));
  }
}

/// Mean of the rows, summed sequentially in agent order.
inline Vector row_average(const AgentMatrix& x) {
  Vector acc = x.row(0).transpose();
  for (Eigen::Index i = 1; i < x.rows(); ++i) acc += x.row(i).transpose();
  acc /= static_cast<double>(x.rows());
  return acc;
}

struct MinNormPoint {
  Vector point;
  std::vector<double> weights;  // convex weights over the input points
  double norm() const { return point.norm(); }
};

namespace detail {

// Weights summing to one that minimise |sum_s w_s p_s| over the affine hull of the corral.
inline Vector affine_min_norm_weights(const std::vector<Vector>& pts, const std::vector<std::size_t>& corral) {
  const auto k = static_cast<Eigen::Index>(corral.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double d = pts[corral[a]].dot(pts[corral[b]]);
      kkt(a, b) = d;
      kkt(b, a) = d;
    }
    kkt(a, k) = 1.0;
    kkt(k, a) = 1.0;
  }
  Vector rhs = Vector::Zero(k + 1);
  rhs(k) = 1.0;
  Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(k);
}

}  // namespace detail

/// Minimum-norm point of the convex hull of `pts` (Wolfe's algorithm).
inline MinNormPoint min_norm_point(const std::vector<Vector>& pts, double tol = 1e-12) {
  if (pts.empty()) throw DimensionMismatch("min_norm_point: empty point set");
  const std::size_t count = pts.size();
  double scale = 0.0;
  std::size_t start = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double sq = pts[k].squaredNorm();
    scale = std::max(scale, sq);
    if (sq < pts[start].squaredNorm()) start = k;
  }
  if (scale == 0.0) return {Vector::Zero(pts[0].size()), std::vector<double>(count, 1.0 / count)};

  std::vector<std::size_t> corral{start};
  std::vector<double> lambda{1.0};
  Vector x = pts[start];

  const std::size_t max_major = 50 * count + 50;
  for (std::size_t major = 0; major < max_major; ++major) {
    std::size_t best = 0;
    double best_dot = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < count; ++k) {
      const double d = x.dot(pts[k]);
      if (d < best_dot) {
        best_dot = d;
        best = k;
      }
    }
    if (x.squaredNorm() - best_dot <= tol * scale) break;
    if (std::find(corral.begin(), corral.end(), best) != corral.end()) break;
    corral.push_back(best);
    lambda.push_back(0.0);

    for (std::size_t minor = 0; minor <= count; ++minor) {
      const Vector alpha = detail::affine_min_norm_weights(pts, corral);
      bool interior = true;
      for (Eigen::Index s = 0; s < alpha.size(); ++s) {
        if (alpha(s) <= tol) interior = false;
      }
      if (interior) {
        for (std::size_t s = 0; s < corral.size(); ++s) lambda[s] = alpha(static_cast<Eigen::Index>(s));
        break;
      }
      double theta = 1.0;
      std::size_t leaving = corral.size();
      for (std::size_t s = 0; s < corral.size(); ++s) {
        const double a = alpha(static_cast<Eigen::Index>(s));
        if (a <= tol && lambda[s] - a > 0.0) {
          const double t = lambda[s] / (lambda[s] - a);
          if (t < theta) {
            theta = t;
            leaving = s;
          }
        }
      }
      for (std::size_t s = 0; s < corral.size(); ++s) {
        lambda[s] = theta * alpha(static_cast<Eigen::Index>(s)) + (1.0 - theta) * lambda[s];
      }
      std::vector<std::size_t> kept;
      std::vector<double> kept_lambda;
      for (std::size_t s = 0; s < corral.size(); ++s) {
        if (s != leaving && lambda[s] > tol) {
          kept.push_back(corral[s]);
          kept_lambda.push_back(lambda[s]);
        }
      }
      if (kept.empty()) {
        kept.push_back(corral[leaving == corral.size() ? 0 : leaving]);
        kept_lambda.push_back(1.0);
      }
      corral = std::move(kept);
      lambda = std::move(kept_lambda);
    }

    double total = 0.0;
    for (double l : lambda) total += l;
    x.setZero(pts[0].size());
    for (std::size_t s = 0; s < corral.size(); ++s) {
      lambda[s] /= total;
      x += lambda[s] * pts[corral[s]];
    }
  }

  std::vector<double> weights(count, 0.0);
  for (std::size_t s = 0; s < corral.size(); ++s) weights[corral[s]] += lambda[s];
  return {x, weights};
}

}  // namespace dssg
