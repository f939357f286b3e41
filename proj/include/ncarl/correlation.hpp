#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <utility>
#include <vector>

#include "ncarl/errors.hpp"

namespace ncarl {

/// Squared Euclidean distances between all column pairs. Plain scalar
/// accumulation so results are reproducible entry for entry.
inline Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.cols();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index r = 0; r < X.rows(); ++r) {
        const double d = X(r, i) - X(r, j);
        acc += d * d;
      }
      l(i, j) = acc;
      l(j, i) = acc;
    }
  return l;
}

struct SimilarityRow {
  Eigen::RowVectorXd s;  // nonnegative, sums to 1, supported on k nearest non-self columns
  double mu_sq = 0.0;    // regularization weight pinned at its upper bound
};

/// Closed-form k-sparse similarity row: with d(1) <= ... <= d(n-1) the sorted
/// non-self distances,
///   s_j = (d(k+1) - l_j)_+ / (k d(k+1) - sum_{v<=k} d(v)),
///   mu^2 = (k d(k+1) - sum_{v<=k} d(v)) / 2.
/// Ties at the k-th distance are broken by column index; if the k+1 nearest
/// are equidistant the weights fall back to uniform 1/k.
inline SimilarityRow learn_similarity_row(const Eigen::RowVectorXd& l_row, Eigen::Index self,
                                          Eigen::Index k) {
  const Eigen::Index n = l_row.size();
  if (self < 0 || self >= n) throw config_error("learn_similarity_row: self index out of range");
  if (k < 1 || k > n - 2)
    throw config_error("learn_similarity_row: k must be in [1, n-2]");

  std::vector<std::pair<double, Eigen::Index>> order;
  order.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index j = 0; j < n; ++j)
    if (j != self) order.emplace_back(l_row(j), j);
  std::stable_sort(order.begin(), order.end());

  double near_sum = 0.0;
  for (Eigen::Index v = 0; v < k; ++v) near_sum += order[static_cast<std::size_t>(v)].first;
  const double bound = order[static_cast<std::size_t>(k)].first;  // (k+1)-th smallest
  const double denom = static_cast<double>(k) * bound - near_sum;

  SimilarityRow out;
  out.s = Eigen::RowVectorXd::Zero(n);
  out.mu_sq = 0.5 * denom;
  if (denom <= 1e-13 * static_cast<double>(k) * bound || denom <= 0.0) {
    for (Eigen::Index v = 0; v < k; ++v)
      out.s(order[static_cast<std::size_t>(v)].second) = 1.0 / static_cast<double>(k);
    return out;
  }
  for (Eigen::Index v = 0; v < k; ++v) {
    const auto& [dist, col] = order[static_cast<std::size_t>(v)];
    out.s(col) = std::max(bound - dist, 0.0) / denom;
  }
  return out;
}

/// Column-similarity graph: symmetrized k-sparse similarity, degree diagonal,
/// and Laplacian L = D_S - S. The regularizer value sum_i mu_i^2 sum_j S_ij^2
/// is taken on the pre-symmetrization rows, matching the order in which the
/// row subproblems are solved.
struct SimilarityGraph {
  Eigen::MatrixXd S;       // symmetric
  Eigen::MatrixXd L;
  Eigen::VectorXd degrees;
  Eigen::VectorXd mu_sq;
  Eigen::Index k = 0;
  double penalty = 0.0;
};

inline SimilarityGraph build_graph(const Eigen::MatrixXd& X, Eigen::Index k) {
  const Eigen::Index n = X.cols();
  if (n < k + 2) throw config_error("build_graph: need at least k+2 columns");
  const Eigen::MatrixXd l = pairwise_sq_dists(X);

  SimilarityGraph g;
  g.k = k;
  g.mu_sq = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd s_rows(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    SimilarityRow row = learn_similarity_row(l.row(i), i, k);
    g.mu_sq(i) = row.mu_sq;
    g.penalty += row.mu_sq * row.s.squaredNorm();
    s_rows.row(i) = row.s;
  }
  g.S = 0.5 * (s_rows + s_rows.transpose());
  g.degrees = g.S.rowwise().sum();
  g.L = Eigen::MatrixXd(g.degrees.asDiagonal()) - g.S;
  return g;
}

}  // namespace ncarl
