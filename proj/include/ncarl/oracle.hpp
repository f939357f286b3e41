#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ncarl/errors.hpp"
#include "ncarl/masked.hpp"
#include "ncarl/rows.hpp"

namespace ncarl {

struct OracleConfig {
  double admm_rho = 1.0;
  int max_iters = 5000;
  double tol = 1e-8;

  void validate() const {
    if (!(admm_rho > 0.0) || max_iters < 1 || !(tol > 0.0))
      throw config_error("OracleConfig: parameters must be positive");
  }
};

/// Singular value shrinkage: the proximal operator of tau * nuclear norm.
inline Eigen::MatrixXd svt_shrink(const Eigen::MatrixXd& X, double tau) {
  if (tau < 0.0) throw config_error("svt_shrink: tau must be nonnegative");
  if (tau == 0.0) return X;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i) sv(i) = std::max(sv(i) - tau, 0.0);
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

/// Reference solver for  min ||X||_*  s.t.  X ⊙ P = M,  via ADMM with
/// singular-value thresholding and projection onto the observation
/// constraint. The returned matrix is exactly feasible; primal and dual
/// residuals below tol certify optimality. Used to cross-check the
/// alternating surrogate solver, so it shares no code path with it.
inline Eigen::MatrixXd nuclear_min_constrained(const MaskedMatrix& problem,
                                               const OracleConfig& cfg = {}) {
  cfg.validate();
  if (problem.observed_count() == 0)
    throw config_error("nuclear_min_constrained: no observed entries");

  const Eigen::MatrixXd& M = problem.values;
  const Eigen::MatrixXd& P = problem.mask;
  const Eigen::MatrixXd unobserved = Eigen::MatrixXd::Ones(P.rows(), P.cols()) - P;

  double rho = cfg.admm_rho;
  Eigen::MatrixXd X = M;
  Eigen::MatrixXd Z = M;
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(M.rows(), M.cols());
  const double scale = std::max(M.norm(), 1.0);

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const Eigen::MatrixXd Z_prev = Z;
    Z = svt_shrink(X + U, 1.0 / rho);
    X = Z - U;
    X = X.cwiseProduct(unobserved) + M;  // project onto X ⊙ P = M
    U += X - Z;

    const double primal = (X - Z).norm() / scale;
    const double dual = rho * (Z - Z_prev).norm() / scale;
    if (primal < cfg.tol && dual < cfg.tol) return X;

    if (primal > 10.0 * dual) {
      rho *= 2.0;
      U *= 0.5;
    } else if (dual > 10.0 * primal) {
      rho *= 0.5;
      U *= 2.0;
    }
  }
  const double primal = (X - Z).norm() / scale;
  throw numeric_error("nuclear_min_constrained: no convergence after " +
                      std::to_string(cfg.max_iters) + " iterations (primal residual " +
                      std::to_string(primal) + ")");
}

/// Exact minimizer of  sum_j l_j s_j + mu^2 sum_j s_j^2  over the simplex
/// with s_self forced to zero, by enumerating every support and solving its
/// KKT system. Intended for small n as an independent oracle.
inline Eigen::RowVectorXd brute_force_row_qp(const Eigen::RowVectorXd& l_row, Eigen::Index self,
                                             double mu_sq) {
  const Eigen::Index n = l_row.size();
  std::vector<Eigen::Index> candidates;
  for (Eigen::Index j = 0; j < n; ++j)
    if (j != self) candidates.push_back(j);
  const auto c = candidates.size();
  if (c == 0 || c > 20) throw config_error("brute_force_row_qp: candidate count out of range");

  Eigen::RowVectorXd best = Eigen::RowVectorXd::Zero(n);
  if (mu_sq <= 0.0) {  // pure linear program: all mass on the nearest column
    Eigen::Index arg = candidates[0];
    for (const auto j : candidates)
      if (l_row(j) < l_row(arg)) arg = j;
    best(arg) = 1.0;
    return best;
  }

  double best_val = std::numeric_limits<double>::infinity();
  for (std::uint32_t bits = 1; bits < (1u << c); ++bits) {
    double sum_l = 0.0;
    int size = 0;
    for (std::size_t t = 0; t < c; ++t)
      if (bits & (1u << t)) {
        sum_l += l_row(candidates[t]);
        ++size;
      }
    const double xi = (2.0 * mu_sq + sum_l) / static_cast<double>(size);
    Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(n);
    bool feasible = true;
    for (std::size_t t = 0; t < c && feasible; ++t) {
      if (!(bits & (1u << t))) continue;
      const double value = (xi - l_row(candidates[t])) / (2.0 * mu_sq);
      if (value < -1e-12) feasible = false;
      s(candidates[t]) = std::max(value, 0.0);
    }
    if (!feasible) continue;
    const double total = s.sum();
    if (total <= 0.0) continue;
    s /= total;  // repair rounding drift on the simplex
    const double val = l_row.cwiseProduct(s).sum() + mu_sq * s.squaredNorm();
    if (val < best_val) {
      best_val = val;
      best = s;
    }
  }
  return best;
}

/// Exact minimizer of  x Qhat x^T  s.t.  x_J = m_J, by eliminating the
/// constrained coordinates and solving the reduced system directly.
inline Eigen::RowVectorXd brute_force_constrained_row(const Eigen::RowVectorXd& m_row,
                                                      const IndexSet& J,
                                                      const Eigen::MatrixXd& Qhat) {
  const Eigen::Index n = Qhat.rows();
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(n);
  if (J.empty()) return x;

  std::vector<bool> in_J(static_cast<std::size_t>(n), false);
  for (const auto j : J) in_J[static_cast<std::size_t>(j)] = true;
  IndexSet K;
  for (Eigen::Index j = 0; j < n; ++j)
    if (!in_J[static_cast<std::size_t>(j)]) K.push_back(j);

  for (const auto j : J) x(j) = m_row(j);
  if (!K.empty()) {
    const Eigen::MatrixXd q_kk = detail::gather(Qhat, K, K);
    const Eigen::MatrixXd q_kj = detail::gather(Qhat, K, J);
    const Eigen::VectorXd m_j = detail::gather(m_row, J);
    const Eigen::VectorXd x_k = Eigen::LDLT<Eigen::MatrixXd>(q_kk).solve(-q_kj * m_j);
    for (std::size_t t = 0; t < K.size(); ++t) x(K[t]) = x_k(static_cast<Eigen::Index>(t));
  }
  return x;
}

}  // namespace ncarl
