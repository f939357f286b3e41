#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "ncarl/errors.hpp"

namespace ncarl {

using IndexSet = std::vector<Eigen::Index>;

inline IndexSet observed_indices(const Eigen::Ref<const Eigen::RowVectorXd>& mask_row) {
  IndexSet J;
  for (Eigen::Index j = 0; j < mask_row.size(); ++j)
    if (mask_row(j) != 0.0) J.push_back(j);
  return J;
}

namespace detail {

constexpr double kRcondFloor = 1e-14;  // condition estimate > 1e14 is treated as singular

inline Eigen::MatrixXd gather(const Eigen::MatrixXd& A, const IndexSet& rows, const IndexSet& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = A(rows[r], cols[c]);
  return out;
}

inline Eigen::VectorXd gather(const Eigen::RowVectorXd& v, const IndexSet& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(idx[r]);
  return out;
}

// Symmetric positive-definite solve with diagonal equilibration and one pass
// of iterative refinement. The observed subsystems develop a huge diagonal
// spread as the iterate sharpens towards low rank; equilibration separates
// that benign spread from genuine near-singularity, which the rcond guard on
// the scaled matrix still catches.
struct ScaledSpdSolver {
  Eigen::VectorXd scale;   // 1/sqrt(diag)
  Eigen::MatrixXd scaled;  // S A S, unit diagonal
  Eigen::LDLT<Eigen::MatrixXd> ldlt;

  bool compute(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    scale.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = a(i, i);
      if (!(d > 0.0)) return false;
      scale(i) = 1.0 / std::sqrt(d);
    }
    scaled = scale.asDiagonal() * a * scale.asDiagonal();
    ldlt.compute(scaled);
    return ldlt.info() == Eigen::Success && ldlt.rcond() >= kRcondFloor;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const Eigen::VectorXd bs = scale.cwiseProduct(b);
    Eigen::VectorXd y = ldlt.solve(bs);
    y += ldlt.solve(bs - scaled * y);
    return scale.cwiseProduct(y);
  }
};

}  // namespace detail

/// Minimizer of x Qhat x^T subject to x_J = m_J, written in terms of the
/// precomputed inverse G = Qhat^{-1}:
///   x = m_J (G_{J,J})^{-1} G_{J,.}
/// Observed coordinates are reproduced exactly; an empty J gives x = 0.
inline Eigen::RowVectorXd solve_row_constrained(const Eigen::RowVectorXd& m_row, const IndexSet& J,
                                                const Eigen::MatrixXd& Qhat_inv,
                                                Eigen::RowVectorXd* multipliers = nullptr,
                                                Eigen::Index row_index = -1) {
  const Eigen::Index n = Qhat_inv.rows();
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(n);
  if (multipliers) *multipliers = Eigen::RowVectorXd::Zero(n);
  if (J.empty()) return x;

  detail::ScaledSpdSolver solver;
  if (!solver.compute(detail::gather(Qhat_inv, J, J)))
    throw numeric_error("solve_row_constrained: singular observed subsystem at row " +
                        std::to_string(row_index));
  const Eigen::VectorXd w = solver.solve(detail::gather(m_row, J));

  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < J.size(); ++r) acc += Qhat_inv(J[r], j) * w(static_cast<Eigen::Index>(r));
    x(j) = acc;
  }
  for (std::size_t r = 0; r < J.size(); ++r) x(J[r]) = m_row(J[r]);
  if (multipliers)
    for (std::size_t r = 0; r < J.size(); ++r) (*multipliers)(J[r]) = -2.0 * w(static_cast<Eigen::Index>(r));
  return x;
}

/// All-row constrained update sharing one factorization of Qhat. Rows with
/// identical observation patterns reuse the same submatrix factorization.
/// Returns the iterate X and the Lagrange multipliers V (zero off the mask).
struct ConstrainedUpdate {
  Eigen::MatrixXd X;
  Eigen::MatrixXd V;
};

inline ConstrainedUpdate solve_all_rows_constrained(const Eigen::MatrixXd& M,
                                                    const Eigen::MatrixXd& P,
                                                    const Eigen::MatrixXd& Qhat) {
  const Eigen::Index m = M.rows();
  const Eigen::Index n = M.cols();

  // Qhat carries the +delta*I perturbation, so it is invertible by
  // construction; its conditioning legitimately reaches 1/delta scales as the
  // iterate sharpens, which is why no rcond guard is applied here.
  Eigen::LDLT<Eigen::MatrixXd> qhat_ldlt(Qhat);
  if (qhat_ldlt.info() != Eigen::Success)
    throw numeric_error("solve_all_rows_constrained: weight matrix factorization failed");
  const Eigen::MatrixXd G = qhat_ldlt.solve(Eigen::MatrixXd::Identity(n, n));

  struct PatternEntry {
    IndexSet J;
    detail::ScaledSpdSolver solver;
  };
  std::map<std::string, PatternEntry> cache;

  ConstrainedUpdate out{Eigen::MatrixXd::Zero(m, n), Eigen::MatrixXd::Zero(m, n)};
  std::string key(static_cast<std::size_t>(n), '0');
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) key[static_cast<std::size_t>(j)] = P(i, j) != 0.0 ? '1' : '0';
    auto it = cache.find(key);
    if (it == cache.end()) {
      PatternEntry entry;
      entry.J = observed_indices(P.row(i));
      if (!entry.J.empty() && !entry.solver.compute(detail::gather(G, entry.J, entry.J)))
        throw numeric_error("solve_all_rows_constrained: singular subsystem at row " +
                            std::to_string(i));
      it = cache.emplace(key, std::move(entry)).first;
    }
    const IndexSet& J = it->second.J;
    if (J.empty()) continue;  // fully unobserved row stays zero

    const Eigen::VectorXd w =
        it->second.solver.solve(detail::gather(Eigen::RowVectorXd(M.row(i)), J));
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < J.size(); ++r) acc += G(J[r], j) * w(static_cast<Eigen::Index>(r));
      out.X(i, j) = acc;
    }
    for (std::size_t r = 0; r < J.size(); ++r) {
      out.X(i, J[r]) = M(i, J[r]);
      out.V(i, J[r]) = -2.0 * w(static_cast<Eigen::Index>(r));
    }
  }
  return out;
}

/// Regularized row update for the noisy model: solves
///   x (P_i + W) = m P_i
/// with W the row-independent shrinkage part (gamma * Dhat, plus alpha * L
/// when correlation is active). The system is positive definite whenever
/// W carries the delta perturbation.
inline Eigen::RowVectorXd solve_row_noisy(const Eigen::RowVectorXd& m_row, const IndexSet& J,
                                          const Eigen::MatrixXd& W, Eigen::Index row_index = -1) {
  const Eigen::Index n = W.rows();
  Eigen::MatrixXd system = W;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto j : J) {
    system(j, j) += 1.0;
    rhs(j) = m_row(j);
  }
  detail::ScaledSpdSolver solver;
  if (!solver.compute(system))
    throw numeric_error("solve_row_noisy: singular system at row " + std::to_string(row_index));
  return solver.solve(rhs).transpose();
}

/// Frobenius norm of the Lagrangian gradient 2 X Q + V ⊙ P at the returned
/// iterate; Q is the unperturbed weight matrix of the objective. Scales
/// linearly with the perturbation delta.
inline double kkt_residual(const Eigen::MatrixXd& X, const Eigen::MatrixXd& P,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& V) {
  return (2.0 * X * Q + V.cwiseProduct(P)).norm();
}

}  // namespace ncarl
