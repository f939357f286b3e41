#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "ncarl/errors.hpp"

namespace ncarl {

/// Column-weight matrix of the trace surrogate. Produced by update_D; D is
/// symmetric PSD with tr(pinv(D)) = 1 over its nonzero spectrum, except in
/// the degenerate X = 0 case where D = 0 and the flag is set.
struct WeightMatrix {
  Eigen::MatrixXd D;
  bool degenerate = false;
};

namespace detail {

inline void require_symmetric(const Eigen::MatrixXd& A, const char* where) {
  if (A.rows() != A.cols()) throw config_error(std::string(where) + ": matrix not square");
  const double scale = A.cwiseAbs().maxCoeff();
  const double skew = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (skew > 1e-8 * std::max(scale, 1.0))
    throw config_error(std::string(where) + ": matrix not symmetric");
}

}  // namespace detail

/// Symmetric PSD square root via eigendecomposition. Small negative
/// eigenvalues from roundoff are clamped to zero.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& A) {
  detail::require_symmetric(A, "psd_sqrt");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success) throw numeric_error("psd_sqrt: eigendecomposition failed");
  Eigen::VectorXd lam = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = lam(i) > 0.0 ? std::sqrt(lam(i)) : 0.0;
  Eigen::MatrixXd root =
      eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (root + root.transpose());
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix. Eigenvalues at or
/// below rtol * lambda_max are treated as zero; rtol < 0 selects the default
/// 1e-12 * n cutoff.
inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& A, double rtol = -1.0) {
  detail::require_symmetric(A, "pinv");
  const Eigen::Index n = A.rows();
  if (rtol < 0.0) rtol = 1e-12 * static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success) throw numeric_error("pinv: eigendecomposition failed");
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double cutoff = rtol * std::max(lam.cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd inv(n);
  for (Eigen::Index i = 0; i < n; ++i) inv(i) = lam(i) > cutoff ? 1.0 / lam(i) : 0.0;
  Eigen::MatrixXd result =
      eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (result + result.transpose());
}

/// Closed-form optimal weight matrix for fixed X:
///   D = pinv( (X^T X)^{1/2} / tr((X^T X)^{1/2}) ) = tr(A) * pinv(A),
/// with A = (X^T X)^{1/2}. Satisfies tr(X D X^T) = ||X||_*^2.
/// X = 0 yields the degenerate D = 0.
///
/// A is assembled as V diag(sigma) V^T from the SVD of X rather than via the
/// Gram matrix: forming X^T X squares the condition number and corrupts
/// singular values below sqrt(eps) * sigma_1, which destabilizes the weights
/// on directions the iterate is shrinking.
///
/// Weights saturate at trace/cutoff instead of dropping to zero once a
/// singular value falls below the numerical-rank cutoff. A zero weight would
/// let the next row update re-populate a direction the iteration had already
/// eliminated, which shows up as upward jumps in the objective; saturation
/// keeps those directions expensive while changing tr(pinv(D)) by at most
/// n * cutoff / trace.
inline WeightMatrix update_D(const Eigen::MatrixXd& X) {
  if (!X.allFinite()) throw config_error("update_D: input must be finite");
  const Eigen::Index n = X.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double trace = sigma.sum();
  if (trace <= 0.0) return {Eigen::MatrixXd::Zero(n, n), true};

  const double cutoff = 1e-12 * static_cast<double>(n) * sigma(0);
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = i < sigma.size() ? sigma(i) : 0.0;  // wide X: no row-space direction
    weights(i) = trace / std::max(s, cutoff);
  }
  Eigen::MatrixXd d = svd.matrixV() * weights.asDiagonal() * svd.matrixV().transpose();
  return {0.5 * (d + d.transpose()), false};
}

/// Sum of singular values.
inline double nuclear_norm(const Eigen::MatrixXd& X) {
  return Eigen::BDCSVD<Eigen::MatrixXd>(X).singularValues().sum();
}

/// Number of singular values strictly above the threshold (paper treats
/// values below 1e-3 as zero when reporting ranks).
inline Eigen::Index numeric_rank(const Eigen::MatrixXd& X, double threshold = 1e-3) {
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(X).singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++rank;
  return rank;
}

}  // namespace ncarl
