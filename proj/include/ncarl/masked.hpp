#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ncarl/errors.hpp"
#include "ncarl/rng.hpp"

namespace ncarl {

/// A partially observed matrix: values M and binary mask P (1 = observed).
/// Unobserved values are stored as zero, so M = M ⊙ P always holds.
struct MaskedMatrix {
  Eigen::MatrixXd values;
  Eigen::MatrixXd mask;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  std::int64_t observed_count() const {
    return static_cast<std::int64_t>(std::llround(mask.sum()));
  }

  bool observed(Eigen::Index i, Eigen::Index j) const { return mask(i, j) != 0.0; }

  /// Validates the mask, zeroes values outside it, and returns the instance.
  static MaskedMatrix from_values(Eigen::MatrixXd values, Eigen::MatrixXd mask) {
    if (values.rows() != mask.rows() || values.cols() != mask.cols())
      throw config_error("MaskedMatrix: values and mask dimensions differ");
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        const double p = mask(i, j);
        if (p != 0.0 && p != 1.0) throw config_error("MaskedMatrix: mask entries must be 0 or 1");
        if (p == 0.0) values(i, j) = 0.0;
      }
    return MaskedMatrix{std::move(values), std::move(mask)};
  }
};

enum class MaskKind { Random, Block };
enum class BlockPlacement { Centered, SeededRandom };

/// How to hide entries of a fully known matrix.
struct MaskSpec {
  MaskKind kind = MaskKind::Random;
  double rate = 0.0;  // missing fraction in [0,1), Random kind
  Eigen::Index block_height = 0;
  Eigen::Index block_width = 0;
  BlockPlacement placement = BlockPlacement::SeededRandom;
  std::uint64_t seed = 0;

  void validate(Eigen::Index rows, Eigen::Index cols) const {
    if (kind == MaskKind::Random) {
      if (!(rate >= 0.0 && rate < 1.0)) throw config_error("MaskSpec: rate must be in [0,1)");
    } else {
      if (block_height <= 0 || block_width <= 0 || block_height > rows || block_width > cols)
        throw config_error("MaskSpec: block does not fit the matrix");
    }
  }
};

/// Hides entries of X per the spec. Random kind removes exactly
/// floor(rate*m*n) entries chosen by a seeded Fisher-Yates draw; Block kind
/// removes one contiguous h-by-w submatrix.
inline MaskedMatrix apply_mask(const Eigen::MatrixXd& X, const MaskSpec& spec) {
  const Eigen::Index m = X.rows();
  const Eigen::Index n = X.cols();
  spec.validate(m, n);
  if (!X.allFinite()) throw config_error("apply_mask: input must be finite");

  Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(m, n);
  if (spec.kind == MaskKind::Random) {
    const auto total = static_cast<std::int64_t>(m) * static_cast<std::int64_t>(n);
    const auto hidden = static_cast<std::int64_t>(std::floor(spec.rate * static_cast<double>(total)));
    for (const auto flat : rng::sample_without_replacement(total, hidden, spec.seed)) {
      mask(flat / n, flat % n) = 0.0;  // row-major flat index
    }
  } else {
    Eigen::Index top = 0;
    Eigen::Index left = 0;
    if (spec.placement == BlockPlacement::Centered) {
      top = (m - spec.block_height) / 2;
      left = (n - spec.block_width) / 2;
    } else {
      std::mt19937_64 gen(spec.seed);
      top = static_cast<Eigen::Index>(rng::bounded(gen, static_cast<std::uint64_t>(m - spec.block_height + 1)));
      left = static_cast<Eigen::Index>(rng::bounded(gen, static_cast<std::uint64_t>(n - spec.block_width + 1)));
    }
    mask.block(top, left, spec.block_height, spec.block_width).setZero();
  }
  return MaskedMatrix::from_values(X, std::move(mask));
}

/// Splits the observed set of `base` into a training part and a held-out
/// part of size floor(rate*|Omega|), chosen by seed. The two masks are
/// disjoint and their union is base's mask.
inline std::pair<MaskedMatrix, MaskedMatrix> mask_known_entries(const MaskedMatrix& base,
                                                                double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw config_error("mask_known_entries: rate must be in [0,1)");
  const std::int64_t observed = base.observed_count();
  if (observed == 0) throw config_error("mask_known_entries: no observed entries");

  // Flat row-major indices of the observed set, in deterministic order.
  std::vector<std::int64_t> omega;
  omega.reserve(static_cast<std::size_t>(observed));
  const Eigen::Index n = base.cols();
  for (Eigen::Index i = 0; i < base.rows(); ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (base.observed(i, j)) omega.push_back(static_cast<std::int64_t>(i) * n + j);

  const auto holdout_size = static_cast<std::int64_t>(std::floor(rate * static_cast<double>(observed)));
  Eigen::MatrixXd train_mask = base.mask;
  Eigen::MatrixXd holdout_mask = Eigen::MatrixXd::Zero(base.rows(), base.cols());
  for (const auto pick : rng::sample_without_replacement(observed, holdout_size, seed)) {
    const auto flat = omega[static_cast<std::size_t>(pick)];
    train_mask(flat / n, flat % n) = 0.0;
    holdout_mask(flat / n, flat % n) = 1.0;
  }
  return {MaskedMatrix::from_values(base.values, std::move(train_mask)),
          MaskedMatrix::from_values(base.values, std::move(holdout_mask))};
}

}  // namespace ncarl
