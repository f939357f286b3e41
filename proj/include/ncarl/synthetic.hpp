#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>

#include "ncarl/errors.hpp"
#include "ncarl/rng.hpp"

namespace ncarl {

/// Recipe for a synthetic low-rank instance: ground truth A*B with A m-by-r
/// and B r-by-n i.i.d. standard normal, plus additive Gaussian noise on a
/// seeded random fraction of entries.
struct SyntheticSpec {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index rank = 1;
  double noise_fraction = 0.0;        // rho, fraction of entries perturbed
  std::optional<double> noise_scale;  // sigma; absent = 0.01 * RMS of ground truth
  std::uint64_t seed = 0;

  void validate() const {
    if (rows <= 0 || cols <= 0) throw config_error("SyntheticSpec: dimensions must be positive");
    if (rank <= 0 || rank > std::min(rows, cols))
      throw config_error("SyntheticSpec: rank must be in [1, min(m,n)]");
    if (!(noise_fraction >= 0.0 && noise_fraction <= 1.0))
      throw config_error("SyntheticSpec: noise fraction must be in [0,1]");
    if (noise_scale && *noise_scale < 0.0)
      throw config_error("SyntheticSpec: noise scale must be nonnegative");
  }
};

/// Returns (ground_truth, noisy_copy). With noise_fraction = 0 the two are
/// identical. ceil(rho*m*n) entries of the copy get an N(0, sigma^2) bump.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd a(spec.rows, spec.rank);
  Eigen::MatrixXd b(spec.rank, spec.cols);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(gen);
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, j) = normal(gen);
  Eigen::MatrixXd truth = a * b;

  Eigen::MatrixXd noisy = truth;
  const auto total = static_cast<std::int64_t>(spec.rows) * static_cast<std::int64_t>(spec.cols);
  const auto polluted =
      static_cast<std::int64_t>(std::ceil(spec.noise_fraction * static_cast<double>(total)));
  if (polluted > 0) {
    const double sigma = spec.noise_scale
                             ? *spec.noise_scale
                             : 0.01 * std::sqrt(truth.squaredNorm() / static_cast<double>(total));
    const Eigen::Index n = spec.cols;
    for (const auto flat : rng::sample_without_replacement(total, polluted, gen)) {
      noisy(flat / n, flat % n) += sigma * normal(gen);
    }
  }
  return {std::move(truth), std::move(noisy)};
}

}  // namespace ncarl
