#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace test_helpers {

inline Eigen::MatrixXd random_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd X(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) X(i, j) = normal(gen);
  return X;
}

inline Eigen::MatrixXd random_low_rank(Eigen::Index m, Eigen::Index n, Eigen::Index r,
                                       std::uint64_t seed) {
  return random_matrix(m, r, seed) * random_matrix(r, n, seed + 0x9e3779b97f4a7c15ULL);
}

inline Eigen::MatrixXd random_psd(Eigen::Index n, std::uint64_t seed) {
  const Eigen::MatrixXd g = random_matrix(n, n, seed);
  return g.transpose() * g;
}

}  // namespace test_helpers
