#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "ncarl/errors.hpp"

namespace ncarl {

/// Normalized root error over an evaluation set:
/// sqrt( sum_eval (recovered - truth)^2 / sum_eval truth^2 ).
inline double mse(const Eigen::MatrixXd& recovered, const Eigen::MatrixXd& truth,
                  const Eigen::MatrixXd& eval_set) {
  if (recovered.rows() != truth.rows() || recovered.cols() != truth.cols() ||
      eval_set.rows() != truth.rows() || eval_set.cols() != truth.cols())
    throw config_error("mse: dimension mismatch");
  double num = 0.0;
  double den = 0.0;
  long count = 0;
  for (Eigen::Index j = 0; j < truth.cols(); ++j)
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      if (eval_set(i, j) == 0.0) continue;
      const double err = recovered(i, j) - truth(i, j);
      num += err * err;
      den += truth(i, j) * truth(i, j);
      ++count;
    }
  if (count == 0) throw config_error("mse: empty evaluation set");
  if (den == 0.0) throw numeric_error("mse: truth is zero on the evaluation set");
  return std::sqrt(num / den);
}

}  // namespace ncarl
