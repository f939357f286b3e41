#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncarl/correlation.hpp"
#include "ncarl/errors.hpp"
#include "ncarl/masked.hpp"
#include "ncarl/rows.hpp"
#include "ncarl/spectral.hpp"

namespace ncarl {

enum class Variant { SurrogateOnly, Ncarl, NcarlNoisy };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::SurrogateOnly: return "surrogate";
    case Variant::Ncarl: return "ncarl";
    case Variant::NcarlNoisy: return "ncarl-noisy";
  }
  return "?";
}

struct SolverConfig {
  Variant variant = Variant::SurrogateOnly;
  double alpha = 0.0;   // correlation weight
  double gamma = 1.0;   // data-fit tradeoff, noisy variant
  Eigen::Index k = 0;   // similarity sparsity per row
  double delta = 1e-6;  // perturbation making the row systems invertible
  int max_iters = 50;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;

  bool uses_graph() const { return variant != Variant::SurrogateOnly; }

  void validate(Eigen::Index n_cols) const {
    if (!(delta > 0.0)) throw config_error("SolverConfig: delta must be positive");
    if (max_iters < 1) throw config_error("SolverConfig: max_iters must be at least 1");
    if (!(rel_tol >= 0.0)) throw config_error("SolverConfig: rel_tol must be nonnegative");
    if (uses_graph()) {
      if (k < 1) throw config_error("SolverConfig: correlation variants need k >= 1");
      if (!(alpha > 0.0)) throw config_error("SolverConfig: correlation variants need alpha > 0");
      if (n_cols < k + 2)
        throw config_error("SolverConfig: need at least k+2 columns for the similarity graph");
    }
    if (variant == Variant::NcarlNoisy && !(gamma > 0.0))
      throw config_error("SolverConfig: noisy variant needs gamma > 0");
  }
};

struct SolveReport {
  Eigen::MatrixXd X;
  std::vector<double> objective_trace;            // one value per iteration
  std::vector<double> constraint_residual_trace;  // max |X.P - M| per iteration
  double kkt_residual_final = 0.0;
  int iterations_used = 0;
  bool converged = false;
  bool degenerate = false;  // all-zero iterate produced a zero weight matrix
  double wall_time_seconds = 0.0;
};

/// Objective value of the current blocks, per variant:
///   surrogate      tr(X D X^T)
///   correlation    tr(X (D + alpha L) X^T) + alpha * graph penalty
///   noisy          ||X.P - M||_F^2 + gamma tr(X D X^T)
///                  + alpha (tr(X L X^T) + graph penalty)
inline double objective(const MaskedMatrix& problem, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& D, const SimilarityGraph* graph,
                        const SolverConfig& config) {
  const double tr_xdxt = (X * D).cwiseProduct(X).sum();
  if (config.variant == Variant::SurrogateOnly) return tr_xdxt;
  if (graph == nullptr) throw config_error("objective: correlation variant needs a graph");
  const double tr_xlxt = (X * graph->L).cwiseProduct(X).sum();
  if (config.variant == Variant::Ncarl)
    return tr_xdxt + config.alpha * (tr_xlxt + graph->penalty);
  const double fit = (X.cwiseProduct(problem.mask) - problem.values).squaredNorm();
  return fit + config.gamma * tr_xdxt + config.alpha * (tr_xlxt + graph->penalty);
}

/// Alternating closed-form minimization. Starts from X = M, recomputes the
/// similarity graph (correlation variants) and the weight matrix each
/// iteration, then refreshes every row in closed form. Stops when the
/// relative objective change drops below rel_tol or after max_iters.
inline SolveReport solve(const MaskedMatrix& problem, const SolverConfig& config) {
  const Eigen::Index n = problem.cols();
  config.validate(n);
  if (problem.observed_count() == 0) throw config_error("solve: no observed entries");

  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::MatrixXd& M = problem.values;
  const Eigen::MatrixXd& P = problem.mask;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);

  // Noisy rows keep their observation patterns fixed across iterations.
  std::vector<IndexSet> patterns;
  if (config.variant == Variant::NcarlNoisy) {
    patterns.reserve(static_cast<std::size_t>(problem.rows()));
    for (Eigen::Index i = 0; i < problem.rows(); ++i)
      patterns.push_back(observed_indices(P.row(i)));
  }

  SolveReport report;
  report.X = M;
  Eigen::MatrixXd V;  // multipliers of the last constrained update
  Eigen::MatrixXd q_eff;
  double prev_obj = 0.0;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    std::optional<SimilarityGraph> graph;
    if (config.uses_graph()) graph = build_graph(report.X, config.k);

    WeightMatrix weight;
    try {
      weight = update_D(report.X);
    } catch (const numeric_error& err) {
      throw numeric_error(std::string(err.what()) + " (iteration " + std::to_string(iter) + ")");
    }
    report.degenerate = report.degenerate || weight.degenerate;

    if (config.variant == Variant::NcarlNoisy) {
      const Eigen::MatrixXd shrink =
          config.gamma * (weight.D + config.delta * identity) + config.alpha * graph->L;
      for (Eigen::Index i = 0; i < problem.rows(); ++i)
        report.X.row(i) = solve_row_noisy(M.row(i), patterns[static_cast<std::size_t>(i)], shrink, i);
      q_eff = config.gamma * weight.D + config.alpha * graph->L;
    } else {
      q_eff = weight.D;
      if (config.variant == Variant::Ncarl) q_eff += config.alpha * graph->L;
      ConstrainedUpdate update;
      try {
        update = solve_all_rows_constrained(M, P, q_eff + config.delta * identity);
      } catch (const numeric_error& err) {
        throw numeric_error(std::string(err.what()) + " (iteration " + std::to_string(iter) + ")");
      }
      report.X = std::move(update.X);
      V = std::move(update.V);
    }

    const double obj =
        objective(problem, report.X, weight.D, graph ? &*graph : nullptr, config);
    report.objective_trace.push_back(obj);
    report.constraint_residual_trace.push_back(
        (report.X.cwiseProduct(P) - M).cwiseAbs().maxCoeff());
    report.iterations_used = iter;

    if (iter > 1) {
      const double change = std::abs(obj - prev_obj) / std::max(std::abs(prev_obj), 1e-30);
      if (change < config.rel_tol) {
        report.converged = true;
        break;
      }
    }
    prev_obj = obj;
  }

  if (config.variant == Variant::NcarlNoisy) {
    // Gradient of the smooth objective at the returned iterate.
    const Eigen::MatrixXd grad = 2.0 * (report.X.cwiseProduct(P) - M).cwiseProduct(P) +
                                 2.0 * report.X * q_eff;
    report.kkt_residual_final = grad.norm();
  } else {
    report.kkt_residual_final = kkt_residual(report.X, P, q_eff, V);
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace ncarl
