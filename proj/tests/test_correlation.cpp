#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <random>

#include "ncarl/correlation.hpp"
#include "ncarl/oracle.hpp"
#include "test_helpers.hpp"

using namespace ncarl;

namespace {

// Projection onto the probability simplex (Duchi et al. style threshold).
Eigen::VectorXd project_simplex(Eigen::VectorXd v) {
  Eigen::VectorXd u = v;
  std::sort(u.data(), u.data() + u.size(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    cumulative += u(i);
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u(i) - candidate > 0.0) theta = candidate;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::max(v(i) - theta, 0.0);
  return v;
}

// Projected-gradient reference for min sum l_j s_j + mu^2 ||s||^2 over the
// simplex with the self coordinate removed.
Eigen::RowVectorXd projected_gradient_row(const Eigen::RowVectorXd& l_row, Eigen::Index self,
                                          double mu_sq) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < l_row.size(); ++j)
    if (j != self) idx.push_back(j);
  const auto c = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd s = Eigen::VectorXd::Constant(c, 1.0 / static_cast<double>(c));
  Eigen::VectorXd l(c);
  for (Eigen::Index t = 0; t < c; ++t) l(t) = l_row(idx[static_cast<std::size_t>(t)]);

  const double step = 0.5 / mu_sq;
  for (int iter = 0; iter < 200000; ++iter) {
    const Eigen::VectorXd grad = l + 2.0 * mu_sq * s;
    const Eigen::VectorXd next = project_simplex(s - step * grad);
    const double change = (next - s).cwiseAbs().maxCoeff();
    s = next;
    if (change < 1e-14) break;
  }
  Eigen::RowVectorXd full = Eigen::RowVectorXd::Zero(l_row.size());
  for (Eigen::Index t = 0; t < c; ++t) full(idx[static_cast<std::size_t>(t)]) = s(t);
  return full;
}

}  // namespace

TEST_CASE("pairwise distances on stated examples") {
  Eigen::MatrixXd x(2, 2);
  x << 0.0, 3.0, 0.0, 4.0;
  const Eigen::MatrixXd l = pairwise_sq_dists(x);
  CHECK(l(0, 1) == 25.0);
  CHECK(l(1, 0) == 25.0);
  CHECK(l(0, 0) == 0.0);

  Eigen::MatrixXd dup(3, 2);
  dup << 1.0, 1.0, 2.0, 2.0, -1.0, -1.0;
  CHECK(pairwise_sq_dists(dup)(0, 1) == 0.0);
}

TEST_CASE("pairwise distances match the direct double loop") {
  const Eigen::MatrixXd x = test_helpers::random_matrix(5, 4, 13);
  const Eigen::MatrixXd l = pairwise_sq_dists(x);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (Eigen::Index r = 0; r < 5; ++r) acc += (x(r, i) - x(r, j)) * (x(r, i) - x(r, j));
      CHECK(l(i, j) == acc);
    }
}

TEST_CASE("similarity row with k=1 is one-hot on the nearest column") {
  Eigen::RowVectorXd l(3);
  l << 0.0, 1.0, 4.0;  // self at 0
  const SimilarityRow row = learn_similarity_row(l, 0, 1);
  CHECK(row.s(0) == 0.0);
  CHECK(row.s(1) == 1.0);
  CHECK(row.s(2) == 0.0);
}

TEST_CASE("similarity row reproduces the closed-form weights") {
  Eigen::RowVectorXd l(4);
  l << 0.0, 1.0, 2.0, 4.0;  // self at 0, non-self distances 1, 2, 4
  const SimilarityRow row = learn_similarity_row(l, 0, 2);
  CHECK(std::abs(row.s(1) - 0.6) < 1e-14);
  CHECK(std::abs(row.s(2) - 0.4) < 1e-14);
  CHECK(row.s(3) == 0.0);
  CHECK(std::abs(row.mu_sq - 2.5) < 1e-14);

  const Eigen::RowVectorXd reference = projected_gradient_row(l, 0, row.mu_sq);
  CHECK((row.s - reference).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("similarity row falls back to uniform under total ties") {
  Eigen::RowVectorXd l(5);
  l << 3.0, 3.0, 0.0, 3.0, 3.0;  // self at 2, every neighbor equidistant
  const SimilarityRow row = learn_similarity_row(l, 2, 2);
  CHECK(row.s(0) == 0.5);
  CHECK(row.s(1) == 0.5);
  CHECK(row.s(3) == 0.0);
  CHECK(row.s(4) == 0.0);
}

TEST_CASE("similarity row validates k") {
  const Eigen::RowVectorXd l = Eigen::RowVectorXd::LinSpaced(4, 0.0, 3.0);
  CHECK_THROWS_AS(learn_similarity_row(l, 0, 0), config_error);
  CHECK_THROWS_AS(learn_similarity_row(l, 0, 3), config_error);
}

TEST_CASE("similarity rows are k-sparse and row-stochastic on generic input") {
  const Eigen::MatrixXd x = test_helpers::random_matrix(6, 7, 21);
  const Eigen::MatrixXd l = pairwise_sq_dists(x);
  for (Eigen::Index i = 0; i < 7; ++i) {
    for (const Eigen::Index k : {1, 2, 3}) {
      const SimilarityRow row = learn_similarity_row(l.row(i), i, k);
      CHECK(std::abs(row.s.sum() - 1.0) < 1e-12);
      CHECK(row.s.minCoeff() >= 0.0);
      CHECK(row.s(i) == 0.0);
      Eigen::Index support = 0;
      for (Eigen::Index j = 0; j < 7; ++j)
        if (row.s(j) > 0.0) ++support;
      CHECK(support == k);
    }
  }
}

TEST_CASE("similarity row matches the support-enumeration oracle") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(seed % 4);  // 5..8
    const Eigen::MatrixXd x = test_helpers::random_matrix(4, n, 300 + seed);
    const Eigen::MatrixXd l = pairwise_sq_dists(x);
    const Eigen::Index i = static_cast<Eigen::Index>(seed) % n;
    for (const Eigen::Index k : {1, 2, 3}) {
      const SimilarityRow row = learn_similarity_row(l.row(i), i, k);
      const Eigen::RowVectorXd oracle = brute_force_row_qp(l.row(i), i, row.mu_sq);
      CHECK((row.s - oracle).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

// Theorem-7 range: any mu^2 inside the open interval gives support exactly k.
TEST_CASE("mu interval controls the support size") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 7;
    const Eigen::MatrixXd x = test_helpers::random_matrix(3, n, 600 + trial);
    const Eigen::MatrixXd l = pairwise_sq_dists(x);
    const Eigen::Index i = trial % n;
    const Eigen::Index k = 1 + trial % 3;

    std::vector<double> dists;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) dists.push_back(l(i, j));
    std::sort(dists.begin(), dists.end());
    double near = 0.0;
    for (Eigen::Index v = 0; v < k; ++v) near += dists[static_cast<std::size_t>(v)];
    const double lo = 0.5 * (static_cast<double>(k) * dists[static_cast<std::size_t>(k - 1)] - near);
    const double hi = 0.5 * (static_cast<double>(k) * dists[static_cast<std::size_t>(k)] - near);

    const double mu_sq = lo + (0.1 + 0.8 * unif(gen)) * (hi - lo);
    const Eigen::RowVectorXd s = brute_force_row_qp(l.row(i), i, mu_sq);
    Eigen::Index support = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (s(j) > 1e-12) ++support;
    CHECK(support == k);
  }
}

TEST_CASE("build_graph on duplicate columns links them both ways") {
  Eigen::MatrixXd x(3, 4);
  x << 1.0, 1.0, 5.0, -3.0,
       2.0, 2.0, 6.0, -4.0,
       3.0, 3.0, 7.0, -5.0;
  const SimilarityGraph g = build_graph(x, 1);
  CHECK(g.S(0, 1) > 0.0);
  CHECK(g.S(0, 1) == g.S(1, 0));
}

TEST_CASE("build_graph satisfies the Laplacian identities") {
  const Eigen::MatrixXd x = test_helpers::random_matrix(6, 5, 31);
  const SimilarityGraph g = build_graph(x, 2);

  CHECK((g.S - g.S.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.S.minCoeff() >= 0.0);
  CHECK((g.L * Eigen::VectorXd::Ones(5)).cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::MatrixXd l = pairwise_sq_dists(x);
  double half_sum = 0.0;
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) half_sum += g.S(i, j) * l(i, j);
  half_sum *= 0.5;
  const double quadratic = (x * g.L).cwiseProduct(x).sum();
  CHECK(std::abs(quadratic - half_sum) < 1e-10);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.L);
  CHECK(eig.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("build_graph on orthogonal equidistant columns is uniform") {
  const Eigen::MatrixXd x = 2.0 * Eigen::MatrixXd::Identity(4, 4);
  const SimilarityGraph g = build_graph(x, 2);
  // Each pre-symmetrization row is 1/2 on its two lowest-index neighbours, so
  // symmetrized weights are 1/2 for mutual picks and 1/4 for one-way picks.
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(g.S(i, i) == 0.0);
    for (Eigen::Index j = 0; j < 4; ++j)
      if (i != j && g.S(i, j) > 0.0) CHECK((g.S(i, j) == 0.5 || g.S(i, j) == 0.25));
  }
  CHECK((g.L * Eigen::VectorXd::Ones(4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("graph learning is scaling invariant") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Eigen::MatrixXd x = test_helpers::random_matrix(5, 6, 700 + seed);
    const SimilarityGraph base = build_graph(x, 2);
    for (const double c : {1e-3, 7.0, 1e3, -2.0}) {
      const SimilarityGraph scaled = build_graph(c * x, 2);
      CHECK((scaled.S - base.S).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}
