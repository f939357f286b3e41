#include <Eigen/SVD>
#include <catch2/catch_amalgamated.hpp>

#include "ncarl/masked.hpp"
#include "ncarl/metrics.hpp"
#include "ncarl/synthetic.hpp"
#include "test_helpers.hpp"

using namespace ncarl;

TEST_CASE("apply_mask with zero rate keeps everything") {
  const Eigen::MatrixXd x = test_helpers::random_matrix(6, 5, 1);
  const MaskedMatrix masked = apply_mask(x, MaskSpec{.kind = MaskKind::Random, .rate = 0.0, .seed = 7});
  CHECK(masked.mask.sum() == 30.0);
  CHECK(masked.values == x);
}

TEST_CASE("apply_mask random removes exactly the declared count") {
  const Eigen::MatrixXd x = test_helpers::random_matrix(20, 20, 2);
  const MaskedMatrix masked = apply_mask(x, MaskSpec{.kind = MaskKind::Random, .rate = 0.5, .seed = 3});
  CHECK(masked.observed_count() == 200);

  for (const double rate : {0.1, 0.33, 0.9}) {
    for (const std::uint64_t seed : {11ULL, 12ULL}) {
      const MaskedMatrix m2 = apply_mask(x, MaskSpec{.kind = MaskKind::Random, .rate = rate, .seed = seed});
      const auto hidden = static_cast<std::int64_t>(std::floor(rate * 400.0));
      CHECK(m2.observed_count() == 400 - hidden);
    }
  }
}

TEST_CASE("apply_mask centered block removes the block only") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(10, 10, 2.5);
  MaskSpec spec{.kind = MaskKind::Block, .block_height = 5, .block_width = 5,
                .placement = BlockPlacement::Centered};
  const MaskedMatrix masked = apply_mask(x, spec);
  CHECK(masked.observed_count() == 75);
  CHECK(masked.mask.block(2, 2, 5, 5).sum() == 0.0);
}

TEST_CASE("apply_mask seeded block stays in bounds and is deterministic") {
  const Eigen::MatrixXd x = test_helpers::random_matrix(9, 7, 4);
  MaskSpec spec{.kind = MaskKind::Block, .block_height = 4, .block_width = 3, .seed = 99};
  const MaskedMatrix a = apply_mask(x, spec);
  const MaskedMatrix b = apply_mask(x, spec);
  CHECK(a.mask == b.mask);
  CHECK(a.observed_count() == 9 * 7 - 12);
}

TEST_CASE("masked values vanish off the mask") {
  const Eigen::MatrixXd x = test_helpers::random_matrix(8, 8, 5);
  const MaskedMatrix masked = apply_mask(x, MaskSpec{.kind = MaskKind::Random, .rate = 0.4, .seed = 17});
  const Eigen::MatrixXd off = masked.values.cwiseProduct(Eigen::MatrixXd::Ones(8, 8) - masked.mask);
  CHECK(off.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("apply_mask validates its spec") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 4);
  CHECK_THROWS_AS(apply_mask(x, MaskSpec{.kind = MaskKind::Random, .rate = 1.0}), config_error);
  CHECK_THROWS_AS(
      apply_mask(x, MaskSpec{.kind = MaskKind::Block, .block_height = 5, .block_width = 2}),
      config_error);
}

TEST_CASE("mask_known_entries partitions the observed set") {
  const Eigen::MatrixXd x = test_helpers::random_matrix(10, 10, 6);
  const MaskedMatrix base = apply_mask(x, MaskSpec{.kind = MaskKind::Random, .rate = 0.0});
  REQUIRE(base.observed_count() == 100);

  const auto [train, holdout] = mask_known_entries(base, 0.4, 21);
  CHECK(holdout.observed_count() == 40);
  CHECK(train.observed_count() == 60);
  CHECK((train.mask.cwiseProduct(holdout.mask)).sum() == 0.0);
  CHECK(((train.mask + holdout.mask) - base.mask).cwiseAbs().maxCoeff() == 0.0);

  const auto [train2, holdout2] = mask_known_entries(base, 0.4, 21);
  CHECK(train2.mask == train.mask);

  const auto [train0, holdout0] = mask_known_entries(base, 0.0, 21);
  CHECK(holdout0.observed_count() == 0);
  CHECK(train0.mask == base.mask);
}

TEST_CASE("mask_known_entries needs observations") {
  const MaskedMatrix empty =
      MaskedMatrix::from_values(Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3));
  CHECK_THROWS_AS(mask_known_entries(empty, 0.5, 1), config_error);
}

TEST_CASE("generate_synthetic builds an exact-rank factor product") {
  const auto [truth, noisy] = generate_synthetic({.rows = 4, .cols = 3, .rank = 3, .seed = 1});
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(truth).singularValues();
  CHECK(sv(2) > 1e-8);
  CHECK(truth == noisy);
}

TEST_CASE("generate_synthetic trailing spectrum is numerically zero") {
  const auto [truth, noisy] =
      generate_synthetic({.rows = 100, .cols = 60, .rank = 5, .seed = 2});
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(truth).singularValues();
  for (Eigen::Index i = 5; i < sv.size(); ++i) CHECK(sv(i) < 1e-10 * sv(0));
}

TEST_CASE("generate_synthetic is bitwise deterministic") {
  const SyntheticSpec spec{.rows = 12, .cols = 9, .rank = 2, .noise_fraction = 0.3, .seed = 77};
  const auto [t1, n1] = generate_synthetic(spec);
  const auto [t2, n2] = generate_synthetic(spec);
  CHECK(t1 == t2);
  CHECK(n1 == n2);
}

TEST_CASE("generate_synthetic perturbs the declared entry count") {
  const SyntheticSpec spec{.rows = 10, .cols = 10, .rank = 3, .noise_fraction = 0.2, .seed = 8};
  const auto [truth, noisy] = generate_synthetic(spec);
  long changed = 0;
  for (Eigen::Index j = 0; j < 10; ++j)
    for (Eigen::Index i = 0; i < 10; ++i)
      if (truth(i, j) != noisy(i, j)) ++changed;
  CHECK(changed == 20);
}

TEST_CASE("generate_synthetic rejects an impossible rank") {
  CHECK_THROWS_AS(generate_synthetic({.rows = 4, .cols = 3, .rank = 4}), config_error);
}

TEST_CASE("mse basics") {
  Eigen::MatrixXd truth(1, 1);
  truth << 2.0;
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::MatrixXd eval = Eigen::MatrixXd::Ones(1, 1);
  CHECK(mse(truth, truth, eval) == 0.0);
  CHECK(mse(zero, truth, eval) == 1.0);

  Eigen::MatrixXd t2(1, 2);
  t2 << 3.0, 4.0;
  CHECK(mse(Eigen::MatrixXd::Zero(1, 2), t2, Eigen::MatrixXd::Ones(1, 2)) == 1.0);
}

TEST_CASE("mse is invariant under joint scaling") {
  const Eigen::MatrixXd truth = test_helpers::random_matrix(6, 4, 9);
  const Eigen::MatrixXd rec = test_helpers::random_matrix(6, 4, 10);
  Eigen::MatrixXd eval = Eigen::MatrixXd::Zero(6, 4);
  eval.block(0, 0, 3, 4).setOnes();
  const double base = mse(rec, truth, eval);
  const double scaled = mse(3.7 * rec, 3.7 * truth, eval);
  CHECK(std::abs(base - scaled) < 1e-14);
}

TEST_CASE("mse error paths") {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(mse(z, z, Eigen::MatrixXd::Zero(2, 2)), config_error);   // empty eval set
  CHECK_THROWS_AS(mse(z, z, Eigen::MatrixXd::Ones(2, 2)), numeric_error);  // zero truth
}
