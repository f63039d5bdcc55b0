#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "grkneg/grk.hpp"
#include "oracles.hpp"

using namespace grkneg;

TEST(NegativeDistribution, TwoPointExample) {
  const Matrix neg{{0, 2}, {0, 2}};
  const auto d = sample_negative_distribution(neg);
  EXPECT_EQ(d.mean, (std::vector<double>{1, 1}));
  EXPECT_NEAR(d.std[0], std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(d.std[1], std::sqrt(2.0), 1e-15);
}

TEST(NegativeDistribution, SingleSampleAndConstantDimensionGetUnitStd) {
  const auto one = sample_negative_distribution(Matrix{{3.0}, {-1.0}});
  EXPECT_EQ(one.mean, (std::vector<double>{3, -1}));
  EXPECT_EQ(one.std, (std::vector<double>{1, 1}));
  const auto flat = sample_negative_distribution(Matrix{{5, 5, 5}, {1, 2, 3}});
  EXPECT_EQ(flat.std[0], 1.0);
  EXPECT_NEAR(flat.std[1], 1.0, 1e-15);
  EXPECT_THROW(sample_negative_distribution(Matrix(2, 0)), std::invalid_argument);
}

TEST(NegativeDistribution, MatchesTwoPassOracle) {
  std::mt19937_64 gen(71);
  const Matrix neg = oracle::random_matrix(4, 9, gen, 3.0);
  const auto d = sample_negative_distribution(neg);
  const oracle::Mat e = oracle::to_eigen(neg);
  for (int i = 0; i < 4; ++i) {
    const double mu = e.row(i).mean();
    const double sd = std::sqrt((e.row(i).array() - mu).square().sum() / 8.0);
    EXPECT_NEAR(d.mean[i], mu, 1e-13);
    EXPECT_NEAR(d.std[i], sd, 1e-13);
  }
}

TEST(GenerateSamples, MonteCarloMoments) {
  const NegativeDistribution dist{{2.0, -1.0}, {0.5, 3.0}};
  Rng rng(73);
  const Matrix s = generate_samples(dist, 40000, rng);
  const oracle::Mat e = oracle::to_eigen(s);
  for (int i = 0; i < 2; ++i) {
    const double mu = e.row(i).mean();
    const double sd = std::sqrt((e.row(i).array() - mu).square().sum() / (e.cols() - 1.0));
    EXPECT_NEAR(mu, dist.mean[i], 4.0 * dist.std[i] / std::sqrt(40000.0));
    EXPECT_NEAR(sd, dist.std[i], 0.02 * dist.std[i]);
  }
}

TEST(GenerateSamples, DeterministicForSeed) {
  const NegativeDistribution dist{{0.0}, {1.0}};
  Rng a(5), b(5);
  EXPECT_EQ(generate_samples(dist, 10, a), generate_samples(dist, 10, b));
}

TEST(Nonpositive, PushAwayFromOrigin) {
  EXPECT_DOUBLE_EQ(push_from_origin(0.3), 0.8);
  EXPECT_DOUBLE_EQ(push_from_origin(-0.3), -0.8);
  EXPECT_DOUBLE_EQ(push_from_origin(0.0), 0.5);
  Rng rng(79);
  const Matrix s = generate_nonpositive(500, 3, rng);
  for (double v : s.data()) EXPECT_GE(std::abs(v), 0.5);
}

TEST(ReferenceSet, Counts) {
  EXPECT_EQ(reference_count(ReferenceStrategy::V3, 35, 5), 5u);
  EXPECT_EQ(reference_count(ReferenceStrategy::V7, 35, 5), 40u);
  EXPECT_EQ(reference_count(ReferenceStrategy::V9, 5, 5), 7u);
  EXPECT_EQ(reference_count(ReferenceStrategy::V9, 1, 5), 6u);
  EXPECT_EQ(reference_count(ReferenceStrategy::V8, 35, 5), 75u);
}

TEST(ReferenceSet, ShapesOrderingAndCountsForEveryVariant) {
  std::mt19937_64 gen(83);
  const Matrix pos = oracle::random_matrix(3, 7, gen);
  const Matrix neg = oracle::random_matrix(3, 4, gen);
  for (int v = 1; v <= 9; ++v) {
    const auto s = strategy_from_number(v);
    Rng rng(v);
    const Matrix r = build_reference_set(s, pos, neg, rng);
    EXPECT_EQ(r.rows(), 3u);
    EXPECT_EQ(r.cols(), reference_count(s, 7, 4)) << "variant " << v;
  }
  auto cols_equal = [](const Matrix& a, std::size_t ca, const Matrix& b, std::size_t cb) {
    return a.col(ca) == b.col(cb);
  };
  Rng rng(1);
  const Matrix v2 = build_reference_set(ReferenceStrategy::V2, pos, neg, rng);
  EXPECT_TRUE(cols_equal(v2, 0, pos, 0));
  EXPECT_TRUE(cols_equal(v2, 7, neg, 0));
  for (auto s : {ReferenceStrategy::V7, ReferenceStrategy::V8, ReferenceStrategy::V9}) {
    const Matrix r = build_reference_set(s, pos, neg, rng);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_TRUE(cols_equal(r, j, neg, j));
  }
  EXPECT_THROW(build_reference_set(ReferenceStrategy::V7, pos, Matrix(3, 0), rng), std::invalid_argument);
  EXPECT_NO_THROW(build_reference_set(ReferenceStrategy::V1, pos, Matrix(3, 0), rng));
  EXPECT_THROW(strategy_from_number(10), std::invalid_argument);
}

TEST(ReferenceSet, NonpositiveBlockOfVariantSix) {
  std::mt19937_64 gen(89);
  const Matrix pos = oracle::random_matrix(2, 6, gen);
  const Matrix neg = oracle::random_matrix(2, 3, gen);
  Rng rng(2);
  const Matrix r = build_reference_set(ReferenceStrategy::V6, pos, neg, rng);
  for (std::size_t j = 0; j < 6; ++j)
    for (std::size_t i = 0; i < 2; ++i) EXPECT_GE(std::abs(r(i, j)), 0.5);
}

TEST(GrkTrain, MatchesFeatureMapOracle) {
  std::mt19937_64 gen(97);
  std::uniform_int_distribution<int> dim(1, 5), np(2, 10), nr(2, 12);
  for (int rep = 0; rep < 30; ++rep) {
    const Matrix pos = oracle::random_matrix(dim(gen), np(gen), gen);
    const Matrix ref = oracle::random_matrix(pos.rows(), nr(gen), gen, 1.5);
    const Matrix test = oracle::random_matrix(pos.rows(), 4, gen);
    const double sigma = 1.2;
    const GrkModel m = grk_train(pos, ref, sigma);
    const oracle::GrkFeatureMap fm(ref, sigma);
    EXPECT_EQ(m.rank, fm.rank());
    EXPECT_LT(oracle::max_abs_diff(oracle::to_eigen(m.train_kernel), fm.kernel(pos, pos)), 1e-7);
    EXPECT_LT(oracle::max_abs_diff(oracle::to_eigen(grk_test(m, test)), fm.kernel(pos, test)), 1e-7);
  }
}

TEST(GrkTrain, SizeIsPByPForEveryReferenceSize) {
  std::mt19937_64 gen(101);
  const Matrix pos = oracle::random_matrix(3, 6, gen);
  for (std::size_t r : {1u, 2u, 6u, 20u}) {
    const GrkModel m = grk_train(pos, oracle::random_matrix(3, r, gen), 1.0);
    EXPECT_EQ(m.train_kernel.rows(), 6u);
    EXPECT_EQ(m.train_kernel.cols(), 6u);
    EXPECT_TRUE(is_symmetric(m.train_kernel, 0.0));
    Eigen::SelfAdjointEigenSolver<oracle::Mat> es(oracle::to_eigen(m.train_kernel));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
  }
}

TEST(GrkTrain, DegeneratesToCenteredKernel) {
  std::mt19937_64 gen(103);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix pos = oracle::random_matrix(4, 8, gen);
    const double sigma = 1.5;
    const GrkModel m = grk_train(pos, pos, sigma);
    ASSERT_EQ(m.rank, 7u);  // centering removes exactly one direction
    EXPECT_LT(max_abs_diff(m.train_kernel, center_square_kernel(rbf_kernel(pos, pos, sigma))), 1e-7);
  }
}

TEST(GrkTrain, InvariantToReferencePermutation) {
  std::mt19937_64 gen(107);
  const Matrix pos = oracle::random_matrix(3, 5, gen);
  const Matrix ref = oracle::random_matrix(3, 9, gen);
  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  const Matrix a = grk_train(pos, ref, 0.9).train_kernel;
  const Matrix b = grk_train(pos, ref.select_cols(perm), 0.9).train_kernel;
  EXPECT_LT(max_abs_diff(a, b), 1e-8);
}

TEST(GrkTest, TrainingColumnsReproduceTrainKernel) {
  std::mt19937_64 gen(109);
  const Matrix pos = oracle::random_matrix(2, 7, gen);
  const GrkModel m = grk_train(pos, oracle::random_matrix(2, 10, gen), 0.8);
  EXPECT_LT(max_abs_diff(grk_test(m, pos), m.train_kernel), 1e-8);
  EXPECT_THROW(grk_test(m, Matrix(3, 2)), DimensionError);
  EXPECT_THROW(grk_train(pos, Matrix(3, 4), 1.0), DimensionError);
}

TEST(GrkTest, UsesOnlyTrainingStatistics) {
  std::mt19937_64 gen(113);
  const Matrix pos = oracle::random_matrix(2, 6, gen);
  const GrkModel m = grk_train(pos, oracle::random_matrix(2, 8, gen), 1.0);
  const Matrix y = oracle::random_matrix(2, 5, gen);
  const Matrix full = grk_test(m, y);
  for (std::size_t j = 0; j < 5; ++j) {
    const std::vector<std::size_t> one{j};
    const Matrix single = grk_test(m, y.select_cols(one));
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(single(i, 0), full(i, j), 1e-14);
  }
}
