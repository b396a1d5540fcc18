#include <cmath>

#include <gtest/gtest.h>

#include "dseg/errors.hpp"
#include "dseg/oracle.hpp"
#include "test_support.hpp"

namespace dseg {
namespace {

using Eigen::Vector2d;

TEST(Oracle, ExactReturnsField) {
  const ProblemInstance p = make_planar();
  CounterStream s(0, 0, StreamTag::kUpdate);
  const OracleSample out = sample(OracleModel{}, p, Vector2d(1, 0), s);
  EXPECT_EQ(out.feedback, Vector2d(0, -1));
  EXPECT_EQ(out.draws_consumed, 0u);
}

TEST(Oracle, FirstBlockNoiseLeavesSecondCoordinateExact) {
  const ProblemInstance p = make_planar();
  const OracleModel m{NoiseKind::kAdditiveGaussianFirstBlockOnly, 0.5, 0.0};
  const Vector2d x(0.7, -0.2);
  double sum = 0.0;
  for (std::uint64_t k = 0; k < 20000; ++k) {
    CounterStream s(1, k, StreamTag::kUpdate);
    const Vector v = sample(m, p, x, s).feedback;
    ASSERT_EQ(v(1), -x(0));
    sum += v(0) - x(1);
  }
  EXPECT_NEAR(sum / 20000, 0.0, 5 * 0.5 / std::sqrt(20000.0));
}

TEST(Oracle, IsotropicVariance) {
  const ProblemInstance p = make_bilinear_from(Matrix::Identity(2, 2));
  const OracleModel m{NoiseKind::kAdditiveGaussianIsotropic, 0.5, 0.0};
  const Vector x = Vector::Zero(4);
  constexpr int kDraws = 100000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4), sum2 = Eigen::VectorXd::Zero(4);
  for (int k = 0; k < kDraws; ++k) {
    CounterStream s(2, static_cast<std::uint64_t>(k), StreamTag::kExplore);
    const Vector v = sample(m, p, x, s).feedback;
    sum += v;
    sum2 += v.cwiseProduct(v);
  }
  for (int i = 0; i < 4; ++i) {
    const double mean = sum(i) / kDraws;
    const double var = sum2(i) / kDraws - mean * mean;
    EXPECT_GE(var, 0.24);
    EXPECT_LE(var, 0.26);
  }
}

TEST(Oracle, VarianceControlScalesWithDistance) {
  const ProblemInstance p = make_planar();
  const OracleModel m{NoiseKind::kAdditiveGaussianIsotropic, 0.0, 0.5};
  // At the solution the noise vanishes.
  CounterStream s(3, 0, StreamTag::kUpdate);
  EXPECT_EQ(sample(m, p, Vector2d(0, 0), s).feedback, Vector2d(0, 0));
  // At distance 2 the per-coordinate standard deviation is 1.
  double sum2 = 0.0;
  constexpr int kDraws = 50000;
  for (int k = 0; k < kDraws; ++k) {
    CounterStream t(3, static_cast<std::uint64_t>(k), StreamTag::kUpdate);
    const Vector u = sample(m, p, Vector2d(2, 0), t).feedback - Vector2d(0, -2);
    sum2 += u.squaredNorm();
  }
  EXPECT_NEAR(sum2 / kDraws, 2.0, 0.05);
}

TEST(Oracle, ValidationErrors) {
  EXPECT_THROW(validate(OracleModel{NoiseKind::kMinibatchGan, 0.0, 0.0}, make_planar()), ConfigError);
  EXPECT_THROW(validate(OracleModel{NoiseKind::kAdditiveGaussianIsotropic, 0.5, 0.1},
                        make_gaussian_gan(2, 4, 0)),
               ConfigError);
  EXPECT_THROW(validate(OracleModel{NoiseKind::kAdditiveGaussianIsotropic, -1.0, 0.0}, make_planar()),
               ConfigError);
  EXPECT_THROW(noise_kind_from_string("laplace"), ConfigError);
}

TEST(Oracle, NoiseKindNamesRoundTrip) {
  for (NoiseKind k : {NoiseKind::kExact, NoiseKind::kAdditiveGaussianIsotropic,
                      NoiseKind::kAdditiveGaussianFirstBlockOnly, NoiseKind::kMinibatchGan}) {
    EXPECT_EQ(noise_kind_from_string(to_string(k)), k);
  }
}

TEST(Oracle, NoiseVarianceBound) {
  const OracleModel m{NoiseKind::kAdditiveGaussianIsotropic, 0.5, 0.0};
  EXPECT_DOUBLE_EQ(noise_variance_bound(m, make_bilinear(3, 0)), 6 * 0.25);
  const OracleModel first{NoiseKind::kAdditiveGaussianFirstBlockOnly, 0.5, 0.0};
  EXPECT_DOUBLE_EQ(noise_variance_bound(first, make_planar()), 0.25);
}

TEST(Oracle, MinibatchGanIsUnbiased) {
  // About 10⁶ latent and data vectors in total: 7813 minibatches of 128.
  const ProblemInstance p = make_gaussian_gan(10, 128, 5);
  const OracleModel m{NoiseKind::kMinibatchGan, 0.0, 0.0};
  testing::Gen g(5);
  const Vector x = g.vector(200, 0.5);
  const Vector exact = evaluate_field(p, x);
  Vector mean = Vector::Zero(200);
  constexpr int kBatches = 7813;
  for (int k = 0; k < kBatches; ++k) {
    CounterStream s(9, static_cast<std::uint64_t>(k), StreamTag::kUpdate);
    mean += sample(m, p, x, s).feedback;
  }
  mean /= kBatches;
  EXPECT_LT((mean - exact).norm() / exact.norm(), 1e-2);
}

TEST(Oracle, SeededOracleReplays) {
  const ProblemInstance p = make_planar();
  const OracleModel m{NoiseKind::kAdditiveGaussianIsotropic, 1.0, 0.0};
  SeededOracle a(p, m, 77), b(p, m, 77);
  CountingSource counted(b);
  const Vector x = Vector2d(0.1, 0.2);
  EXPECT_EQ(a.query(x, 4, StreamTag::kExplore), counted.query(x, 4, StreamTag::kExplore));
  EXPECT_NE(a.query(x, 4, StreamTag::kExplore), a.query(x, 4, StreamTag::kUpdate));
  EXPECT_EQ(counted.calls(), 1u);
}

}  // namespace
}  // namespace dseg
