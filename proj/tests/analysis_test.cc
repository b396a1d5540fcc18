#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dseg/analysis.hpp"
#include "dseg/errors.hpp"
#include "dseg/random.hpp"
#include "dseg/solvers.hpp"
#include "test_support.hpp"

namespace dseg {
namespace {

using Eigen::Vector2d;

TEST(EnergyRecursion, EgExamples) {
  const std::vector<double> gamma{0.5};
  const auto e = energy_recursion_eg(gamma, 0.25, 1.0);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_DOUBLE_EQ(e[1], 0.890625);
  const auto noiseless = energy_recursion_eg(std::vector<double>(5, 0.3), 0.0, 2.0);
  for (std::size_t k = 1; k < noiseless.size(); ++k) {
    EXPECT_NEAR(noiseless[k] / noiseless[k - 1], 1 - 0.09 + 0.0081, 1e-14);
  }
  EXPECT_THROW(energy_recursion_eg(gamma, 0.25, -1.0), ContractViolation);
}

TEST(EnergyRecursion, EgNeverDropsBelowMinOfStartAndNoise) {
  testing::Gen g(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> gamma(200);
    for (double& x : gamma) x = g.uniform(0.0, 1.0);
    const double sigma2 = g.uniform(0.0, 1.0);
    const double e1 = g.uniform(0.0, 2.0);
    const auto e = energy_recursion_eg(gamma, sigma2, e1);
    for (double v : e) EXPECT_GE(v, std::min(e1, sigma2) * (1 - 1e-12));
  }
}

TEST(EnergyRecursion, DsegExamples) {
  const std::vector<double> g{0.5}, h{0.1};
  EXPECT_NEAR(energy_recursion_dseg(g, h, 0.0, 1.0)[1], 0.9125, 1e-15);
  testing::Gen gen(3);
  std::vector<double> gamma(100);
  for (double& x : gamma) x = gen.uniform(0.0, 1.0);
  const auto a = energy_recursion_eg(gamma, 0.3, 1.5);
  const auto b = energy_recursion_dseg(gamma, gamma, 0.3, 1.5);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-14);
  const SchedulePair s({1.0, 0.0, 0.1}, {1.0, 0.0, 0.9});
  EXPECT_LT(energy_recursion_dseg(s, 0.25, 1.0, 100000).back(), 1e-2);
  EXPECT_THROW(energy_recursion_dseg(g, std::vector<double>{}, 0.0, 1.0), ContractViolation);
}

// Mean of dist² over seeded planar runs, against the closed-form recursion.
// Every recorded point is a separate 3-SE comparison, so the record set is
// kept sparse: with the ~160 default records a correct solver still misses
// about one seed in seven.
const RecordCadence kRecursionCadence{RecordCadence::Mode::kEvery, 10, 2500};
void expect_recursion_matches(SolverKind kind, const SchedulePair& schedule, int runs,
                              std::uint64_t horizon, double sigma, std::uint64_t base_seed) {
  const ProblemInstance p = make_planar();
  const OracleModel m{NoiseKind::kAdditiveGaussianFirstBlockOnly, sigma, 0.0};
  std::vector<Trajectory> trajectories;
  for (int r = 0; r < runs; ++r) {
    RunSpec spec;
    spec.kind = kind;
    spec.schedule = schedule;
    spec.init = Vector2d(1, 0);
    spec.horizon = horizon;
    spec.run_seed = split_seed(base_seed, static_cast<std::uint64_t>(r));
    spec.step_bound.reset();
    spec.cadence = kRecursionCadence;
    trajectories.push_back(run(spec, p, m));
  }
  const AggregateCurve curve = aggregate_runs(trajectories, MetricKind::kDistSq);
  const auto energy = kind == SolverKind::kEg
                          ? energy_recursion_eg(schedule.exploration(), sigma * sigma, 1.0, horizon)
                          : energy_recursion_dseg(schedule, sigma * sigma, 1.0, horizon);
  for (std::size_t i = 1; i < curve.n.size(); ++i) {
    const double se = curve.sd[i] / std::sqrt(static_cast<double>(runs - 1));
    EXPECT_LE(std::abs(curve.mean[i] - energy[curve.n[i]]), 3.0 * se + 1e-12) << "n = " << curve.n[i];
  }
}

TEST(RecursionProperty, EgSimulationMatchesRecursion) {
  expect_recursion_matches(SolverKind::kEg, SchedulePair::single({1.0, 0.0, 0.6}), 1000, 10000, 0.5,
                           2024);
}

TEST(RecursionProperty, DsegSimulationMatchesRecursion) {
  expect_recursion_matches(SolverKind::kDseg, SchedulePair({1.0, 0.0, 0.1}, {1.0, 0.0, 0.9}), 1000,
                           10000, 0.5, 2024);
}

TEST(Aggregate, TenEgRunsWithinTenPercent) {
  const ProblemInstance p = make_planar();
  const OracleModel m{NoiseKind::kAdditiveGaussianFirstBlockOnly, 0.1, 0.0};
  const SchedulePair schedule = SchedulePair::single({0.3, 0.0, 0.6});
  std::vector<Trajectory> runs;
  for (std::uint64_t r = 0; r < 10; ++r) {
    RunSpec spec;
    spec.kind = SolverKind::kEg;
    spec.schedule = schedule;
    spec.init = Vector2d(1, 0);
    spec.horizon = 10000;
    spec.run_seed = split_seed(7, r);
    runs.push_back(run(spec, p, m));
  }
  const AggregateCurve curve = aggregate_runs(runs, MetricKind::kDistSq);
  const auto energy = energy_recursion_eg(schedule.exploration(), 0.01, 1.0, 10000);
  for (std::size_t i = 0; i < curve.n.size(); ++i) {
    const std::uint64_t n = curve.n[i];
    if (n == 100 || n == 1000 || n == 10000) {
      EXPECT_LE(std::abs(curve.mean[i] - energy[n]) / energy[n], 0.1) << "n = " << n;
    }
  }
}

TEST(Aggregate, PopulationConvention) {
  Trajectory a, b;
  a.records.push_back({5, 1.0, 0.0, 0.0});
  b.records.push_back({5, 3.0, 0.0, 0.0});
  const std::vector<Trajectory> both{a, b};
  const AggregateCurve c = aggregate_runs(both, MetricKind::kDistSq);
  EXPECT_DOUBLE_EQ(c.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(c.sd[0], 1.0);
  EXPECT_EQ(c.runs, 2u);
  const std::vector<Trajectory> one{a};
  const AggregateCurve single = aggregate_runs(one, MetricKind::kDistSq);
  EXPECT_DOUBLE_EQ(single.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(single.sd[0], 0.0);
}

TEST(Aggregate, Errors) {
  Trajectory a, b;
  a.records.push_back({5, 1.0, 0.0, 0.0});
  b.records.push_back({6, 1.0, 0.0, 0.0});
  EXPECT_THROW(aggregate_runs(std::vector<Trajectory>{a, b}, MetricKind::kDistSq), ContractViolation);
  Trajectory gan;
  gan.records.push_back({1, std::nullopt, 2.0, 0.0});
  EXPECT_THROW(aggregate_runs(std::vector<Trajectory>{gan}, MetricKind::kDistSq), UnsupportedMetric);
  EXPECT_DOUBLE_EQ(aggregate_runs(std::vector<Trajectory>{gan}, MetricKind::kResidualSq).mean[0], 2.0);
}

TEST(LogLogFit, ExactPowerLaws) {
  std::vector<double> n, inv, flat, cube;
  for (int k = 0; k <= 40; ++k) {
    const double x = std::pow(10.0, 2.0 + k * 0.1);
    n.push_back(x);
    inv.push_back(3.0 / x);
    flat.push_back(0.7);
    cube.push_back(2.0 / std::cbrt(x));
  }
  EXPECT_NEAR(fit_loglog_slope(n, inv, 1e2, 1e6).slope, -1.0, 1e-9);
  EXPECT_NEAR(fit_loglog_slope(n, flat, 1e2, 1e6).slope, 0.0, 1e-9);
  EXPECT_NEAR(fit_loglog_slope(n, cube, 1e2, 1e6).slope, -1.0 / 3.0, 1e-9);
  EXPECT_NEAR(fit_loglog_slope(n, inv, 1e2, 1e6).intercept, std::log(3.0), 1e-9);
}

TEST(LogLogFit, Errors) {
  std::vector<double> n{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  std::vector<double> m(11, 1.0);
  EXPECT_THROW(fit_loglog_slope(n, m, 1, 5), ContractViolation);
  m[3] = 0.0;
  EXPECT_THROW(fit_loglog_slope(n, m, 1, 11), ContractViolation);
}

TEST(RatePrediction, PlanarFloorArithmetic) {
  RateQuery q{0.45, 0.1, 0.25, 0.9, RateTheorem::kAffine, 0.0};
  const RatePrediction p = predict_rate_constants(make_planar(), q);
  EXPECT_NEAR(p.lambda_const, 0.00855, 1e-15);
  EXPECT_NEAR(p.m_const, 0.004525, 1e-15);
  EXPECT_NEAR(p.predicted_floor, 0.529239766, 1e-8);
  EXPECT_TRUE(p.geometric_regime);
}

TEST(RatePrediction, FloorLinearInEtaAndZeroWithoutNoise) {
  for (double eta : {0.1, 0.01, 0.001}) {
    RateQuery q{0.5, eta, 0.25, 0.9, RateTheorem::kAffine, 0.0};
    const RatePrediction p = predict_rate_constants(make_planar(), q);
    EXPECT_NEAR(p.predicted_floor, eta * (1 + 0.81) * 0.25 / (0.5 * 0.19), 1e-12);
  }
  RateQuery q{0.5, 0.1, 0.0, 0.9, RateTheorem::kGeneral, 0.0};
  EXPECT_EQ(predict_rate_constants(make_planar(), q).predicted_floor, 0.0);
}

TEST(RatePrediction, GeneralConstantsAndExponent) {
  const ProblemInstance p = make_bilinear(2, 1, BandedSpectrum{0.5, 2.0});
  RateQuery q{0.4, 0.2, 0.3, 0.9, RateTheorem::kGeneral, 2.0 / 3.0};
  const RatePrediction r = predict_rate_constants(p, q);
  const double l = 2.0;
  EXPECT_NEAR(r.m_const, (2 * 0.16 * 0.2 * l + 0.064 * 0.2 * l * l + 0.04) * 0.3, 1e-12);
  EXPECT_NEAR(r.lambda_const, 0.4 * 0.2 * 0.25 * 0.19, 1e-12);
  EXPECT_NEAR(r.predicted_exponent, 1.0 / 3.0, 1e-12);
  EXPECT_FALSE(r.exponent_condition);
  EXPECT_THROW(predict_rate_constants(make_gaussian_gan(2, 4, 0), q), UnsupportedMetric);
}

TEST(DescentLemma, NoiselessHoldsExactly) {
  const DescentCheck c =
      check_descent_lemma(make_planar(), OracleModel{}, Vector2d(1, 0.5), 0.5, 0.2, 10, 1);
  EXPECT_TRUE(c.passes);
  EXPECT_EQ(c.standard_error, 0.0);
  EXPECT_GE(c.margin, 0.0);
}

TEST(DescentLemma, AtSolutionBoundedByNoiseTerm) {
  const OracleModel m{NoiseKind::kAdditiveGaussianFirstBlockOnly, 0.5, 0.0};
  const double g = 0.3, e = 0.1;
  const DescentCheck c = check_descent_lemma(make_planar(), m, Vector2d(0, 0), g, e, 100000, 2);
  const double cn = 4 * g * g * e + 2 * g * g * g * e + 4 * e * e;
  EXPECT_TRUE(c.passes);
  EXPECT_LE(c.lhs_estimate, cn * 0.25 + 4 * c.standard_error);
}

TEST(DescentLemma, PlanarExampleWithClosedFormLhs) {
  const OracleModel m{NoiseKind::kAdditiveGaussianFirstBlockOnly, 0.5, 0.0};
  const double g = 0.3, e = 0.1;
  const DescentCheck c = check_descent_lemma(make_planar(), m, Vector2d(1, 0), g, e, 1000000, 3);
  EXPECT_TRUE(c.passes);
  // One DSEG step on the planar game: E‖X₊‖² = (1−2γη+η²+γ²η²)‖X‖² + (η²+γ²η²)σ².
  const double exact = (1 - 2 * g * e + e * e + g * g * e * e) + (e * e + g * g * e * e) * 0.25;
  EXPECT_NEAR(c.lhs_estimate, exact, 1e-3);
}

TEST(DescentLemmaProperty, RandomConfigurations) {
  testing::Gen g(44);
  for (int k = 0; k < 25; ++k) {
    const Vector x = g.vector(2, 2.0);
    const double gamma = g.uniform(0.05, 0.9);
    const double eta = g.uniform(0.05, 1.0) * gamma;
    const OracleModel m{NoiseKind::kAdditiveGaussianIsotropic, g.uniform(0, 1), 0.0};
    EXPECT_TRUE(check_descent_lemma(make_planar(), m, x, gamma, eta, 20000, 100 + k).passes);
  }
}

TEST(ErgodicAverage, Examples) {
  const std::vector<Vector> pair{Vector2d(1, 0), Vector2d(0, 1)};
  EXPECT_TRUE(ergodic_average(pair)[1].isApprox(Vector2d(0.5, 0.5)));
  const std::vector<Vector> constant(5, Vector2d(3, -1));
  for (const Vector& v : ergodic_average(constant)) EXPECT_TRUE(v.isApprox(Vector2d(3, -1)));
  std::vector<Vector> alternating;
  for (int k = 0; k < 1001; ++k) alternating.push_back(k % 2 == 0 ? Vector2d(1, 2) : Vector2d(-1, -2));
  const auto avg = ergodic_average(alternating);
  EXPECT_NEAR(avg[999].norm(), 0.0, 1e-12);
  EXPECT_NEAR(avg[1000].norm(), std::sqrt(5.0) / 1001, 1e-12);
  EXPECT_TRUE(ergodic_average(std::vector<Vector>{}).empty());
}

}  // namespace
}  // namespace dseg
