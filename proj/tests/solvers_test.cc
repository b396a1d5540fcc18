#include <cmath>

#include <gtest/gtest.h>

#include "dseg/errors.hpp"
#include "dseg/solvers.hpp"
#include "test_support.hpp"

namespace dseg {
namespace {

using Eigen::Vector2d;

struct Exact {
  ProblemInstance problem;
  SeededOracle oracle;
  explicit Exact(ProblemInstance p) : problem(std::move(p)), oracle(problem, OracleModel{}, 0) {}
};

SolverState state_at(const Vector& x) { return SolverState::initial(SolverKind::kDseg, x); }

TEST(DsegStep, EgFromUnitPoint) {
  Exact e(make_planar());
  const StepReport r = dseg_step(state_at(Vector2d(1, 0)), e.oracle, 0.1, 0.1);
  EXPECT_TRUE(r.leading_point->isApprox(Vector2d(1, 0.1)));
  EXPECT_TRUE(r.new_state.iterate.isApprox(Vector2d(0.99, 0.1)));
  EXPECT_NEAR(r.new_state.iterate.squaredNorm(), 1 - 0.01 + 0.0001, 1e-15);
  EXPECT_EQ(r.oracle_calls, 2);
  EXPECT_EQ(r.new_state.step_index, 2u);
}

TEST(DsegStep, DoubleStepsizeFromUnitPoint) {
  Exact e(make_planar());
  const StepReport r = dseg_step(state_at(Vector2d(1, 0)), e.oracle, 0.5, 0.1);
  EXPECT_TRUE(r.new_state.iterate.isApprox(Vector2d(0.95, 0.1)));
  EXPECT_NEAR(r.new_state.iterate.squaredNorm(), (1 - 0.05) * (1 - 0.05) + 0.01, 1e-15);
}

TEST(DsegStep, RejectsEtaAboveGamma) {
  Exact e(make_planar());
  EXPECT_THROW(dseg_step(state_at(Vector2d(1, 0)), e.oracle, 0.1, 0.2), ContractViolation);
  EXPECT_THROW(dseg_step(state_at(Vector::Zero(3)), e.oracle, 0.1, 0.1), ContractViolation);
}

TEST(SolverProperty, SolutionIsFixedPointOfEveryMethod) {
  testing::Gen g(12);
  for (int trial = 0; trial < 20; ++trial) {
    Exact e(make_bilinear(g.integer(1, 4), static_cast<std::uint64_t>(trial)));
    const Vector x = Vector::Zero(e.problem.dimension());
    const double gamma = g.uniform(0.1, 1.0);
    const double eta = g.uniform(0.01, gamma);
    EXPECT_EQ(dseg_step(state_at(x), e.oracle, gamma, eta).new_state.iterate, x);
    EXPECT_EQ(og_step(state_at(x), e.oracle, gamma, eta).new_state.iterate, x);
    EXPECT_EQ(dspeg_step(state_at(x), e.oracle, gamma, eta).new_state.iterate, x);
    EXPECT_EQ(shgd_step(state_at(x), e.oracle, eta).new_state.iterate, x);
    const SolverState anchored = SolverState::initial(SolverKind::kAnchored, x);
    EXPECT_EQ(anchored_step(anchored, e.oracle, AnchoredParams{}).new_state.iterate, x);
  }
}

TEST(OgStep, HandExample) {
  Exact e(make_planar());
  const SolverState s = SolverState::initial(SolverKind::kOg, Vector2d(1, 0));
  const StepReport r = og_step(s, e.oracle, 0.5, 0.1);
  EXPECT_TRUE(r.new_state.iterate.isApprox(Vector2d(1, 0.6)));
  EXPECT_TRUE(residual_iterate(r.new_state).isApprox(Vector2d(1, 0.1)));
  EXPECT_EQ(r.oracle_calls, 1);
}

TEST(OgStep, StationaryFeedbackReducesToGradientStep) {
  Exact e(make_planar());
  SolverState s = SolverState::initial(SolverKind::kOg, Vector2d(1, 0));
  s.last_feedback = Vector2d(0, -1);
  s.last_gamma = 0.3;
  const StepReport r = og_step(s, e.oracle, 0.5, 0.1);
  EXPECT_TRUE(r.new_state.iterate.isApprox(Vector2d(1, 0.1)));
}

TEST(ResidualIterate, EdgeCases) {
  SolverState s = SolverState::initial(SolverKind::kOg, Vector2d(1, 2));
  EXPECT_THROW(residual_iterate(s), ContractViolation);
  s.last_feedback = Vector2d(5, 5);
  s.last_gamma = 0.0;
  EXPECT_EQ(residual_iterate(s), Vector2d(1, 2));
}

TEST(DspegStep, HandExample) {
  Exact e(make_planar());
  const SolverState s = SolverState::initial(SolverKind::kDspeg, Vector2d(1, 0));
  const StepReport r = dspeg_step(s, e.oracle, 0.5, 0.1);
  EXPECT_TRUE(r.leading_point->isApprox(Vector2d(1, 0)));
  EXPECT_TRUE(r.new_state.last_feedback->isApprox(Vector2d(0, -1)));
  EXPECT_TRUE(r.new_state.iterate.isApprox(Vector2d(1, 0.1)));
}

TEST(DspegStep, ExactHistoryMatchesExtragradientLeadingPoint) {
  Exact e(make_bilinear(3, 2));
  testing::Gen g(2);
  const Vector x = g.vector(6);
  SolverState s = SolverState::initial(SolverKind::kDspeg, x);
  s.last_feedback = evaluate_field(e.problem, x);
  const StepReport past = dspeg_step(s, e.oracle, 0.3, 0.3);
  const StepReport eg = dseg_step(state_at(x), e.oracle, 0.3, 0.3);
  EXPECT_TRUE(past.leading_point->isApprox(*eg.leading_point));
  EXPECT_TRUE(past.new_state.iterate.isApprox(eg.new_state.iterate));
}

TEST(ShgdStep, HandExample) {
  Exact e(make_planar());
  const StepReport r = shgd_step(state_at(Vector2d(1, 0)), e.oracle, 0.1);
  EXPECT_TRUE(r.new_state.iterate.isApprox(Vector2d(0.9, 0)));
}

TEST(ShgdStep, DirectionIsHamiltonianGradient) {
  Exact e(make_bilinear(3, 5));
  testing::Gen g(5);
  for (int k = 0; k < 10; ++k) {
    const Vector x = g.vector(6);
    const double eta = 0.1;
    const Vector step = x - shgd_step(state_at(x), e.oracle, eta).new_state.iterate;
    const Vector grad = testing::numeric_gradient(
        [&](const Vector& y) { return 0.5 * evaluate_field(e.problem, y).squaredNorm(); }, x);
    EXPECT_LT((step / eta - grad).norm(), 1e-6 * (1 + grad.norm()));
  }
}

TEST(ShgdStep, RejectsNonlinearField) {
  Exact e(make_strongly_convex_concave(2, 1));
  EXPECT_THROW(shgd_step(state_at(Vector::Ones(4)), e.oracle, 0.1), ConfigError);
}

TEST(AnchoredStep, HandExample) {
  Exact e(make_planar());
  const SolverState s = SolverState::initial(SolverKind::kAnchored, Vector2d(1, 0));
  const StepReport r = anchored_step(s, e.oracle, AnchoredParams{});
  EXPECT_TRUE(r.new_state.iterate.isApprox(Vector2d(1, 0.3)));
}

TEST(AnchoredStep, PullTowardsAnchor) {
  Exact e(make_planar());
  SolverState s = SolverState::initial(SolverKind::kAnchored, Vector2d(0, 0));
  s.iterate = Vector2d(0, 0);
  s.anchor = Vector2d(1, 0);
  s.step_index = 4;
  const StepReport r = anchored_step(s, e.oracle, AnchoredParams{});
  const double pull = 0.3 * 1.0 / std::pow(4.0, 0.9);
  EXPECT_TRUE(r.new_state.iterate.isApprox(Vector2d(pull, 0)));
  EXPECT_THROW(anchored_step(s, e.oracle, AnchoredParams{1.0, 0.4, 0.9}), ContractViolation);
}

TEST(Cadence, GeometricPoints) {
  const auto pts = RecordCadence{}.points(1000000);
  EXPECT_EQ(pts.front(), 0u);
  EXPECT_EQ(pts.back(), 1000000u);
  for (std::uint64_t n = 0; n <= 100; ++n) EXPECT_EQ(pts[n], n);
  EXPECT_LE(pts.size(), 101u + 4u * 30u + 1u);
  EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
  const auto every = RecordCadence{RecordCadence::Mode::kEvery, 30, 10}.points(95);
  EXPECT_EQ(every.size(), 11u);
  EXPECT_EQ(every.back(), 95u);
}

TEST(Run, HorizonOneEqualsSingleStep) {
  const ProblemInstance p = make_planar();
  const OracleModel m{NoiseKind::kAdditiveGaussianIsotropic, 0.5, 0.0};
  RunSpec spec;
  spec.kind = SolverKind::kDseg;
  spec.schedule = SchedulePair(StepsizePolicy::constant(0.5), StepsizePolicy::constant(0.1));
  spec.init = Vector2d(1, 0);
  spec.horizon = 1;
  spec.run_seed = 99;
  spec.keep_iterates = true;
  const Trajectory t = run(spec, p, m);
  SeededOracle oracle(p, m, 99);
  const StepReport r = dseg_step(state_at(Vector2d(1, 0)), oracle, 0.5, 0.1);
  ASSERT_EQ(t.iterates.size(), 2u);
  EXPECT_EQ(t.iterates[1], r.new_state.iterate);
  EXPECT_EQ(t.records[1].n, 1u);
  EXPECT_EQ(t.oracle_calls, 2u);
}

TEST(Run, DeterministicEgEnergy) {
  RunSpec spec;
  spec.kind = SolverKind::kEg;
  spec.schedule = SchedulePair::single(StepsizePolicy::constant(0.1));
  spec.init = Vector2d(1, 0);
  spec.horizon = 500;
  const Trajectory t = run(spec, make_planar(), OracleModel{});
  for (const TrajectoryRecord& r : t.records) {
    EXPECT_NEAR(*r.dist_sq, std::pow(1 - 0.01 + 0.0001, static_cast<double>(r.n)), 1e-12);
  }
}

TEST(Run, SameSeedSameTrajectory) {
  RunSpec spec;
  spec.kind = SolverKind::kOg;
  spec.schedule = SchedulePair({0.5, 0.0, 0.0}, {1.0, 19.0, 1.0});
  spec.init = Vector2d(1, 0);
  spec.horizon = 2000;
  spec.run_seed = 4;
  const OracleModel m{NoiseKind::kAdditiveGaussianFirstBlockOnly, 0.5, 0.0};
  const Trajectory a = run(spec, make_planar(), m);
  const Trajectory b = run(spec, make_planar(), m);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].dist_sq, b.records[i].dist_sq);
    EXPECT_EQ(a.residual_records[i].dist_sq, b.residual_records[i].dist_sq);
  }
  EXPECT_EQ(a.fingerprint, b.fingerprint);
}

TEST(Run, OracleCallBudget) {
  testing::Gen g(8);
  for (SolverKind kind : {SolverKind::kDseg, SolverKind::kEg, SolverKind::kOg, SolverKind::kDspeg,
                          SolverKind::kShgd, SolverKind::kAnchored}) {
    const ProblemInstance p = make_bilinear(2, 3);
    SeededOracle inner(p, OracleModel{NoiseKind::kAdditiveGaussianIsotropic, 0.1, 0.0}, 3);
    CountingSource counter(inner);
    RunSpec spec;
    spec.kind = kind;
    spec.schedule = SchedulePair({0.5, 0.0, 0.0}, {0.5, 1.0, 1.0});
    spec.init = g.vector(4);
    spec.horizon = static_cast<std::uint64_t>(g.integer(1, 300));
    const Trajectory t = run(spec, counter);
    EXPECT_EQ(counter.calls(), spec.horizon * oracle_calls_per_step(kind)) << to_string(kind);
    EXPECT_EQ(t.oracle_calls, counter.calls());
  }
}

TEST(Run, StepBoundEnforcedForGlobalLipschitz) {
  RunSpec spec;
  spec.schedule = SchedulePair::single(StepsizePolicy::constant(0.95));
  spec.init = Vector2d(1, 0);
  EXPECT_THROW(run(spec, make_planar(), OracleModel{}), ContractViolation);
  spec.step_bound.reset();
  EXPECT_NO_THROW(run(spec, make_planar(), OracleModel{}));
}

TEST(Run, StepBoundReportedForLocalLipschitz) {
  const ProblemInstance p = make_strongly_convex_concave(2, 1);
  RunSpec spec;
  spec.schedule = SchedulePair::single(StepsizePolicy::constant(2.0 / p.lipschitz()));
  spec.init = Vector::Constant(4, 0.01);
  spec.horizon = 3;
  const Trajectory t = run(spec, p, OracleModel{});
  EXPECT_FALSE(t.step_bound_ok);
}

TEST(Run, DivergenceIsRecordedNotThrown) {
  RunSpec spec;
  spec.kind = SolverKind::kOg;
  spec.schedule = SchedulePair::single(StepsizePolicy::constant(50.0));
  spec.step_bound.reset();
  spec.init = Vector2d(1, 0);
  spec.horizon = 100000;
  const Trajectory t = run(spec, make_planar(), OracleModel{});
  ASSERT_TRUE(t.divergence.has_value());
  EXPECT_LT(t.divergence->n, 100000u);
  EXPECT_EQ(t.records.back().n < t.divergence->n, true);
}

TEST(SolverKind, NamesRoundTrip) {
  for (SolverKind k : {SolverKind::kDseg, SolverKind::kEg, SolverKind::kOg, SolverKind::kDspeg,
                       SolverKind::kShgd, SolverKind::kAnchored}) {
    EXPECT_EQ(solver_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(solver_kind_from_string("adam"), ConfigError);
}

}  // namespace
}  // namespace dseg
