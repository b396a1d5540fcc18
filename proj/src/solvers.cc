#include "dseg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "dseg/digest.hpp"
#include "dseg/errors.hpp"

namespace dseg {
namespace {

void check_state(const SolverState& state, const ProblemInstance& problem) {
  if (state.iterate.size() != problem.dimension()) {
    throw ContractViolation("solver state dimension does not match the problem");
  }
}

Vector history_or_zero(const SolverState& state) {
  if (state.last_feedback) return *state.last_feedback;
  return Vector::Zero(state.iterate.size());
}

TrajectoryRecord measure(const ProblemInstance& problem, std::uint64_t n, const Vector& x) {
  TrajectoryRecord r;
  r.n = n;
  r.residual_sq = evaluate_field(problem, x).squaredNorm();
  r.iterate_norm = x.norm();
  if (problem.has_known_solutions()) {
    const double d = distance_to_solution(problem, x);
    r.dist_sq = d * d;
  }
  return r;
}

std::string policy_string(const StepsizePolicy& p) {
  std::ostringstream out;
  out.precision(17);
  out << p.scale << '/' << p.offset << '/' << p.exponent;
  return out.str();
}

std::string fingerprint(const RunSpec& spec, const ProblemInstance& problem) {
  std::ostringstream out;
  out.precision(17);
  out << to_string(spec.kind) << '|' << policy_string(spec.schedule.exploration()) << '|'
      << policy_string(spec.schedule.update()) << '|' << spec.anchored.gamma << ','
      << spec.anchored.beta << ',' << spec.anchored.kappa << '|' << spec.shgd.average_samples
      << '|' << to_string(problem.kind()) << ',' << problem.dimension() << ','
      << problem.lipschitz() << ',' << problem.error_bound() << '|' << spec.horizon;
  return hex_digest(out.str());
}

}  // namespace

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kDseg:
      return "dseg";
    case SolverKind::kEg:
      return "eg";
    case SolverKind::kOg:
      return "og";
    case SolverKind::kDspeg:
      return "dspeg";
    case SolverKind::kShgd:
      return "shgd";
    case SolverKind::kAnchored:
      return "anchored";
  }
  return "unknown";
}

SolverKind solver_kind_from_string(std::string_view name) {
  for (SolverKind k : {SolverKind::kDseg, SolverKind::kEg, SolverKind::kOg, SolverKind::kDspeg,
                       SolverKind::kShgd, SolverKind::kAnchored}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown solver kind '" + std::string(name) + "'");
}

int oracle_calls_per_step(SolverKind kind) {
  switch (kind) {
    case SolverKind::kDseg:
    case SolverKind::kEg:
    case SolverKind::kShgd:
      return 2;
    case SolverKind::kOg:
    case SolverKind::kDspeg:
    case SolverKind::kAnchored:
      return 1;
  }
  return 0;
}

SolverState SolverState::initial(SolverKind kind, const Vector& x1) {
  SolverState s;
  s.iterate = x1;
  if (kind == SolverKind::kAnchored) s.anchor = x1;
  return s;
}

StepReport dseg_step(const SolverState& state, FeedbackSource& oracle, double gamma, double eta) {
  check_state(state, oracle.problem());
  if (!(eta > 0.0) || eta > gamma) {
    throw ContractViolation("dseg_step requires gamma >= eta > 0");
  }
  const std::uint64_t n = state.step_index;
  StepReport report;
  const Vector explore = oracle.query(state.iterate, n, StreamTag::kExplore);
  Vector leading = state.iterate - gamma * explore;
  const Vector update = oracle.query(leading, n, StreamTag::kUpdate);
  report.new_state.iterate = state.iterate - eta * update;
  report.new_state.step_index = n + 1;
  report.leading_point = std::move(leading);
  report.oracle_calls = 2;
  return report;
}

StepReport og_step(const SolverState& state, FeedbackSource& oracle, double gamma, double eta) {
  check_state(state, oracle.problem());
  const std::uint64_t n = state.step_index;
  const Vector previous = history_or_zero(state);
  Vector feedback = oracle.query(state.iterate, n, StreamTag::kUpdate);
  StepReport report;
  report.new_state.iterate = state.iterate - eta * feedback - gamma * (feedback - previous);
  report.new_state.last_feedback = std::move(feedback);
  report.new_state.last_gamma = gamma;
  report.new_state.step_index = n + 1;
  report.oracle_calls = 1;
  return report;
}

Vector residual_iterate(const SolverState& state) {
  if (!state.last_feedback || !state.last_gamma) {
    throw ContractViolation("residual_iterate: no history before the first step");
  }
  return state.iterate + *state.last_gamma * *state.last_feedback;
}

StepReport dspeg_step(const SolverState& state, FeedbackSource& oracle, double gamma,
                      double eta) {
  check_state(state, oracle.problem());
  const std::uint64_t n = state.step_index;
  Vector leading = state.iterate - gamma * history_or_zero(state);
  Vector feedback = oracle.query(leading, n, StreamTag::kUpdate);
  StepReport report;
  report.new_state.iterate = state.iterate - eta * feedback;
  report.new_state.last_feedback = std::move(feedback);
  report.new_state.last_gamma = gamma;
  report.new_state.step_index = n + 1;
  report.leading_point = std::move(leading);
  report.oracle_calls = 1;
  return report;
}

StepReport shgd_step(const SolverState& state, FeedbackSource& oracle, double eta,
                     ShgdOptions options) {
  const ProblemInstance& problem = oracle.problem();
  check_state(state, problem);
  const std::optional<Matrix> jacobian = problem.constant_jacobian();
  if (!jacobian) throw ConfigError("shgd requires constant Jacobian (planar or affine problem)");
  const std::uint64_t n = state.step_index;
  const Vector first = oracle.query(state.iterate, n, StreamTag::kExplore);
  const Vector second = oracle.query(state.iterate, n, StreamTag::kUpdate);
  const Vector direction = options.average_samples
                               ? Vector(jacobian->transpose() * (0.5 * (first + second)))
                               : Vector(jacobian->transpose() * first);
  StepReport report;
  report.new_state.iterate = state.iterate - eta * direction;
  report.new_state.step_index = n + 1;
  report.oracle_calls = 2;
  return report;
}

StepReport anchored_step(const SolverState& state, FeedbackSource& oracle,
                         const AnchoredParams& params) {
  check_state(state, oracle.problem());
  if (!state.anchor) throw ContractViolation("anchored_step: anchor X_1 was not recorded");
  if (!(params.beta > 0.5 && params.beta < 1.0) || !(params.kappa > 0.5 && params.kappa < 1.0)) {
    throw ContractViolation("anchored_step: beta and kappa must lie in (1/2, 1)");
  }
  const std::uint64_t n = state.step_index;
  const double nd = static_cast<double>(n);
  const Vector feedback = oracle.query(state.iterate, n, StreamTag::kUpdate);
  const double step = (1.0 - params.beta) / std::pow(nd, params.beta);
  const double pull = (1.0 - params.beta) * params.gamma / std::pow(nd, params.kappa);
  StepReport report;
  report.new_state.iterate =
      state.iterate - step * feedback + pull * (*state.anchor - state.iterate);
  report.new_state.anchor = state.anchor;
  report.new_state.step_index = n + 1;
  report.oracle_calls = 1;
  return report;
}

std::vector<std::uint64_t> RecordCadence::points(std::uint64_t horizon) const {
  std::vector<std::uint64_t> out;
  if (mode == Mode::kEvery) {
    const std::uint64_t s = std::max<std::uint64_t>(stride, 1);
    for (std::uint64_t n = 0; n <= horizon; n += s) out.push_back(n);
  } else {
    for (std::uint64_t n = 0; n <= std::min<std::uint64_t>(horizon, 100); ++n) out.push_back(n);
    const int pd = std::max(per_decade, 1);
    for (int decade = 2; std::pow(10.0, decade) <= static_cast<double>(horizon); ++decade) {
      for (int j = 0; j < pd; ++j) {
        const auto n = static_cast<std::uint64_t>(
            std::llround(std::pow(10.0, decade + static_cast<double>(j) / pd)));
        if (n > horizon) break;
        out.push_back(n);
      }
    }
  }
  out.push_back(horizon);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool check_step_bound(const RunSpec& spec, const ProblemInstance& problem) {
  if (spec.kind == SolverKind::kShgd || spec.kind == SolverKind::kAnchored) return true;
  if (!spec.step_bound) return true;
  const double a = *spec.step_bound;
  if (!(a > 0.0 && a < 1.0)) {
    throw ContractViolation("step bound a must lie in (0, 1)");
  }
  const double lipschitz = problem.lipschitz();
  if (lipschitz <= 0.0) return true;
  const double limit = a / lipschitz;
  // γ_n is non-increasing, so n = 1 is the binding case.
  const bool ok = spec.schedule.gamma(1) <= limit * (1.0 + 1e-12);
  if (!ok && problem.lipschitz_is_global()) {
    throw ContractViolation("exploration stepsize gamma_1 exceeds a/L");
  }
  return ok;
}

Trajectory run(const RunSpec& spec, const ProblemInstance& problem, const OracleModel& oracle) {
  SeededOracle source(problem, oracle, spec.run_seed);
  return run(spec, source);
}

Trajectory run(const RunSpec& spec, FeedbackSource& oracle) {
  const ProblemInstance& problem = oracle.problem();
  if (spec.horizon < 1) throw ContractViolation("run: horizon must be >= 1");
  if (spec.init.size() != problem.dimension()) {
    throw ContractViolation("run: initial point has the wrong dimension");
  }
  Trajectory traj;
  traj.run_id = spec.run_id;
  traj.fingerprint = fingerprint(spec, problem);
  traj.step_bound_ok = check_step_bound(spec, problem);

  const std::vector<std::uint64_t> points = spec.cadence.points(spec.horizon);
  traj.records.reserve(points.size());
  const bool track_residual = spec.kind == SolverKind::kOg;
  std::size_t next = 0;

  SolverState state = SolverState::initial(spec.kind, spec.init);
  auto record = [&](std::uint64_t n) {
    traj.records.push_back(measure(problem, n, state.iterate));
    if (track_residual) {
      const Vector r = state.last_feedback ? residual_iterate(state) : state.iterate;
      traj.residual_records.push_back(measure(problem, n, r));
    }
    if (spec.keep_iterates) traj.iterates.push_back(state.iterate);
  };
  if (points[next] == 0) {
    record(0);
    ++next;
  }

  for (std::uint64_t step = 1; step <= spec.horizon; ++step) {
    const std::uint64_t n = state.step_index;
    StepReport report;
    switch (spec.kind) {
      case SolverKind::kDseg:
        report = dseg_step(state, oracle, spec.schedule.gamma(n), spec.schedule.eta(n));
        break;
      case SolverKind::kEg: {
        const double g = spec.schedule.gamma(n);
        report = dseg_step(state, oracle, g, g);
        break;
      }
      case SolverKind::kOg:
        report = og_step(state, oracle, spec.schedule.gamma(n), spec.schedule.eta(n));
        break;
      case SolverKind::kDspeg:
        report = dspeg_step(state, oracle, spec.schedule.gamma(n), spec.schedule.eta(n));
        break;
      case SolverKind::kShgd:
        report = shgd_step(state, oracle, spec.schedule.eta(n), spec.shgd);
        break;
      case SolverKind::kAnchored:
        report = anchored_step(state, oracle, spec.anchored);
        break;
    }
    state = std::move(report.new_state);
    traj.oracle_calls += static_cast<std::uint64_t>(report.oracle_calls);

    const double norm = state.iterate.norm();
    if (!std::isfinite(norm) || norm > kDivergenceNorm) {
      traj.divergence = Divergence{step, norm};
      break;
    }
    if (next < points.size() && points[next] == step) {
      record(step);
      ++next;
    }
  }
  return traj;
}

}  // namespace dseg
