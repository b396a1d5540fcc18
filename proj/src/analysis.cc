#include "dseg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dseg/errors.hpp"

namespace dseg {
namespace {

// Welford accumulator; summation order is the sample order.
struct RunningStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  double sample_variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }
};

const std::vector<TrajectoryRecord>& pick(const Trajectory& t, RecordSet set) {
  return set == RecordSet::kBase ? t.records : t.residual_records;
}

double metric_value(const TrajectoryRecord& r, MetricKind metric) {
  if (metric == MetricKind::kResidualSq) return r.residual_sq;
  if (!r.dist_sq) throw UnsupportedMetric("aggregate_runs: dist_sq not recorded for this problem");
  return *r.dist_sq;
}

}  // namespace

std::vector<double> energy_recursion_eg(std::span<const double> gamma, double sigma2, double e1) {
  if (e1 < 0.0) throw ContractViolation("energy_recursion_eg: E_1 must be non-negative");
  std::vector<double> e;
  e.reserve(gamma.size() + 1);
  e.push_back(e1);
  for (double g : gamma) {
    const double g2 = g * g;
    e.push_back((1.0 - g2 + g2 * g2) * e.back() + (1.0 + g2) * g2 * sigma2);
  }
  return e;
}

std::vector<double> energy_recursion_eg(const StepsizePolicy& gamma, double sigma2, double e1,
                                        std::uint64_t steps) {
  std::vector<double> g(steps);
  for (std::uint64_t k = 0; k < steps; ++k) g[k] = gamma.value(k + 1);
  return energy_recursion_eg(g, sigma2, e1);
}

std::vector<double> energy_recursion_dseg(std::span<const double> gamma,
                                          std::span<const double> eta, double sigma2, double e1) {
  if (gamma.size() != eta.size()) {
    throw ContractViolation("energy_recursion_dseg: stepsize sequences differ in length");
  }
  if (e1 < 0.0) throw ContractViolation("energy_recursion_dseg: E_1 must be non-negative");
  std::vector<double> e;
  e.reserve(gamma.size() + 1);
  e.push_back(e1);
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    const double ge = gamma[k] * eta[k];
    const double e2 = eta[k] * eta[k];
    e.push_back((1.0 - 2.0 * ge + e2 + ge * ge) * e.back() + (e2 + ge * ge) * sigma2);
  }
  return e;
}

std::vector<double> energy_recursion_dseg(const SchedulePair& schedule, double sigma2, double e1,
                                          std::uint64_t steps) {
  std::vector<double> g(steps), h(steps);
  for (std::uint64_t k = 0; k < steps; ++k) {
    g[k] = schedule.gamma(k + 1);
    h[k] = schedule.eta(k + 1);
  }
  return energy_recursion_dseg(g, h, sigma2, e1);
}

LogLogFit fit_loglog_slope(std::span<const double> n, std::span<const double> metric, double n_lo,
                           double n_hi) {
  if (n.size() != metric.size()) throw ContractViolation("fit_loglog_slope: length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < n_lo || n[i] > n_hi) continue;
    if (!(metric[i] > 0.0) || !(n[i] > 0.0)) {
      throw ContractViolation("fit_loglog_slope: non-positive value in window at n = " +
                              std::to_string(n[i]));
    }
    xs.push_back(std::log(n[i]));
    ys.push_back(std::log(metric[i]));
  }
  if (xs.size() < 10) throw ContractViolation("fit_loglog_slope: fewer than 10 points in window");
  const double count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw ContractViolation("fit_loglog_slope: window holds a single abscissa");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.points = xs.size();
  return fit;
}

RatePrediction predict_rate_constants(const ProblemInstance& problem, const RateQuery& q) {
  const double tau = problem.error_bound();
  if (tau <= 0.0) throw UnsupportedMetric("predict_rate_constants: error bound unknown");
  if (!(q.a > 0.0 && q.a < 1.0)) throw ContractViolation("predict_rate_constants: a must be in (0,1)");
  const double lips = problem.lipschitz();
  RatePrediction p;
  p.lambda_const = q.gamma * q.eta * tau * tau * (1.0 - q.a * q.a);
  if (q.theorem == RateTheorem::kGeneral) {
    p.m_const = (2.0 * q.gamma * q.gamma * q.eta * lips +
                 q.gamma * q.gamma * q.gamma * q.eta * lips * lips + q.eta * q.eta) *
                q.sigma2;
    const double r = q.update_exponent;
    p.predicted_exponent = (r > 0.5 && r < 1.0) ? std::min(1.0 - r, 2.0 * r - 1.0) : 0.0;
  } else {
    p.m_const = q.eta * q.eta * (1.0 + q.a * q.a) * q.sigma2;
    p.predicted_exponent = q.update_exponent >= 1.0 ? 1.0 : 0.0;
  }
  p.predicted_floor = p.lambda_const > 0.0 ? p.m_const / p.lambda_const : 0.0;
  p.geometric_regime = p.lambda_const > 0.0 && p.lambda_const < 1.0;
  p.exponent_condition = p.lambda_const > p.predicted_exponent;
  return p;
}

DescentCheck check_descent_lemma(const ProblemInstance& problem, const OracleModel& oracle,
                                 const Vector& point, double gamma, double eta,
                                 std::uint64_t mc_samples, std::uint64_t seed) {
  validate(oracle, problem);
  if (mc_samples < 2) throw ContractViolation("check_descent_lemma: need at least 2 samples");
  const double lips = problem.lipschitz();
  // Assumption-2 constants of the oracle: E‖U‖² ≤ (σ + ς‖x − x*‖)² with σ, ς
  // scaled by √(noisy coordinates).
  const double noisy = std::sqrt(static_cast<double>(noisy_coordinates(oracle, problem)));
  const double sigma = noisy * oracle.sigma;
  const double varcontrol = noisy * oracle.varcontrol;
  const double s2 = sigma * sigma;
  const double v2 = varcontrol * varcontrol;

  const Vector solution = project_to_solution(problem, point);
  const double dist0 = (point - solution).squaredNorm();
  const double field0 = evaluate_field(problem, point).squaredNorm();
  const double c = 4.0 * gamma * gamma * eta * lips + 2.0 * gamma * gamma * gamma * eta * lips * lips +
                   4.0 * eta * eta + 16.0 * gamma * gamma * eta * eta * v2;
  const double rhs_const = (1.0 + c * v2) * dist0 -
                           gamma * eta * (1.0 - gamma * gamma * lips * lips - 8.0 * gamma * eta * v2) * field0 +
                           c * s2;

  const Eigen::Index d = problem.dimension();
  Vector g1(d), leading(d), field_leading(d), g2(d), next(d);
  RunningStats lhs, rhs, diff;
  for (std::uint64_t i = 0; i < mc_samples; ++i) {
    CounterStream stream(seed, i, StreamTag::kMonteCarlo);
    sample_into(oracle, problem, point, stream, g1);
    leading = point - gamma * g1;
    evaluate_field_into(problem, leading, field_leading);
    sample_into(oracle, problem, leading, stream, g2);
    next = point - eta * g2;
    const double l = (next - solution).squaredNorm();
    const double r = rhs_const - 2.0 * eta * field_leading.dot(leading - solution);
    lhs.add(l);
    rhs.add(r);
    diff.add(l - r);
  }
  DescentCheck out;
  out.lhs_estimate = lhs.mean;
  out.rhs_estimate = rhs.mean;
  out.margin = rhs.mean - lhs.mean;
  out.standard_error = std::sqrt(diff.sample_variance() / static_cast<double>(mc_samples));
  // Round-off allowance for the noiseless case, where the standard error is zero.
  const double slack = 1e-12 * (1.0 + std::abs(rhs.mean) + std::abs(lhs.mean));
  out.passes = diff.mean <= 4.0 * out.standard_error + slack;
  return out;
}

std::vector<Vector> ergodic_average(std::span<const Vector> iterates) {
  std::vector<Vector> out;
  out.reserve(iterates.size());
  if (iterates.empty()) return out;
  Vector sum = Vector::Zero(iterates.front().size());
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    if (iterates[k].size() != sum.size()) {
      throw ContractViolation("ergodic_average: snapshots differ in dimension");
    }
    sum += iterates[k];
    out.push_back(sum / static_cast<double>(k + 1));
  }
  return out;
}

AggregateCurve aggregate_runs(std::span<const Trajectory> runs, MetricKind metric, RecordSet set) {
  AggregateCurve curve;
  curve.runs = runs.size();
  if (runs.empty()) return curve;
  const auto& first = pick(runs.front(), set);
  for (const Trajectory& t : runs) {
    const auto& recs = pick(t, set);
    if (recs.size() != first.size()) {
      throw ContractViolation("aggregate_runs: trajectories have different cadences");
    }
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (recs[i].n != first[i].n) {
        throw ContractViolation("aggregate_runs: trajectories have different cadences");
      }
    }
  }
  const double count = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    double sum = 0.0;
    for (const Trajectory& t : runs) sum += metric_value(pick(t, set)[i], metric);
    const double mean = sum / count;
    double ss = 0.0;
    for (const Trajectory& t : runs) {
      const double dev = metric_value(pick(t, set)[i], metric) - mean;
      ss += dev * dev;
    }
    curve.n.push_back(first[i].n);
    curve.mean.push_back(mean);
    curve.sd.push_back(std::sqrt(ss / count));
  }
  return curve;
}

}  // namespace dseg
