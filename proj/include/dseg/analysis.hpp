#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dseg/oracle.hpp"
#include "dseg/problems.hpp"
#include "dseg/schedules.hpp"
#include "dseg/trajectory.hpp"

namespace dseg {

// Expected energy E_n = E[θ_n² + φ_n²] of EG on the planar problem with noise
// ξ (variance σ²) on the first coordinate:
//   E_{n+1} = (1 − γ_n² + γ_n⁴) E_n + (1 + γ_n²) γ_n² σ².
// gamma[k] holds γ_{k+1}; the result holds E_1..E_{K+1}.
std::vector<double> energy_recursion_eg(std::span<const double> gamma, double sigma2, double e1);
std::vector<double> energy_recursion_eg(const StepsizePolicy& gamma, double sigma2, double e1,
                                        std::uint64_t steps);

// Same for DSEG:
//   E_{n+1} = (1 − 2γ_nη_n + η_n² + γ_n²η_n²) E_n + (η_n² + γ_n²η_n²) σ².
std::vector<double> energy_recursion_dseg(std::span<const double> gamma,
                                          std::span<const double> eta, double sigma2, double e1);
std::vector<double> energy_recursion_dseg(const SchedulePair& schedule, double sigma2, double e1,
                                          std::uint64_t steps);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Least squares on (log n, log metric) over n ∈ [n_lo, n_hi]. Needs at least
// 10 points, all metric values positive (ContractViolation otherwise).
LogLogFit fit_loglog_slope(std::span<const double> n, std::span<const double> metric, double n_lo,
                           double n_hi);

enum class RateTheorem { kGeneral, kAffine };

struct RateQuery {
  double gamma = 0.0;
  double eta = 0.0;
  double sigma2 = 0.0;
  double a = 0.9;
  RateTheorem theorem = RateTheorem::kGeneral;
  // Update exponent r_η: 0 for constant stepsizes (floor regime), 1 for the
  // affine O(1/n) schedule, (1/2, 1) for the general power-law schedule.
  double update_exponent = 0.0;
};

struct RatePrediction {
  double m_const = 0.0;       // M
  double lambda_const = 0.0;  // Λ = γητ²(1 − a²)
  double predicted_floor = 0.0;
  double predicted_exponent = 0.0;  // ρ
  bool geometric_regime = false;    // Λ ∈ (0, 1)
  bool exponent_condition = false;  // Λ > ρ (general) or Λ > 1 (affine, r_η = 1)
};

// general: M = (2γ²ηL + γ³ηL² + η²)σ²;  affine: M = η²(1 + a²)σ².
// Throws UnsupportedMetric when τ is unknown.
RatePrediction predict_rate_constants(const ProblemInstance& problem, const RateQuery& query);

struct DescentCheck {
  double lhs_estimate = 0.0;
  double rhs_estimate = 0.0;
  double margin = 0.0;          // rhs − lhs
  double standard_error = 0.0;  // of the paired difference
  bool passes = false;
};

// Monte-Carlo check of the one-step descent inequality for DSEG:
//   E‖X₊ − x*‖² ≤ (1 + Cς²)‖X − x*‖² − 2η E⟨V(X_½), X_½ − x*⟩
//                 − γη(1 − γ²L² − 8γης²)‖V(X)‖² + Cσ²,
//   C = 4γ²ηL + 2γ³ηL² + 4η² + 16γ²η²ς²,
// with x* the projection of `point` onto X* and σ² = E‖U‖². Passes iff
// mean(lhs − rhs) ≤ 4 standard errors.
DescentCheck check_descent_lemma(const ProblemInstance& problem, const OracleModel& oracle,
                                 const Vector& point, double gamma, double eta,
                                 std::uint64_t mc_samples, std::uint64_t seed);

// Running uniform average of the snapshots.
std::vector<Vector> ergodic_average(std::span<const Vector> iterates);

enum class MetricKind { kDistSq, kResidualSq };
enum class RecordSet { kBase, kResidualIterate };

struct AggregateCurve {
  std::vector<std::uint64_t> n;
  std::vector<double> mean;
  std::vector<double> sd;  // population convention (divide by runs)
  std::size_t runs = 0;
};

// Pointwise mean and population standard deviation. Throws ContractViolation
// on mismatched cadences and UnsupportedMetric when dist_sq is missing.
AggregateCurve aggregate_runs(std::span<const Trajectory> runs, MetricKind metric,
                              RecordSet set = RecordSet::kBase);

}  // namespace dseg
