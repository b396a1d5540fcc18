#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dseg/oracle.hpp"
#include "dseg/problems.hpp"
#include "dseg/schedules.hpp"
#include "dseg/trajectory.hpp"

namespace dseg {

enum class SolverKind { kDseg, kEg, kOg, kDspeg, kShgd, kAnchored };

std::string_view to_string(SolverKind kind);
SolverKind solver_kind_from_string(std::string_view name);

// Oracle calls per step for each method.
int oracle_calls_per_step(SolverKind kind);

struct SolverState {
  Vector iterate;                       // X_n
  std::optional<Vector> last_feedback;  // OG: V̂_{n-1}; DSPEG: V̂_{n-1/2}
  std::optional<double> last_gamma;     // γ_{n-1}, for the OG residual iterate
  std::optional<Vector> anchor;         // X_1, anchored gradient only
  std::uint64_t step_index = 1;         // n

  static SolverState initial(SolverKind kind, const Vector& x1);
};

struct StepReport {
  SolverState new_state;
  std::optional<Vector> leading_point;  // X_{n+1/2}
  int oracle_calls = 0;
};

// X_{n+1/2} = X_n − γ_n V̂_n,  X_{n+1} = X_n − η_n V̂_{n+1/2}.
// Vanilla EG is γ_n = η_n. Throws ContractViolation if η_n > γ_n.
StepReport dseg_step(const SolverState& state, FeedbackSource& oracle, double gamma, double eta);

// X_{n+1} = X_n − η_n V̂_n − γ_n (V̂_n − V̂_{n−1}), with V̂_0 = 0.
StepReport og_step(const SolverState& state, FeedbackSource& oracle, double gamma, double eta);

// X_n + γ_{n−1} V̂_{n−1}. Throws ContractViolation before the first step.
Vector residual_iterate(const SolverState& state);

// X_{n+1/2} = X_n − γ_n V̂_{n−1/2},  X_{n+1} = X_n − η_n V̂_{n+1/2}, with V̂_{1/2} = 0.
StepReport dspeg_step(const SolverState& state, FeedbackSource& oracle, double gamma, double eta);

struct ShgdOptions {
  // Use Jᵀ(V̂⁽¹⁾ + V̂⁽²⁾)/2 instead of Jᵀ V̂⁽¹⁾.
  bool average_samples = false;
};

// X_{n+1} = X_n − η_n Jᵀ V̂_n with the exact constant Jacobian J. Two samples are
// drawn per step. ConfigError on problems without a constant Jacobian.
StepReport shgd_step(const SolverState& state, FeedbackSource& oracle, double eta,
                     ShgdOptions options = {});

struct AnchoredParams {
  double gamma = 1.0;
  double beta = 0.7;
  double kappa = 0.9;
};

// X_{n+1} = X_n − ((1−β)/n^β) V̂_n + ((1−β)γ/n^κ)(X_1 − X_n).
StepReport anchored_step(const SolverState& state, FeedbackSource& oracle,
                         const AnchoredParams& params);

// Which point of the OG state the main metrics describe.
enum class Readout { kBase, kResidual };

struct RecordCadence {
  enum class Mode { kGeometric, kEvery };
  Mode mode = Mode::kGeometric;
  int per_decade = 30;        // geometric: points per decade beyond n = 100
  std::uint64_t stride = 1;   // every: record when n % stride == 0

  // Recorded step counts in [0, horizon], always including 0 and horizon.
  std::vector<std::uint64_t> points(std::uint64_t horizon) const;
};

struct RunSpec {
  SolverKind kind = SolverKind::kDseg;
  SchedulePair schedule = SchedulePair::single(StepsizePolicy::constant(0.1));
  AnchoredParams anchored{};
  ShgdOptions shgd{};
  Vector init;
  std::uint64_t horizon = 1;
  std::uint64_t run_id = 0;
  std::uint64_t run_seed = 0;
  RecordCadence cadence{};
  bool keep_iterates = false;
  // a in γ_n ≤ a/L; empty disables the check.
  std::optional<double> step_bound = 0.9;
};

// Divergence guard: the run aborts once ‖X_n‖ exceeds this or turns non-finite.
inline constexpr double kDivergenceNorm = 1e12;

// Checks the schedule preconditions of `spec` against `problem`. Throws
// ContractViolation when γ_1 > a/L for a global Lipschitz constant; for local
// constants the check is reported through the return value only.
bool check_step_bound(const RunSpec& spec, const ProblemInstance& problem);

// Iterates the chosen step `horizon` times. Record n describes the iterate
// after n steps (n = 0 is the initial point).
Trajectory run(const RunSpec& spec, const ProblemInstance& problem, const OracleModel& oracle);
Trajectory run(const RunSpec& spec, FeedbackSource& oracle);

}  // namespace dseg
