#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace dseg {

// value(n) = scale / (n + offset)^exponent, n ≥ 1.
struct StepsizePolicy {
  double scale = 1.0;
  double offset = 0.0;
  double exponent = 0.0;

  double value(std::uint64_t n) const;

  // Policy whose first value equals `first_value`: scale = first_value·(1+b)^r.
  static StepsizePolicy from_initial(double first_value, double offset, double exponent);
  static StepsizePolicy constant(double value) { return {value, 0.0, 0.0}; }
};

// Exploration (γ_n) and update (η_n) schedules with γ_n ≥ η_n for all n.
class SchedulePair {
 public:
  // Throws ContractViolation when γ_n < η_n for some n ≥ 1: checked on
  // n ∈ {1, 10, ..., 10⁹}, at the minimizer of γ_n/η_n, and in the limit.
  SchedulePair(StepsizePolicy exploration, StepsizePolicy update);

  // Same policy for both steps (vanilla extragradient).
  static SchedulePair single(StepsizePolicy policy) { return SchedulePair(policy, policy); }

  const StepsizePolicy& exploration() const { return exploration_; }
  const StepsizePolicy& update() const { return update_; }
  double gamma(std::uint64_t n) const { return exploration_.value(n); }
  double eta(std::uint64_t n) const { return update_.value(n); }

 private:
  StepsizePolicy exploration_;
  StepsizePolicy update_;
};

enum class StepCondition {
  kSumProductDiverges,       // Σ γ_n η_n = ∞
  kUpdateSquareSummable,     // Σ η_n² < ∞
  kExploreSqUpdateSummable,  // Σ γ_n² η_n < ∞
  kOrderingViolated,         // r_η < r_γ, so γ_n < η_n eventually
};

std::string_view to_string(StepCondition condition);

struct Assumption4Verdict {
  bool admissible = false;
  std::vector<StepCondition> violated_conditions;
};

// Exponent region for which power-law schedules satisfy the summability
// conditions: r_γ + r_η ≤ 1, 2r_η > 1, 2r_γ + r_η > 1 (strict ones fail on equality).
Assumption4Verdict classify_assumption4(double r_gamma, double r_eta);

// Exponents (1/3, 2/3), the best rate of the power-law family on error-bound problems.
SchedulePair theorem2_optimal_pair(double gamma_scale, double eta_scale, double offset);

}  // namespace dseg
