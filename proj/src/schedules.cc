#include "dseg/schedules.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "dseg/errors.hpp"

namespace dseg {
namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr double kOrderingRelTol = 1e-12;

}  // namespace

double StepsizePolicy::value(std::uint64_t n) const {
  if (n == 0) throw ContractViolation("stepsize index starts at 1");
  if (exponent == 0.0) return scale;
  return scale / std::pow(static_cast<double>(n) + offset, exponent);
}

StepsizePolicy StepsizePolicy::from_initial(double first_value, double offset, double exponent) {
  if (!(first_value > 0.0)) throw ContractViolation("from_initial: first value must be positive");
  if (offset < 0.0) throw ContractViolation("from_initial: offset must be non-negative");
  return {first_value * std::pow(1.0 + offset, exponent), offset, exponent};
}

SchedulePair::SchedulePair(StepsizePolicy exploration, StepsizePolicy update)
    : exploration_(exploration), update_(update) {
  for (const StepsizePolicy* p : {&exploration_, &update_}) {
    if (!(p->scale > 0.0) || p->offset < 0.0 || p->exponent < 0.0 || p->exponent > 1.0) {
      throw ContractViolation("stepsize policy needs scale > 0, offset >= 0, exponent in [0, 1]");
    }
  }
  if (exploration_.exponent > update_.exponent) {
    throw ContractViolation("exploration stepsize decays faster than the update stepsize");
  }
  // log(γ_n/η_n) has at most one interior minimum, at
  // n* = (r_γ b_η − r_η b_γ)/(r_η − r_γ); check there as well as on the grid.
  std::vector<std::uint64_t> checkpoints;
  std::uint64_t n = 1;
  for (int k = 0; k <= 9; ++k, n *= 10) checkpoints.push_back(n);
  const double dr = update_.exponent - exploration_.exponent;
  if (dr > 0.0) {
    const double star =
        (exploration_.exponent * update_.offset - update_.exponent * exploration_.offset) / dr;
    if (star > 1.0 && star < 1e18) {
      checkpoints.push_back(static_cast<std::uint64_t>(std::floor(star)));
      checkpoints.push_back(static_cast<std::uint64_t>(std::ceil(star)));
    }
  }
  if (dr == 0.0 && update_.scale > exploration_.scale * (1.0 + kOrderingRelTol)) {
    throw ContractViolation("update stepsize eventually exceeds the exploration stepsize");
  }
  for (std::uint64_t c : checkpoints) {
    const double g = exploration_.value(c);
    const double e = update_.value(c);
    if (e > g * (1.0 + kOrderingRelTol)) {
      throw ContractViolation("update stepsize exceeds exploration stepsize at n = " +
                              std::to_string(c));
    }
  }
}

std::string_view to_string(StepCondition condition) {
  switch (condition) {
    case StepCondition::kSumProductDiverges:
      return "SumProductDiverges";
    case StepCondition::kUpdateSquareSummable:
      return "UpdateSquareSummable";
    case StepCondition::kExploreSqUpdateSummable:
      return "ExploreSqUpdateSummable";
    case StepCondition::kOrderingViolated:
      return "OrderingViolated";
  }
  return "unknown";
}

Assumption4Verdict classify_assumption4(double r_gamma, double r_eta) {
  if (r_gamma < 0.0 || r_gamma > 1.0 || r_eta < 0.0 || r_eta > 1.0) {
    throw ContractViolation("classify_assumption4: exponents must lie in [0, 1]");
  }
  Assumption4Verdict verdict;
  if (r_gamma + r_eta > 1.0 + kBoundaryTol) {
    verdict.violated_conditions.push_back(StepCondition::kSumProductDiverges);
  }
  if (2.0 * r_eta <= 1.0 + kBoundaryTol) {
    verdict.violated_conditions.push_back(StepCondition::kUpdateSquareSummable);
  }
  if (2.0 * r_gamma + r_eta <= 1.0 + kBoundaryTol) {
    verdict.violated_conditions.push_back(StepCondition::kExploreSqUpdateSummable);
  }
  if (r_eta < r_gamma) verdict.violated_conditions.push_back(StepCondition::kOrderingViolated);
  verdict.admissible = verdict.violated_conditions.empty();
  return verdict;
}

SchedulePair theorem2_optimal_pair(double gamma_scale, double eta_scale, double offset) {
  if (!(gamma_scale > 0.0) || !(eta_scale > 0.0)) {
    throw ContractViolation("theorem2_optimal_pair: scales must be positive");
  }
  return SchedulePair({gamma_scale, offset, 1.0 / 3.0}, {eta_scale, offset, 2.0 / 3.0});
}

}  // namespace dseg
