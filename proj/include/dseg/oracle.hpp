#pragma once

#include <cstdint>
#include <string_view>

#include "dseg/problems.hpp"
#include "dseg/random.hpp"

namespace dseg {

enum class NoiseKind {
  kExact,
  kAdditiveGaussianIsotropic,
  // Noise on the minimizer block only, as in V̂ = V(θ,φ) + (ξ, 0).
  kAdditiveGaussianFirstBlockOnly,
  kMinibatchGan,
};

std::string_view to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(std::string_view name);

// Stochastic first-order oracle V̂ = V(x) + U. `sigma` is the per-coordinate
// standard deviation of the additive kinds; `varcontrol` (ς) adds ς·dist(x, X*)
// to it.
struct OracleModel {
  NoiseKind noise_kind = NoiseKind::kExact;
  double sigma = 0.0;
  double varcontrol = 0.0;
};

struct OracleSample {
  Vector feedback;
  std::uint64_t draws_consumed = 0;  // Philox blocks
};

// Throws ConfigError for a GAN minibatch oracle on a non-GAN problem, or for
// ς > 0 on a problem without known solutions.
void validate(const OracleModel& oracle, const ProblemInstance& problem);

OracleSample sample(const OracleModel& oracle, const ProblemInstance& problem,
                    const Vector& point, CounterStream& rng);

// Allocation-free variant; returns the Philox blocks consumed.
std::uint64_t sample_into(const OracleModel& oracle, const ProblemInstance& problem,
                          const Eigen::Ref<const Vector>& point, CounterStream& rng,
                          Eigen::Ref<Vector> out);

// Number of coordinates that receive additive noise.
int noisy_coordinates(const OracleModel& oracle, const ProblemInstance& problem);

// σ² in the sense of E‖U‖² ≤ σ² (ς = 0). Unknown for minibatch noise.
double noise_variance_bound(const OracleModel& oracle, const ProblemInstance& problem);

// The per-step feedback source seen by the solvers. Samples are addressed by
// (step index, phase) so any source can be replayed deterministically.
class FeedbackSource {
 public:
  virtual ~FeedbackSource() = default;
  virtual const ProblemInstance& problem() const = 0;
  virtual Vector query(const Vector& point, std::uint64_t step, StreamTag phase) = 0;
};

// Oracle bound to one run's seed.
class SeededOracle final : public FeedbackSource {
 public:
  SeededOracle(const ProblemInstance& problem, const OracleModel& oracle, std::uint64_t run_seed);

  const ProblemInstance& problem() const override { return *problem_; }
  Vector query(const Vector& point, std::uint64_t step, StreamTag phase) override;

 private:
  const ProblemInstance* problem_;
  OracleModel oracle_;
  std::uint64_t run_seed_;
};

// Counts calls made to the wrapped source.
class CountingSource final : public FeedbackSource {
 public:
  explicit CountingSource(FeedbackSource& inner) : inner_(&inner) {}

  const ProblemInstance& problem() const override { return inner_->problem(); }
  Vector query(const Vector& point, std::uint64_t step, StreamTag phase) override {
    ++calls_;
    return inner_->query(point, step, phase);
  }
  std::uint64_t calls() const { return calls_; }

 private:
  FeedbackSource* inner_;
  std::uint64_t calls_ = 0;
};

}  // namespace dseg
