#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

#include "dseg/random.hpp"

namespace dseg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ProblemKind { kPlanar, kAffine, kStronglyConvexConcave, kGaussianGan };

std::string_view to_string(ProblemKind kind);

// V(x) = M x + v. The pseudo-inverse is cached for distance computations.
struct AffinePayload {
  Matrix matrix;
  Vector offset;
  Matrix pseudo_inverse;
};

// f(θ,φ) = (θᵀA₂θ)² + 2θᵀA₁θ + 4θᵀMφ − 2φᵀB₁φ − (φᵀB₂φ)²
struct StronglyConvexConcavePayload {
  Matrix a1;
  Matrix a2;
  Matrix b1;
  Matrix b2;
  Matrix coupling;
};

// f(W,A) = E[xᵀAx] − E[wᵀWᵀAWw], x ~ N(0,Σ), w ~ N(0,I).
// Iterate layout: row-major W (generator) followed by row-major A (discriminator).
struct GaussianGanPayload {
  int dim = 0;
  Matrix covariance;
  Matrix covariance_factor;  // lower Cholesky factor of Σ
  int batch_size = 0;
};

// A vector field with known solution geometry. Immutable once built; the
// make_* functions below are the only way to obtain one.
class ProblemInstance {
 public:
  using Payload = std::variant<std::monostate, AffinePayload, StronglyConvexConcavePayload,
                               GaussianGanPayload>;

  ProblemKind kind() const { return kind_; }
  int dimension() const { return min_block_ + max_block_; }
  int min_block() const { return min_block_; }
  int max_block() const { return max_block_; }

  // L. For the strongly convex-concave and GAN kinds this bound only holds on
  // the ball of radius lipschitz_radius() around the origin.
  double lipschitz() const { return lipschitz_; }
  bool lipschitz_is_global() const { return !lipschitz_radius_.has_value(); }
  std::optional<double> lipschitz_radius() const { return lipschitz_radius_; }

  // τ in ‖V(x)‖ ≥ τ·dist(x, X*); 0 when unknown.
  double error_bound() const { return error_bound_; }

  bool has_known_solutions() const { return kind_ != ProblemKind::kGaussianGan; }

  const AffinePayload& affine() const;
  const StronglyConvexConcavePayload& strongly_convex_concave() const;
  const GaussianGanPayload& gaussian_gan() const;

  // Constant Jacobian for the planar and affine kinds.
  std::optional<Matrix> constant_jacobian() const;

 private:
  ProblemInstance(ProblemKind kind, int min_block, int max_block, double lipschitz,
                  std::optional<double> lipschitz_radius, double error_bound, Payload payload);

  friend ProblemInstance make_planar();
  friend ProblemInstance make_affine(const Matrix& matrix, const Vector& offset, int min_block);
  friend ProblemInstance make_strongly_convex_concave_from(StronglyConvexConcavePayload payload,
                                                           double radius);
  friend ProblemInstance make_gaussian_gan_from(const Matrix& covariance, int batch_size);

  ProblemKind kind_;
  int min_block_;
  int max_block_;
  double lipschitz_;
  std::optional<double> lipschitz_radius_;
  double error_bound_;
  Payload payload_;
};

// Radius of the ball on which the local Lipschitz bounds are stated.
inline constexpr double kDefaultLipschitzRadius = 10.0;

// min_θ max_φ θφ, V(θ,φ) = (φ, −θ).
ProblemInstance make_planar();

// General affine field. L and τ come from the singular values of `matrix`.
// Throws ContractViolation if v ∉ range(M), since the solution set would be empty.
ProblemInstance make_affine(const Matrix& matrix, const Vector& offset, int min_block);

// f(θ,φ) = θᵀMφ with V = (Mφ, −Mᵀθ).
ProblemInstance make_bilinear_from(const Matrix& coupling);

// Gaussian: entries N(0,1)/√(2·dim_half), resampled until σ_min(M) > 1e-3.
// Banded: M = U·diag(s)·Vᵀ with Haar U, V; s has its extremes pinned at
// [lo, hi] and the rest uniform in between.
struct GaussianSpectrum {};
struct BandedSpectrum {
  double lo = 0.6;
  double hi = 0.85;
};
using BilinearSpectrum = std::variant<GaussianSpectrum, BandedSpectrum>;

ProblemInstance make_bilinear(int dim_half, std::uint64_t rng_seed,
                              BilinearSpectrum spectrum = GaussianSpectrum{});

ProblemInstance make_strongly_convex_concave(int dim_half, std::uint64_t rng_seed,
                                             double radius = kDefaultLipschitzRadius);
ProblemInstance make_strongly_convex_concave_from(StronglyConvexConcavePayload payload,
                                                  double radius = kDefaultLipschitzRadius);

ProblemInstance make_gaussian_gan(int dim, int batch_size, std::uint64_t rng_seed);
ProblemInstance make_gaussian_gan_from(const Matrix& covariance, int batch_size);

// Exact (expected) field. Throws ContractViolation on a dimension mismatch.
Vector evaluate_field(const ProblemInstance& problem, const Vector& point);
void evaluate_field_into(const ProblemInstance& problem, const Eigen::Ref<const Vector>& point,
                         Eigen::Ref<Vector> out);

// Saddle value f(θ,φ); the field is (∇_θ f, −∇_φ f). Not defined for general
// affine fields (UnsupportedMetric).
double saddle_value(const ProblemInstance& problem, const Vector& point);

// Euclidean distance to X*. UnsupportedMetric for the GAN kind.
double distance_to_solution(const ProblemInstance& problem, const Vector& point);

// Nearest point of X*.
Vector project_to_solution(const ProblemInstance& problem, const Vector& point);

// Helpers shared with the generators.
Matrix random_orthogonal(int n, CounterStream& stream);
Matrix random_spd(int n, double eig_lo, double eig_hi, CounterStream& stream);

}  // namespace dseg
