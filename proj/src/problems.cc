#include "dseg/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "dseg/errors.hpp"
#include "dseg/random.hpp"

namespace dseg {
namespace {

constexpr int kMaxBilinearAttempts = 100;
constexpr double kMinBilinearSingularValue = 1e-3;

void check_dimension(const ProblemInstance& problem, Eigen::Index size, const char* what) {
  if (size != problem.dimension()) {
    throw ContractViolation(std::string(what) + ": expected a vector of length " +
                            std::to_string(problem.dimension()) + ", got " +
                            std::to_string(size));
  }
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

Matrix gaussian_matrix(int rows, int cols, CounterStream& stream) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = stream.normal();
  }
  return m;
}

// Row-major views into the GAN iterate.
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

}  // namespace

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kPlanar:
      return "planar";
    case ProblemKind::kAffine:
      return "affine";
    case ProblemKind::kStronglyConvexConcave:
      return "strongly_convex_concave";
    case ProblemKind::kGaussianGan:
      return "gaussian_gan";
  }
  return "unknown";
}

ProblemInstance::ProblemInstance(ProblemKind kind, int min_block, int max_block,
                                 double lipschitz, std::optional<double> lipschitz_radius,
                                 double error_bound, Payload payload)
    : kind_(kind),
      min_block_(min_block),
      max_block_(max_block),
      lipschitz_(lipschitz),
      lipschitz_radius_(lipschitz_radius),
      error_bound_(error_bound),
      payload_(std::move(payload)) {}

const AffinePayload& ProblemInstance::affine() const {
  if (const auto* p = std::get_if<AffinePayload>(&payload_)) return *p;
  throw ContractViolation("problem is not affine");
}

const StronglyConvexConcavePayload& ProblemInstance::strongly_convex_concave() const {
  if (const auto* p = std::get_if<StronglyConvexConcavePayload>(&payload_)) return *p;
  throw ContractViolation("problem is not strongly convex-concave");
}

const GaussianGanPayload& ProblemInstance::gaussian_gan() const {
  if (const auto* p = std::get_if<GaussianGanPayload>(&payload_)) return *p;
  throw ContractViolation("problem is not a Gaussian GAN");
}

std::optional<Matrix> ProblemInstance::constant_jacobian() const {
  switch (kind_) {
    case ProblemKind::kPlanar: {
      Matrix j(2, 2);
      j << 0.0, 1.0, -1.0, 0.0;
      return j;
    }
    case ProblemKind::kAffine:
      return affine().matrix;
    default:
      return std::nullopt;
  }
}

ProblemInstance make_planar() {
  return ProblemInstance(ProblemKind::kPlanar, 1, 1, 1.0, std::nullopt, 1.0, std::monostate{});
}

ProblemInstance make_affine(const Matrix& matrix, const Vector& offset, int min_block) {
  const Eigen::Index d = matrix.rows();
  if (d == 0 || matrix.cols() != d || offset.size() != d) {
    throw ContractViolation("make_affine: matrix must be square and match the offset length");
  }
  if (min_block < 0 || min_block > d) {
    throw ContractViolation("make_affine: block split out of range");
  }
  Eigen::JacobiSVD<Matrix> svd(matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double largest = s(0);
  const double cutoff = static_cast<double>(d) * std::numeric_limits<double>::epsilon() *
                        std::max(largest, 1.0);
  double smallest_nonzero = 0.0;
  Vector inv = Vector::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (s(i) > cutoff) {
      inv(i) = 1.0 / s(i);
      smallest_nonzero = s(i);
    }
  }
  Matrix pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  const Vector residual = matrix * (pinv * offset) - offset;
  if (residual.norm() > 1e-9 * (1.0 + offset.norm())) {
    throw ContractViolation("make_affine: offset is not in the range of the matrix; no solutions");
  }
  AffinePayload payload{matrix, offset, std::move(pinv)};
  return ProblemInstance(ProblemKind::kAffine, min_block, static_cast<int>(d) - min_block,
                         largest, std::nullopt, smallest_nonzero, std::move(payload));
}

ProblemInstance make_bilinear_from(const Matrix& coupling) {
  const Eigen::Index p = coupling.rows();
  const Eigen::Index q = coupling.cols();
  Matrix field = Matrix::Zero(p + q, p + q);
  field.topRightCorner(p, q) = coupling;
  field.bottomLeftCorner(q, p) = -coupling.transpose();
  return make_affine(field, Vector::Zero(p + q), static_cast<int>(p));
}

Matrix random_orthogonal(int n, CounterStream& stream) {
  const Matrix g = gaussian_matrix(n, n, stream);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign fix makes Q Haar-distributed.
  for (int i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  }
  return q;
}

Matrix random_spd(int n, double eig_lo, double eig_hi, CounterStream& stream) {
  const Matrix q = random_orthogonal(n, stream);
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = eig_lo + (eig_hi - eig_lo) * stream.uniform();
  Matrix spd = q * d.asDiagonal() * q.transpose();
  return 0.5 * (spd + spd.transpose());
}

ProblemInstance make_bilinear(int dim_half, std::uint64_t rng_seed, BilinearSpectrum spectrum) {
  if (dim_half < 1) throw ContractViolation("make_bilinear: dim_half must be >= 1");
  if (const auto* band = std::get_if<BandedSpectrum>(&spectrum)) {
    if (!(band->lo > 0.0) || band->hi < band->lo) {
      throw ContractViolation("make_bilinear: banded spectrum needs 0 < lo <= hi");
    }
    CounterStream stream(rng_seed, 0, StreamTag::kProblem);
    const Matrix u = random_orthogonal(dim_half, stream);
    const Matrix v = random_orthogonal(dim_half, stream);
    Vector s(dim_half);
    for (int i = 0; i < dim_half; ++i) s(i) = band->lo + (band->hi - band->lo) * stream.uniform();
    s(0) = band->hi;
    s(dim_half - 1) = band->lo;
    return make_bilinear_from(u * s.asDiagonal() * v.transpose());
  }
  const double scale = 1.0 / std::sqrt(2.0 * dim_half);
  for (int attempt = 0; attempt < kMaxBilinearAttempts; ++attempt) {
    CounterStream stream(rng_seed, static_cast<std::uint64_t>(attempt), StreamTag::kProblem);
    const Matrix m = scale * gaussian_matrix(dim_half, dim_half, stream);
    Eigen::JacobiSVD<Matrix> svd(m);
    if (svd.singularValues()(dim_half - 1) > kMinBilinearSingularValue) {
      return make_bilinear_from(m);
    }
  }
  throw NumericalError("make_bilinear: no well-conditioned matrix after 100 attempts");
}

ProblemInstance make_strongly_convex_concave_from(StronglyConvexConcavePayload payload,
                                                  double radius) {
  const Eigen::Index p = payload.a1.rows();
  const Eigen::Index q = payload.b1.rows();
  if (p == 0 || q == 0 || payload.a2.rows() != p || payload.b2.rows() != q ||
      payload.coupling.rows() != p || payload.coupling.cols() != q) {
    throw ContractViolation("strongly convex-concave payload has inconsistent shapes");
  }
  if (!(radius > 0.0)) throw ContractViolation("lipschitz radius must be positive");
  const double a1_min = min_eigenvalue(payload.a1);
  const double b1_min = min_eigenvalue(payload.b1);
  if (a1_min < 0.0 || b1_min < 0.0 || min_eigenvalue(payload.a2) < 0.0 ||
      min_eigenvalue(payload.b2) < 0.0) {
    throw ContractViolation("strongly convex-concave payload needs PSD blocks");
  }
  // Hessian of (θᵀAθ)² is 4(θᵀAθ)A + 8Aθθᵀ A, so its norm is at most 12‖A‖²R² on the ball.
  const double r2 = radius * radius;
  const double a2n = spectral_norm(payload.a2);
  const double b2n = spectral_norm(payload.b2);
  const double diag_bound = std::max(4.0 * spectral_norm(payload.a1) + 12.0 * a2n * a2n * r2,
                                     4.0 * spectral_norm(payload.b1) + 12.0 * b2n * b2n * r2);
  const double lipschitz = diag_bound + 4.0 * spectral_norm(payload.coupling);
  const double modulus = 4.0 * std::min(a1_min, b1_min);
  return ProblemInstance(ProblemKind::kStronglyConvexConcave, static_cast<int>(p),
                         static_cast<int>(q), lipschitz, radius, modulus, std::move(payload));
}

ProblemInstance make_strongly_convex_concave(int dim_half, std::uint64_t rng_seed,
                                             double radius) {
  if (dim_half < 1) throw ContractViolation("make_strongly_convex_concave: dim_half must be >= 1");
  CounterStream stream(rng_seed, 0, StreamTag::kProblem);
  StronglyConvexConcavePayload payload;
  payload.a1 = random_spd(dim_half, 0.5, 1.5, stream);
  payload.a2 = random_spd(dim_half, 0.5, 1.5, stream);
  payload.b1 = random_spd(dim_half, 0.5, 1.5, stream);
  payload.b2 = random_spd(dim_half, 0.5, 1.5, stream);
  payload.coupling = gaussian_matrix(dim_half, dim_half, stream) / std::sqrt(2.0 * dim_half);
  return make_strongly_convex_concave_from(std::move(payload), radius);
}

ProblemInstance make_gaussian_gan_from(const Matrix& covariance, int batch_size) {
  const Eigen::Index n = covariance.rows();
  if (n == 0 || covariance.cols() != n) throw ContractViolation("covariance must be square");
  if (batch_size < 1) throw ContractViolation("batch_size must be >= 1");
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ContractViolation("covariance must be symmetric");
  }
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  GaussianGanPayload payload{static_cast<int>(n), covariance, llt.matrixL(), batch_size};
  const int block = static_cast<int>(n * n);
  // On ‖(W,A)‖ ≤ R: ‖ΔV‖ ≤ 2R·√((a+b)² + a²)·‖Δ‖ with a² + b² = 1, i.e. ≤ 2·1.618·R.
  const double radius = kDefaultLipschitzRadius;
  return ProblemInstance(ProblemKind::kGaussianGan, block, block, 4.0 * radius, radius, 0.0,
                         std::move(payload));
}

ProblemInstance make_gaussian_gan(int dim, int batch_size, std::uint64_t rng_seed) {
  if (dim < 1) throw ContractViolation("make_gaussian_gan: dim must be >= 1");
  CounterStream stream(rng_seed, 0, StreamTag::kProblem);
  return make_gaussian_gan_from(random_spd(dim, 0.25, 4.0, stream), batch_size);
}

void evaluate_field_into(const ProblemInstance& problem, const Eigen::Ref<const Vector>& point,
                         Eigen::Ref<Vector> out) {
  check_dimension(problem, point.size(), "evaluate_field");
  check_dimension(problem, out.size(), "evaluate_field output");
  switch (problem.kind()) {
    case ProblemKind::kPlanar: {
      const double theta = point(0);
      const double phi = point(1);
      out(0) = phi;
      out(1) = -theta;
      return;
    }
    case ProblemKind::kAffine: {
      const AffinePayload& a = problem.affine();
      out.noalias() = a.matrix * point;
      out += a.offset;
      return;
    }
    case ProblemKind::kStronglyConvexConcave: {
      const StronglyConvexConcavePayload& s = problem.strongly_convex_concave();
      const Eigen::Index p = problem.min_block();
      const Eigen::Index q = problem.max_block();
      const auto theta = point.head(p);
      const auto phi = point.tail(q);
      const Vector a2_theta = s.a2 * theta;
      const Vector b2_phi = s.b2 * phi;
      const double qa = theta.dot(a2_theta);
      const double qb = phi.dot(b2_phi);
      out.head(p).noalias() = 4.0 * qa * a2_theta + 4.0 * (s.a1 * theta) + 4.0 * (s.coupling * phi);
      out.tail(q).noalias() =
          -4.0 * (s.coupling.transpose() * theta) + 4.0 * (s.b1 * phi) + 4.0 * qb * b2_phi;
      return;
    }
    case ProblemKind::kGaussianGan: {
      const GaussianGanPayload& g = problem.gaussian_gan();
      const int n = g.dim;
      const ConstRowMap w(point.data(), n, n);
      const ConstRowMap a(point.data() + n * n, n, n);
      RowMap field_w(out.data(), n, n);
      RowMap field_a(out.data() + n * n, n, n);
      // ∇_W f = −(A+Aᵀ)W, ∇_A f = Σ − WWᵀ; the field negates the maximizer block.
      field_w.noalias() = -(a + a.transpose()) * w;
      field_a.noalias() = w * w.transpose();
      field_a -= g.covariance;
      return;
    }
  }
}

Vector evaluate_field(const ProblemInstance& problem, const Vector& point) {
  Vector out(problem.dimension());
  evaluate_field_into(problem, point, out);
  return out;
}

double saddle_value(const ProblemInstance& problem, const Vector& point) {
  check_dimension(problem, point.size(), "saddle_value");
  switch (problem.kind()) {
    case ProblemKind::kPlanar:
      return point(0) * point(1);
    case ProblemKind::kStronglyConvexConcave: {
      const StronglyConvexConcavePayload& s = problem.strongly_convex_concave();
      const Vector theta = point.head(problem.min_block());
      const Vector phi = point.tail(problem.max_block());
      const double qa2 = theta.dot(s.a2 * theta);
      const double qb2 = phi.dot(s.b2 * phi);
      return qa2 * qa2 + 2.0 * theta.dot(s.a1 * theta) + 4.0 * theta.dot(s.coupling * phi) -
             2.0 * phi.dot(s.b1 * phi) - qb2 * qb2;
    }
    case ProblemKind::kGaussianGan: {
      const GaussianGanPayload& g = problem.gaussian_gan();
      const int n = g.dim;
      const ConstRowMap w(point.data(), n, n);
      const ConstRowMap a(point.data() + n * n, n, n);
      // E[xᵀAx] = tr(AΣ), E[wᵀWᵀAWw] = tr(WᵀAW).
      return (a * g.covariance).trace() - (w.transpose() * a * w).trace();
    }
    case ProblemKind::kAffine:
      break;
  }
  throw UnsupportedMetric("saddle_value: general affine fields have no value function");
}

double distance_to_solution(const ProblemInstance& problem, const Vector& point) {
  check_dimension(problem, point.size(), "distance_to_solution");
  switch (problem.kind()) {
    case ProblemKind::kPlanar:
    case ProblemKind::kStronglyConvexConcave:
      return point.norm();
    case ProblemKind::kAffine: {
      const AffinePayload& a = problem.affine();
      return (a.pseudo_inverse * (a.matrix * point + a.offset)).norm();
    }
    case ProblemKind::kGaussianGan:
      break;
  }
  throw UnsupportedMetric("distance_to_solution: unsupported for gaussian_gan, use the residual");
}

Vector project_to_solution(const ProblemInstance& problem, const Vector& point) {
  check_dimension(problem, point.size(), "project_to_solution");
  switch (problem.kind()) {
    case ProblemKind::kPlanar:
    case ProblemKind::kStronglyConvexConcave:
      return Vector::Zero(point.size());
    case ProblemKind::kAffine: {
      const AffinePayload& a = problem.affine();
      return point - a.pseudo_inverse * (a.matrix * point + a.offset);
    }
    case ProblemKind::kGaussianGan:
      break;
  }
  throw UnsupportedMetric("project_to_solution: unsupported for gaussian_gan");
}

}  // namespace dseg
