#include "dseg/oracle.hpp"

#include <string>

#include "dseg/errors.hpp"

namespace dseg {

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kExact:
      return "exact";
    case NoiseKind::kAdditiveGaussianIsotropic:
      return "isotropic";
    case NoiseKind::kAdditiveGaussianFirstBlockOnly:
      return "first_block";
    case NoiseKind::kMinibatchGan:
      return "minibatch_gan";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(std::string_view name) {
  for (NoiseKind k : {NoiseKind::kExact, NoiseKind::kAdditiveGaussianIsotropic,
                      NoiseKind::kAdditiveGaussianFirstBlockOnly, NoiseKind::kMinibatchGan}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown noise kind '" + std::string(name) + "'");
}

void validate(const OracleModel& oracle, const ProblemInstance& problem) {
  if (oracle.sigma < 0.0 || oracle.varcontrol < 0.0) {
    throw ConfigError("oracle: sigma and varcontrol must be non-negative");
  }
  if (oracle.noise_kind == NoiseKind::kMinibatchGan &&
      problem.kind() != ProblemKind::kGaussianGan) {
    throw ConfigError("oracle: minibatch_gan noise requires a gaussian_gan problem");
  }
  if (oracle.varcontrol > 0.0 && !problem.has_known_solutions()) {
    throw ConfigError("oracle: varcontrol > 0 needs a problem with a known solution set");
  }
}

int noisy_coordinates(const OracleModel& oracle, const ProblemInstance& problem) {
  switch (oracle.noise_kind) {
    case NoiseKind::kExact:
      return 0;
    case NoiseKind::kAdditiveGaussianIsotropic:
    case NoiseKind::kMinibatchGan:
      return problem.dimension();
    case NoiseKind::kAdditiveGaussianFirstBlockOnly:
      return problem.min_block();
  }
  return 0;
}

double noise_variance_bound(const OracleModel& oracle, const ProblemInstance& problem) {
  if (oracle.noise_kind == NoiseKind::kMinibatchGan) {
    throw UnsupportedMetric("noise_variance_bound: not available for minibatch noise");
  }
  return noisy_coordinates(oracle, problem) * oracle.sigma * oracle.sigma;
}

std::uint64_t sample_into(const OracleModel& oracle, const ProblemInstance& problem,
                          const Eigen::Ref<const Vector>& point, CounterStream& rng,
                          Eigen::Ref<Vector> out) {
  const std::uint64_t start = rng.blocks();
  if (oracle.noise_kind == NoiseKind::kMinibatchGan) {
    if (problem.kind() != ProblemKind::kGaussianGan) {
      throw ConfigError("oracle: minibatch_gan noise requires a gaussian_gan problem");
    }
    if (point.size() != problem.dimension() || out.size() != problem.dimension()) {
      throw ContractViolation("sample: dimension mismatch");
    }
    const GaussianGanPayload& g = problem.gaussian_gan();
    const int n = g.dim;
    const int batch = g.batch_size;
    Matrix z(n, batch);
    Matrix w_samples(n, batch);
    for (int j = 0; j < batch; ++j) {
      for (int i = 0; i < n; ++i) z(i, j) = rng.normal();
      for (int i = 0; i < n; ++i) w_samples(i, j) = rng.normal();
    }
    const Matrix x = g.covariance_factor * z;
    const Matrix data_cov = (x * x.transpose()) / batch;
    const Matrix latent_cov = (w_samples * w_samples.transpose()) / batch;
    Eigen::Map<const RowMatrix> w(point.data(), n, n);
    Eigen::Map<const RowMatrix> a(point.data() + n * n, n, n);
    Eigen::Map<RowMatrix> field_w(out.data(), n, n);
    Eigen::Map<RowMatrix> field_a(out.data() + n * n, n, n);
    field_w.noalias() = -(a + a.transpose()) * w * latent_cov;
    field_a.noalias() = w * latent_cov * w.transpose();
    field_a -= data_cov;
    return rng.blocks() - start;
  }

  evaluate_field_into(problem, point, out);
  if (oracle.noise_kind == NoiseKind::kExact) return 0;

  double stddev = oracle.sigma;
  if (oracle.varcontrol > 0.0) {
    stddev += oracle.varcontrol * distance_to_solution(problem, Vector(point));
  }
  const int noisy = noisy_coordinates(oracle, problem);
  for (int i = 0; i < noisy; ++i) out(i) += stddev * rng.normal();
  return rng.blocks() - start;
}

OracleSample sample(const OracleModel& oracle, const ProblemInstance& problem,
                    const Vector& point, CounterStream& rng) {
  OracleSample s;
  s.feedback.resize(problem.dimension());
  s.draws_consumed = sample_into(oracle, problem, point, rng, s.feedback);
  return s;
}

SeededOracle::SeededOracle(const ProblemInstance& problem, const OracleModel& oracle,
                           std::uint64_t run_seed)
    : problem_(&problem), oracle_(oracle), run_seed_(run_seed) {
  validate(oracle_, problem);
}

Vector SeededOracle::query(const Vector& point, std::uint64_t step, StreamTag phase) {
  CounterStream stream(run_seed_, step, phase);
  return sample(oracle_, *problem_, point, stream).feedback;
}

}  // namespace dseg
