#include "dseg/problem_io.hpp"

#include <string>

#include "dseg/errors.hpp"

namespace dseg {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json flat = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  }
  return flat;
}

Matrix matrix_from_json(const json& flat, Eigen::Index rows, Eigen::Index cols) {
  if (!flat.is_array() || static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw ConfigError("matrix: expected a flat row-major array of " + std::to_string(rows * cols) +
                      " numbers");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = flat.at(i * cols + j).get<double>();
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const json& arr) {
  if (!arr.is_array()) throw ConfigError("vector: expected an array");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

json problem_to_json(const ProblemInstance& problem) {
  json doc;
  doc["kind"] = std::string(to_string(problem.kind()));
  doc["lipschitz"] = problem.lipschitz();
  doc["error_bound"] = problem.error_bound();
  if (auto r = problem.lipschitz_radius()) doc["lipschitz_radius"] = *r;
  switch (problem.kind()) {
    case ProblemKind::kPlanar:
      break;
    case ProblemKind::kAffine: {
      const AffinePayload& a = problem.affine();
      doc["dimension"] = problem.dimension();
      doc["min_block"] = problem.min_block();
      doc["matrix"] = matrix_to_json(a.matrix);
      doc["offset"] = vector_to_json(a.offset);
      break;
    }
    case ProblemKind::kStronglyConvexConcave: {
      const StronglyConvexConcavePayload& s = problem.strongly_convex_concave();
      doc["min_block"] = problem.min_block();
      doc["max_block"] = problem.max_block();
      doc["a1"] = matrix_to_json(s.a1);
      doc["a2"] = matrix_to_json(s.a2);
      doc["b1"] = matrix_to_json(s.b1);
      doc["b2"] = matrix_to_json(s.b2);
      doc["coupling"] = matrix_to_json(s.coupling);
      break;
    }
    case ProblemKind::kGaussianGan: {
      const GaussianGanPayload& g = problem.gaussian_gan();
      doc["dim"] = g.dim;
      doc["batch_size"] = g.batch_size;
      doc["covariance"] = matrix_to_json(g.covariance);
      break;
    }
  }
  return doc;
}

ProblemInstance problem_from_json(const json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "planar") return make_planar();
  if (kind == "affine") {
    const auto d = doc.at("dimension").get<Eigen::Index>();
    return make_affine(matrix_from_json(doc.at("matrix"), d, d),
                       vector_from_json(doc.at("offset")), doc.at("min_block").get<int>());
  }
  if (kind == "strongly_convex_concave") {
    const auto p = doc.at("min_block").get<Eigen::Index>();
    const auto q = doc.at("max_block").get<Eigen::Index>();
    StronglyConvexConcavePayload payload;
    payload.a1 = matrix_from_json(doc.at("a1"), p, p);
    payload.a2 = matrix_from_json(doc.at("a2"), p, p);
    payload.b1 = matrix_from_json(doc.at("b1"), q, q);
    payload.b2 = matrix_from_json(doc.at("b2"), q, q);
    payload.coupling = matrix_from_json(doc.at("coupling"), p, q);
    return make_strongly_convex_concave_from(std::move(payload),
                                             doc.value("lipschitz_radius", kDefaultLipschitzRadius));
  }
  if (kind == "gaussian_gan") {
    const auto n = doc.at("dim").get<Eigen::Index>();
    return make_gaussian_gan_from(matrix_from_json(doc.at("covariance"), n, n),
                                  doc.at("batch_size").get<int>());
  }
  throw ConfigError("unknown problem kind '" + kind + "'");
}

}  // namespace dseg
