#pragma once

#include <json.hpp>

#include "dseg/problems.hpp"

namespace dseg {

// {"kind": ..., parameter arrays flattened row-major}. Derived constants (L, τ)
// are written for reference and recomputed on load.
nlohmann::json problem_to_json(const ProblemInstance& problem);
ProblemInstance problem_from_json(const nlohmann::json& doc);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& flat, Eigen::Index rows, Eigen::Index cols);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& arr);

}  // namespace dseg
