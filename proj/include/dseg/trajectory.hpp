#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dseg {

struct TrajectoryRecord {
  std::uint64_t n = 0;
  std::optional<double> dist_sq;  // absent when the problem has no known solution set
  double residual_sq = 0.0;       // ‖V(x)‖²
  double iterate_norm = 0.0;
};

struct Divergence {
  std::uint64_t n = 0;
  double norm = 0.0;
};

// Metric history of one seeded run.
struct Trajectory {
  std::uint64_t run_id = 0;
  std::string fingerprint;
  std::vector<TrajectoryRecord> records;
  // OG only: the same steps measured at the residual iterate X_n + γ_{n−1}V̂_{n−1}.
  std::vector<TrajectoryRecord> residual_records;
  // Iterate snapshots aligned with `records` when requested.
  std::vector<Eigen::VectorXd> iterates;
  std::optional<Divergence> divergence;
  std::uint64_t oracle_calls = 0;
  bool step_bound_ok = true;
};

}  // namespace dseg
