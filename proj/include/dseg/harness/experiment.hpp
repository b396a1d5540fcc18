#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dseg/analysis.hpp"
#include "dseg/harness/config.hpp"
#include "dseg/trajectory.hpp"

namespace dseg::harness {

struct ExperimentResult {
  ExperimentConfig config;
  std::string digest;
  std::vector<Trajectory> trajectories;  // run_id order, one per run
  // Over runs that did not diverge.
  AggregateCurve aggregate;
  // OG only: the residual iterate X_n + γ_{n−1}V̂_{n−1}.
  std::optional<AggregateCurve> residual_aggregate;
  std::optional<LogLogFit> fit;
  std::string fit_error;  // why no fit was produced, if one was requested
  double wall_clock_seconds = 0.0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t diverged_runs = 0;
};

// Runs config.runs seeded runs on `workers` threads. Run i uses the seed
// split_seed(base_seed, i); outputs do not depend on the worker count.
// Throws ConfigError when the schedule breaks γ_1 ≤ a/L on a problem with a
// global Lipschitz constant.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers = 1);

// Aggregated curve with columns n,mean,sd,runs.
std::string aggregate_csv(const AggregateCurve& curve);
// Curve with columns n,mean,sd.
std::string curve_csv(const AggregateCurve& curve);
// Per-run records: run_id,n,dist_sq,residual_sq,iterate_norm (dist_sq empty
// when unavailable).
std::string trajectories_csv(const std::vector<Trajectory>& runs);

// Digest, wall clock, oracle calls, divergences, fit and the normalized config.
nlohmann::json manifest_json(const ExperimentResult& result);

// Writes aggregate.csv, runs.csv, manifest.json (and residual.csv for OG)
// into `dir`, creating it. Returns the files written.
std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentResult& result,
                                                            const std::filesystem::path& dir);

// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dseg::harness
