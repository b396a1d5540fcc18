#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "dseg/analysis.hpp"
#include "dseg/oracle.hpp"
#include "dseg/problems.hpp"
#include "dseg/schedules.hpp"
#include "dseg/solvers.hpp"

namespace dseg::harness {

// Stepsize parameters {γ₁, η₁, b} of the per-problem defaults.
struct InitialSteps {
  double gamma1 = 0.0;
  double eta1 = 0.0;
  double offset = 0.0;
};

// Defaults for DSEG (and EG/DSPEG) or OG on the bilinear, strongly
// convex-concave and GAN problems; planar shares the bilinear row.
InitialSteps default_initial_steps(ProblemKind problem, SolverKind solver);

// Experiment description. `problem` keeps the problem section verbatim: either
// {"kind": ..., generator parameters} or {"instance": <problem document>}.
struct ExperimentConfig {
  std::string name = "experiment";
  nlohmann::json problem;
  OracleModel oracle{};
  SolverKind solver = SolverKind::kDseg;
  AnchoredParams anchored{};
  ShgdOptions shgd{};
  SchedulePair schedule = SchedulePair::single(StepsizePolicy::constant(0.1));
  std::optional<double> step_bound = 0.9;
  nlohmann::json init;
  std::uint64_t horizon = 1;
  std::uint64_t runs = 10;
  std::uint64_t base_seed = 0;
  RecordCadence cadence{};
  bool keep_iterates = false;
  MetricKind metric = MetricKind::kDistSq;
  std::optional<std::pair<double, double>> fit_window;
  std::filesystem::path output = "out";
};

// Parses a config document and fills defaults. Throws ConfigError on unknown
// keys, bad values or a schedule that fails the solver preconditions.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// Normalized document with every default spelled out. Round-trips through
// config_from_json.
nlohmann::json config_to_json(const ExperimentConfig& config);

// FNV-1a digest of the normalized document, excluding the output location.
// Independent of key order and of defaulted-versus-explicit fields.
std::string config_digest(const ExperimentConfig& config);

// Builds the problem of a config section (generator or pinned instance).
ProblemInstance build_problem(const nlohmann::json& problem_section);

// Initial point from an init section:
//   {"type": "point", "values": [...]}
//   {"type": "constant", "value": c}
//   {"type": "unit_first"}                 e₁
//   {"type": "gaussian", "scale": s, "seed": k}  iid N(0, s²) coordinates
//   {"type": "sphere", "radius": r, "seed": k}   uniform direction, norm r
Vector build_init(const nlohmann::json& init_section, const ProblemInstance& problem);

}  // namespace dseg::harness
