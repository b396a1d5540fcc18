#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dseg/harness/experiment.hpp"

namespace dseg::harness {

enum class Figure { kFig1, kFig3, kFig5, kFig6 };

std::string_view to_string(Figure figure);
Figure figure_from_string(std::string_view name);

// Experiments a figure needs, as a readable list for error messages.
std::string figure_requirements(Figure figure);

// Writes one CSV per curve into `out_dir` and returns the paths:
//   fig1  fig1_<solver>.csv {n,mean,sd} and fig1_<solver>_trace.csv
//         {n,theta,phi} from run 0, for solvers eg and dseg
//   fig3  fig3_<name>.csv per experiment
//   fig5  fig5_<name>_optimistic.csv and fig5_<name>_residual.csv per OG experiment
//   fig6  fig6_dseg.csv, fig6_shgd.csv, fig6_anchored.csv
// Experiments with no recorded trajectories give header-only files. Throws
// ConfigError listing the missing experiments when requirements are not met.
std::vector<std::filesystem::path> emit_figure_table(std::span<const ExperimentResult> results,
                                                     Figure figure,
                                                     const std::filesystem::path& out_dir);

// Figure plan document: {"figure": "fig3", "experiments": [config, ...]}.
// Fig. 1 plans get keep_iterates forced on.
struct FigurePlan {
  Figure figure = Figure::kFig3;
  std::vector<ExperimentConfig> experiments;
};
FigurePlan figure_plan_from_json(const nlohmann::json& doc);
FigurePlan load_figure_plan(const std::filesystem::path& path);

}  // namespace dseg::harness
