#include "dseg/harness/figures.hpp"

#include <fstream>
#include <set>
#include <string>

#include <fmt/format.h>

#include "dseg/errors.hpp"

namespace dseg::harness {
namespace {

const ExperimentResult* find_solver(std::span<const ExperimentResult> results, SolverKind kind) {
  for (const ExperimentResult& r : results) {
    if (r.config.solver == kind) return &r;
  }
  return nullptr;
}

void require_solvers(std::span<const ExperimentResult> results, Figure figure,
                     std::initializer_list<SolverKind> kinds) {
  std::string missing;
  for (SolverKind k : kinds) {
    if (!find_solver(results, k)) {
      if (!missing.empty()) missing += ", ";
      missing += std::string(to_string(k));
    }
  }
  if (!missing.empty()) {
    throw ConfigError(fmt::format("{} is missing experiments for solver(s) {}; it needs {}",
                                  to_string(figure), missing, figure_requirements(figure)));
  }
}

std::string trace_csv(const ExperimentResult& r) {
  std::string out = "n,theta,phi\n";
  if (r.trajectories.empty()) return out;
  const Trajectory& t = r.trajectories.front();
  if (!t.iterates.empty() && t.iterates.front().size() != 2) {
    throw ConfigError("fig1 traces need a 2-dimensional problem");
  }
  for (std::size_t i = 0; i < t.iterates.size() && i < t.records.size(); ++i) {
    out += fmt::format("{},{:.17g},{:.17g}\n", t.records[i].n, t.iterates[i](0), t.iterates[i](1));
  }
  return out;
}

}  // namespace

std::string_view to_string(Figure figure) {
  switch (figure) {
    case Figure::kFig1:
      return "fig1";
    case Figure::kFig3:
      return "fig3";
    case Figure::kFig5:
      return "fig5";
    case Figure::kFig6:
      return "fig6";
  }
  return "unknown";
}

Figure figure_from_string(std::string_view name) {
  for (Figure f : {Figure::kFig1, Figure::kFig3, Figure::kFig5, Figure::kFig6}) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown figure '" + std::string(name) + "' (fig1, fig3, fig5, fig6)");
}

std::string figure_requirements(Figure figure) {
  switch (figure) {
    case Figure::kFig1:
      return "planar experiments with solver eg and solver dseg";
    case Figure::kFig3:
      return "one or more experiments with solver dseg";
    case Figure::kFig5:
      return "one or more experiments with solver og";
    case Figure::kFig6:
      return "bilinear experiments with solvers dseg, shgd and anchored";
  }
  return "";
}

std::vector<std::filesystem::path> emit_figure_table(std::span<const ExperimentResult> results,
                                                     Figure figure,
                                                     const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& file, const std::string& text) {
    write_text_file(out_dir / file, text);
    written.push_back(out_dir / file);
  };
  switch (figure) {
    case Figure::kFig1:
      require_solvers(results, figure, {SolverKind::kEg, SolverKind::kDseg});
      for (SolverKind k : {SolverKind::kEg, SolverKind::kDseg}) {
        const ExperimentResult& r = *find_solver(results, k);
        const std::string stem = fmt::format("fig1_{}", to_string(k));
        emit(stem + ".csv", curve_csv(r.aggregate));
        emit(stem + "_trace.csv", trace_csv(r));
      }
      break;
    case Figure::kFig3:
      require_solvers(results, figure, {SolverKind::kDseg});
      for (const ExperimentResult& r : results) {
        if (r.config.solver == SolverKind::kDseg) emit(fmt::format("fig3_{}.csv", r.config.name), curve_csv(r.aggregate));
      }
      break;
    case Figure::kFig5:
      require_solvers(results, figure, {SolverKind::kOg});
      for (const ExperimentResult& r : results) {
        if (r.config.solver != SolverKind::kOg) continue;
        emit(fmt::format("fig5_{}_optimistic.csv", r.config.name), curve_csv(r.aggregate));
        emit(fmt::format("fig5_{}_residual.csv", r.config.name),
             curve_csv(r.residual_aggregate.value_or(AggregateCurve{})));
      }
      break;
    case Figure::kFig6:
      require_solvers(results, figure, {SolverKind::kDseg, SolverKind::kShgd, SolverKind::kAnchored});
      for (SolverKind k : {SolverKind::kDseg, SolverKind::kShgd, SolverKind::kAnchored}) {
        emit(fmt::format("fig6_{}.csv", to_string(k)), curve_csv(find_solver(results, k)->aggregate));
      }
      break;
  }
  return written;
}

FigurePlan figure_plan_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("figure") || !doc.contains("experiments")) {
    throw ConfigError("figure plan: expected {\"figure\": ..., \"experiments\": [...]}");
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "figure" && key != "experiments") throw ConfigError("figure plan: unknown key '" + key + "'");
  }
  FigurePlan plan;
  plan.figure = figure_from_string(doc.at("figure").get<std::string>());
  if (!doc.at("experiments").is_array()) throw ConfigError("figure plan: experiments must be an array");
  std::set<std::string> names;
  for (const nlohmann::json& e : doc.at("experiments")) {
    ExperimentConfig c = config_from_json(e);
    if (plan.figure == Figure::kFig1) c.keep_iterates = true;
    if (!names.insert(c.name).second) throw ConfigError("figure plan: duplicate experiment name '" + c.name + "'");
    plan.experiments.push_back(std::move(c));
  }
  return plan;
}

FigurePlan load_figure_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open figure plan " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("figure plan " + path.string() + ": " + e.what());
  }
  return figure_plan_from_json(doc);
}

}  // namespace dseg::harness
