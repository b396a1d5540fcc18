#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dseg/errors.hpp"
#include "dseg/harness/acceptance.hpp"
#include "dseg/harness/config.hpp"
#include "dseg/harness/experiment.hpp"
#include "dseg/harness/figures.hpp"

namespace fs = std::filesystem;
using namespace dseg::harness;

namespace {

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

void print_summary(const ExperimentResult& r, const fs::path& dir) {
  fmt::print("{}: {} runs, {} diverged, {} oracle calls, {:.2f} s, digest {}\n", r.config.name,
             r.trajectories.size(), r.diverged_runs, r.oracle_calls, r.wall_clock_seconds, r.digest);
  if (!r.aggregate.mean.empty()) {
    fmt::print("  final mean {:.6g} at n = {}\n", r.aggregate.mean.back(), r.aggregate.n.back());
  }
  if (r.fit) {
    fmt::print("  log-log slope {:.4f} (r^2 {:.4f}, {} points)\n", r.fit->slope, r.fit->r_squared,
               r.fit->points);
  } else if (!r.fit_error.empty()) {
    fmt::print("  no fit: {}\n", r.fit_error);
  }
  fmt::print("  outputs in {}\n", dir.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic extragradient experiments"};
  app.require_subcommand(1);

  std::string run_config;
  std::optional<std::string> run_out;
  unsigned run_workers = default_workers();
  std::optional<std::uint64_t> run_seed;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment from a config file");
  run_cmd->add_option("--config", run_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run_out, "Output directory (overrides the config)");
  run_cmd->add_option("--workers", run_workers, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run_seed, "Base seed (overrides the config)");

  std::string suite;
  std::string report = "acceptance_report.json";
  unsigned accept_workers = default_workers();
  auto* accept_cmd = app.add_subcommand("accept", "Run the acceptance criteria");
  accept_cmd->add_option("--suite", suite,
                         "recursion, rates, lemma, og, fields, determinism, region or C1..C10 (default: all)");
  accept_cmd->add_option("--report", report, "Report path (JSON)");
  accept_cmd->add_option("--workers", accept_workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string which;
  std::string figure_config;
  std::string figure_out = "figures";
  unsigned figure_workers = default_workers();
  auto* figure_cmd = app.add_subcommand("figure", "Run a figure plan and write its CSV tables");
  figure_cmd->add_option("--which", which, "fig1, fig3, fig5 or fig6")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig3", "fig5", "fig6"}));
  figure_cmd->add_option("--config", figure_config, "Figure plan (JSON)")->required()->check(CLI::ExistingFile);
  figure_cmd->add_option("--out", figure_out, "Output directory");
  figure_cmd->add_option("--workers", figure_workers, "Worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      ExperimentConfig config = load_config(run_config);
      if (run_out) config.output = *run_out;
      if (run_seed) config.base_seed = *run_seed;
      const ExperimentResult result = run_experiment(config, run_workers);
      write_experiment_outputs(result, config.output);
      print_summary(result, config.output);
      return 0;
    }
    if (*accept_cmd) {
      AcceptanceOptions options;
      options.workers = accept_workers;
      const AcceptanceReport r = run_acceptance_suite(suite, report, options);
      fmt::print("{} of {} criteria passed; report written to {}\n",
                 std::count_if(r.results.begin(), r.results.end(), [](const auto& c) { return c.passed; }),
                 r.results.size(), report);
      return r.all_passed() ? 0 : 1;
    }
    if (*figure_cmd) {
      const FigurePlan plan = load_figure_plan(figure_config);
      const Figure requested = figure_from_string(which);
      if (plan.figure != requested) {
        throw dseg::ConfigError(fmt::format("plan {} is for {}, not {}", figure_config,
                                            to_string(plan.figure), which));
      }
      std::vector<ExperimentResult> results;
      for (const ExperimentConfig& c : plan.experiments) {
        results.push_back(run_experiment(c, figure_workers));
        const fs::path dir = fs::path(figure_out) / c.name;
        write_experiment_outputs(results.back(), dir);
        print_summary(results.back(), dir);
      }
      for (const fs::path& p : emit_figure_table(results, requested, figure_out)) {
        fmt::print("wrote {}\n", p.string());
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
