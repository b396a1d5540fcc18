#include "dseg/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "dseg/errors.hpp"
#include "dseg/random.hpp"

namespace dseg::harness {
namespace {

using nlohmann::json;

std::string num(double v) { return fmt::format("{:.17g}", v); }

RunSpec make_spec(const ExperimentConfig& c, const Vector& init, std::uint64_t run_id) {
  RunSpec spec;
  spec.kind = c.solver;
  spec.schedule = c.schedule;
  spec.anchored = c.anchored;
  spec.shgd = c.shgd;
  spec.init = init;
  spec.horizon = c.horizon;
  spec.run_id = run_id;
  spec.run_seed = split_seed(c.base_seed, run_id);
  spec.cadence = c.cadence;
  spec.keep_iterates = c.keep_iterates;
  spec.step_bound = c.step_bound;
  return spec;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.config = config;
  result.digest = config_digest(config);

  const ProblemInstance problem = build_problem(config.problem);
  validate(config.oracle, problem);
  const Vector init = build_init(config.init, problem);
  try {
    check_step_bound(make_spec(config, init, 0), problem);
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  if (config.metric == MetricKind::kDistSq && !problem.has_known_solutions()) {
    throw ConfigError("metric dist_sq is not available for this problem");
  }

  result.trajectories.resize(config.runs);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= config.runs) return;
      try {
        result.trajectories[i] = run(make_spec(config, init, i), problem, config.oracle);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(config.runs);
        return;
      }
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, config.runs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Trajectory> kept;
  for (const Trajectory& t : result.trajectories) {
    result.oracle_calls += t.oracle_calls;
    if (t.divergence) {
      ++result.diverged_runs;
    } else {
      kept.push_back(t);
    }
  }
  result.aggregate = aggregate_runs(kept, config.metric, RecordSet::kBase);
  if (config.solver == SolverKind::kOg) {
    result.residual_aggregate = aggregate_runs(kept, config.metric, RecordSet::kResidualIterate);
  }
  if (config.fit_window) {
    try {
      std::vector<double> n(result.aggregate.n.begin(), result.aggregate.n.end());
      result.fit = fit_loglog_slope(n, result.aggregate.mean, config.fit_window->first,
                                    config.fit_window->second);
    } catch (const ContractViolation& e) {
      result.fit_error = e.what();
    }
  }
  result.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string aggregate_csv(const AggregateCurve& curve) {
  std::string out = "n,mean,sd,runs\n";
  for (std::size_t i = 0; i < curve.n.size(); ++i) {
    out += fmt::format("{},{},{},{}\n", curve.n[i], num(curve.mean[i]), num(curve.sd[i]), curve.runs);
  }
  return out;
}

std::string curve_csv(const AggregateCurve& curve) {
  std::string out = "n,mean,sd\n";
  for (std::size_t i = 0; i < curve.n.size(); ++i) {
    out += fmt::format("{},{},{}\n", curve.n[i], num(curve.mean[i]), num(curve.sd[i]));
  }
  return out;
}

std::string trajectories_csv(const std::vector<Trajectory>& runs) {
  std::string out = "run_id,n,dist_sq,residual_sq,iterate_norm\n";
  for (const Trajectory& t : runs) {
    for (const TrajectoryRecord& r : t.records) {
      out += fmt::format("{},{},{},{},{}\n", t.run_id, r.n, r.dist_sq ? num(*r.dist_sq) : "",
                         num(r.residual_sq), num(r.iterate_norm));
    }
  }
  return out;
}

json manifest_json(const ExperimentResult& r) {
  json doc;
  doc["name"] = r.config.name;
  doc["config_digest"] = r.digest;
  doc["config"] = config_to_json(r.config);
  doc["runs"] = r.trajectories.size();
  doc["aggregated_runs"] = r.aggregate.runs;
  doc["sd_convention"] = "population";
  doc["oracle_calls"] = r.oracle_calls;
  doc["oracle_calls_per_step"] = oracle_calls_per_step(r.config.solver);
  doc["wall_clock_seconds"] = r.wall_clock_seconds;
  json divergences = json::array();
  json step_bound = json::array();
  for (const Trajectory& t : r.trajectories) {
    if (t.divergence) {
      divergences.push_back(json{{"run_id", t.run_id}, {"n", t.divergence->n}, {"norm", t.divergence->norm}});
    }
    if (!t.step_bound_ok) step_bound.push_back(t.run_id);
  }
  doc["divergences"] = divergences;
  doc["step_bound_violations"] = step_bound;
  if (r.fit) {
    doc["fit"] = json{{"slope", r.fit->slope},
                      {"intercept", r.fit->intercept},
                      {"r_squared", r.fit->r_squared},
                      {"points", r.fit->points}};
  } else if (!r.fit_error.empty()) {
    doc["fit"] = json{{"error", r.fit_error}};
  }
  if (!r.trajectories.empty()) doc["fingerprint"] = r.trajectories.front().fingerprint;
  return doc;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentResult& result,
                                                            const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& file, const std::string& text) {
    write_text_file(dir / file, text);
    written.push_back(dir / file);
  };
  emit("aggregate.csv", aggregate_csv(result.aggregate));
  if (result.residual_aggregate) emit("residual.csv", aggregate_csv(*result.residual_aggregate));
  emit("runs.csv", trajectories_csv(result.trajectories));
  emit("manifest.json", manifest_json(result).dump(2) + "\n");
  return written;
}

}  // namespace dseg::harness
