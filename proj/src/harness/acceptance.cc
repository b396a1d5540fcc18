#include "dseg/harness/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "dseg/analysis.hpp"
#include "dseg/errors.hpp"
#include "dseg/harness/experiment.hpp"
#include "dseg/problems.hpp"
#include "dseg/random.hpp"
#include "dseg/schedules.hpp"

namespace dseg::harness {
namespace {

using nlohmann::json;

constexpr std::uint64_t kAcceptanceSeed = 1;

CriterionResult make_result(std::string id, std::string description, double measured,
                            double threshold, std::string comparison, bool passed,
                            std::string detail) {
  return CriterionResult{std::move(id), std::move(description), measured, threshold,
                         std::move(comparison), passed, std::move(detail)};
}

double final_mean(const AggregateCurve& curve) {
  if (curve.mean.empty()) throw NumericalError("acceptance: empty aggregate curve");
  return curve.mean.back();
}

json planar_base(const std::string& name, const std::string& solver) {
  return json{{"name", name},
              {"problem", {{"kind", "planar"}}},
              {"oracle", {{"noise_kind", "first_block"}, {"sigma", 0.5}}},
              {"solver", {{"kind", solver}}},
              {"init", {{"type", "unit_first"}}},
              {"base_seed", kAcceptanceSeed}};
}

// Prop. 1: EG keeps a non-vanishing energy on the planar game.
CriterionResult criterion_eg_nonconvergence(const AcceptanceOptions& opt) {
  json doc = planar_base("accept_eg_planar", "eg");
  doc["schedule"] = {{"gamma", {{"scale", 1.0}, {"offset", 0.0}, {"exponent", 0.6}}},
                     {"eta", {{"scale", 1.0}, {"offset", 0.0}, {"exponent", 0.6}}}};
  doc["step_bound_a"] = nullptr;
  doc["horizon"] = 100000;
  doc["runs"] = 100;
  const ExperimentConfig config = config_from_json(doc);
  const ExperimentResult result = run_experiment(config, opt.workers);
  const double mean = final_mean(result.aggregate);
  const auto energy = energy_recursion_eg(config.schedule.exploration(), 0.25, 1.0, config.horizon);
  const double predicted = energy.back();
  const double rel = std::abs(mean - predicted) / predicted;
  const double se = result.aggregate.sd.back() / std::sqrt(static_cast<double>(result.aggregate.runs - 1));
  const bool floor_ok = mean >= 0.5 * 0.25;
  return make_result("C1", "EG on planar game does not converge (gamma_n = n^-0.6)", rel, 0.1, "<=",
                     floor_ok && rel <= 0.1 && result.diverged_runs == 0,
                     fmt::format("mean dist^2 {:.6g} (need >= 0.125), recursion {:.6g}, standard error "
                                 "{:.3g}, runs {}, diverged {}",
                                 mean, predicted, se, result.aggregate.runs, result.diverged_runs));
}

// Prop. 1': DSEG with an aggressive exploration step converges on the same game.
CriterionResult criterion_dseg_convergence(const AcceptanceOptions& opt) {
  json doc = planar_base("accept_dseg_planar", "dseg");
  doc["schedule"] = {{"gamma", {{"scale", 1.0}, {"offset", 0.0}, {"exponent", 0.1}}},
                     {"eta", {{"scale", 1.0}, {"offset", 0.0}, {"exponent", 0.9}}}};
  doc["step_bound_a"] = nullptr;
  doc["horizon"] = 100000;
  doc["runs"] = 100;
  const ExperimentConfig config = config_from_json(doc);
  const ExperimentResult result = run_experiment(config, opt.workers);
  const double mean = final_mean(result.aggregate);
  const auto energy = energy_recursion_dseg(config.schedule, 0.25, 1.0, config.horizon);
  const double predicted = energy.back();
  const double se = result.aggregate.sd.back() / std::sqrt(static_cast<double>(result.aggregate.runs - 1));
  const double z = se > 0.0 ? std::abs(mean - predicted) / se : (mean == predicted ? 0.0 : INFINITY);
  return make_result("C2", "DSEG on planar game converges (gamma_n = n^-0.1, eta_n = n^-0.9)", z, 3.0,
                     "<=", mean <= 0.05 && z <= 3.0 && result.diverged_runs == 0,
                     fmt::format("mean dist^2 {:.6g} (need <= 0.05), recursion {:.6g}, standard "
                                 "error {:.3g}",
                                 mean, predicted, se));
}

json bilinear_base(const std::string& name) {
  return json{{"name", name},
              {"problem", {{"kind", "bilinear"}, {"dim_half", 50}, {"seed", kAcceptanceSeed}}},
              {"oracle", {{"noise_kind", "isotropic"}, {"sigma", 0.5}}},
              {"solver", {{"kind", "dseg"}}},
              {"init", {{"type", "sphere"}, {"radius", 1.0}, {"seed", kAcceptanceSeed}}},
              {"horizon", 1000000},
              {"runs", 10},
              {"base_seed", kAcceptanceSeed},
              {"fit_window", {1e4, 1e6}}};
}

// Affine O(1/n): constant γ, η_n = η/(n + b) with η above the theorem's threshold.
CriterionResult criterion_affine_rate(const AcceptanceOptions& opt) {
  json doc = bilinear_base("accept_bilinear_affine_rate");
  const ProblemInstance problem = build_problem(doc["problem"]);
  const double a = 0.9;
  const double gamma = 1.0;
  const double offset = 19.0;
  const double tau = problem.error_bound();
  const double threshold_eta = 1.0 / (tau * tau * gamma * (1.0 - a * a));
  const double eta = 1.2 * threshold_eta;
  doc["schedule"] = {{"gamma", {{"scale", gamma}, {"offset", 0.0}, {"exponent", 0.0}}},
                     {"eta", {{"scale", eta}, {"offset", offset}, {"exponent", 1.0}}}};
  doc["step_bound_a"] = a;
  const bool side_ok = offset > eta / gamma;
  const ExperimentResult result = run_experiment(config_from_json(doc), opt.workers);
  if (!result.fit) {
    return make_result("C3", "affine O(1/n) rate on 50+50 bilinear game", NAN, -0.8, "<=", false,
                       "no fit: " + result.fit_error);
  }
  const double slope = result.fit->slope;
  return make_result("C3", "affine O(1/n) rate on 50+50 bilinear game", slope, -0.8, "<=",
                     slope <= -0.8 && side_ok,
                     fmt::format("L {:.4g}, tau {:.4g}, eta {:.4g} (> {:.4g}), b > eta/gamma: {}, "
                                 "r^2 {:.4f}, diverged {}",
                                 problem.lipschitz(), tau, eta, threshold_eta, side_ok,
                                 result.fit->r_squared, result.diverged_runs));
}

// Power-law schedule with exponents (1/3, 2/3).
CriterionResult criterion_general_rate(const AcceptanceOptions& opt) {
  json doc = bilinear_base("accept_bilinear_general_rate");
  doc["schedule"] = {{"gamma1", 1.0}, {"eta1", 0.1}, {"offset_b", 19.0}, {"r_gamma", 1.0 / 3.0},
                     {"r_eta", 2.0 / 3.0}};
  const ExperimentResult result = run_experiment(config_from_json(doc), opt.workers);
  if (!result.fit) {
    return make_result("C4", "O(1/n^(1/3)) upper bound with exponents (1/3, 2/3)", NAN, -0.25, "<=",
                       false, "no fit: " + result.fit_error);
  }
  const double slope = result.fit->slope;
  return make_result("C4", "O(1/n^(1/3)) upper bound with exponents (1/3, 2/3)", slope, -0.25, "<=",
                     slope <= -0.25,
                     fmt::format("r^2 {:.4f}, diverged {}", result.fit->r_squared, result.diverged_runs));
}

// Constant stepsizes settle inside the predicted noise floor.
CriterionResult criterion_noise_floor(const AcceptanceOptions& opt) {
  json doc = planar_base("accept_planar_floor", "dseg");
  doc["schedule"] = {{"gamma", {{"scale", 0.45}}}, {"eta", {{"scale", 0.1}}}};
  doc["horizon"] = 100000;
  doc["runs"] = 10;
  doc["record"] = {{"mode", "every"}, {"stride", 10}};
  const ExperimentConfig config = config_from_json(doc);
  const ExperimentResult result = run_experiment(config, opt.workers);
  const ProblemInstance problem = build_problem(config.problem);
  RateQuery q;
  q.gamma = 0.45;
  q.eta = 0.1;
  q.sigma2 = noise_variance_bound(config.oracle, problem);
  q.a = 0.9;
  q.theorem = RateTheorem::kAffine;
  const RatePrediction p = predict_rate_constants(problem, q);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < result.aggregate.n.size(); ++i) {
    if (result.aggregate.n[i] >= config.horizon / 10) {
      sum += result.aggregate.mean[i];
      ++count;
    }
  }
  const double settled = sum / static_cast<double>(count);
  return make_result("C5", "constant-stepsize noise floor on planar game", settled,
                     2.0 * p.predicted_floor, "<=", settled <= 2.0 * p.predicted_floor,
                     fmt::format("predicted floor M/Lambda {:.6g}, {} records in final decade",
                                 p.predicted_floor, count));
}

ProblemInstance random_monotone_affine(int dim, std::uint64_t seed) {
  CounterStream s(seed, static_cast<std::uint64_t>(dim), StreamTag::kProblem);
  const int half = dim / 2;
  Matrix b(dim, half), c(dim, dim);
  for (int j = 0; j < half; ++j)
    for (int i = 0; i < dim; ++i) b(i, j) = s.normal();
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) c(i, j) = s.normal();
  const Matrix m = (b * b.transpose() + c - c.transpose()) / static_cast<double>(dim);
  Vector x0(dim);
  for (int i = 0; i < dim; ++i) x0(i) = s.normal();
  return make_affine(m, -m * x0, half);
}

// Monte-Carlo check of the one-step descent inequality.
CriterionResult criterion_descent_lemma(const AcceptanceOptions&) {
  std::vector<ProblemInstance> problems;
  problems.push_back(make_planar());
  for (int d : {4, 6, 8}) problems.push_back(random_monotone_affine(d, kAcceptanceSeed));
  constexpr int kConfigs = 100;
  constexpr std::uint64_t kSamples = 1000000;
  int passed = 0, total = 0;
  double worst = -INFINITY;
  std::string worst_where;
  for (std::size_t p = 0; p < problems.size(); ++p) {
    const ProblemInstance& problem = problems[p];
    const int d = problem.dimension();
    for (int k = 0; k < kConfigs; ++k) {
      CounterStream s(kAcceptanceSeed, p * 1000 + static_cast<std::uint64_t>(k), StreamTag::kMonteCarlo);
      Vector dir(d);
      for (int i = 0; i < d; ++i) dir(i) = s.normal();
      Vector anchor(d);
      for (int i = 0; i < d; ++i) anchor(i) = s.normal();
      const Vector base = project_to_solution(problem, anchor);
      const Vector point = base + (3.0 * s.uniform()) * dir.normalized();
      const double gamma = (0.05 + 0.85 * s.uniform()) / problem.lipschitz();
      const double eta = (0.05 + 0.95 * s.uniform()) * gamma;
      OracleModel oracle;
      oracle.noise_kind = (problem.kind() == ProblemKind::kPlanar && k % 2 == 0)
                              ? NoiseKind::kAdditiveGaussianFirstBlockOnly
                              : NoiseKind::kAdditiveGaussianIsotropic;
      oracle.sigma = s.uniform();
      const std::uint64_t seed = split_seed(kAcceptanceSeed, p * 1000 + static_cast<std::uint64_t>(k));
      const DescentCheck check = check_descent_lemma(problem, oracle, point, gamma, eta, kSamples, seed);
      ++total;
      if (check.passes) ++passed;
      const double z = check.standard_error > 0.0 ? -check.margin / check.standard_error
                                                  : (check.margin >= 0.0 ? -INFINITY : INFINITY);
      if (z > worst) {
        worst = z;
        worst_where = fmt::format("problem {} (d = {}), config {}", p, d, k);
      }
    }
  }
  return make_result("C6", "one-step descent inequality, Monte-Carlo with 1e6 samples",
                     static_cast<double>(passed), static_cast<double>(total), ">=", passed == total,
                     fmt::format("{} of {} configurations pass; largest (lhs - rhs)/SE {:.3g} at {}",
                                 passed, total, worst, worst_where));
}

// OG: the residual iterate converges while the optimistic iterate stalls.
CriterionResult criterion_og_residual(const AcceptanceOptions& opt) {
  json doc = planar_base("accept_planar_og", "og");
  doc["schedule"] = {{"gamma1", 0.5}, {"eta1", 0.05}, {"offset_b", 19.0}, {"r_gamma", 0.0}, {"r_eta", 1.0}};
  doc["horizon"] = 100000;
  doc["runs"] = 10;
  const ExperimentResult result = run_experiment(config_from_json(doc), opt.workers);
  const double optimistic = final_mean(result.aggregate);
  const double residual = final_mean(*result.residual_aggregate);
  const double ratio = residual / optimistic;
  return make_result("C7", "OG residual iterate beats optimistic iterate at n = 1e5", ratio, 0.1, "<=",
                     ratio <= 0.1,
                     fmt::format("residual {:.6g}, optimistic {:.6g}", residual, optimistic));
}

double fd_relative_error(const ProblemInstance& problem, const Vector& x) {
  const Vector field = evaluate_field(problem, x);
  const int p = problem.min_block();
  Vector fd(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const double up = saddle_value(problem, probe);
    probe(i) = x(i) - h;
    const double down = saddle_value(problem, probe);
    probe(i) = x(i);
    const double grad = (up - down) / (2.0 * h);
    fd(i) = i < p ? grad : -grad;
  }
  return (fd - field).norm() / std::max(field.norm(), 1e-12);
}

// Analytic fields against central differences of the value function.
CriterionResult criterion_fields(const AcceptanceOptions&) {
  const ProblemInstance scc = make_strongly_convex_concave(50, kAcceptanceSeed);
  const ProblemInstance gan = make_gaussian_gan(10, 128, kAcceptanceSeed);
  double worst = 0.0;
  std::string where;
  int index = 0;
  for (const ProblemInstance* problem : {&scc, &gan}) {
    const int d = problem->dimension();
    for (int k = 0; k < 100; ++k) {
      CounterStream s(kAcceptanceSeed, static_cast<std::uint64_t>(index * 1000 + k), StreamTag::kInit);
      Vector x(d);
      for (int i = 0; i < d; ++i) x(i) = s.normal();
      x *= (0.1 + 2.9 * s.uniform()) / std::sqrt(static_cast<double>(d));
      const double err = fd_relative_error(*problem, x);
      if (err > worst) {
        worst = err;
        where = fmt::format("{} point {}", to_string(problem->kind()), k);
      }
    }
    ++index;
  }
  return make_result("C8", "analytic fields match finite differences (100 points per problem)", worst,
                     1e-4, "<", worst < 1e-4, "worst at " + where);
}

std::vector<std::string> experiment_csvs(const ExperimentResult& r) {
  std::vector<std::string> out{aggregate_csv(r.aggregate), trajectories_csv(r.trajectories)};
  if (r.residual_aggregate) out.push_back(aggregate_csv(*r.residual_aggregate));
  return out;
}

// Same CSV bytes with 1 and 8 workers.
CriterionResult criterion_determinism(const AcceptanceOptions&) {
  std::vector<json> docs;
  {
    json doc = planar_base("accept_determinism_planar", "dseg");
    doc["schedule"] = {{"gamma", {{"scale", 0.9}, {"exponent", 0.1}}},
                       {"eta", {{"scale", 0.5}, {"exponent", 0.9}}}};
    doc["horizon"] = 20000;
    doc["runs"] = 8;
    docs.push_back(doc);
  }
  {
    json doc = bilinear_base("accept_determinism_bilinear_og");
    doc["problem"]["dim_half"] = 10;
    doc["solver"] = {{"kind", "og"}};
    doc["horizon"] = 10000;
    doc["runs"] = 8;
    doc.erase("fit_window");
    docs.push_back(doc);
  }
  {
    json doc{{"name", "accept_determinism_gan"},
             {"problem", {{"kind", "gaussian_gan"}, {"dim", 3}, {"batch_size", 16}, {"seed", kAcceptanceSeed}}},
             {"solver", {{"kind", "dseg"}}},
             {"horizon", 2000},
             {"runs", 8},
             {"base_seed", kAcceptanceSeed}};
    docs.push_back(doc);
  }
  int mismatches = 0, files = 0;
  std::string detail;
  for (const json& doc : docs) {
    const ExperimentConfig config = config_from_json(doc);
    const auto serial = experiment_csvs(run_experiment(config, 1));
    const auto parallel = experiment_csvs(run_experiment(config, 8));
    for (std::size_t i = 0; i < serial.size(); ++i) {
      ++files;
      if (serial[i] != parallel[i]) {
        ++mismatches;
        detail += fmt::format(" {}#{}", config.name, i);
      }
    }
  }
  return make_result("C9", "1 vs 8 workers give byte-identical CSV output",
                     static_cast<double>(mismatches), 0.0, "==", mismatches == 0,
                     fmt::format("{} files compared{}", files, detail.empty() ? "" : "; differ:" + detail));
}

// Partial sums S(N) = Σ_{n≤N} n^(-k/20) for N = 1e5, 1e6, 1e7 and k = 0..60,
// from one pass of repeated multiplication.
std::map<int, std::array<double, 3>> lattice_partial_sums(int max_k) {
  std::vector<double> sums(static_cast<std::size_t>(max_k) + 1, 0.0);
  std::map<int, std::array<double, 3>> out;
  std::array<std::uint64_t, 3> marks{100000, 1000000, 10000000};
  std::size_t mark = 0;
  for (std::uint64_t n = 1; n <= marks.back(); ++n) {
    const double base = std::pow(static_cast<double>(n), -0.05);
    double term = 1.0;
    for (int k = 0; k <= max_k; ++k) {
      sums[static_cast<std::size_t>(k)] += term;
      term *= base;
    }
    if (n == marks[mark]) {
      for (int k = 0; k <= max_k; ++k) out[k][mark] = sums[static_cast<std::size_t>(k)];
      ++mark;
    }
  }
  return out;
}

bool probe_diverges(const std::array<double, 3>& s) {
  return (s[2] - s[1]) >= (s[1] - s[0]);
}

// Exponent-region classifier against direct series probing.
CriterionResult criterion_region(const AcceptanceOptions&) {
  const auto sums = lattice_partial_sums(60);
  int agree = 0, tested = 0, skipped = 0;
  std::string first_mismatch;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double rg = i / 20.0;
      const double re = j / 20.0;
      const double dist = std::min({std::abs(rg + re - 1.0) / std::sqrt(2.0), std::abs(re - 0.5),
                                    std::abs(2.0 * rg + re - 1.0) / std::sqrt(5.0),
                                    std::abs(rg - re) / std::sqrt(2.0)});
      if (dist < 0.02) {
        ++skipped;
        continue;
      }
      ++tested;
      const StepsizePolicy gamma{1.0, 0.0, rg};
      const StepsizePolicy eta{1.0, 0.0, re};
      const bool product_diverges = probe_diverges(sums.at(i + j));
      const bool eta_sq_converges = !probe_diverges(sums.at(2 * j));
      const bool mixed_converges = !probe_diverges(sums.at(2 * i + j));
      const bool ordered = gamma.value(10000000) >= eta.value(10000000);
      const bool probe_ok = product_diverges && eta_sq_converges && mixed_converges && ordered;
      const Assumption4Verdict v = classify_assumption4(rg, re);
      if (v.admissible == probe_ok) {
        ++agree;
      } else if (first_mismatch.empty()) {
        first_mismatch = fmt::format(" first mismatch at ({}, {})", rg, re);
      }
    }
  }
  return make_result("C10", "exponent-region classifier agrees with series probing on 21x21 grid",
                     static_cast<double>(agree), static_cast<double>(tested), ">=", agree == tested,
                     fmt::format("{} of {} grid points agree, {} boundary points skipped{}", agree, tested,
                                 skipped, first_mismatch));
}

using CriterionFn = std::function<CriterionResult(const AcceptanceOptions&)>;

const std::vector<std::pair<std::string, CriterionFn>>& registry() {
  static const std::vector<std::pair<std::string, CriterionFn>> r{
      {"C1", criterion_eg_nonconvergence}, {"C2", criterion_dseg_convergence},
      {"C3", criterion_affine_rate},       {"C4", criterion_general_rate},
      {"C5", criterion_noise_floor},       {"C6", criterion_descent_lemma},
      {"C7", criterion_og_residual},       {"C8", criterion_fields},
      {"C9", criterion_determinism},       {"C10", criterion_region},
  };
  return r;
}

}  // namespace

bool AcceptanceReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
}

json AcceptanceReport::to_json() const {
  json criteria = json::array();
  for (const CriterionResult& r : results) {
    criteria.push_back(json{{"id", r.id},
                            {"description", r.description},
                            {"measured", std::isfinite(r.measured) ? json(r.measured) : json(nullptr)},
                            {"threshold", r.threshold},
                            {"comparison", r.comparison},
                            {"verdict", r.passed ? "pass" : "fail"},
                            {"detail", r.detail}});
  }
  return json{{"criteria", criteria}, {"all_passed", all_passed()}};
}

std::vector<std::string> criteria_for_selector(std::string_view selector) {
  static const std::map<std::string, std::vector<std::string>, std::less<>> groups{
      {"recursion", {"C1", "C2"}}, {"rates", {"C3", "C4", "C5"}}, {"lemma", {"C6"}},
      {"og", {"C7"}},              {"fields", {"C8"}},            {"determinism", {"C9"}},
      {"region", {"C10"}},
  };
  if (selector.empty() || selector == "all") {
    std::vector<std::string> all;
    for (const auto& [id, fn] : registry()) all.push_back(id);
    return all;
  }
  if (auto it = groups.find(selector); it != groups.end()) return it->second;
  std::string id(selector);
  if (!id.empty() && (id[0] == 'c')) id[0] = 'C';
  if (!id.empty() && id[0] != 'C') id = "C" + id;
  for (const auto& [known, fn] : registry()) {
    if (known == id) return {id};
  }
  throw ConfigError("unknown acceptance suite '" + std::string(selector) +
                    "' (recursion, rates, lemma, og, fields, determinism, region, C1..C10)");
}

CriterionResult run_criterion(std::string_view id, const AcceptanceOptions& options) {
  for (const auto& [known, fn] : registry()) {
    if (known == id) {
      try {
        return fn(options);
      } catch (const std::exception& e) {
        return make_result(known, "criterion raised an error", NAN, NAN, "", false, e.what());
      }
    }
  }
  throw ConfigError("unknown criterion '" + std::string(id) + "'");
}

AcceptanceReport run_acceptance_suite(std::string_view selector, const std::filesystem::path& report_path,
                                      const AcceptanceOptions& options) {
  AcceptanceReport report;
  for (const std::string& id : criteria_for_selector(selector)) {
    report.results.push_back(run_criterion(id, options));
    if (options.verbose) {
      std::fputs((format_verdict(report.results.back()) + "\n").c_str(), stdout);
      std::fflush(stdout);
    }
  }
  if (!report_path.empty()) write_text_file(report_path, report.to_json().dump(2) + "\n");
  return report;
}

std::string format_verdict(const CriterionResult& r) {
  return fmt::format("[{}] {} {}: measured {:.6g} {} threshold {:.6g} ({})", r.passed ? "PASS" : "FAIL",
                     r.id, r.description, r.measured, r.comparison, r.threshold, r.detail);
}

}  // namespace dseg::harness
