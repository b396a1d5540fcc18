#include "dseg/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "dseg/digest.hpp"
#include "dseg/errors.hpp"
#include "dseg/problem_io.hpp"
#include "dseg/random.hpp"

namespace dseg::harness {
namespace {

using nlohmann::json;

constexpr double kDefaultSigma = 0.5;
constexpr int kDefaultDimHalf = 50;
constexpr int kDefaultGanDim = 10;
constexpr int kDefaultBatch = 128;
constexpr std::uint64_t kDefaultRuns = 10;

void require_object(const json& doc, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& doc, const std::string& where,
                std::initializer_list<const char*> allowed) {
  require_object(doc, where);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : doc.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback, const std::string& where) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

double get_positive(const json& doc, const char* key, double fallback, const std::string& where) {
  const double v = get_or<double>(doc, key, fallback, where);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(where + "." + key + " must be a positive number");
  }
  return v;
}

std::uint64_t get_count(const json& doc, const char* key, std::uint64_t fallback,
                        const std::string& where) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(where + "." + key + " must be a non-negative integer");
}

// Problem section with the generator defaults filled in.
json normalize_problem(const json& section) {
  require_object(section, "problem");
  if (section.contains("instance")) {
    check_keys(section, "problem", {"instance"});
    // Round trip so that derived fields are recomputed and layout is canonical.
    return json{{"instance", problem_to_json(problem_from_json(section.at("instance")))}};
  }
  if (!section.contains("kind")) throw ConfigError("problem: needs 'kind' or 'instance'");
  const std::string kind = section.at("kind").get<std::string>();
  json out{{"kind", kind}};
  if (kind == "planar") {
    check_keys(section, "problem", {"kind"});
  } else if (kind == "bilinear") {
    check_keys(section, "problem", {"kind", "dim_half", "seed", "spectrum"});
    out["dim_half"] = get_or<int>(section, "dim_half", kDefaultDimHalf, "problem");
    out["seed"] = get_count(section, "seed", 0, "problem");
    json spectrum = section.value("spectrum", json{{"type", "banded"}});
    check_keys(spectrum, "problem.spectrum", {"type", "lo", "hi"});
    const std::string type = get_or<std::string>(spectrum, "type", "banded", "problem.spectrum");
    if (type == "gaussian") {
      if (spectrum.contains("lo") || spectrum.contains("hi")) {
        throw ConfigError("problem.spectrum: lo/hi only apply to the banded spectrum");
      }
      out["spectrum"] = json{{"type", "gaussian"}};
    } else if (type == "banded") {
      const BandedSpectrum def{};
      const double lo = get_positive(spectrum, "lo", def.lo, "problem.spectrum");
      const double hi = get_positive(spectrum, "hi", def.hi, "problem.spectrum");
      if (lo > hi) throw ConfigError("problem.spectrum: lo must not exceed hi");
      out["spectrum"] = json{{"type", "banded"}, {"lo", lo}, {"hi", hi}};
    } else {
      throw ConfigError("problem.spectrum: unknown type '" + type + "'");
    }
  } else if (kind == "strongly_convex_concave") {
    check_keys(section, "problem", {"kind", "dim_half", "seed", "radius"});
    out["dim_half"] = get_or<int>(section, "dim_half", kDefaultDimHalf, "problem");
    out["seed"] = get_count(section, "seed", 0, "problem");
    out["radius"] = get_positive(section, "radius", kDefaultLipschitzRadius, "problem");
  } else if (kind == "gaussian_gan") {
    check_keys(section, "problem", {"kind", "dim", "batch_size", "seed"});
    out["dim"] = get_or<int>(section, "dim", kDefaultGanDim, "problem");
    out["batch_size"] = get_or<int>(section, "batch_size", kDefaultBatch, "problem");
    out["seed"] = get_count(section, "seed", 0, "problem");
  } else {
    throw ConfigError("problem: unknown kind '" + kind +
                      "' (planar, bilinear, strongly_convex_concave, gaussian_gan or an instance)");
  }
  for (const char* key : {"dim_half", "dim", "batch_size"}) {
    if (out.contains(key) && out.at(key).get<int>() < 1) {
      throw ConfigError(std::string("problem.") + key + " must be >= 1");
    }
  }
  return out;
}

ProblemKind problem_kind_of(const json& normalized) {
  if (normalized.contains("instance")) {
    const std::string k = normalized.at("instance").at("kind").get<std::string>();
    if (k == "planar") return ProblemKind::kPlanar;
    if (k == "affine") return ProblemKind::kAffine;
    if (k == "strongly_convex_concave") return ProblemKind::kStronglyConvexConcave;
    return ProblemKind::kGaussianGan;
  }
  const std::string k = normalized.at("kind").get<std::string>();
  if (k == "planar") return ProblemKind::kPlanar;
  if (k == "bilinear") return ProblemKind::kAffine;
  if (k == "strongly_convex_concave") return ProblemKind::kStronglyConvexConcave;
  return ProblemKind::kGaussianGan;
}

OracleModel parse_oracle(const json& section, ProblemKind problem) {
  check_keys(section, "oracle", {"noise_kind", "sigma", "varcontrol"});
  OracleModel m;
  std::string fallback = "isotropic";
  if (problem == ProblemKind::kPlanar) fallback = "first_block";
  if (problem == ProblemKind::kGaussianGan) fallback = "minibatch_gan";
  m.noise_kind = noise_kind_from_string(get_or<std::string>(section, "noise_kind", fallback, "oracle"));
  const double sigma_default = m.noise_kind == NoiseKind::kExact ? 0.0 : kDefaultSigma;
  m.sigma = get_or<double>(section, "sigma", sigma_default, "oracle");
  m.varcontrol = get_or<double>(section, "varcontrol", 0.0, "oracle");
  if (m.sigma < 0.0 || m.varcontrol < 0.0) {
    throw ConfigError("oracle: sigma and varcontrol must be non-negative");
  }
  return m;
}

StepsizePolicy parse_policy(const json& doc, const std::string& where) {
  check_keys(doc, where, {"scale", "offset", "exponent"});
  StepsizePolicy p;
  p.scale = get_positive(doc, "scale", 1.0, where);
  p.offset = get_or<double>(doc, "offset", 0.0, where);
  p.exponent = get_or<double>(doc, "exponent", 0.0, where);
  if (p.offset < 0.0) throw ConfigError(where + ".offset must be non-negative");
  if (p.exponent < 0.0 || p.exponent > 1.0) throw ConfigError(where + ".exponent must lie in [0, 1]");
  return p;
}

json policy_json(const StepsizePolicy& p) {
  return json{{"scale", p.scale}, {"offset", p.offset}, {"exponent", p.exponent}};
}

SchedulePair parse_schedule(const json& section, ProblemKind problem, SolverKind solver) {
  require_object(section, "schedule");
  try {
    if (section.contains("gamma") || section.contains("eta")) {
      check_keys(section, "schedule", {"gamma", "eta"});
      if (!section.contains("eta")) throw ConfigError("schedule: raw form needs 'eta'");
      const StepsizePolicy eta = parse_policy(section.at("eta"), "schedule.eta");
      const StepsizePolicy gamma =
          section.contains("gamma") ? parse_policy(section.at("gamma"), "schedule.gamma") : eta;
      return SchedulePair(gamma, eta);
    }
    check_keys(section, "schedule", {"gamma1", "eta1", "offset_b", "r_gamma", "r_eta"});
    const InitialSteps def = default_initial_steps(problem, solver);
    const double g1 = get_positive(section, "gamma1", def.gamma1, "schedule");
    const double e1 = get_positive(section, "eta1", def.eta1, "schedule");
    const double b = get_or<double>(section, "offset_b", def.offset, "schedule");
    const double rg = get_or<double>(section, "r_gamma", 1.0 / 3.0, "schedule");
    const double re = get_or<double>(section, "r_eta", 2.0 / 3.0, "schedule");
    if (b < 0.0) throw ConfigError("schedule.offset_b must be non-negative");
    for (double r : {rg, re}) {
      if (r < 0.0 || r > 1.0) throw ConfigError("schedule: exponents must lie in [0, 1]");
    }
    if (solver == SolverKind::kEg) {
      const StepsizePolicy p = StepsizePolicy::from_initial(g1, b, rg);
      return SchedulePair::single(p);
    }
    return SchedulePair(StepsizePolicy::from_initial(g1, b, rg),
                        StepsizePolicy::from_initial(e1, b, re));
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
}

RecordCadence parse_cadence(const json& section) {
  check_keys(section, "record", {"mode", "per_decade", "stride"});
  RecordCadence c;
  const std::string mode = get_or<std::string>(section, "mode", "geometric", "record");
  if (mode == "geometric") {
    c.mode = RecordCadence::Mode::kGeometric;
    c.per_decade = get_or<int>(section, "per_decade", 30, "record");
    if (c.per_decade < 1) throw ConfigError("record.per_decade must be >= 1");
  } else if (mode == "every") {
    c.mode = RecordCadence::Mode::kEvery;
    c.stride = get_count(section, "stride", 1, "record");
    if (c.stride < 1) throw ConfigError("record.stride must be >= 1");
  } else {
    throw ConfigError("record.mode must be 'geometric' or 'every'");
  }
  return c;
}

json cadence_json(const RecordCadence& c) {
  if (c.mode == RecordCadence::Mode::kEvery) return json{{"mode", "every"}, {"stride", c.stride}};
  return json{{"mode", "geometric"}, {"per_decade", c.per_decade}};
}

json default_init(ProblemKind kind) {
  if (kind == ProblemKind::kPlanar) return json{{"type", "unit_first"}};
  if (kind == ProblemKind::kGaussianGan) return json{{"type", "gaussian"}, {"scale", 0.2}, {"seed", 0}};
  return json{{"type", "sphere"}, {"radius", 1.0}, {"seed", 0}};
}

json normalize_init(const json& section) {
  require_object(section, "init");
  const std::string type = get_or<std::string>(section, "type", "", "init");
  if (type == "point") {
    check_keys(section, "init", {"type", "values"});
    return json{{"type", type}, {"values", section.at("values")}};
  }
  if (type == "constant") {
    check_keys(section, "init", {"type", "value"});
    return json{{"type", type}, {"value", get_or<double>(section, "value", 0.0, "init")}};
  }
  if (type == "unit_first") {
    check_keys(section, "init", {"type"});
    return json{{"type", type}};
  }
  if (type == "gaussian") {
    check_keys(section, "init", {"type", "scale", "seed"});
    return json{{"type", type},
                {"scale", get_positive(section, "scale", 1.0, "init")},
                {"seed", get_count(section, "seed", 0, "init")}};
  }
  if (type == "sphere") {
    check_keys(section, "init", {"type", "radius", "seed"});
    return json{{"type", type},
                {"radius", get_positive(section, "radius", 1.0, "init")},
                {"seed", get_count(section, "seed", 0, "init")}};
  }
  throw ConfigError("init.type must be one of point, constant, unit_first, gaussian, sphere");
}

}  // namespace

InitialSteps default_initial_steps(ProblemKind problem, SolverKind solver) {
  const bool og = solver == SolverKind::kOg;
  switch (problem) {
    case ProblemKind::kPlanar:
    case ProblemKind::kAffine:
      return og ? InitialSteps{0.5, 0.05, 19.0} : InitialSteps{1.0, 0.1, 19.0};
    case ProblemKind::kStronglyConvexConcave:
      return InitialSteps{0.1, 0.05, 19.0};
    case ProblemKind::kGaussianGan:
      return og ? InitialSteps{0.05, 0.025, 99.0} : InitialSteps{0.5, 0.05, 49.0};
  }
  return {};
}

ExperimentConfig config_from_json(const json& doc) {
  check_keys(doc, "config",
             {"name", "problem", "oracle", "solver", "schedule", "step_bound_a", "init", "horizon",
              "runs", "base_seed", "record", "keep_iterates", "metric", "fit_window", "output"});
  ExperimentConfig c;
  c.name = get_or<std::string>(doc, "name", c.name, "config");
  if (!doc.contains("problem")) throw ConfigError("config: missing 'problem'");
  c.problem = normalize_problem(doc.at("problem"));
  const ProblemKind kind = problem_kind_of(c.problem);

  c.oracle = parse_oracle(doc.value("oracle", json::object()), kind);

  const json solver = doc.value("solver", json::object());
  check_keys(solver, "solver", {"kind", "anchored", "shgd"});
  c.solver = solver_kind_from_string(get_or<std::string>(solver, "kind", "dseg", "solver"));
  if (solver.contains("anchored")) {
    const json& a = solver.at("anchored");
    check_keys(a, "solver.anchored", {"gamma", "beta", "kappa"});
    c.anchored.gamma = get_positive(a, "gamma", c.anchored.gamma, "solver.anchored");
    c.anchored.beta = get_or<double>(a, "beta", c.anchored.beta, "solver.anchored");
    c.anchored.kappa = get_or<double>(a, "kappa", c.anchored.kappa, "solver.anchored");
    for (double v : {c.anchored.beta, c.anchored.kappa}) {
      if (!(v > 0.5 && v < 1.0)) throw ConfigError("solver.anchored: beta and kappa must lie in (1/2, 1)");
    }
  }
  if (solver.contains("shgd")) {
    const json& s = solver.at("shgd");
    check_keys(s, "solver.shgd", {"average_samples"});
    c.shgd.average_samples = get_or<bool>(s, "average_samples", false, "solver.shgd");
  }

  c.schedule = parse_schedule(doc.value("schedule", json::object()), kind, c.solver);

  if (doc.contains("step_bound_a") && doc.at("step_bound_a").is_null()) {
    c.step_bound.reset();
  } else {
    const double a = get_or<double>(doc, "step_bound_a", 0.9, "config");
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("config.step_bound_a must lie in (0, 1)");
    c.step_bound = a;
  }

  c.init = normalize_init(doc.value("init", default_init(kind)));
  c.horizon = get_count(doc, "horizon", kind == ProblemKind::kPlanar ? 100000 : 1000000, "config");
  c.runs = get_count(doc, "runs", kDefaultRuns, "config");
  c.base_seed = get_count(doc, "base_seed", 0, "config");
  if (c.horizon < 1) throw ConfigError("config.horizon must be >= 1");
  if (c.runs < 1) throw ConfigError("config.runs must be >= 1");
  c.cadence = parse_cadence(doc.value("record", json::object()));
  c.keep_iterates = get_or<bool>(doc, "keep_iterates", false, "config");

  const std::string metric_default = kind == ProblemKind::kGaussianGan ? "residual_sq" : "dist_sq";
  const std::string metric = get_or<std::string>(doc, "metric", metric_default, "config");
  if (metric == "dist_sq") {
    if (kind == ProblemKind::kGaussianGan) {
      throw ConfigError("config.metric: dist_sq is not available for gaussian_gan");
    }
    c.metric = MetricKind::kDistSq;
  } else if (metric == "residual_sq") {
    c.metric = MetricKind::kResidualSq;
  } else {
    throw ConfigError("config.metric must be 'dist_sq' or 'residual_sq'");
  }

  if (doc.contains("fit_window") && !doc.at("fit_window").is_null()) {
    const json& w = doc.at("fit_window");
    if (!w.is_array() || w.size() != 2) throw ConfigError("config.fit_window must be [lo, hi]");
    const double lo = w[0].get<double>();
    const double hi = w[1].get<double>();
    if (!(lo > 0.0 && hi > lo)) throw ConfigError("config.fit_window needs 0 < lo < hi");
    c.fit_window = std::make_pair(lo, hi);
  }
  c.output = get_or<std::string>(doc, "output", "out", "config");

  if (c.solver == SolverKind::kShgd && kind != ProblemKind::kPlanar && kind != ProblemKind::kAffine) {
    throw ConfigError("solver shgd needs a problem with a constant Jacobian (planar or bilinear)");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

json config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["name"] = c.name;
  doc["problem"] = c.problem;
  doc["oracle"] = json{{"noise_kind", std::string(to_string(c.oracle.noise_kind))},
                       {"sigma", c.oracle.sigma},
                       {"varcontrol", c.oracle.varcontrol}};
  json solver{{"kind", std::string(to_string(c.solver))}};
  if (c.solver == SolverKind::kAnchored) {
    solver["anchored"] = json{{"gamma", c.anchored.gamma}, {"beta", c.anchored.beta}, {"kappa", c.anchored.kappa}};
  }
  if (c.solver == SolverKind::kShgd) solver["shgd"] = json{{"average_samples", c.shgd.average_samples}};
  doc["solver"] = solver;
  doc["schedule"] = json{{"gamma", policy_json(c.schedule.exploration())},
                         {"eta", policy_json(c.schedule.update())}};
  doc["step_bound_a"] = c.step_bound ? json(*c.step_bound) : json(nullptr);
  doc["init"] = c.init;
  doc["horizon"] = c.horizon;
  doc["runs"] = c.runs;
  doc["base_seed"] = c.base_seed;
  doc["record"] = cadence_json(c.cadence);
  doc["keep_iterates"] = c.keep_iterates;
  doc["metric"] = c.metric == MetricKind::kDistSq ? "dist_sq" : "residual_sq";
  doc["fit_window"] = c.fit_window ? json::array({c.fit_window->first, c.fit_window->second})
                                   : json(nullptr);
  doc["output"] = c.output.string();
  return doc;
}

std::string config_digest(const ExperimentConfig& config) {
  json doc = config_to_json(config);
  doc.erase("output");
  // nlohmann::json objects are key-sorted, so dump() is canonical.
  return hex_digest(doc.dump());
}

ProblemInstance build_problem(const json& section) {
  const json p = normalize_problem(section);
  if (p.contains("instance")) return problem_from_json(p.at("instance"));
  const std::string kind = p.at("kind").get<std::string>();
  if (kind == "planar") return make_planar();
  if (kind == "bilinear") {
    const json& s = p.at("spectrum");
    BilinearSpectrum spectrum = GaussianSpectrum{};
    if (s.at("type") == "banded") {
      spectrum = BandedSpectrum{s.at("lo").get<double>(), s.at("hi").get<double>()};
    }
    return make_bilinear(p.at("dim_half").get<int>(), p.at("seed").get<std::uint64_t>(), spectrum);
  }
  if (kind == "strongly_convex_concave") {
    return make_strongly_convex_concave(p.at("dim_half").get<int>(), p.at("seed").get<std::uint64_t>(),
                                        p.at("radius").get<double>());
  }
  return make_gaussian_gan(p.at("dim").get<int>(), p.at("batch_size").get<int>(),
                           p.at("seed").get<std::uint64_t>());
}

Vector build_init(const json& section, const ProblemInstance& problem) {
  const json s = normalize_init(section);
  const std::string type = s.at("type").get<std::string>();
  const Eigen::Index d = problem.dimension();
  if (type == "point") {
    Vector v = vector_from_json(s.at("values"));
    if (v.size() != d) {
      throw ConfigError("init.values has " + std::to_string(v.size()) + " entries, problem needs " +
                        std::to_string(d));
    }
    return v;
  }
  if (type == "constant") return Vector::Constant(d, s.at("value").get<double>());
  if (type == "unit_first") return Vector::Unit(d, 0);
  CounterStream stream(s.at("seed").get<std::uint64_t>(), 0, StreamTag::kInit);
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = stream.normal();
  if (type == "gaussian") return s.at("scale").get<double>() * v;
  const double norm = v.norm();
  if (!(norm > 0.0)) return Vector::Unit(d, 0) * s.at("radius").get<double>();
  return v * (s.at("radius").get<double>() / norm);
}

}  // namespace dseg::harness
