#include <gtest/gtest.h>

#include "dseg/errors.hpp"
#include "dseg/harness/config.hpp"
#include "dseg/problem_io.hpp"
#include "test_support.hpp"

namespace dseg::harness {
namespace {

using nlohmann::json;

json bilinear_doc() {
  return json::parse(R"({
    "name": "bilinear_dseg",
    "problem": {"kind": "bilinear", "dim_half": 5, "seed": 3},
    "solver": {"kind": "dseg"},
    "schedule": {"gamma1": 1.0, "eta1": 0.1, "offset_b": 19, "r_gamma": 0.3333333333333333, "r_eta": 0.6666666666666666},
    "horizon": 1000,
    "runs": 4,
    "base_seed": 9
  })");
}

TEST(Config, DefaultsFollowTheTableRows) {
  const ExperimentConfig c = config_from_json(json{{"problem", {{"kind", "bilinear"}}}});
  EXPECT_EQ(c.runs, 10u);
  EXPECT_DOUBLE_EQ(c.oracle.sigma, 0.5);
  EXPECT_EQ(c.oracle.noise_kind, NoiseKind::kAdditiveGaussianIsotropic);
  EXPECT_EQ(c.problem.at("dim_half"), 50);
  EXPECT_NEAR(c.schedule.gamma(1), 1.0, 1e-15);
  EXPECT_NEAR(c.schedule.eta(1), 0.1, 1e-15);
  EXPECT_NEAR(c.schedule.exploration().exponent, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.schedule.update().exponent, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(c.step_bound, 0.9);
  EXPECT_EQ(c.cadence.mode, RecordCadence::Mode::kGeometric);
  EXPECT_EQ(c.cadence.per_decade, 30);

  const ExperimentConfig og = config_from_json(
      json{{"problem", {{"kind", "gaussian_gan"}}}, {"solver", {{"kind", "og"}}}});
  EXPECT_EQ(og.problem.at("dim"), 10);
  EXPECT_EQ(og.problem.at("batch_size"), 128);
  EXPECT_EQ(og.oracle.noise_kind, NoiseKind::kMinibatchGan);
  EXPECT_NEAR(og.schedule.gamma(1), 0.05, 1e-15);
  EXPECT_NEAR(og.schedule.eta(1), 0.025, 1e-15);
  EXPECT_EQ(og.metric, MetricKind::kResidualSq);

  const InitialSteps scc = default_initial_steps(ProblemKind::kStronglyConvexConcave, SolverKind::kDseg);
  EXPECT_EQ(scc.gamma1, 0.1);
  EXPECT_EQ(scc.eta1, 0.05);
  EXPECT_EQ(scc.offset, 19.0);
  const InitialSteps gan = default_initial_steps(ProblemKind::kGaussianGan, SolverKind::kDseg);
  EXPECT_EQ(gan.offset, 49.0);
}

TEST(Config, RoundTripThroughNormalizedDocument) {
  const ExperimentConfig a = config_from_json(bilinear_doc());
  const ExperimentConfig b = config_from_json(config_to_json(a));
  EXPECT_EQ(config_to_json(a), config_to_json(b));
  EXPECT_EQ(config_digest(a), config_digest(b));
}

TEST(ConfigProperty, DigestIgnoresKeyOrderAndSpelledOutDefaults) {
  const ExperimentConfig base = config_from_json(bilinear_doc());
  // Rebuild the document with keys inserted in shuffled orders.
  testing::Gen g(1);
  const json doc = bilinear_doc();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : doc.items()) keys.push_back(k);
    for (std::size_t i = keys.size(); i > 1; --i) std::swap(keys[i - 1], keys[g.integer(0, static_cast<int>(i) - 1)]);
    std::string text = "{";
    for (std::size_t i = 0; i < keys.size(); ++i) {
      text += (i ? "," : "") + json(keys[i]).dump() + ":" + doc.at(keys[i]).dump();
    }
    text += "}";
    EXPECT_EQ(config_digest(config_from_json(json::parse(text))), config_digest(base));
  }
  json explicit_doc = bilinear_doc();
  explicit_doc["oracle"] = {{"noise_kind", "isotropic"}, {"sigma", 0.5}, {"varcontrol", 0.0}};
  explicit_doc["step_bound_a"] = 0.9;
  EXPECT_EQ(config_digest(config_from_json(explicit_doc)), config_digest(base));
  json other = bilinear_doc();
  other["base_seed"] = 10;
  EXPECT_NE(config_digest(config_from_json(other)), config_digest(base));
  json moved = bilinear_doc();
  moved["output"] = "elsewhere";
  EXPECT_EQ(config_digest(config_from_json(moved)), config_digest(base));
}

TEST(Config, Rejections) {
  json doc = bilinear_doc();
  doc["runs"] = 0;
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = bilinear_doc();
  doc["horizon"] = 0;
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = bilinear_doc();
  doc["colour"] = "blue";
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = bilinear_doc();
  doc["schedule"]["r_gamma"] = 0.9;
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = bilinear_doc();
  doc["problem"] = {{"kind", "torus"}};
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = bilinear_doc();
  doc["problem"] = {{"kind", "gaussian_gan"}};
  doc["metric"] = "dist_sq";
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = bilinear_doc();
  doc["solver"] = {{"kind", "shgd"}};
  doc["problem"] = {{"kind", "strongly_convex_concave"}};
  EXPECT_THROW(config_from_json(doc), ConfigError);
  EXPECT_THROW(config_from_json(json{{"runs", 3}}), ConfigError);
}

TEST(Config, PinnedInstanceMatchesGenerator) {
  const ProblemInstance generated = build_problem(json{{"kind", "bilinear"}, {"dim_half", 3}, {"seed", 2}});
  const json pinned{{"instance", problem_to_json(generated)}};
  const ProblemInstance loaded = build_problem(pinned);
  EXPECT_EQ(loaded.affine().matrix, generated.affine().matrix);
  json doc = bilinear_doc();
  doc["problem"] = pinned;
  EXPECT_NO_THROW(config_from_json(doc));
}

TEST(Config, InitKinds) {
  const ProblemInstance p = build_problem(json{{"kind", "bilinear"}, {"dim_half", 2}});
  EXPECT_EQ(build_init(json{{"type", "unit_first"}}, p), Vector::Unit(4, 0));
  EXPECT_EQ(build_init(json{{"type", "constant"}, {"value", 2.0}}, p), Vector::Constant(4, 2.0));
  EXPECT_NEAR(build_init(json{{"type", "sphere"}, {"radius", 3.0}, {"seed", 1}}, p).norm(), 3.0, 1e-12);
  EXPECT_EQ(build_init(json{{"type", "gaussian"}, {"seed", 4}}, p),
            build_init(json{{"type", "gaussian"}, {"seed", 4}}, p));
  EXPECT_THROW(build_init(json{{"type", "point"}, {"values", {1, 2}}}, p), ConfigError);
  EXPECT_THROW(build_init(json{{"type", "spiral"}}, p), ConfigError);
}

TEST(Config, RawScheduleForm) {
  json doc = bilinear_doc();
  doc["schedule"] = {{"gamma", {{"scale", 1.0}}}, {"eta", {{"scale", 2.0}, {"offset", 19}, {"exponent", 1}}}};
  const ExperimentConfig c = config_from_json(doc);
  EXPECT_DOUBLE_EQ(c.schedule.eta(1), 0.1);
  EXPECT_DOUBLE_EQ(c.schedule.gamma(1000), 1.0);
  doc["schedule"] = {{"eta", {{"scale", 0.3}}}};
  EXPECT_DOUBLE_EQ(config_from_json(doc).schedule.gamma(5), 0.3);
}

}  // namespace
}  // namespace dseg::harness
