#include <gtest/gtest.h>

#include "dseg/errors.hpp"
#include "dseg/harness/acceptance.hpp"

namespace dseg::harness {
namespace {

using Ids = std::vector<std::string>;

TEST(AcceptanceDispatch, Selectors) {
  EXPECT_EQ(criteria_for_selector("recursion"), (Ids{"C1", "C2"}));
  EXPECT_EQ(criteria_for_selector("rates"), (Ids{"C3", "C4", "C5"}));
  EXPECT_EQ(criteria_for_selector("lemma"), (Ids{"C6"}));
  EXPECT_EQ(criteria_for_selector("og"), (Ids{"C7"}));
  EXPECT_EQ(criteria_for_selector("fields"), (Ids{"C8"}));
  EXPECT_EQ(criteria_for_selector("determinism"), (Ids{"C9"}));
  EXPECT_EQ(criteria_for_selector("region"), (Ids{"C10"}));
  EXPECT_EQ(criteria_for_selector("").size(), 10u);
  EXPECT_EQ(criteria_for_selector("all").size(), 10u);
  EXPECT_EQ(criteria_for_selector("4"), (Ids{"C4"}));
  EXPECT_EQ(criteria_for_selector("c10"), (Ids{"C10"}));
  EXPECT_THROW(criteria_for_selector("speed"), ConfigError);
}

TEST(AcceptanceDispatch, ReportShape) {
  AcceptanceOptions quiet;
  quiet.verbose = false;
  const AcceptanceReport report = run_acceptance_suite("region", "", quiet);
  ASSERT_EQ(report.results.size(), 1u);
  const nlohmann::json doc = report.to_json();
  const auto& c = doc.at("criteria").at(0);
  EXPECT_EQ(c.at("id"), "C10");
  EXPECT_TRUE(c.contains("measured"));
  EXPECT_TRUE(c.contains("threshold"));
  EXPECT_EQ(c.at("verdict"), report.results[0].passed ? "pass" : "fail");
  EXPECT_NE(format_verdict(report.results[0]).find("C10"), std::string::npos);
}

}  // namespace
}  // namespace dseg::harness
