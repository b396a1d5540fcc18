#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dseg::harness {

struct CriterionResult {
  std::string id;           // "C1".."C10"
  std::string description;
  double measured = 0.0;
  double threshold = 0.0;
  std::string comparison;   // how measured is compared with threshold, e.g. "<="
  bool passed = false;
  std::string detail;
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;
  bool all_passed() const;
  nlohmann::json to_json() const;
};

struct AcceptanceOptions {
  unsigned workers = 1;
  // Print each verdict line as soon as the criterion finishes.
  bool verbose = true;
};

// Criterion ids selected by a suite name: recursion (C1, C2), rates (C3-C5),
// lemma (C6), og (C7), fields (C8), determinism (C9), region (C10), a single
// id such as "C4" or "4", or "" / "all" for everything. ConfigError otherwise.
std::vector<std::string> criteria_for_selector(std::string_view selector);

CriterionResult run_criterion(std::string_view id, const AcceptanceOptions& options);

// Runs the selected criteria in id order and, if `report_path` is non-empty,
// writes the JSON report there.
AcceptanceReport run_acceptance_suite(std::string_view selector,
                                      const std::filesystem::path& report_path,
                                      const AcceptanceOptions& options = {});

// "[PASS] C3 <description>: measured ... <= threshold ... (detail)"
std::string format_verdict(const CriterionResult& result);

}  // namespace dseg::harness
