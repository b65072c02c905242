#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace nhemit {

struct CriterionResult {
  int id = 0;
  std::string name;
  std::vector<std::string> tags;  // modules exercised
  bool passed = false;
  double seconds = 0.0;
  double budget = 0.0;  // seconds
  std::string summary;
  nlohmann::json details;
};

struct CriterionInfo {
  int id;
  std::string name;
  std::vector<std::string> tags;
  double budget;
};

const std::vector<CriterionInfo>& criteria();

// Runs one criterion; numerical exceptions count as failures.
CriterionResult run_criterion(int id);

// Criteria whose tags include `tag` (all when empty), in id order.
std::vector<CriterionResult> run_acceptance(const std::string& tag = "");

nlohmann::json to_json(const CriterionResult& r);

}  // namespace nhemit
