#pragma once

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cle {

// Desk-scale acceptance checks 1-11. The tolerances are fixed; the sizes below
// default to the pinned values and may be reduced for smoke runs.
struct CriteriaSettings {
  std::uint64_t seed = 20240601;

  std::size_t passage_paths = 1'000'000;    // 1
  std::size_t moment_paths = 100'000;       // 2
  std::size_t coupling_trials = 20'000;     // 3, plain counting
  std::size_t weighted_trials = 2'000'000;  // 3, forced-failure estimator
  std::size_t ks_samples = 100'000;         // 3
  std::size_t oracle_configs = 200;         // 4
  int oracle_radius = 12;
  int survey_radius = 512;  // 5, 6, 11
  std::size_t survey_replicas = 500;
  int survey_directions = 6;
  int field_radius = 1024;  // 7, 8, 9
  std::size_t calibration_replicas = 200;
  std::size_t decay_replicas = 400;
  std::size_t cauchy_replicas = 200;
  std::size_t equal_replicas = 200;
  std::size_t sobolev_fields = 100;  // 10

  nlohmann::json to_json() const;
  // Unknown keys are a ConfigurationError naming the path under `where`.
  static CriteriaSettings from_json(const nlohmann::json& j, std::string_view where = "criteria");
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string summary;  // one line: the numbers compared against the thresholds
  nlohmann::json numbers;
  double seconds = 0;

  nlohmann::json to_json() const;
  static CriterionResult from_json(const nlohmann::json& j);
};

constexpr int kCriterionCount = 11;

std::string_view criterion_name(int id);
// By number ("7") or name ("field_decay"); ConfigurationError otherwise.
int criterion_id(std::string_view text);

// Runs criteria, sharing the nesting survey between 5, 6 and 11.
class CriteriaRunner {
 public:
  explicit CriteriaRunner(CriteriaSettings settings);
  ~CriteriaRunner();
  CriteriaRunner(const CriteriaRunner&) = delete;
  CriteriaRunner& operator=(const CriteriaRunner&) = delete;

  const CriteriaSettings& settings() const { return settings_; }

  // An exception inside a check is reported as a failed result.
  CriterionResult run(int id);

 private:
  struct Survey;
  const Survey& survey();

  CriterionResult renewal_exactness();
  CriterionResult tau_moments();
  CriterionResult coupling();
  CriterionResult topology_oracle();
  CriterionResult conesting_green();
  CriterionResult mean_loop_count();
  CriterionResult field_decay();
  CriterionResult cauchy();
  CriterionResult fields_equal();
  CriterionResult sobolev();
  CriterionResult tail_bounds();

  CriteriaSettings settings_;
  std::unique_ptr<Survey> survey_;
};

// "PASS  7 field_decay  <summary>"
std::string format_result_line(const CriterionResult& r);

}  // namespace cle
