#pragma once

// The acceptance criteria as runnable checks, shared by `hwiener validate`
// and the acceptance test binary.
//
// Report records are split in two: criterion records hold only seeded,
// deterministic content; timing records hold wall-clock runtimes. Reports
// compared for determinism use the criterion records alone.

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hwiener::harness {

struct ValidationOptions {
  std::uint64_t seed = 20261016;
  unsigned workers = 0;
  /// Multiplies every Monte Carlo path count (statistical criteria only).
  double path_scale = 1.0;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  nlohmann::json measured = nlohmann::json::object();
  std::string tolerance;
  double runtime_limit_s = 0.0;  // 0: none
  double runtime_s = 0.0;
};

/// Criterion ids of a suite: all, kernel, sampler, measure, fk, determinism.
std::vector<int> suite_criteria(const std::string& suite);

constexpr int kCriterionCount = 13;

CriterionResult run_criterion(int id, const ValidationOptions& opt);

std::vector<CriterionResult> run_criteria(const std::vector<int>& ids, const ValidationOptions& opt,
                                          const std::function<void(const CriterionResult&)>& on_done = {});

nlohmann::json criterion_record(const CriterionResult& r);
nlohmann::json timing_record(const CriterionResult& r);

/// JSON lines of the criterion records, in order.
std::string report_body(const std::vector<CriterionResult>& results);

}  // namespace hwiener::harness
