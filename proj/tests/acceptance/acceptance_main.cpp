// Runs every acceptance criterion at full scale and prints one line per
// criterion. Exit status is nonzero when any criterion fails.
//
//   acceptance [--criteria 1,4,7] [--workers N] [--seed S]

#include "hwiener/harness/run_config.hpp"
#include "hwiener/harness/validation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace hwiener::harness;

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string criteria;
  ValidationOptions opt;
  app.add_option("--criteria", criteria, "comma separated ids (default: all)");
  app.add_option("--workers", opt.workers, "worker threads (0: hardware)");
  app.add_option("--seed", opt.seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  std::vector<int> ids = suite_criteria("all");
  if (!criteria.empty()) {
    ids.clear();
    for (double v : parse_doubles(criteria, "criteria")) ids.push_back(static_cast<int>(v));
  }
  int failed = 0;
  run_criteria(ids, opt, [&](const CriterionResult& r) {
    if (!r.passed) ++failed;
    std::printf("criterion %2d %-28s %s  runtime %.1f s  tolerance: %s\n  measured: %s\n", r.id, r.name.c_str(),
                r.passed ? "PASS" : "FAIL", r.runtime_s, r.tolerance.c_str(), r.measured.dump().c_str());
    std::fflush(stdout);
  });
  std::printf("%zu criteria, %d failed\n", ids.size(), failed);
  return failed == 0 ? 0 : 1;
}
