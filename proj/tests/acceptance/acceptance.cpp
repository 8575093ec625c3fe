// One line per acceptance criterion; exit status is the number of failures.

#include "fairalloc/error.hpp"
#include "fairalloc/experiments.hpp"

#include <cstdio>
#include <cstring>
#include <exception>

using namespace fairalloc;

int main(int argc, char** argv) {
  ExperimentContext context;
  for (int k = 1; k + 1 < argc; ++k)
    if (std::strcmp(argv[k], "--out") == 0) context.output_dir = argv[k + 1];

  int failures = 0;
  for (int id = 1; id <= kCriteriaCount; ++id) {
    CriterionResult r;
    try {
      r = run_criterion(id, context);
    } catch (const std::exception& e) {
      r.id = id;
      r.title = "threw";
      r.detail = e.what();
    }
    const bool ok = r.passed && r.within_time();
    failures += !ok;
    std::printf("criterion %2d %s [%.1fs, limit %.0fs] %s: %s\n", id, ok ? "PASS" : "FAIL",
                r.seconds, r.time_limit, r.title.c_str(), r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria pass\n", kCriteriaCount - failures, kCriteriaCount);
  return failures;
}
