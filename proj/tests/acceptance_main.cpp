// Runs every acceptance criterion and prints one PASS/FAIL line each.
// The exit status is 0 once the report is complete; with --strict any FAIL
// also makes it 1. An exception inside a criterion is always fatal.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "rumorlab/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance report"};
  rumorlab::AcceptanceOptions options;
  bool strict = false;
  std::vector<std::string> ids;
  app.add_option("ids", ids, "Criteria to run (default: all)");
  app.add_option("--seed", options.seed, "Base seed");
  app.add_option("--jobs", options.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--strict", strict, "Exit 1 when any criterion fails");
  CLI11_PARSE(app, argc, argv);
  if (ids.empty()) ids = rumorlab::acceptance_ids();

  rumorlab::AcceptanceRunner runner(options);
  int failed = 0;
  for (const auto& id : ids) {
    try {
      const auto result = runner.run(id);
      std::printf("%s\n", result.line().c_str());
      std::fflush(stdout);
      if (!result.pass) ++failed;
    } catch (const std::exception& e) {
      std::printf("ERROR %s: %s\n", id.c_str(), e.what());
      return 2;
    }
  }
  std::printf("SUMMARY %zu passed, %d failed\n", ids.size() - failed, failed);
  return strict && failed > 0 ? 1 : 0;
}
