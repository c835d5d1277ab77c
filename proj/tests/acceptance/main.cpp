// Runs every acceptance criterion and prints one line per criterion.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "ghsurf/checks.hpp"

int main(int argc, char** argv) {
  ghsurf::CheckOptions opt;
  bool verbose = false;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "-v") verbose = true;
  if (verbose) opt.log = [](const std::string& m) { std::fprintf(stderr, "  .. %s\n", m.c_str()); };
  ghsurf::CheckRunner runner(opt);
  int failed = 0;
  for (int id = 1; id <= ghsurf::kCheckCount; ++id) {
    const auto t0 = std::chrono::steady_clock::now();
    const ghsurf::CheckResult r = runner.run(id);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  (%.0fs)\n", ghsurf::format_check(r).c_str(), s);
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  std::printf("%d/%d criteria passed\n", ghsurf::kCheckCount - failed, ghsurf::kCheckCount);
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
