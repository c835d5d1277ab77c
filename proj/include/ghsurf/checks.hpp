#pragma once

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ghsurf/pipeline.hpp"

namespace ghsurf {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::pair<std::string, double>> values;  // measured numbers
  std::string detail;
};

struct CheckOptions {
  int fibre_points = 96;         // default refinement
  int coarse_fibre_points = 48;  // refinement-stability partner
  std::vector<double> grid{16, 32, 64};
  double multi_period_d = 32;
  Logger log;
};

inline constexpr int kCheckCount = 10;
const char* check_name(int id);
// Accepts "3" or the name.
int check_id(const std::string& key);

class CheckRunner {
 public:
  explicit CheckRunner(CheckOptions opt = {});
  CheckResult run(int id);
  // Memoised full pipeline.
  const PipelineResult& pipeline(double d, int periods, int fibre_points);

 private:
  CheckOptions opt_;
  std::map<std::tuple<double, int, int>, std::unique_ptr<PipelineResult>> cache_;
};

// Pinned tolerances, by name.
std::vector<std::pair<std::string, double>> check_tolerances();

// Per-run parts of criteria 7-10 on one finished pipeline; grid-wide parts
// (sigma uniformity, refinement drift) need the CheckRunner.
std::vector<CheckResult> run_summary(const PipelineResult& P);

// One line: "PASS  3 block-minimality  key=value ..."
std::string format_check(const CheckResult& r);

}  // namespace ghsurf
