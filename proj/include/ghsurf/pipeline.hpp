#pragma once

#include <functional>
#include <map>
#include <string>

#include "ghsurf/analysis.hpp"

namespace ghsurf {

struct PipelineConfig {
  double d = 32.0;
  int periods = 1;
  double min_d = 8.0;
  MeshSpec mesh;
  SolverConfig solver;
  int eigenpairs = 0;  // 0: 8 for one period, 12 for two
  bool gauge_cache = false;  // build the radial-gauge cache with the space
  std::string cache_dir;     // where the cache is persisted; empty: memory only
};

struct PipelineResult {
  PipelineConfig config;
  GHSpace space;
  InitialSurface surface;
  NewtonReport newton;
  SolvedSurface solved;
  JacobiSystem jacobi;
  NormalField killing;
  SpectralReport spectrum;
  WitnessReport witness;
  TopologyReport topology;
  double symmetry_defect = 0.0;
  std::map<std::string, double> seconds;  // per stage
};

// Stage failures are rethrown as DomainError("<stage>: <message>").
struct StageError : DomainError {
  std::string stage;
  StageError(std::string st, const std::string& what) : DomainError(st + ": " + what), stage(std::move(st)) {}
};

using Logger = std::function<void(const std::string&)>;

GHSpace pipeline_space(const PipelineConfig& cfg);
InitialSurface pipeline_surface(const GHSpace& space, const PipelineConfig& cfg);
// Full build -> solve -> spectrum -> report chain; `upto` stops after the named stage.
PipelineResult run_pipeline(const PipelineConfig& cfg, const Logger& log = nullptr, const std::string& upto = "report");
// Same chain filling `r` in place, so completed stages survive a StageError.
void run_pipeline_into(PipelineResult& r, const PipelineConfig& cfg, const Logger& log = nullptr,
                       const std::string& upto = "report");
inline const char* kStages[] = {"build-space", "build-surface", "solve", "spectrum", "report"};

}  // namespace ghsurf
