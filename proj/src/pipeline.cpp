#include "ghsurf/pipeline.hpp"

#include <chrono>
#include <cstdio>

namespace ghsurf {

namespace {

template <class F>
auto stage(const std::string& name, PipelineResult& r, const Logger& log, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  if (log) log("stage " + name);
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      r.seconds[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
      auto v = f();
      r.seconds[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return v;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

GHSpace pipeline_space(const PipelineConfig& cfg) {
  if (!(cfg.d >= cfg.min_d)) throw DomainError("schedule inadmissible: d below the configured minimum");
  SpaceConfig sc;
  sc.d = cfg.d;
  sc.periods = cfg.periods;
  sc.build_cache = cfg.gauge_cache;
  sc.cache_dir = cfg.cache_dir;
  return GHSpace::multi_taub_nut(sc);
}

InitialSurface pipeline_surface(const GHSpace& space, const PipelineConfig& cfg) {
  return build_initial_surface(space, GlueSchedule::for_distance(cfg.d, cfg.periods, cfg.min_d), cfg.mesh);
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const Logger& log, const std::string& upto) {
  PipelineResult r{cfg, GHSpace::flat(), {}, {}, {}, {}, {}, {}, {}, {}, 0.0, {}};
  run_pipeline_into(r, cfg, log, upto);
  return r;
}

void run_pipeline_into(PipelineResult& r, const PipelineConfig& cfg, const Logger& log, const std::string& upto) {
  r.config = cfg;
  r.space = stage("build-space", r, log, [&] { return pipeline_space(cfg); });
  if (upto == "build-space") return;
  r.surface = stage("build-surface", r, log, [&] { return pipeline_surface(r.space, cfg); });
  if (upto == "build-surface") return;
  stage("solve", r, log, [&] {
    r.newton = newton_solve(r.space, r.surface, cfg.solver);
    if (!r.newton.converged) throw DomainError("Newton did not converge: " + r.newton.message);
    r.solved = solved_surface(r.space, r.surface, r.newton.nu);
    r.symmetry_defect = symmetry_defect(r.space, r.surface.mesh, r.solved.pos);
  });
  if (log) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "solve: %d steps, sup|H| %.3e, C %.3f, sigma_min %.3f", r.newton.steps,
                  r.newton.history.back(), r.newton.C, r.newton.sigma_min);
    log(buf);
  }
  if (upto == "solve") return;
  stage("spectrum", r, log, [&] {
    r.jacobi = assemble_jacobi(r.space, r.surface, r.solved.pos, r.solved.frames);
    r.killing = killing_normal_field(r.space, r.solved.pos, r.solved.frames);
    const int k = cfg.eigenpairs > 0 ? cfg.eigenpairs : (cfg.periods == 1 ? 8 : 12);
    r.spectrum = spectrum(r.jacobi, r.surface.mesh, k, {{"killing", r.killing}});
  });
  if (upto == "spectrum") return;
  stage("report", r, log, [&] {
    r.witness = second_variation_witness(r.space, r.surface, r.jacobi, r.killing);
    r.topology = topology_report(r.space, r.surface, r.solved);
  });
}

}  // namespace ghsurf
