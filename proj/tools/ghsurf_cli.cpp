// ghsurf: build, solve and analyse glued minimal surfaces; emits run directories with manifests.
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "artifacts.hpp"

namespace fs = std::filesystem;
using namespace ghsurf;
using namespace ghsurf::cli;

namespace {

enum Exit { kOk = 0, kFail = 1, kUsage = 2, kStage = 3 };

struct Options {
  std::string config;
  double d = 0;
  int periods = 0;
  int fibre_points = 0;
  std::string out = "runs";
  bool deterministic = false;
  bool verbose = false;
  bool gauge_cache = false;
  std::vector<double> grid{16, 32, 64};
  std::string criterion;
  std::string baseline;
  double baseline_tol = 1e-6;
};

struct ConfigError : DomainError {
  using DomainError::DomainError;
};

template <class T>
void take(const json& j, const char* key, T& v) {
  if (j.contains(key)) v = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : keys) ok |= k == a;
    if (!ok) throw ConfigError("invalid config: unknown key '" + where + k + "'");
  }
}

// Defaults, then the JSON file, then command-line flags.
PipelineConfig resolve(Options& o) {
  PipelineConfig c;
  if (!o.config.empty()) {
    std::ifstream f(o.config);
    if (!f) throw ConfigError("invalid config: cannot read " + o.config);
    json j;
    try {
      j = json::parse(f);
      reject_unknown(j, {"d", "periods", "min_d", "eigenpairs", "gauge_cache", "deterministic", "grid", "mesh", "solver"},
                     "");
      take(j, "d", c.d);
      take(j, "periods", c.periods);
      take(j, "min_d", c.min_d);
      take(j, "eigenpairs", c.eigenpairs);
      take(j, "gauge_cache", c.gauge_cache);
      if (j.contains("deterministic")) o.deterministic |= j.at("deterministic").get<bool>();
      if (j.contains("grid")) o.grid = j.at("grid").get<std::vector<double>>();
      if (j.contains("mesh")) {
        const json& m = j.at("mesh");
        reject_unknown(m, {"fibre_points", "step", "growth", "max_step", "cap_rho", "cap_rings", "blend_lo", "blend_hi"},
                       "mesh.");
        take(m, "fibre_points", c.mesh.fibre_points);
        take(m, "step", c.mesh.step);
        take(m, "growth", c.mesh.growth);
        take(m, "max_step", c.mesh.max_step);
        take(m, "cap_rho", c.mesh.cap_rho);
        take(m, "cap_rings", c.mesh.cap_rings);
        take(m, "blend_lo", c.mesh.blend_lo);
        take(m, "blend_hi", c.mesh.blend_hi);
      }
      if (j.contains("solver")) {
        const json& s = j.at("solver");
        reject_unknown(s, {"r", "max_iter", "tol", "fd_eps", "q_samples", "seed"}, "solver.");
        take(s, "r", c.solver.r);
        take(s, "max_iter", c.solver.max_iter);
        take(s, "tol", c.solver.tol);
        take(s, "fd_eps", c.solver.fd_eps);
        take(s, "q_samples", c.solver.q_samples);
        take(s, "seed", c.solver.seed);
      }
    } catch (const json::exception& e) {
      throw ConfigError(std::string("invalid config: ") + e.what());
    }
  }
  if (o.d > 0) c.d = o.d;
  if (o.periods > 0) c.periods = o.periods;
  if (o.fibre_points > 0) c.mesh.fibre_points = o.fibre_points;
  c.gauge_cache |= o.gauge_cache;
  if (c.periods != 1 && c.periods != 2) throw ConfigError("invalid config: periods must be 1 or 2");
  if (c.mesh.fibre_points < 16 || c.mesh.fibre_points % 16 != 0)
    throw ConfigError("invalid config: mesh.fibre_points must be a positive multiple of 16");
  if (!(c.solver.tol > 0) || c.solver.max_iter < 1) throw ConfigError("invalid config: bad solver settings");
  if (!(c.d >= c.min_d)) {
    std::ostringstream os;
    os << "schedule inadmissible: d=" << c.d << " below the minimum " << c.min_d;
    throw ConfigError(os.str());
  }
  return c;
}

json config_json(const PipelineConfig& c, const Options& o) {
  return {{"d", c.d},
          {"periods", c.periods},
          {"min_d", c.min_d},
          {"eigenpairs", c.eigenpairs},
          {"gauge_cache", c.gauge_cache},
          {"deterministic", o.deterministic},
          {"mesh", to_json(c.mesh)},
          {"solver", to_json(c.solver)}};
}

std::string utc_stamp(const char* format) {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char b[32];
  std::strftime(b, sizeof b, format, &tm);
  return b;
}

// Fresh timestamped directory under the output root.
fs::path make_run_dir(const std::string& root, const std::string& verb, std::uint64_t hash) {
  const std::string base = utc_stamp("%Y%m%dT%H%M%SZ") + "-" + verb + "-" + hex(hash).substr(0, 8);
  fs::path p = fs::path(root) / base;
  for (int k = 1; fs::exists(p); ++k) p = fs::path(root) / (base + "-" + std::to_string(k));
  fs::create_directories(p);
  return p;
}

class Run {
 public:
  Run(const std::string& verb, const Options& o, json config)
      : verb_(verb), opt_(o), config_(std::move(config)), hash_(config_hash(config_)) {
    dir_ = make_run_dir(o.out, verb, hash_);
    log_.open(dir_ / "run.log");
    std::printf("run directory: %s\n", dir_.string().c_str());
  }
  const fs::path& dir() const { return dir_; }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void artifact(const std::string& name) { artifacts_.push_back(name); }
  // Timestamps go to stderr only, so run.log is reproducible.
  void log(const std::string& m) {
    log_ << m << "\n";
    log_.flush();
    if (opt_.verbose) std::fprintf(stderr, "[%s] %s\n", utc_stamp("%H:%M:%S").c_str(), m.c_str());
  }
  json manifest;

  void finish(const std::string& status, const std::string& message) {
    manifest["tool"] = "ghsurf";
    manifest["version"] = kToolVersion;
    manifest["verb"] = verb_;
    manifest["created"] = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
    manifest["config"] = config_;
    manifest["config_hash"] = hex(hash_);
    manifest["deterministic"] = opt_.deterministic;
    json tol = json::object();
    for (const auto& [k, v] : check_tolerances()) tol[k] = v;
    manifest["tolerances"] = tol;
    manifest["status"] = status;
    if (!message.empty()) manifest["message"] = message;
    manifest["artifacts"] = artifacts_;
    manifest["directory"] = dir_.string();
    write_json(path("manifest.json"), manifest);
    append_line((fs::path(opt_.out) / "manifests.jsonl").string(), manifest.dump());
  }

 private:
  std::string verb_;
  Options opt_;
  json config_;
  std::uint64_t hash_;
  fs::path dir_;
  std::ofstream log_;
  std::vector<std::string> artifacts_;
};

json schedule_json(const GlueSchedule& s) {
  return {{"d", s.d}, {"T1", s.T1}, {"T2", s.T2}, {"periods", s.periods}, {"min_d", s.min_d}};
}

void emit_space(Run& run, const PipelineResult& r) {
  json c = json::array();
  for (const Vec3& p : r.space.centres()) c.push_back({p(0), p(1), p(2)});
  const GlueSchedule sch = GlueSchedule::for_distance(r.config.d, r.config.periods, r.config.min_d);
  write_json(run.path("space.json"), {{"d", r.space.d()},
                                      {"ell", r.space.ell()},
                                      {"periods", r.space.periods()},
                                      {"centres", c},
                                      {"tau", r.space.tau()},
                                      {"content_hash", hex(r.space.content_hash())},
                                      {"schedule", schedule_json(sch)}});
  run.artifact("space.json");
  run.manifest["schedule"] = schedule_json(sch);
  if (r.config.gauge_cache)
    for (const auto& e : fs::directory_iterator(run.dir()))
      if (e.path().filename().string().rfind("gauge_", 0) == 0) run.artifact(e.path().filename().string());
}

void emit_surface(Run& run, const PipelineResult& r) {
  const SurfaceMesh& m = r.surface.mesh;
  write_mesh(run.path("initial.ghsm"), m, reference_positions(m));
  run.artifact("initial.ghsm");
  const RegionNorms H = region_sup(m, mean_curvature_field(r.space, r.surface));
  json j = {{"vertices", m.vertex_count()},
            {"faces", m.faces.size()},
            {"euler", m.euler_characteristic()},
            {"genus", m.genus()},
            {"closed", r.surface.closed},
            {"step", m.step},
            {"schedule", schedule_json(r.surface.schedule)},
            {"H_sup", {{"scherk", H.scherk}, {"neck", H.neck}, {"cap", H.cap}, {"total", H.total()}}},
            {"normalised", H.total() * r.config.d * r.config.d / std::log(r.config.d)}};
  write_json(run.path("surface.json"), j);
  run.artifact("surface.json");
  run.manifest["resolution"] = {{"fibre_points", m.fibre_points}, {"step", m.step}, {"vertices", m.vertex_count()}};
}

void emit_solve(Run& run, const PipelineResult& r) {
  std::ostringstream os;
  os << "step,sup_H,step_norm\n";
  char b[96];
  for (size_t i = 0; i < r.newton.history.size(); ++i) {
    std::snprintf(b, sizeof b, "%zu,%.17g,%.17g\n", i, r.newton.history[i],
                  i < r.newton.step_norm.size() ? r.newton.step_norm[i] : 0.0);
    os << b;
  }
  write_text(run.path("newton.csv"), os.str());
  write_json(run.path("solve.json"), to_json(r.newton));
  run.artifact("newton.csv");
  run.artifact("solve.json");
  if (!r.newton.nu.empty()) {
    write_field(run.path("nu.ghsf"), r.newton.nu);
    run.artifact("nu.ghsf");
  }
  if (!r.solved.pos.empty()) {
    write_mesh(run.path("solved.ghsm"), r.surface.mesh, r.solved.pos);
    run.artifact("solved.ghsm");
  }
}

void emit_spectrum(Run& run, const PipelineResult& r) {
  const SpectralReport& S = r.spectrum;
  write_json(run.path("spectrum.json"), to_json(S));
  std::ostringstream os;
  os << "index,eigenvalue,residual,killing_correlation\n";
  char b[128];
  Series s{"lambda", {}, {}};
  for (size_t i = 0; i < S.eigenvalues.size(); ++i) {
    std::snprintf(b, sizeof b, "%zu,%.17g,%.3e,%.6f\n", i, S.eigenvalues[i], S.residuals[i],
                  S.correlation.empty() ? 0.0 : S.correlation[0][i]);
    os << b;
    s.x.push_back(static_cast<double>(i));
    s.y.push_back(S.eigenvalues[i]);
  }
  write_text(run.path("eigenvalues.csv"), os.str());
  Series zero{"0", {0, std::max<double>(1, S.eigenvalues.size() - 1)}, {0, 0}};
  write_text(run.path("eigenvalues.svg"), svg_plot("Jacobi spectrum", "index", "eigenvalue", {s, zero}));
  for (const char* a : {"spectrum.json", "eigenvalues.csv", "eigenvalues.svg"}) run.artifact(a);
}

void emit_report(Run& run, const PipelineResult& r) {
  json j = {{"witness", to_json(r.witness)},
            {"topology", to_json(r.topology)},
            {"symmetry_defect", r.symmetry_defect},
            {"newton", {{"steps", r.newton.steps}, {"sup_H", r.newton.history.back()}}},
            {"lambda_min", r.spectrum.eigenvalues.empty() ? 0.0 : r.spectrum.eigenvalues[0]}};
  write_json(run.path("report.json"), j);
  run.artifact("report.json");
  const GaussLift g = gauss_lift(r.space, r.surface.mesh, r.solved.pos, r.solved.frames);
  write_text(run.path("gauss_lift.svg"),
             svg_density("Gauss lift density (degree " + std::to_string(r.topology.degree) + ")", g.a, r.jacobi.mass));
  run.artifact("gauss_lift.svg");
}

void emit_outcomes(Run& run, const PipelineResult& r) {
  json out = json::array();
  for (const CheckResult& c : run_summary(r)) {
    out.push_back(to_json(c));
    run.log(format_check(c));
  }
  run.manifest["outcome"] = out;
}

// Pipeline verbs: stop after `upto`, emit what exists even on failure.
int pipeline_verb(const std::string& verb, const std::string& upto, Options& o) {
  const PipelineConfig cfg = resolve(o);
  Run run(verb, o, config_json(cfg, o));
  PipelineConfig c = cfg;
  if (c.gauge_cache) c.cache_dir = run.dir().string();
  PipelineResult r{c, GHSpace::flat(), {}, {}, {}, {}, {}, {}, {}, {}, 0.0, {}};
  std::string status = "ok", message;
  int code = kOk;
  try {
    run_pipeline_into(r, c, [&](const std::string& m) { run.log(m); }, upto);
  } catch (const StageError& e) {
    status = "failed at " + e.stage;
    message = e.what();
    code = kStage;
    run.log(std::string("error: ") + e.what());
  }
  const auto done = [&](const char* s) { return r.seconds.count(s) > 0; };
  try {
    if (done("build-space")) emit_space(run, r);
    if (done("build-surface")) emit_surface(run, r);
    if (!r.newton.history.empty()) emit_solve(run, r);
    if (done("spectrum")) emit_spectrum(run, r);
    if (done("report")) emit_report(run, r);
    emit_outcomes(run, r);
  } catch (const std::exception& e) {
    status = "failed writing artifacts";
    message = e.what();
    code = kStage;
  }
  json t = json::object();
  for (const auto& [k, v] : r.seconds) t[k] = v;
  run.manifest["timings"] = t;
  run.manifest["stages_completed"] = json::array();
  for (const char* s : kStages)
    if (done(s)) run.manifest["stages_completed"].push_back(s);
  run.finish(status, message);
  if (code != kOk) std::fprintf(stderr, "ghsurf: %s\n", message.c_str());
  std::printf("%s\n", status.c_str());
  return code;
}

int sweep_verb(Options& o) {
  const PipelineConfig cfg = resolve(o);
  for (double d : o.grid)
    if (!(d >= cfg.min_d)) throw ConfigError("schedule inadmissible: grid value below the minimum d");
  if (o.grid.size() < 3) throw ConfigError("invalid config: sweep-d needs at least three grid values");
  json cj = config_json(cfg, o);
  cj["grid"] = o.grid;
  Run run("sweep-d", o, cj);
  const auto t0 = std::chrono::steady_clock::now();
  const DecayReport rep = decay_report(o.grid, cfg.periods, cfg.mesh);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream os;
  os << "d,T1,T2,vertices,H_scherk,H_neck,H_cap,normalised\n";
  Series total{"sup|H|", {}, {}}, fit{"fit", {}, {}};
  char b[256];
  for (const DecayRow& row : rep.rows) {
    std::snprintf(b, sizeof b, "%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", row.d, row.T1, row.T2, row.vertices,
                  row.H.scherk, row.H.neck, row.H.cap, row.normalised);
    os << b;
    total.x.push_back(row.d);
    total.y.push_back(row.H.total());
  }
  double icpt = 0;
  for (const DecayRow& row : rep.rows) icpt += std::log(row.H.total()) - rep.exponent * std::log(row.d);
  icpt /= static_cast<double>(rep.rows.size());
  for (const DecayRow& row : rep.rows) {
    fit.x.push_back(row.d);
    fit.y.push_back(std::exp(icpt) * std::pow(row.d, rep.exponent));
  }
  write_text(run.path("decay.csv"), os.str());
  write_json(run.path("decay.json"), to_json(rep));
  write_text(run.path("decay.svg"), svg_plot("Initial mean curvature", "d", "sup |H|", {total, fit}, true, true));
  for (const char* a : {"decay.csv", "decay.json", "decay.svg"}) run.artifact(a);
  std::printf("exponent %.4f  band ratio %.4f  band %s\n", rep.exponent, rep.band_ratio, rep.band_ok ? "ok" : "violated");
  run.manifest["timings"] = {{"sweep", secs}};
  run.manifest["summary"] = {{"exponent", rep.exponent}, {"band_ratio", rep.band_ratio}, {"band_ok", rep.band_ok}};
  int code = rep.band_ok ? kOk : kFail;
  if (!o.baseline.empty()) {
    // Baseline rows: d,normalised
    std::ifstream f(o.baseline);
    if (!f) throw ConfigError("cannot read baseline " + o.baseline);
    std::string line;
    double worst = 0;
    int matched = 0;
    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'd') continue;
      double d, v;
      if (std::sscanf(line.c_str(), "%lf,%lf", &d, &v) != 2) continue;
      for (const DecayRow& row : rep.rows)
        if (row.d == d) {
          worst = std::max(worst, std::abs(row.normalised - v) / std::abs(v));
          ++matched;
        }
    }
    const bool ok = matched > 0 && worst <= o.baseline_tol;
    std::printf("baseline: %d rows, max relative deviation %.3e (tolerance %.1e) %s\n", matched, worst,
                o.baseline_tol, ok ? "ok" : "MISMATCH");
    run.manifest["baseline"] = {{"file", o.baseline}, {"rows", matched}, {"max_rel", worst}, {"ok", ok}};
    if (!ok) code = kFail;
  }
  run.finish(code == kOk ? "ok" : "failed", "");
  return code;
}

int check_verb(Options& o) {
  const int id = check_id(o.criterion);
  const PipelineConfig cfg = resolve(o);
  CheckOptions co;
  co.fibre_points = cfg.mesh.fibre_points;
  co.grid = o.grid;
  json cj = config_json(cfg, o);
  cj["criterion"] = id;
  cj["grid"] = o.grid;
  Run run("check", o, cj);
  co.log = [&](const std::string& m) { run.log(m); };
  CheckRunner runner(co);
  const auto t0 = std::chrono::steady_clock::now();
  const CheckResult r = runner.run(id);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s\n", format_check(r).c_str());
  write_json(run.path("check.json"), to_json(r));
  run.artifact("check.json");
  run.manifest["timings"] = {{"check", secs}};
  run.manifest["outcome"] = json::array({to_json(r)});
  run.finish(r.pass ? "ok" : "failed", r.detail);
  return r.pass ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ghsurf: glued minimal surfaces in multi-Taub-NUT spaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Options o;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "JSON config file");
    s->add_option("--d", o.d, "centre distance d");
    s->add_option("--periods", o.periods, "Scherk periods n (1 or 2)");
    s->add_option("--fibre-points", o.fibre_points, "vertices per fibre circle (multiple of 16)");
    s->add_option("--out", o.out, "output root")->capture_default_str();
    s->add_flag("--deterministic", o.deterministic, "single-threaded reductions");
    s->add_flag("--gauge-cache", o.gauge_cache, "build and persist the radial-gauge cache");
    s->add_flag("-v,--verbose", o.verbose, "log progress to stderr");
  };
  struct Verb {
    const char* name;
    const char* upto;
    const char* help;
  };
  const Verb verbs[] = {{"build-space", "build-space", "construct the space"},
                        {"build-surface", "build-surface", "build the initial glued surface"},
                        {"solve", "solve", "equivariant Newton solve"},
                        {"spectrum", "spectrum", "Jacobi spectrum of the solved surface"},
                        {"report", "report", "witness, topology and balancing report"},
                        {"run", "report", "full pipeline"}};
  std::vector<std::pair<CLI::App*, const Verb*>> pv;
  for (const Verb& v : verbs) {
    CLI::App* s = app.add_subcommand(v.name, v.help);
    common(s);
    pv.push_back({s, &v});
  }
  CLI::App* sweep = app.add_subcommand("sweep-d", "initial-surface decay over a grid of d");
  common(sweep);
  sweep->add_option("--grid", o.grid, "d values")->delimiter(',')->capture_default_str();
  sweep->add_option("--baseline", o.baseline, "CSV of d,normalised to compare against");
  sweep->add_option("--baseline-tol", o.baseline_tol, "relative tolerance")->capture_default_str();
  CLI::App* check = app.add_subcommand("check", "run one acceptance criterion (id or name)");
  common(check);
  check->add_option("criterion", o.criterion, "criterion id or name")->required();
  check->add_option("--grid", o.grid, "d values")->delimiter(',')->capture_default_str();

  CLI11_PARSE(app, argc, argv);
#ifdef _OPENMP
  if (o.deterministic) omp_set_num_threads(1);
#endif
  try {
    for (const auto& [s, v] : pv)
      if (s->parsed()) return pipeline_verb(v->name, v->upto, o);
    if (sweep->parsed()) return sweep_verb(o);
    if (check->parsed()) return check_verb(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "ghsurf: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ghsurf: %s\n", e.what());
    return kFail;
  }
  return kUsage;
}
