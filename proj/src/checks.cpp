#include "ghsurf/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace ghsurf {

namespace {

// Pinned tolerances.
constexpr double kLaplacianTol = 1e-6;
constexpr double kLaplacianStep = 1e-3;
constexpr double kMonopoleTol = 1e-7;
constexpr double kWedgeTol = 1e-9;
constexpr double kClosedTol = 1e-6;
constexpr int kProbes = 1000;
constexpr double kConstantBand = 2.0;
constexpr double kMinOrder = 1.9;
constexpr double kRoundoffFloor = 1e-12;
constexpr double kKernelTol = 1e-9;
constexpr double kDbarTol = 1e-8;
constexpr double kDecayBand = 4.0;
constexpr double kDrift = 0.10;
constexpr double kNewtonTol = 1e-6;
constexpr int kNewtonSteps = 12;
constexpr double kSigmaUniformity = 0.5;
constexpr double kSymmetryTol = 1e-8;
constexpr double kDegreeTol = 1e-3;
constexpr double kKillingCorrelation = 0.99;
constexpr double kWindingMargin = 0.2;
constexpr double kBalanceTol = 1e-4;
constexpr double kRouteTol = 1e-6;

double ip(const Mat4& G, const Vec4& a, const Vec4& b) { return a.dot(G * b); }

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

Vec3 random_base(std::mt19937_64& rng, const GHSpace& s, double rmax, double keep_off) {
  std::uniform_real_distribution<double> U(-1, 1);
  for (;;) {
    const Vec3 x = rmax * Vec3(U(rng), U(rng), U(rng));
    if (x.norm() > rmax) continue;
    bool ok = true;
    for (const Vec3& p : s.centres()) ok &= (x - p).norm() > keep_off;
    if (ok) return x;
  }
}

double laplacian_fd(const GHSpace& s, const Vec3& x, double h) {
  double lap = -6 * potential(s, x);
  for (int k = 0; k < 3; ++k) {
    const Vec3 e = h * Vec3::Unit(k);
    lap += potential(s, x + e) + potential(s, x - e);
  }
  return lap / (h * h);
}

Vec3 curl_fd(const GHSpace& s, const Vec3& x, double h) {
  Mat3 J;
  for (int j = 0; j < 3; ++j) {
    const Vec3 e = h * Vec3::Unit(j);
    J.col(j) = (-connection(s, x + 2 * e) + 8 * connection(s, x + e) - 8 * connection(s, x - e) +
                connection(s, x - 2 * e)) /
               (12 * h);
  }
  return Vec3(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
}

CheckResult geometry_identities() {
  CheckResult r;
  const GHSpace s = GHSpace::multi_taub_nut(32.0);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> U(-1, 1);
  double lap = 0, mono = 0, ew = 0, edw = 0;
  for (int k = 0; k < kProbes; ++k) {
    const Vec3 x = random_base(rng, s, 0.9 * s.d(), 2.0);
    lap = std::max(lap, std::abs(laplacian_fd(s, x, kLaplacianStep)));
    mono = std::max(mono, (curl_fd(s, x, kLaplacianStep) - potential_gradient(s, x)).norm());
    ChartPoint p{kTrivialisation, Vec4(x(0), x(1), x(2), M_PI * (1 + U(rng)))};
    if (k % 4 == 0) {
      Vec4 q;
      do q = Vec4(U(rng), U(rng), U(rng), U(rng));
      while (q.norm() > 1);
      p = ChartPoint{k % 3, 2.0 * q};
    }
    const HKTriple T = hk_triple(s, p);
    const Mat4 g = metric(s, p);
    const double vol = chart_orientation(s, p.chart) * std::sqrt(g.determinant());
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) ew = std::max(ew, std::abs(wedge(T.w[i], T.w[j]) - (i == j ? 2 * vol : 0)));
      const double h = 1e-4;
      std::array<Mat4, 4> dw;
      for (int a = 0; a < 4; ++a) {
        ChartPoint pp = p, pm = p;
        pp.c(a) += h;
        pm.c(a) -= h;
        dw[a] = (hk_triple(s, pp).w[i] - hk_triple(s, pm).w[i]) / (2 * h);
      }
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
          for (int c = b + 1; c < 4; ++c) edw = std::max(edw, std::abs(dw[a](b, c) + dw[b](c, a) + dw[c](a, b)));
    }
  }
  r.values = {{"laplacian", lap}, {"monopole", mono}, {"wedge", ew}, {"closedness", edw}};
  r.pass = lap < kLaplacianTol && mono < kMonopoleTol && ew < kWedgeTol && edw < kClosedTol;
  return r;
}

CheckResult metric_estimates() {
  CheckResult r;
  std::vector<double> Cphi, Cg;
  for (double d : {16.0, 32.0, 64.0}) {
    const GHSpace s = GHSpace::multi_taub_nut(d);
    const double m = potential(s, Vec3::Zero());
    Mat4 gm = Mat4::Identity() * m;
    gm(3, 3) = 1 / m;
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> U(-1, 1);
    double cp = 0, cg = 0;
    for (int k = 0; k < kProbes; ++k) {
      const Vec3 x = random_base(rng, s, d / 4, 0.0);
      const double w = d * d / x.norm();
      const ChartPoint p{kTrivialisation, Vec4(x(0), x(1), x(2), M_PI * (1 + U(rng)))};
      cp = std::max(cp, std::abs(potential(s, x) - m) * w);
      cg = std::max(cg, (metric(s, p) - gm).cwiseAbs().maxCoeff() * w);
    }
    Cphi.push_back(cp);
    Cg.push_back(cg);
    r.values.push_back({"C_phi(" + fmt(d) + ")", cp});
    r.values.push_back({"C_g(" + fmt(d) + ")", cg});
  }
  auto ratio = [](const std::vector<double>& c) {
    return *std::max_element(c.begin(), c.end()) / *std::min_element(c.begin(), c.end());
  };
  r.values.push_back({"ratio_phi", ratio(Cphi)});
  r.values.push_back({"ratio_g", ratio(Cg)});
  r.pass = ratio(Cphi) < kConstantBand && ratio(Cg) < kConstantBand;
  return r;
}

CheckResult block_minimality(const CheckOptions& opt) {
  CheckResult r;
  const GHSpace flat = GHSpace::flat(1.0, 1);
  std::vector<double> hs;
  for (int N : {opt.coarse_fibre_points, 2 * opt.coarse_fibre_points, 4 * opt.coarse_fibre_points}) {
    MeshSpec sp;
    sp.fibre_points = N;
    const InitialSurface s = build_flat_scherk(flat, 6.0, sp);
    hs.push_back(region_sup(s.mesh, mean_curvature_field(flat, s)).total());
    r.values.push_back({"scherk_H(N=" + std::to_string(N) + ")", hs.back()});
  }
  const double o1 = std::log2(hs[0] / hs[1]), o2 = std::log2(hs[1] / hs[2]);
  r.values.push_back({"scherk_order", std::min(o1, o2)});
  const GHSpace tn = GHSpace::taub_nut(1.0);
  double cigar = 0;
  for (int N : {32, 64, 128}) {
    MeshSpec sp;
    sp.fibre_points = N;
    sp.cap_rings = N / 4;
    const InitialSurface c = build_cigar_surface(tn, 2.0, sp);
    for (const Vec2& h : mean_curvature_field(tn, c)) cigar = std::max(cigar, h.norm());
  }
  r.values.push_back({"cigar_H_max", cigar});
  r.detail = "cigar error at the roundoff floor on every level; order taken as satisfied";
  r.pass = std::min(o1, o2) >= kMinOrder && cigar <= kRoundoffFloor;
  return r;
}

NormalField coordinate_normal_field(const GHSpace& space, const InitialSurface& s, const Vec4& V) {
  NormalField out(s.mesh.vertex_count());
  for (int i = 0; i < s.mesh.vertex_count(); ++i) {
    const Mat4 G = metric(space, s.mesh.verts[i].pos);
    out[i] = Vec2(ip(G, V, s.frames[i].n[0]), ip(G, V, s.frames[i].n[1]));
  }
  return out;
}

CheckResult scherk_index(const CheckOptions& opt) {
  CheckResult r;
  const GHSpace flat = GHSpace::flat(1.0, 1);
  bool ok = true;
  double kernel = 0;
  for (double T : {6.0, 9.0, 12.0}) {
    MeshSpec sp;
    sp.fibre_points = opt.fibre_points;
    const InitialSurface s = build_flat_scherk(flat, T, sp);
    const JacobiSystem J = assemble_jacobi(flat, s);
    const SpectralReport S = spectrum(J, s.mesh, 4);
    r.values.push_back({"negative(T=" + fmt(T) + ")", S.negative});
    r.values.push_back({"lambda1(T=" + fmt(T) + ")", S.eigenvalues[0]});
    ok &= S.negative == 1 && S.inertia_negative == 1;
    if (T == 6.0) {
      const NormalAction a = normal_action(flat, s);
      for (int c : {0, 1, 3, 2}) {
        const NormalField X = coordinate_normal_field(flat, s, Vec4::Unit(c));
        kernel = std::max(kernel, sup_norm(equivariant_project(a, X)) / sup_norm(X));
      }
    }
  }
  r.values.push_back({"kernel_projection", kernel});
  r.pass = ok && kernel < kKernelTol;
  return r;
}

CheckResult cigar_dbar() {
  CheckResult r;
  const Section a = [](double x, double t) {
    const double phi = 1 + 1 / (2 * x);
    return cigar_rho(x) * std::exp(std::complex<double>(0, -t)) * std::sqrt(phi);
  };
  const DbarReport d = cigar_dbar_check(a, 0.1, 4.0, 60, 16, cigar_rho);
  r.values = {{"residual", d.residual}, {"norm_error", d.max_norm_error}};
  r.pass = d.residual < kDbarTol && d.max_norm_error < kDbarTol;
  return r;
}

CheckResult initial_decay(const CheckOptions& opt) {
  CheckResult r;
  MeshSpec sp;
  sp.fibre_points = opt.fibre_points;
  const DecayReport rep = decay_report(opt.grid, 1, sp);
  for (const DecayRow& row : rep.rows) r.values.push_back({"normalised(d=" + fmt(row.d) + ")", row.normalised});
  r.values.push_back({"band_ratio", rep.band_ratio});
  r.values.push_back({"exponent", rep.exponent});
  auto normalised = [](double d, const MeshSpec& m) {
    const GHSpace space = GHSpace::multi_taub_nut(d);
    const InitialSurface s = build_initial_surface(space, GlueSchedule::for_distance(d), m);
    return region_sup(s.mesh, mean_curvature_field(space, s)).total() * d * d / std::log(d);
  };
  MeshSpec fine = sp;
  fine.fibre_points = 2 * opt.fibre_points;
  const double base = normalised(32.0, sp);
  const double drift = std::abs(normalised(32.0, fine) - base) / base;
  r.values.push_back({"drift(d=32)", drift});
  r.pass = rep.band_ratio <= kDecayBand && drift < kDrift;
  return r;
}

}  // namespace

const char* check_name(int id) {
  static const char* names[] = {"geometry-identities", "metric-estimates", "block-minimality", "scherk-index",
                                "cigar-dbar",          "initial-decay",    "solve-convergence", "certificate",
                                "multi-period",        "balancing"};
  if (id < 1 || id > kCheckCount) throw DomainError("unknown criterion " + std::to_string(id));
  return names[id - 1];
}

int check_id(const std::string& key) {
  for (int i = 1; i <= kCheckCount; ++i)
    if (key == check_name(i) || key == std::to_string(i)) return i;
  throw DomainError("unknown criterion '" + key + "'");
}

CheckRunner::CheckRunner(CheckOptions opt) : opt_(std::move(opt)) {}

const PipelineResult& CheckRunner::pipeline(double d, int periods, int fibre_points) {
  const auto key = std::make_tuple(d, periods, fibre_points);
  auto it = cache_.find(key);
  if (it != cache_.end()) return *it->second;
  PipelineConfig cfg;
  cfg.d = d;
  cfg.periods = periods;
  cfg.mesh.fibre_points = fibre_points;
  if (opt_.log) opt_.log("pipeline d=" + fmt(d) + " n=" + std::to_string(periods) + " N=" + std::to_string(fibre_points));
  auto res = std::make_unique<PipelineResult>(run_pipeline(cfg, opt_.log));
  return *cache_.emplace(key, std::move(res)).first->second;
}

CheckResult CheckRunner::run(int id) {
  CheckResult r;
  try {
    switch (id) {
      case 1: r = geometry_identities(); break;
      case 2: r = metric_estimates(); break;
      case 3: r = block_minimality(opt_); break;
      case 4: r = scherk_index(opt_); break;
      case 5: r = cigar_dbar(); break;
      case 6: r = initial_decay(opt_); break;
      case 7: {
        bool ok = true;
        double smin = 1e300, smax = 0;
        for (double d : opt_.grid) {
          const NewtonReport& nr = pipeline(d, 1, opt_.fibre_points).newton;
          const std::string t = "(d=" + fmt(d) + ")";
          r.values.push_back({"steps" + t, nr.steps});
          r.values.push_back({"H" + t, nr.history.back()});
          r.values.push_back({"nu/2CH0" + t, nr.nu_norm / (2 * nr.C * nr.H0)});
          r.values.push_back({"sigma_min" + t, nr.sigma_min});
          ok &= nr.converged && nr.steps <= kNewtonSteps && nr.history.back() < kNewtonTol && nr.bound_ok;
          smin = std::min(smin, nr.sigma_min);
          smax = std::max(smax, nr.sigma_min);
        }
        r.values.push_back({"sigma_common", smin});
        r.pass = ok && smin > 0 && smin >= kSigmaUniformity * smax;
        break;
      }
      case 8: {
        bool ok = true;
        for (double d : opt_.grid) {
          const PipelineResult& P = pipeline(d, 1, opt_.fibre_points);
          const PipelineResult& Q = pipeline(d, 1, opt_.coarse_fibre_points);
          const std::string t = "(d=" + fmt(d) + ")";
          const SpectralReport& S = P.spectrum;
          double kcorr = 0;
          for (size_t j = 0; j < S.eigenvalues.size(); ++j)
            if (std::abs(S.eigenvalues[j]) <= S.threshold) kcorr = std::max(kcorr, S.correlation[0][j]);
          const double c = -S.eigenvalues[0];
          const double c_drift = std::abs(c + Q.spectrum.eigenvalues[0]) / c;
          const double w_drift = std::abs(P.witness.value - Q.witness.value) / std::abs(P.witness.value);
          const TopologyReport& T = P.topology;
          const bool wind = T.windings == std::array<int, 4>{1, -1, 1, -1} && T.winding_margin > kWindingMargin;
          r.values.push_back({"euler" + t, T.euler});
          r.values.push_back({"symmetry" + t, P.symmetry_defect});
          r.values.push_back({"degree" + t, T.degree_raw});
          r.values.push_back({"killing_corr" + t, kcorr});
          r.values.push_back({"c" + t, c});
          r.values.push_back({"c_drift" + t, c_drift});
          r.values.push_back({"witness" + t, P.witness.value});
          r.values.push_back({"witness_drift" + t, w_drift});
          r.values.push_back({"windings_ok" + t, wind});
          r.values.push_back({"webster" + t, T.webster});
          ok &= T.euler == 2 && P.symmetry_defect < kSymmetryTol && std::abs(T.degree_raw - 1) < kDegreeTol &&
                kcorr > kKillingCorrelation && S.negative >= 1 && c > 0 && c_drift < kDrift &&
                P.witness.value < 0 && w_drift < kDrift && wind && T.webster == -4;
        }
        r.pass = ok;
        break;
      }
      case 9: {
        const PipelineResult& P = pipeline(opt_.multi_period_d, 2, opt_.fibre_points);
        const TopologyReport& T = P.topology;
        r.values = {{"genus", T.genus},     {"degree", T.degree_raw},
                    {"webster", T.webster}, {"negative", P.spectrum.negative}};
        r.pass = T.genus == 1 && std::abs(T.degree_raw - 2) < kDegreeTol && T.webster == -4 &&
                 P.spectrum.negative >= 3;
        break;
      }
      case 10: {
        bool ok = true;
        std::vector<std::pair<double, int>> runs;
        for (double d : opt_.grid) runs.push_back({d, 1});
        runs.push_back({opt_.multi_period_d, 2});
        for (const auto& [d, n] : runs) {
          const FueterReport& F = pipeline(d, n, opt_.fibre_points).topology.fueter;
          const double per = F.periods.cwiseAbs().maxCoeff() / F.area;
          const std::string t = "(d=" + fmt(d) + ",n=" + std::to_string(n) + ")";
          r.values.push_back({"period/area" + t, per});
          r.values.push_back({"route_gap" + t, F.route_gap});
          ok &= per < kBalanceTol && F.route_gap < kRouteTol;
        }
        r.pass = ok;
        break;
      }
      default: throw DomainError("unknown criterion " + std::to_string(id));
    }
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.id = id;
  r.name = check_name(id);
  return r;
}

std::vector<std::pair<std::string, double>> check_tolerances() {
  return {{"laplacian", kLaplacianTol},     {"laplacian_step", kLaplacianStep}, {"monopole", kMonopoleTol},
          {"wedge", kWedgeTol},             {"closed", kClosedTol},             {"probes", kProbes},
          {"constant_band", kConstantBand}, {"min_order", kMinOrder},           {"roundoff_floor", kRoundoffFloor},
          {"kernel", kKernelTol},           {"dbar", kDbarTol},                 {"decay_band", kDecayBand},
          {"drift", kDrift},                {"newton", kNewtonTol},             {"newton_steps", kNewtonSteps},
          {"sigma_uniformity", kSigmaUniformity}, {"symmetry", kSymmetryTol},   {"degree", kDegreeTol},
          {"killing_correlation", kKillingCorrelation}, {"winding_margin", kWindingMargin},
          {"balance", kBalanceTol},         {"route", kRouteTol}};
}

std::vector<CheckResult> run_summary(const PipelineResult& P) {
  std::vector<CheckResult> out;
  auto add = [&](int id, bool pass, std::vector<std::pair<std::string, double>> v) {
    CheckResult r;
    r.id = id;
    r.name = check_name(id);
    r.pass = pass;
    r.values = std::move(v);
    r.detail = "single run";
    out.push_back(std::move(r));
  };
  const NewtonReport& nr = P.newton;
  if (nr.history.empty()) return out;
  add(7, nr.converged && nr.steps <= kNewtonSteps && nr.history.back() < kNewtonTol && nr.bound_ok,
      {{"steps", nr.steps}, {"H", nr.history.back()}, {"nu/2CH0", nr.nu_norm / (2 * nr.C * nr.H0)},
       {"sigma_min", nr.sigma_min}});
  if (P.seconds.count("report") == 0) return out;
  const SpectralReport& S = P.spectrum;
  const TopologyReport& T = P.topology;
  const int n = P.config.periods;
  if (n == 1) {
    double kcorr = 0;
    for (size_t j = 0; j < S.eigenvalues.size(); ++j)
      if (std::abs(S.eigenvalues[j]) <= S.threshold) kcorr = std::max(kcorr, S.correlation[0][j]);
    const bool wind = T.windings == std::array<int, 4>{1, -1, 1, -1} && T.winding_margin > kWindingMargin;
    add(8,
        T.euler == 2 && P.symmetry_defect < kSymmetryTol && std::abs(T.degree_raw - 1) < kDegreeTol &&
            kcorr > kKillingCorrelation && S.negative >= 1 && P.witness.value < 0 && wind && T.webster == -4,
        {{"euler", T.euler}, {"symmetry", P.symmetry_defect}, {"degree", T.degree_raw}, {"killing_corr", kcorr},
         {"c", -S.eigenvalues[0]}, {"witness", P.witness.value}, {"windings_ok", wind}, {"webster", T.webster}});
  } else {
    add(9, T.genus == 1 && std::abs(T.degree_raw - 2) < kDegreeTol && T.webster == -4 && S.negative >= 3,
        {{"genus", T.genus}, {"degree", T.degree_raw}, {"webster", T.webster}, {"negative", S.negative}});
  }
  const FueterReport& F = T.fueter;
  const double per = F.periods.cwiseAbs().maxCoeff() / F.area;
  add(10, per < kBalanceTol && F.route_gap < kRouteTol, {{"period/area", per}, {"route_gap", F.route_gap}});
  return out;
}

std::string format_check(const CheckResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  " << r.id << " " << r.name << " ";
  for (const auto& [k, v] : r.values) os << " " << k << "=" << fmt(v);
  if (!r.detail.empty()) os << "  [" << r.detail << "]";
  return os.str();
}

}  // namespace ghsurf
