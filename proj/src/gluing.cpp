#include "ghsurf/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ghsurf {

namespace {

double ip(const Mat4& G, const Vec4& a, const Vec4& b) { return a.dot(G * b); }

Vec4 orthonormalise(const Mat4& G, Vec4 v, std::initializer_list<const Vec4*> against) {
  for (const Vec4* b : against) v -= ip(G, v, *b) * (*b);
  const double l = std::sqrt(std::max(0.0, ip(G, v, v)));
  if (!(l > 1e-8)) throw DomainError("normal frame degenerates");
  return v / l;
}

double det4(const Vec4& a, const Vec4& b, const Vec4& c, const Vec4& d) {
  Mat4 M;
  M << a, b, c, d;
  return M.determinant();
}

}  // namespace

double lambert_w0(double y) {
  if (!(y >= 0)) throw DomainError("lambert_w0 needs y >= 0");
  if (y == 0) return 0;
  double w = std::log1p(y);
  for (int it = 0; it < 100; ++it) {
    const double e = std::exp(w);
    const double f = w * e - y;
    double step = f / (e * (w + 1));
    // guard: stay inside (0, log(1+y)] where the root lies
    double nw = w - step;
    if (nw <= 0) nw = 0.5 * w;
    if (std::abs(nw - w) <= 1e-16 * (1 + std::abs(w))) {
      w = nw;
      break;
    }
    w = nw;
  }
  return w;
}

GlueSchedule GlueSchedule::for_distance(double d, int periods, double min_d) {
  GlueSchedule s;
  s.d = d;
  s.periods = periods;
  s.min_d = min_d;
  s.T1 = lambert_w0(d * d);
  s.T2 = s.T1 + 1.0;
  return s;
}

double GlueSchedule::cutoff(double s) const {
  const double x = std::clamp(s - T1, 0.0, 1.0);
  return 1 - x * x * x * (10 - 15 * x + 6 * x * x);
}

double GlueSchedule::cutoff_d1(double s) const {
  const double x = s - T1;
  if (x <= 0 || x >= 1) return 0;
  return -30 * x * x * (1 - x) * (1 - x);
}

double GlueSchedule::cutoff_d2(double s) const {
  const double x = s - T1;
  if (x <= 0 || x >= 1) return 0;
  return -60 * x * (1 - x) * (1 - 2 * x);
}

std::vector<VertexFrame> vertex_frames(const GHSpace& space, const StencilSet& st,
                                       const std::vector<ChartPoint>& pos) {
  const int nv = static_cast<int>(pos.size());
  std::vector<VertexFrame> F(nv);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nv; ++i) {
    const SurfaceJet J = surface_jet(space, st, pos, i);
    const Mat4 G = metric(space, pos[i]);
    VertexFrame& f = F[i];
    f.t[0] = orthonormalise(G, J.d[0], {});
    f.t[1] = orthonormalise(G, J.d[1], {&f.t[0]});
    if (pos[i].chart == kTrivialisation) {
      const double a3 = G(3, 2) / G(3, 3);
      f.n[1] = orthonormalise(G, Vec4(0, 0, 1, -a3), {&f.t[0], &f.t[1]});
      // in-slice complement: the candidate with the largest remainder
      Vec4 best = Vec4::Zero();
      double bl = -1;
      for (int c : {0, 1, 3}) {
        Vec4 v = Vec4::Unit(c);
        for (const Vec4* b : {&f.t[0], &f.t[1], &f.n[1]}) v -= ip(G, v, *b) * (*b);
        const double l = ip(G, v, v);
        if (l > bl) {
          bl = l;
          best = v;
        }
      }
      f.n[0] = orthonormalise(G, best, {&f.t[0], &f.t[1], &f.n[1]});
    } else {
      f.n[0] = orthonormalise(G, Vec4::Unit(0), {&f.t[0], &f.t[1]});
      f.n[1] = orthonormalise(G, Vec4::Unit(1), {&f.t[0], &f.t[1], &f.n[0]});
    }
    if (det4(f.t[0], f.t[1], f.n[0], f.n[1]) * chart_orientation(space, pos[i].chart) < 0) f.n[0] = -f.n[0];
  }
  return F;
}

namespace {
InitialSurface finish(const GHSpace& space, SurfaceMesh mesh, const MeshSpec& spec) {
  InitialSurface s;
  s.spec = spec;
  s.mesh = std::move(mesh);
  for (const auto& v : s.mesh.verts)
    if (!chart_valid(space, v.pos)) throw DomainError("schedule inadmissible: vertex outside its chart");
  if (space.has_group()) compute_symmetry_permutations(space, s.mesh);
  s.stencils = build_stencils(space, s.mesh);
  s.frames = vertex_frames(space, s.stencils, reference_positions(s.mesh));
  return s;
}
}  // namespace

InitialSurface build_initial_surface(const GHSpace& space, const GlueSchedule& schedule, const MeshSpec& spec) {
  if (!space.is_x_d()) throw DomainError("initial surface needs the four-centre space");
  if (!(schedule.d >= schedule.min_d)) throw DomainError("schedule inadmissible: d below the configured minimum");
  if (std::abs(schedule.d - space.d()) > 1e-12 * space.d()) throw DomainError("schedule inconsistent with d");
  if (schedule.periods != space.periods()) throw DomainError("schedule periods differ from the space");
  TowerLayout L;
  L.scherk.periods = schedule.periods;
  L.scherk.m = potential(space, Vec3::Zero());
  L.scherk.tau = space.tau();
  L.caps = true;
  L.T1 = schedule.T1;
  L.T2 = schedule.T2;
  L.cutoff = [schedule](double s) { return schedule.cutoff(s); };
  SurfaceMesh mesh;
  try {
    mesh = build_tower_mesh(space, L, spec);
  } catch (const DomainError& e) {
    throw DomainError(std::string("schedule inadmissible: ") + e.what());
  }
  InitialSurface s = finish(space, std::move(mesh), spec);
  s.scherk = L.scherk;
  s.schedule = schedule;
  s.closed = true;
  return s;
}

InitialSurface build_flat_scherk(const GHSpace& flat, double T, const MeshSpec& spec) {
  if (flat.centre_count() != 0) throw DomainError("flat Scherk needs the flat model space");
  TowerLayout L;
  L.scherk.periods = flat.periods();
  L.scherk.m = 1 / flat.ell();
  L.scherk.tau = flat.tau();
  L.truncate = T;
  InitialSurface s = finish(flat, build_tower_mesh(flat, L, spec), spec);
  s.scherk = L.scherk;
  s.schedule.T1 = T;
  s.schedule.T2 = T;
  s.schedule.periods = flat.periods();
  s.schedule.d = std::numeric_limits<double>::infinity();
  return s;
}

InitialSurface build_cigar_surface(const GHSpace& taub_nut, double rho_max, const MeshSpec& spec) {
  InitialSurface s = finish(taub_nut, build_cigar_mesh(taub_nut, rho_max, spec), spec);
  s.schedule.T1 = s.schedule.T2 = 0.5 * rho_max * rho_max;
  s.schedule.d = std::numeric_limits<double>::infinity();
  return s;
}

std::vector<Vec2> mean_curvature_field(const GHSpace& space, const InitialSurface& s,
                                       const std::vector<ChartPoint>& pos,
                                       const std::vector<VertexFrame>& frames) {
  const std::vector<Vec4> H = mean_curvature_vectors(space, s.stencils, pos);
  std::vector<Vec2> out(H.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < static_cast<int>(H.size()); ++i) {
    const Mat4 G = metric(space, pos[i]);
    out[i] = Vec2(ip(G, H[i], frames[i].n[0]), ip(G, H[i], frames[i].n[1]));
  }
  return out;
}

std::vector<Vec2> mean_curvature_field(const GHSpace& space, const InitialSurface& s) {
  return mean_curvature_field(space, s, reference_positions(s.mesh), s.frames);
}

RegionNorms region_sup(const SurfaceMesh& mesh, const std::vector<Vec2>& H) {
  RegionNorms r;
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const auto& v = mesh.verts[i];
    if (v.boundary) continue;
    const double h = H[i].norm();
    double& slot = v.region == Region::Scherk ? r.scherk : v.region == Region::Neck ? r.neck : r.cap;
    slot = std::max(slot, h);
  }
  return r;
}

double region_area(const GHSpace& space, const SurfaceMesh& mesh, Region r, int arm) {
  double area = 0;
  for (const auto& [tri, w] : mesh.weighted_triangles()) {
    bool in = true;
    for (int k : tri) {
      const auto& v = mesh.verts[k];
      if (v.region != r || (arm >= 0 && v.arm != arm)) in = false;
    }
    if (!in) continue;
    const ChartPoint& P = mesh.verts[tri[0]].pos;
    const Vec4 e1 = coords_in_chart_of(space, P, mesh.verts[tri[1]].pos) - P.c;
    const Vec4 e2 = coords_in_chart_of(space, P, mesh.verts[tri[2]].pos) - P.c;
    ChartPoint C = P;
    C.c += (e1 + e2) / 3;
    const Mat4 G = metric(space, C);
    const double a = ip(G, e1, e1), b = ip(G, e2, e2), c = ip(G, e1, e2);
    area += w * 0.5 * std::sqrt(std::max(0.0, a * b - c * c));
  }
  return area;
}

DecayReport decay_report(const std::vector<double>& ds, int periods, const MeshSpec& spec) {
  if (ds.size() < 3) throw DomainError("decay report needs at least three values of d");
  DecayReport rep;
  for (double d : ds) {
    const GHSpace space = GHSpace::multi_taub_nut(d, periods);
    const GlueSchedule sch = GlueSchedule::for_distance(d, periods);
    const InitialSurface s = build_initial_surface(space, sch, spec);
    DecayRow row;
    row.d = d;
    row.T1 = sch.T1;
    row.T2 = sch.T2;
    row.vertices = s.mesh.vertex_count();
    row.H = region_sup(s.mesh, mean_curvature_field(space, s));
    row.normalised = row.H.total() * d * d / std::log(d);
    rep.rows.push_back(row);
  }
  double lo = 1e300, hi = 0;
  rep.decreasing = true;
  rep.neck_below_scherk = true;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < rep.rows.size(); ++k) {
    const DecayRow& r = rep.rows[k];
    lo = std::min(lo, r.normalised);
    hi = std::max(hi, r.normalised);
    if (k && r.H.total() >= rep.rows[k - 1].H.total()) rep.decreasing = false;
    if (r.H.neck > r.H.scherk) rep.neck_below_scherk = false;
    const double x = std::log(r.d), y = std::log(r.H.total());
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    if (k) {
      const DecayRow& p = rep.rows[k - 1];
      rep.scherk_ratio.push_back(r.H.scherk / p.H.scherk);
      rep.scherk_ratio_predicted.push_back(r.T1 / p.T1 * (p.d * p.d) / (r.d * r.d));
    }
  }
  const double n = static_cast<double>(rep.rows.size());
  rep.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  rep.band_ratio = hi / lo;
  rep.band_ok = rep.band_ratio <= 4.0;
  return rep;
}

}  // namespace ghsurf
