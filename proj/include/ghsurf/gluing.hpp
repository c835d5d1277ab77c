#pragma once

#include <vector>

#include "ghsurf/discrete.hpp"
#include "ghsurf/mesh.hpp"
#include "ghsurf/model_surfaces.hpp"

namespace ghsurf {

double lambert_w0(double y);

// Quintic smoothstep cutoff: 1 below T1, 0 above T2.
struct GlueSchedule {
  double d = 32.0;
  double T1 = 0.0;
  double T2 = 0.0;
  int periods = 1;
  double min_d = 8.0;

  static GlueSchedule for_distance(double d, int periods = 1, double min_d = 8.0);
  double cutoff(double s) const;
  double cutoff_d1(double s) const;
  double cutoff_d2(double s) const;
};

// Orthonormal tangent pair (oriented with the mesh) and normal pair in the chart of the vertex.
struct VertexFrame {
  std::array<Vec4, 2> t{Vec4::Zero(), Vec4::Zero()};
  std::array<Vec4, 2> n{Vec4::Zero(), Vec4::Zero()};
};

struct InitialSurface {
  SurfaceMesh mesh;
  StencilSet stencils;
  std::vector<VertexFrame> frames;
  ScherkSurface scherk;
  GlueSchedule schedule;
  MeshSpec spec;
  bool closed = false;
};

// Normal frames: in the trivialisation n2 = phi^{-1/2}(d_x3 - a3 d_t) and n1 completes the
// slice normal; in cap charts Gram-Schmidt of (d_q0, d_q1). (t1, t2, n1, n2) is positive.
std::vector<VertexFrame> vertex_frames(const GHSpace& space, const StencilSet& st,
                                       const std::vector<ChartPoint>& pos);

InitialSurface build_initial_surface(const GHSpace& space, const GlueSchedule& schedule,
                                     const MeshSpec& spec = {});
// Exact Scherk tower of the flat space truncated at arm length T (Dirichlet boundary ring).
InitialSurface build_flat_scherk(const GHSpace& flat, double T, const MeshSpec& spec = {});
// Holomorphic cigar through the nut of Taub-NUT, cut at cap radius rho_max.
InitialSurface build_cigar_surface(const GHSpace& taub_nut, double rho_max, const MeshSpec& spec = {});

// Mean curvature in (n1, n2) components at every vertex.
std::vector<Vec2> mean_curvature_field(const GHSpace& space, const InitialSurface& s);
std::vector<Vec2> mean_curvature_field(const GHSpace& space, const InitialSurface& s,
                                       const std::vector<ChartPoint>& pos,
                                       const std::vector<VertexFrame>& frames);

struct RegionNorms {
  double scherk = 0.0, neck = 0.0, cap = 0.0;
  double total() const { return std::max({scherk, neck, cap}); }
};
// Sup norms per region, skipping Dirichlet boundary vertices.
RegionNorms region_sup(const SurfaceMesh& mesh, const std::vector<Vec2>& H);
// Metric area of the faces whose vertices all lie in the region.
double region_area(const GHSpace& space, const SurfaceMesh& mesh, Region r, int arm = -1);

struct DecayRow {
  double d = 0.0, T1 = 0.0, T2 = 0.0;
  int vertices = 0;
  RegionNorms H;
  double normalised = 0.0;  // sup|H| d^2 / log d
};
struct DecayReport {
  std::vector<DecayRow> rows;
  double band_ratio = 0.0;  // max / min of the normalised values
  bool band_ok = false;     // band_ratio <= 4
  bool decreasing = false;
  double exponent = 0.0;    // least-squares slope of log sup|H| against log d
  bool neck_below_scherk = false;
  std::vector<double> scherk_ratio;            // measured scherk-region ratio between consecutive d
  std::vector<double> scherk_ratio_predicted;  // (T1(d') / T1(d)) (d / d')^2
};
DecayReport decay_report(const std::vector<double>& ds, int periods = 1, const MeshSpec& spec = {});

}  // namespace ghsurf
