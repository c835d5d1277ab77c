#include <gtest/gtest.h>

#include <cmath>

#include "ghsurf/gluing.hpp"
#include "ghsurf/pipeline.hpp"

using namespace ghsurf;

namespace {

MeshSpec coarse() {
  MeshSpec sp;
  sp.fibre_points = 48;
  return sp;
}

// One closed initial surface, shared across tests.
struct Closed {
  GHSpace space = GHSpace::multi_taub_nut(16.0, 1);
  InitialSurface s = build_initial_surface(space, GlueSchedule::for_distance(16.0), coarse());
};
const Closed& closed() {
  static const Closed c;
  return c;
}

double ip(const Mat4& G, const Vec4& a, const Vec4& b) { return a.dot(G * b); }

}  // namespace

TEST(LambertW, SatisfiesDefiningEquation) {
  for (double y : {1e-8, 1e-3, 0.5, 1.0, 256.0, 1024.0, 4096.0, 1e6, 1e12}) {
    const double w = lambert_w0(y);
    EXPECT_NEAR(w * std::exp(w), y, 1e-13 * y) << y;
  }
}

TEST(LambertW, KnownValues) {
  EXPECT_EQ(lambert_w0(0.0), 0.0);
  EXPECT_NEAR(lambert_w0(M_E), 1.0, 1e-15);
  EXPECT_NEAR(lambert_w0(2 * std::exp(2.0)), 2.0, 1e-14);
  EXPECT_NEAR(lambert_w0(1.0), 0.5671432904097838, 1e-15);  // omega constant
  EXPECT_THROW(lambert_w0(-0.1), DomainError);
}

TEST(Schedule, TransitionWindow) {
  for (double d : {16.0, 32.0, 64.0}) {
    const GlueSchedule s = GlueSchedule::for_distance(d);
    EXPECT_NEAR(s.T1 * std::exp(s.T1), d * d, 1e-10 * d * d);
    EXPECT_DOUBLE_EQ(s.T2, s.T1 + 1);
    EXPECT_LT(s.T2, d / 2);
  }
  EXPECT_NEAR(GlueSchedule::for_distance(16.0).T1, 4.127504465723974, 1e-12);
}

TEST(Schedule, CutoffIsMonotoneSmoothStep) {
  const GlueSchedule s = GlueSchedule::for_distance(32.0);
  EXPECT_EQ(s.cutoff(s.T1 - 0.5), 1.0);
  EXPECT_EQ(s.cutoff(s.T2 + 0.5), 0.0);
  EXPECT_NEAR(s.cutoff(s.T1 + 0.5), 0.5, 1e-15);
  double prev = 1.0;
  const double h = 1e-5;
  for (int k = 1; k < 100; ++k) {
    const double x = s.T1 + k / 100.0;
    EXPECT_LE(s.cutoff(x), prev);
    prev = s.cutoff(x);
    EXPECT_NEAR(s.cutoff_d1(x), (s.cutoff(x + h) - s.cutoff(x - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(s.cutoff_d2(x), (s.cutoff_d1(x + h) - s.cutoff_d1(x - h)) / (2 * h), 1e-7);
  }
  // C2 at both ends of the window
  for (double x : {s.T1, s.T2}) {
    EXPECT_NEAR(s.cutoff_d1(x), 0.0, 1e-15);
    EXPECT_NEAR(s.cutoff_d2(x), 0.0, 1e-15);
  }
}

TEST(Pipeline, InadmissibleDistance) {
  PipelineConfig c;
  c.d = 6.0;
  try {
    pipeline_space(c);
    FAIL() << "expected a DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("schedule inadmissible"), std::string::npos);
  }
  try {
    run_pipeline(c, nullptr, "build-space");
    FAIL() << "expected a StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage, "build-space");
  }
}

TEST(InitialSurface, IsAClosedSphere) {
  const InitialSurface& s = closed().s;
  EXPECT_TRUE(s.closed);
  EXPECT_EQ(s.mesh.euler_characteristic(), 2);
  EXPECT_EQ(s.mesh.genus(), 0);
  for (const MeshVertex& v : s.mesh.verts) EXPECT_FALSE(v.boundary);
}

TEST(InitialSurface, IsInvariantUnderTheGroup) {
  const Closed& c = closed();
  EXPECT_EQ(c.s.mesh.perm.size(), c.space.group().size());
  EXPECT_LT(symmetry_defect(c.space, c.s.mesh), 1e-8);
  for (const auto& p : c.s.mesh.perm) {
    std::vector<int> q = p;
    std::sort(q.begin(), q.end());
    for (int i = 0; i < static_cast<int>(q.size()); ++i) ASSERT_EQ(q[i], i);
  }
}

TEST(InitialSurface, FramesAreOrthonormal) {
  const Closed& c = closed();
  double worst = 0;
  for (int i = 0; i < c.s.mesh.vertex_count(); i += 7) {
    const Mat4 G = metric(c.space, c.s.mesh.verts[i].pos);
    const VertexFrame& f = c.s.frames[i];
    const std::array<Vec4, 4> e{f.t[0], f.t[1], f.n[0], f.n[1]};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) worst = std::max(worst, std::abs(ip(G, e[a], e[b]) - (a == b)));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(InitialSurface, MeanCurvatureConcentratesOnTheNecks) {
  const Closed& c = closed();
  const RegionNorms H = region_sup(c.s.mesh, mean_curvature_field(c.space, c.s));
  EXPECT_GT(H.neck, H.scherk);
  EXPECT_GT(H.neck, H.cap);
  EXPECT_LT(H.total(), 0.1);
}

TEST(InitialSurface, AreaSplitsOverRegions) {
  const Closed& c = closed();
  const double caps = region_area(c.space, c.s.mesh, Region::Cap);
  // four caps, each close to the cigar disc of the same chart radius
  double arm0 = 0, arm1 = 0;
  arm0 = region_area(c.space, c.s.mesh, Region::Cap, 0);
  arm1 = region_area(c.space, c.s.mesh, Region::Cap, 1);
  EXPECT_NEAR(arm0, arm1, 1e-9 * arm0);
  EXPECT_NEAR(caps, 4 * arm0, 1e-9 * caps);
}

TEST(FlatScherk, LevelSetIsMinimalToSecondOrder) {
  const GHSpace flat = GHSpace::flat(1.0, 1);
  std::vector<double> h;
  for (int N : {32, 64}) {
    MeshSpec sp;
    sp.fibre_points = N;
    const InitialSurface s = build_flat_scherk(flat, 4.0, sp);
    EXPECT_FALSE(s.closed);
    h.push_back(region_sup(s.mesh, mean_curvature_field(flat, s)).total());
  }
  EXPECT_GT(std::log2(h[0] / h[1]), 1.9);
}

TEST(FlatScherk, BoundaryIsTheTruncationRing) {
  const GHSpace flat = GHSpace::flat(1.0, 1);
  const InitialSurface s = build_flat_scherk(flat, 4.0, coarse());
  int b = 0;
  for (const MeshVertex& v : s.mesh.verts)
    if (v.boundary) {
      ++b;
      EXPECT_GE(v.arm, 0);
      EXPECT_NEAR(v.s, 4.0, 1e-9);
    }
  EXPECT_EQ(b, 4 * s.mesh.fibre_points);
}

TEST(Cigar, DiscHasEulerCharacteristicOne) {
  MeshSpec sp;
  sp.fibre_points = 32;
  sp.cap_rings = 8;
  const GHSpace tn = GHSpace::taub_nut(1.0);
  const InitialSurface c = build_cigar_surface(tn, 2.0, sp);
  EXPECT_EQ(c.mesh.euler_characteristic(), 1);
  double h = 0;
  for (const Vec2& v : mean_curvature_field(tn, c)) h = std::max(h, v.norm());
  EXPECT_LT(h, 1e-12);
}
