#include <gtest/gtest.h>

#include <cmath>

#include "ghsurf/analysis.hpp"

using namespace ghsurf;

namespace {

struct Closed {
  GHSpace space = GHSpace::multi_taub_nut(16.0, 1);
  InitialSurface s;
  NormalAction action;
  Closed() {
    MeshSpec sp;
    sp.fibre_points = 48;
    s = build_initial_surface(space, GlueSchedule::for_distance(16.0), sp);
    action = normal_action(space, s);
  }
};
const Closed& closed() {
  static const Closed c;
  return c;
}

double sup_diff(const NormalField& a, const NormalField& b) {
  double e = 0;
  for (size_t i = 0; i < a.size(); ++i) e = std::max(e, (a[i] - b[i]).norm());
  return e;
}

NormalField random_field(unsigned seed) {
  std::mt19937 rng(seed);
  return smooth_random_field(closed().space, closed().s, rng, 0.3);
}

}  // namespace

TEST(NormalAction, IsASignedPermutationRepresentation) {
  const NormalAction& a = closed().action;
  ASSERT_EQ(a.perm.size(), closed().space.group().size());
  for (const auto& mats : a.mat)
    for (const Mat2& m : mats) {
      EXPECT_NEAR((m.transpose() * m - Mat2::Identity()).norm(), 0.0, 1e-15);
      EXPECT_EQ(m.cwiseAbs().sum(), 2.0);
    }
  for (int e : a.eps) EXPECT_TRUE(e == 1 || e == -1);
}

TEST(Projection, IsIdempotentAndInvariant) {
  const NormalAction& a = closed().action;
  const NormalField v = random_field(3);
  for (bool twisted : {false, true}) {
    const NormalField p = equivariant_project(a, v, twisted);
    EXPECT_LT(sup_diff(equivariant_project(a, p, twisted), p), 1e-14);
    for (size_t g = 0; g < a.perm.size(); ++g) {
      NormalField gp = act(a, static_cast<int>(g), p);
      if (twisted)
        for (Vec2& x : gp) x *= a.eps[g];
      EXPECT_LT(sup_diff(gp, p), 1e-14) << "element " << g;
    }
  }
}

TEST(Projection, SectorsAreMassOrthogonal) {
  const Closed& c = closed();
  const std::vector<double> m = vertex_masses(c.space, c.s.mesh, reference_positions(c.s.mesh));
  const NormalField p = equivariant_project(c.action, random_field(4), false);
  const NormalField q = equivariant_project(c.action, random_field(5), true);
  EXPECT_LT(mass_correlation(p, q, m), 1e-12);
}

TEST(ReducedBasis, RoundTrip) {
  const NormalAction& a = closed().action;
  const int V = closed().s.mesh.vertex_count();
  for (bool twisted : {false, true}) {
    const ReducedBasis b = reduced_basis(a, V, twisted);
    const NormalField p = equivariant_project(a, random_field(6), twisted);
    EXPECT_LT(sup_diff(expand(b, restrict_to(b, p)), p), 1e-13);
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(b.rep.size(), -1, 1);
    EXPECT_LT((restrict_to(b, expand(b, c)) - c).cwiseAbs().maxCoeff(), 1e-13);
    // supports are orbits: disjoint across representatives, and every unit direction
    std::vector<int> owner(V, -1);
    for (size_t k = 0; k < b.rep.size(); ++k) {
      EXPECT_NEAR(b.dir[k].norm(), 1.0, 1e-14);
      for (const auto& [v, val] : b.support[k]) {
        EXPECT_TRUE(owner[v] == -1 || owner[v] == b.rep[k]);
        owner[v] = b.rep[k];
      }
    }
  }
}

TEST(MeanCurvature, InitialSurfaceFieldIsInvariant) {
  const Closed& c = closed();
  const std::vector<Vec2> H = mean_curvature_field(c.space, c.s);
  const NormalField h(H.begin(), H.end());
  EXPECT_LT(sup_diff(equivariant_project(c.action, h, false), h), 1e-10);
}

// <(H(e v) - H(-e v)) / 2e, mu>_M against -mu^T K v + mu^T M P v, second order under doubling.
TEST(Jacobi, WeakLinearisationConverges) {
  const GHSpace flat = GHSpace::flat(1.0, 1);
  std::vector<double> err;
  for (int N : {32, 64}) {
    MeshSpec sp;
    sp.fibre_points = N;
    const InitialSurface S = build_flat_scherk(flat, 3.0, sp);
    const JacobiSystem J = assemble_jacobi(flat, S);
    const int V = S.mesh.vertex_count();
    auto taper = [&](NormalField v) {
      for (int i = 0; i < V; ++i) {
        const double x = std::clamp((2.6 - S.mesh.verts[i].s) / 0.8, 0.0, 1.0);
        v[i] *= x * x * x * (10 - 15 * x + 6 * x * x);
      }
      return v;
    };
    std::mt19937 rng(3);
    double worst = 0;
    for (int probe = 0; probe < 3; ++probe) {
      const NormalField v = taper(smooth_random_field(flat, S, rng, 0.5));
      const NormalField mu = taper(smooth_random_field(flat, S, rng, 0.5));
      const double e = 1e-5;
      NormalField vp = v, vm = v;
      for (Vec2& x : vp) x *= e;
      for (Vec2& x : vm) x *= -e;
      const NormalField Hp = mean_curvature_of_graph(flat, S, vp), Hm = mean_curvature_of_graph(flat, S, vm);
      double fd = 0, nv = 0, nm = 0;
      for (int i = 0; i < V; ++i) {
        fd += J.mass[i] * ((Hp[i] - Hm[i]) / (2 * e)).dot(mu[i]);
        nv += J.mass[i] * v[i].squaredNorm();
        nm += J.mass[i] * mu[i].squaredNorm();
      }
      const Eigen::VectorXd x = flatten(v), y = flatten(mu);
      const double weak = -y.dot(J.K * x) + y.dot(J.mass_matrix() * (J.P * x));
      worst = std::max(worst, std::abs(fd - weak) / std::sqrt(nv * nm));
    }
    err.push_back(worst);
  }
  EXPECT_LT(err[1], 0.01);
  EXPECT_GT(std::log2(err[0] / err[1]), 1.8);
}

TEST(Jacobi, StiffnessIsSymmetricPositive) {
  const GHSpace flat = GHSpace::flat(1.0, 1);
  MeshSpec sp;
  sp.fibre_points = 32;
  const JacobiSystem J = assemble_jacobi(flat, build_flat_scherk(flat, 3.0, sp));
  EXPECT_LT((J.K - SpMat(J.K.transpose())).norm(), 1e-12 * J.K.norm());
  std::mt19937 rng(1);
  std::normal_distribution<double> N01;
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXd x(J.K.rows());
    for (auto& v : x) v = N01(rng);
    EXPECT_GT(x.dot(J.K * x), 0.0);
  }
  for (double m : J.mass) EXPECT_GT(m, 0.0);
}

TEST(Newton, ConvergesOnTheClosedSurface) {
  const Closed& c = closed();
  const NewtonReport r = newton_solve(c.space, c.s);
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_LE(r.steps, 12);
  EXPECT_LT(r.history.back(), 1e-6);
  EXPECT_TRUE(r.bound_ok);
  EXPECT_LE(r.nu_norm, 2 * r.C * r.H0);
  EXPECT_GT(r.sigma_min, 0.0);
  // quadratic contraction from the first step on
  ASSERT_GE(r.history.size(), 2u);
  EXPECT_LT(r.history[1], 10 * r.history[0] * r.history[0] + 1e-6);
  // the solution stays in the invariant sector
  EXPECT_LT(sup_diff(equivariant_project(c.action, r.nu, false), r.nu), 1e-12);
  const SolvedSurface sol = solved_surface(c.space, c.s, r.nu);
  EXPECT_LT(symmetry_defect(c.space, c.s.mesh, sol.pos), 1e-8);
}

TEST(Newton, IsDeterministic) {
  const Closed& c = closed();
  const NewtonReport a = newton_solve(c.space, c.s), b = newton_solve(c.space, c.s);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i], b.history[i]);
  EXPECT_EQ(sup_diff(a.nu, b.nu), 0.0);
}

TEST(Killing, FieldLivesInTheTwistedSectorAndIsNearlyNull) {
  const Closed& c = closed();
  const NewtonReport r = newton_solve(c.space, c.s);
  const SolvedSurface sol = solved_surface(c.space, c.s, r.nu);
  const JacobiSystem J = assemble_jacobi(c.space, c.s, sol.pos, sol.frames);
  const NormalField k = killing_normal_field(c.space, sol.pos, sol.frames);
  const double nk = l2_norm(k, J.mass);
  EXPECT_GT(nk, 0.1);
  EXPECT_LT(l2_norm(equivariant_project(c.action, k, false), J.mass) / nk, 1e-12);
  EXPECT_NEAR(l2_norm(equivariant_project(c.action, k, true), J.mass) / nk, 1.0, 1e-12);
  const Eigen::VectorXd x = flatten(k);
  const double rq = x.dot(J.stability_matrix() * x) / x.dot(J.mass_matrix() * x);
  EXPECT_LT(std::abs(rq), 10 * J.h * J.h);
}
