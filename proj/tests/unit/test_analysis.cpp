#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "ghsurf/analysis.hpp"

using namespace ghsurf;

namespace {

struct Solved {
  GHSpace space;
  InitialSurface s;
  SolvedSurface sol;
  JacobiSystem J;
  NormalField killing;
  explicit Solved(int n) : space(GHSpace::multi_taub_nut(16.0, n)) {
    MeshSpec sp;
    sp.fibre_points = 48;
    s = build_initial_surface(space, GlueSchedule::for_distance(16.0, n), sp);
    sol = solved_surface(space, s, newton_solve(space, s).nu);
    J = assemble_jacobi(space, s, sol.pos, sol.frames);
    killing = killing_normal_field(space, sol.pos, sol.frames);
  }
};
const Solved& solved(int n) {
  static const Solved one(1);
  if (n == 1) return one;
  static const Solved two(2);
  return two;
}

// 1-d Dirichlet Laplacian on n interior points of [0, 1] plus a potential.
SpMat laplacian_1d(int n, double h, double c) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2 / h + c * h);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -1 / h);
      t.emplace_back(i + 1, i, -1 / h);
    }
  }
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

}  // namespace

TEST(SolidAngle, OctantAndOrientation) {
  const Vec3 a = Vec3::UnitX(), b = Vec3::UnitY(), c = Vec3::UnitZ();
  EXPECT_NEAR(solid_angle(a, b, c), M_PI / 2, 1e-15);
  EXPECT_NEAR(solid_angle(a, c, b), -M_PI / 2, 1e-15);
  EXPECT_NEAR(solid_angle(b, c, a), M_PI / 2, 1e-15);
  EXPECT_EQ(solid_angle(a, a, b), 0.0);
  // a small triangle has area close to the planar one
  const double e = 1e-3;
  const Vec3 p = c, q = Vec3(e, 0, 1).normalized(), r = Vec3(0, e, 1).normalized();
  EXPECT_NEAR(solid_angle(p, q, r), e * e / 2, 1e-12);
}

TEST(SolidAngle, OctahedronCoversTheSphere) {
  const std::array<Vec3, 6> v{Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
  double total = 0;
  for (int sx : {0, 1})
    for (int sy : {2, 3})
      for (int sz : {4, 5}) {
        const double s = v[sx].dot(v[sy].cross(v[sz]));
        total += s > 0 ? solid_angle(v[sx], v[sy], v[sz]) : solid_angle(v[sx], v[sz], v[sy]);
      }
  EXPECT_NEAR(total, 4 * M_PI, 1e-14);
}

TEST(Webster, SelfIntersectionValues) {
  EXPECT_EQ(webster_self_intersection(1, 0), -4);
  EXPECT_EQ(webster_self_intersection(2, 1), -4);
  EXPECT_EQ(webster_self_intersection(1, 1), -2);
  EXPECT_EQ(webster_self_intersection(0, 1), 0);
}

TEST(ComplexStructures, QuaternionRelationsAndCompatibility) {
  const GHSpace X = GHSpace::multi_taub_nut(16.0, 1);
  for (const ChartPoint& p : {ChartPoint{kTrivialisation, Vec4(0.3, -0.7, 0.2, 1.1)},
                              ChartPoint{kTrivialisation, Vec4(5.0, 2.0, -1.0, 0.4)}}) {
    const std::array<Mat4, 3> J = complex_structures(X, p);
    const Mat4 G = metric(X, p);
    const HKTriple w = hk_triple(X, p);
    for (int i = 0; i < 3; ++i) {
      EXPECT_LT((J[i] * J[i] + Mat4::Identity()).norm(), 1e-12);
      EXPECT_LT((J[i].transpose() * G * J[i] - G).norm(), 1e-12);
      // omega_i(X, Y) = g(J_i X, Y)
      EXPECT_LT(((G * J[i]).transpose() - w.w[i]).norm(), 1e-12);
    }
    const double plus = (J[0] * J[1] - J[2]).norm(), minus = (J[0] * J[1] + J[2]).norm();
    EXPECT_LT(std::min(plus, minus), 1e-12);
  }
}

TEST(Eigensolver, MatchesDenseSolveOnAModelPencil) {
  const int n = 400;
  const double h = 1.0 / (n + 1);
  const SpMat A = laplacian_1d(n, h, -30.0);
  const Eigen::VectorXd m = Eigen::VectorXd::Constant(n, h);
  std::vector<bool> fixed(n, false);
  fixed[0] = fixed[n - 1] = true;
  const EigenSolution s = lowest_eigenpairs(A, m, fixed, 4, -40.0);
  // dense oracle on the free block
  Eigen::MatrixXd D = Eigen::MatrixXd(A).block(1, 1, n - 2, n - 2) / h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  ASSERT_EQ(s.values.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(s.values[k], es.eigenvalues()(k), 1e-9 * std::abs(es.eigenvalues()(k)) + 1e-9);
    EXPECT_LT(s.residuals[k], 1e-8);
    EXPECT_EQ(s.vectors(0, k), 0.0);
    EXPECT_NEAR(s.vectors.col(k).dot(m.asDiagonal() * s.vectors.col(k)), 1.0, 1e-10);
  }
  int below = 0;
  for (int k = 0; k < n - 2; ++k) below += es.eigenvalues()(k) < 0;
  EXPECT_EQ(count_below(A, m, fixed, 0.0), below);
  EXPECT_GE(below, 1);
}

TEST(Spectrum, FlatScherkHasOneNegativeDirichletEigenvalue) {
  const GHSpace flat = GHSpace::flat(1.0, 1);
  MeshSpec sp;
  sp.fibre_points = 48;
  const InitialSurface S = build_flat_scherk(flat, 6.0, sp);
  const JacobiSystem J = assemble_jacobi(flat, S);
  const SpectralReport r = spectrum(J, S.mesh, 4);
  EXPECT_EQ(r.negative, 1);
  EXPECT_EQ(r.inertia_negative, 1);
  EXPECT_NEAR(r.eigenvalues[0], -0.43, 0.02);
  for (double res : r.residuals) EXPECT_LT(res, 1e-9);
}

TEST(Spectrum, SolvedSurfaceHasKillingMode) {
  const Solved& c = solved(1);
  const SpectralReport r = spectrum(c.J, c.s.mesh, 6, {{"killing", c.killing}});
  EXPECT_EQ(r.negative, 1);
  EXPECT_EQ(r.inertia_negative, 1);
  double best = 0;
  for (size_t j = 0; j < r.eigenvalues.size(); ++j)
    if (std::abs(r.eigenvalues[j]) <= r.threshold) best = std::max(best, r.correlation[0][j]);
  EXPECT_GT(best, 0.99);
}

TEST(Witness, ControlEqualsTheFlatEigenvalue) {
  const Solved& c = solved(1);
  const WitnessReport w = second_variation_witness(c.space, c.s, c.J, c.killing);
  EXPECT_NEAR(w.flat_value, w.flat_eigenvalue, 1e-9 * std::abs(w.flat_eigenvalue));
  EXPECT_LT(w.flat_eigenvalue, 0.0);
  EXPECT_EQ(w.transplant_defect, 0.0);
  EXPECT_GT(w.matched, 0);
  EXPECT_LT(w.value, 0.0);
  EXPECT_NEAR(w.value, w.flat_value, 0.05 * std::abs(w.flat_value));
}

TEST(GaussLift, DegreeOnCoarseMeshes) {
  for (int n : {1, 2}) {
    const Solved& c = solved(n);
    const GaussLift g = gauss_lift(c.space, c.s.mesh, c.sol.pos, c.sol.frames);
    EXPECT_NEAR(g.degree, n, 1e-3);
    EXPECT_GT(g.min_norm, 0.5);
    for (const Vec3& a : g.a) ASSERT_NEAR(a.norm(), 1.0, 1e-12);
  }
}

TEST(Windings, ReversingTheOrientationNegates) {
  const Solved& c = solved(1);
  const std::array<double, 4> w = neck_windings(c.space, c.s, c.sol.pos, 1);
  const std::array<double, 4> r = neck_windings(c.space, c.s, c.sol.pos, -1);
  const std::array<double, 4> expect{1, -1, 1, -1};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(w[i], expect[i], 0.2);
    EXPECT_EQ(r[i], -w[i]);
  }
}

TEST(Topology, TwoPeriodSurfaceIsATorusOfDegreeTwo) {
  const Solved& c = solved(2);
  const TopologyReport t = topology_report(c.space, c.s, c.sol);
  EXPECT_EQ(t.genus, 1);
  EXPECT_EQ(t.degree, 2);
  EXPECT_EQ(t.webster, -4);
  EXPECT_LT(t.fueter.periods.cwiseAbs().maxCoeff(), 1e-4 * t.fueter.area);
  EXPECT_LT(t.fueter.route_gap, 1e-6);
}

TEST(Topology, BalancingAndNonHolomorphicity) {
  const Solved& c = solved(1);
  const TopologyReport t = topology_report(c.space, c.s, c.sol);
  EXPECT_EQ(t.euler, 2);
  EXPECT_EQ(t.webster, -4);
  EXPECT_LT(t.cap_alignment, 1e-6);
  EXPECT_LT(t.fueter.periods.cwiseAbs().maxCoeff(), 1e-10 * t.fueter.area);
  // the lift is conformal up to discretisation, no fixed complex structure is tangent
  EXPECT_LT(t.fueter.sup, 2 * c.J.h);
  EXPECT_NEAR(t.fueter.nonholomorphic, std::sqrt(2.0), 1e-6);
}
