#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "ghsurf/geometry.hpp"

using namespace ghsurf;

namespace {

Vec4 random_triv(std::mt19937_64& rng, double rmax) {
  std::uniform_real_distribution<double> U(-1, 1);
  Vec3 x;
  do x = Vec3(U(rng), U(rng), U(rng));
  while (x.norm() > 1);
  Vec4 c;
  c.head<3>() = rmax * x;
  c(3) = M_PI * (1 + U(rng));
  return c;
}

Vec4 random_q(std::mt19937_64& rng, double rmax) {
  std::uniform_real_distribution<double> U(-1, 1);
  Vec4 q;
  do q = Vec4(U(rng), U(rng), U(rng), U(rng));
  while (q.norm() > 1);
  return rmax * q;
}

// Independent oracle: fourth-order quadrature of the radial ODE along one ray.
Vec2 radial_quadrature(const GHSpace& s, const Vec3& x) {
  const double r = x.norm();
  const double al = std::acos(x(2) / r), be = std::atan2(x(1), x(0));
  const Vec3 u(std::sin(al) * std::cos(be), std::sin(al) * std::sin(be), std::cos(al));
  const Vec3 ea(std::cos(al) * std::cos(be), std::cos(al) * std::sin(be), -std::sin(al));
  const Vec3 eb(-std::sin(be), std::cos(be), 0);
  const int n = 2000;
  Vec2 acc(0, 0);
  for (int k = 0; k <= n; ++k) {
    const double rr = r * k / n;
    const Vec3 g = potential_gradient(s, rr * u);
    const double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
    acc += w * Vec2(rr * g.dot(eb), -rr * std::sin(al) * g.dot(ea));
  }
  return acc * (r / n) / 3;
}

}  // namespace

TEST(Potential, OriginValueIsOnePlusTwoOverD) {
  const GHSpace s = GHSpace::multi_taub_nut(10.0);
  EXPECT_NEAR(potential(s, Vec3::Zero()), 1.2, 1e-14);
}

TEST(Potential, SingleCentreSubstitution) {
  const GHSpace s = GHSpace::taub_nut();
  EXPECT_NEAR(potential(s, Vec3(1, 0, 0)), 1.5, 1e-15);
}

TEST(Potential, FiniteDifferenceLaplacianVanishes) {
  for (double d : {10.0, 32.0}) {
    const GHSpace s = GHSpace::multi_taub_nut(d);
    const Vec3 x(1, 2, 3);
    const double h = 1e-3;
    double lap = -6 * potential(s, x);
    for (int k = 0; k < 3; ++k) {
      Vec3 e = Vec3::Zero();
      e(k) = h;
      lap += potential(s, x + e) + potential(s, x - e);
    }
    EXPECT_LT(std::abs(lap / (h * h)), 1e-6);
  }
}

TEST(Potential, CentreIsDomainError) {
  const GHSpace s = GHSpace::multi_taub_nut(10.0);
  EXPECT_THROW(potential(s, s.centres()[2]), DomainError);
}

TEST(Potential, PositiveAwayFromCentres) {
  const GHSpace s = GHSpace::multi_taub_nut(16.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-100, 100);
  for (int k = 0; k < 500; ++k) EXPECT_GT(potential(s, Vec3(U(rng), U(rng), U(rng))), 0);
}

TEST(Space, CentresAreTheSquareVertices) {
  const GHSpace s = GHSpace::multi_taub_nut(20.0);
  ASSERT_EQ(s.centre_count(), 4);
  const double a = std::sqrt(2.0) / 2 * 20;
  EXPECT_EQ(s.centres()[0], Vec3(a, a, 0));
  EXPECT_EQ(s.centres()[1], Vec3(a, -a, 0));
  EXPECT_EQ(s.centres()[2], Vec3(-a, -a, 0));
  EXPECT_EQ(s.centres()[3], Vec3(-a, a, 0));
  EXPECT_THROW(GHSpace({Vec3(1, 0, 0), Vec3(1, 0, 0)}, 1.0, 1.0), DomainError);
}

TEST(Space, GeneralPolygonHasNoSymmetrySupport) {
  const GHSpace s = GHSpace::polygon(3, 10.0);
  EXPECT_EQ(s.centre_count(), 6);
  EXPECT_THROW(s.group(), DomainError);
  EXPECT_THROW(GHSpace::multi_taub_nut(10.0, 3), DomainError);
}

TEST(Connection, VanishesOnTheAxis) {
  const GHSpace s = GHSpace::multi_taub_nut(20.0);
  for (double z : {-5.0, 0.5, 3.0, 12.0}) {
    const Vec2 a = connection_radial_gauge_exact(s, Vec3(0, 0, z));
    EXPECT_LT(a.norm(), 1e-14);
    const Vec2 q = radial_quadrature(s, Vec3(1e-9, 0, z));
    EXPECT_LT(q.norm(), 1e-8);
  }
}

TEST(Connection, ClosedFormMatchesRadialQuadrature) {
  const GHSpace s = GHSpace::multi_taub_nut(16.0);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 30; ++k) {
    const Vec3 x = random_triv(rng, 12.0).head<3>();
    EXPECT_LT((connection_radial_gauge_exact(s, x) - radial_quadrature(s, x)).norm(), 1e-9);
  }
}

TEST(Connection, MonopoleResidual) {
  const GHSpace s = GHSpace::multi_taub_nut(32.0);
  std::mt19937_64 rng(5);
  double res = 0;
  for (int k = 0; k < 200; ++k) {
    const Vec3 x = random_triv(rng, 28.0).head<3>();
    const double h = 1e-3;
    Mat3 J;
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e(j) = h;
      J.col(j) = (-connection(s, x + 2 * e) + 8 * connection(s, x + e) - 8 * connection(s, x - e) +
                  connection(s, x - 2 * e)) / (12 * h);
    }
    const Vec3 curl(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
    res = std::max(res, (curl - potential_gradient(s, x)).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(res, 1e-7);
}

TEST(Connection, LinearDecayConstantIsScaleFree) {
  std::vector<double> C;
  for (double d : {10.0, 20.0, 40.0}) {
    const GHSpace s = GHSpace::multi_taub_nut(d);
    std::mt19937_64 rng(6);
    double c = 0;
    for (int k = 0; k < 2000; ++k) {
      const Vec3 x = random_triv(rng, d / 4).head<3>();
      c = std::max(c, connection(s, x).norm() * d * d / x.norm());
    }
    C.push_back(c);
  }
  const double lo = *std::min_element(C.begin(), C.end()), hi = *std::max_element(C.begin(), C.end());
  EXPECT_LT(hi / lo, 1.5);
  EXPECT_GT(lo, 0);
}

TEST(GaugeCache, MatchesClosedFormAndPersists) {
  SpaceConfig cfg;
  cfg.d = 16;
  cfg.build_cache = true;
  const auto dir = std::filesystem::temp_directory_path() / "ghsurf_cache_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  cfg.cache_dir = dir.string();
  const GHSpace s = GHSpace::multi_taub_nut(cfg);
  ASSERT_NE(s.gauge_cache(), nullptr);
  EXPECT_LT(s.gauge_cache()->measured_error(), cfg.grid.declared_tol);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 50; ++k) {
    const Vec3 x = random_triv(rng, 8.0).head<3>();
    if (x.norm() < 0.5) continue;
    EXPECT_LT((connection_radial_gauge(s, x) - connection_radial_gauge_exact(s, x)).norm(),
              cfg.grid.declared_tol);
  }
  int files = 0;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    ++files;
    auto c = GaugeCache::load(f.path().string(), cfg.grid, s.content_hash());
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->measured_error(), s.gauge_cache()->measured_error());
    const Vec3 x(1, 2, 3);
    EXPECT_EQ(c->eval(x), s.gauge_cache()->eval(x));
    EXPECT_EQ(GaugeCache::load(f.path().string(), cfg.grid, s.content_hash() + 1), nullptr);
  }
  EXPECT_EQ(files, 1);
  std::filesystem::remove_all(dir);
}

TEST(Connection, OutsideChartIsDomainError) {
  const GHSpace s = GHSpace::multi_taub_nut(10.0);
  EXPECT_THROW(connection_radial_gauge_exact(s, Vec3(0, 0, 11)), DomainError);
  EXPECT_THROW(connection_radial_gauge_exact(s, Vec3::Zero()), DomainError);
}

TEST(Metric, OriginComponents) {
  const GHSpace s = GHSpace::multi_taub_nut(10.0);
  const Mat4 g = metric(s, ChartPoint{kTrivialisation, Vec4::Zero()});
  EXPECT_NEAR(g(3, 3), 1 / 1.2, 1e-14);
  EXPECT_NEAR(g(0, 0), 1.2, 1e-14);
}

TEST(Metric, FlatModelDeviationOnUnitBall) {
  double c10 = 0;
  for (double d : {10.0, 20.0, 40.0}) {
    const GHSpace s = GHSpace::multi_taub_nut(d);
    const double m = 1 + 2 / d;
    Mat4 gm = Mat4::Identity() * m;
    gm(3, 3) = 1 / m;
    std::mt19937_64 rng(9);
    double c = 0;
    for (int k = 0; k < 1000; ++k) {
      const Vec4 p = random_triv(rng, 1.0);
      c = std::max(c, (metric(s, ChartPoint{kTrivialisation, p}) - gm).cwiseAbs().maxCoeff() * d * d);
    }
    if (d == 10.0) c10 = c;
    EXPECT_LE(c, c10 * (1 + 1e-12));
  }
}

TEST(Metric, FlatModelDeviationConstantIsScaleFree) {
  std::vector<double> Cphi, Cg;
  for (double d : {16.0, 32.0, 64.0}) {
    const GHSpace s = GHSpace::multi_taub_nut(d);
    const double m = 1 + 2 / d;
    Mat4 gm = Mat4::Identity() * m;
    gm(3, 3) = 1 / m;
    std::mt19937_64 rng(9);
    double cp = 0, cg = 0;
    for (int k = 0; k < 2000; ++k) {
      const Vec4 p = random_triv(rng, d / 4);
      const double w = d * d / p.head<3>().norm();
      cp = std::max(cp, std::abs(potential(s, p.head<3>()) - m) * w);
      cg = std::max(cg, (metric(s, ChartPoint{kTrivialisation, p}) - gm).cwiseAbs().maxCoeff() * w);
    }
    Cphi.push_back(cp);
    Cg.push_back(cg);
  }
  for (const auto* C : {&Cphi, &Cg}) {
    const double lo = *std::min_element(C->begin(), C->end());
    const double hi = *std::max_element(C->begin(), C->end());
    EXPECT_GT(lo, 0);
    EXPECT_LT(hi / lo, 2.0);
  }
}

TEST(Metric, CapChartIsPullbackOfTrivialisation) {
  const GHSpace s = GHSpace::multi_taub_nut(32.0);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> U(-2, 2);
  int n = 0;
  for (int cap = 0; cap < 4; ++cap)
    while (n < 20 * (cap + 1)) {
      const Vec4 q(U(rng), U(rng), U(rng), U(rng));
      const ChartPoint p{cap, q};
      if (!chart_valid(s, p)) continue;
      const ChartPoint t = to_trivialisation(s, p);
      if (!chart_valid(s, t)) continue;
      const Mat4 J = cap_to_trivialisation_jacobian(s, cap, q);
      const Mat4 pull = J.transpose() * metric(s, t) * J;
      EXPECT_LT((pull - metric(s, p)).cwiseAbs().maxCoeff(), 1e-8);
      const HKTriple Tt = hk_triple(s, t), Tc = hk_triple(s, p);
      for (int i = 0; i < 3; ++i)
        EXPECT_LT((J.transpose() * Tt.w[i] * J - Tc.w[i]).cwiseAbs().maxCoeff(), 1e-8);
      ++n;
    }
}

TEST(Metric, CapChartIsSmoothAtTheCentre) {
  const GHSpace s = GHSpace::multi_taub_nut(32.0);
  for (int cap = 0; cap < 4; ++cap) {
    const Mat4 g = metric(s, ChartPoint{cap, Vec4::Zero()});
    EXPECT_TRUE(g.allFinite());
    Eigen::SelfAdjointEigenSolver<Mat4> es(g);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.1);
  }
  const GHSpace tn = GHSpace::taub_nut();
  EXPECT_TRUE(metric(tn, ChartPoint{0, Vec4::Zero()}).isApprox(Mat4::Identity(), 1e-14));
}

TEST(Metric, JetIsConsistent) {
  const GHSpace s = GHSpace::multi_taub_nut(16.0);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    ChartPoint p{kTrivialisation, random_triv(rng, 10.0)};
    if (k % 2) p = ChartPoint{k % 4, random_q(rng, 1.6)};
    const MetricJet J = metric_jet(s, p);
    EXPECT_LT((J.g - J.g.transpose()).norm(), 1e-15);
    Eigen::SelfAdjointEigenSolver<Mat4> es(J.g);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0);
    const double h = 1e-5;
    for (int a = 0; a < 4; ++a) {
      ChartPoint pp = p, pm = p;
      pp.c(a) += h;
      pm.c(a) -= h;
      const Mat4 fd = (metric(s, pp) - metric(s, pm)) / (2 * h);
      EXPECT_LT((fd - J.dg[a]).cwiseAbs().maxCoeff(), 1e-7);
      EXPECT_LT((J.gamma[a] - J.gamma[a].transpose()).norm(), 1e-14);
    }
    // Levi-Civita: g_kl Gamma^l_ij = (d_i g_jk + d_j g_ik - d_k g_ij) / 2
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int kk = 0; kk < 4; ++kk) {
          double lhs = 0;
          for (int l = 0; l < 4; ++l) lhs += J.g(kk, l) * J.gamma[l](i, j);
          const double rhs = 0.5 * (J.dg[i](j, kk) + J.dg[j](i, kk) - J.dg[kk](i, j));
          EXPECT_NEAR(lhs, rhs, 1e-10);
        }
  }
}

TEST(Metric, TaubNutCurvatureIsSelfDualAndRicciFlat) {
  const GHSpace s = GHSpace::multi_taub_nut(16.0);
  const ChartPoint p{kTrivialisation, Vec4(1.0, -2.0, 0.5, 0.3)};
  const auto R = riemann(s, p);
  double ric = 0, scale = 0;
  for (int b = 0; b < 4; ++b)
    for (int d = 0; d < 4; ++d) {
      double v = 0;
      for (int a = 0; a < 4; ++a) v += R[a][b](a, d);
      ric = std::max(ric, std::abs(v));
      for (int a = 0; a < 4; ++a) scale = std::max(scale, R[a][b].cwiseAbs().maxCoeff());
    }
  EXPECT_GT(scale, 1e-5);
  EXPECT_LT(ric, 1e-6);
}

TEST(Triple, ComponentsWhereConnectionVanishes) {
  const GHSpace s = GHSpace::multi_taub_nut(10.0);
  const Vec4 c(0, 0, 2.0, 0.7);
  const HKTriple T = hk_triple(s, ChartPoint{kTrivialisation, c});
  EXPECT_NEAR(T.w[0](0, 3), 1.0, 1e-15);
  EXPECT_NEAR(T.w[0](1, 2), potential(s, c.head<3>()), 1e-15);
}

TEST(Triple, AlgebraicIdentitiesAndClosedness) {
  const GHSpace s = GHSpace::multi_taub_nut(32.0);
  std::mt19937_64 rng(12);
  double ew = 0, esd = 0, edw = 0;
  for (int k = 0; k < 100; ++k) {
    ChartPoint p{kTrivialisation, random_triv(rng, 30.0)};
    if (k % 3 == 0) p = ChartPoint{k % 4, random_q(rng, 3.0)};
    const HKTriple T = hk_triple(s, p);
    const Mat4 g = metric(s, p);
    const int o = chart_orientation(s, p.chart);
    const double vol = o * std::sqrt(g.determinant());
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j)
        ew = std::max(ew, std::abs(wedge(T.w[i], T.w[j]) - (i == j ? 2 * vol : 0)) / std::abs(vol));
      esd = std::max(esd, (hodge_star(T.w[i], g, o) - T.w[i]).cwiseAbs().maxCoeff());
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
          for (int c = b + 1; c < 4; ++c)
            edw = std::max(edw, std::abs(dw[a](b, c) + dw[b](c, a) + dw[c](a, b)));
    }
  }
  EXPECT_LT(ew, 1e-9);
  EXPECT_LT(esd, 1e-9);
  EXPECT_LT(edw, 1e-6);
}

TEST(Charts, TransitionsAreMutuallyInverse) {
  const GHSpace s = GHSpace::multi_taub_nut(32.0);
  std::mt19937_64 rng(13);
  int n = 0;
  while (n < 200) {
    const int cap = n % 4;
    const ChartPoint p{cap, random_q(rng, 4.0)};
    if (!chart_valid(s, p)) continue;
    const ChartPoint t = to_trivialisation(s, p);
    if (!chart_valid(s, t)) continue;
    const ChartPoint back = to_cap(s, cap, t);
    EXPECT_LT((back.c - p.c).norm(), 1e-10);
    const ChartPoint t2 = to_trivialisation(s, back);
    EXPECT_LT((t2.c.head<3>() - t.c.head<3>()).norm(), 1e-10);
    EXPECT_LT(std::abs(std::remainder(t2.c(3) - t.c(3), 2 * M_PI)), 1e-10);
    ++n;
  }
}

TEST(Charts, ValidityDomains) {
  const GHSpace s = GHSpace::multi_taub_nut(10.0);
  EXPECT_TRUE(chart_valid(s, ChartPoint{kTrivialisation, Vec4(9.9, 0, 0, 0)}));
  EXPECT_FALSE(chart_valid(s, ChartPoint{kTrivialisation, Vec4(10.1, 0, 0, 0)}));
  EXPECT_THROW(metric(s, ChartPoint{kTrivialisation, Vec4(0, 0, 10.5, 0)}), DomainError);
  // |x - p| = |q|^2 / 2 < d / 2
  EXPECT_TRUE(chart_valid(s, ChartPoint{0, Vec4(3.1, 0, 0, 0)}));
  EXPECT_FALSE(chart_valid(s, ChartPoint{0, Vec4(3.2, 0, 0, 0)}));
}

TEST(Symmetry, GroupOrderAndRelations) {
  const GHSpace s = GHSpace::multi_taub_nut(16.0);
  const auto& G = s.group();
  ASSERT_EQ(G.size(), 16u);
  const auto& g = s.generators();
  const auto &R1 = g[0], &R3 = g[2], &R4 = g[3];
  SymmetryElement id;
  auto pow = [&](const SymmetryElement& a, int k) {
    SymmetryElement r;
    for (int i = 0; i < k; ++i) r = compose(a, r);
    return r;
  };
  EXPECT_TRUE(same_element(pow(R1, 2), id));
  EXPECT_TRUE(same_element(pow(R3, 2), id));
  EXPECT_TRUE(same_element(pow(R4, 2), id));
  EXPECT_TRUE(same_element(pow(compose(R1, R3), 2), id));
  EXPECT_TRUE(same_element(pow(compose(R4, R3), 2), id));
  EXPECT_TRUE(same_element(pow(compose(R1, R4), 4), id));
  EXPECT_FALSE(same_element(pow(compose(R1, R4), 2), id));
  for (const auto& a : G)
    for (const auto& b : G) EXPECT_NO_THROW(s.element_index(compose(a, b)));
}

TEST(Symmetry, TwoPeriodGroupContainsHalfPeriodShift) {
  const GHSpace s = GHSpace::multi_taub_nut(16.0, 2);
  EXPECT_EQ(s.group().size(), 32u);
  SymmetryElement shift;
  shift.c = M_PI;
  EXPECT_NO_THROW(s.element_index(shift));
}

TEST(Symmetry, ReflectionFixesEquatorialZeroAndPi) {
  const GHSpace s = GHSpace::multi_taub_nut(16.0);
  const auto& R3 = s.generators()[2];
  for (double t : {0.0, M_PI}) {
    const ChartPoint p{kTrivialisation, Vec4(1.5, -2.0, 0.0, t)};
    const ChartPoint q = apply_symmetry(s, R3, p);
    EXPECT_LT((q.c.head<3>() - p.c.head<3>()).norm(), 1e-15);
    EXPECT_LT(std::abs(std::remainder(q.c(3) - t, 2 * M_PI)), 1e-15);
  }
}

TEST(Symmetry, DiagonalReflectionPermutesCaps) {
  const GHSpace s = GHSpace::multi_taub_nut(16.0);
  const auto& R4 = s.generators()[3];
  EXPECT_EQ(s.centre_image(R4.base, 0), 0);
  EXPECT_EQ(s.centre_image(R4.base, 1), 3);
  const ChartPoint p{1, Vec4(0.3, 0.2, -0.4, 0.6)};
  const ChartPoint q = apply_symmetry(s, R4, p);
  EXPECT_EQ(q.chart, 3);
  const ChartPoint tp = apply_symmetry(s, R4, to_trivialisation(s, p));
  const ChartPoint tq = to_trivialisation(s, q);
  EXPECT_LT((tp.c.head<3>() - tq.c.head<3>()).norm(), 1e-10);
  EXPECT_LT(std::abs(std::remainder(tp.c(3) - tq.c(3), 2 * M_PI)), 1e-10);
}

TEST(Symmetry, IsometryAndTripleActionIsSignedBaseMap) {
  const GHSpace s = GHSpace::multi_taub_nut(32.0);
  std::mt19937_64 rng(14);
  for (const auto& e : s.group())
    for (int k = 0; k < 20; ++k) {
      ChartPoint p{kTrivialisation, random_triv(rng, 30.0)};
      if (k % 2) p = ChartPoint{k % 4, random_q(rng, 3.0)};
      const ChartPoint q = apply_symmetry(s, e, p);
      const Mat4 D = symmetry_differential(s, e, p);
      EXPECT_LT((D.transpose() * metric(s, q) * D - metric(s, p)).cwiseAbs().maxCoeff(), 1e-9);
      const HKTriple Tp = hk_triple(s, p), Tq = hk_triple(s, q);
      const Mat3 A = e.eps * e.base;
      for (int i = 0; i < 3; ++i) {
        Mat4 expect = Mat4::Zero();
        for (int j = 0; j < 3; ++j) expect += A(i, j) * Tp.w[j];
        EXPECT_LT((D.transpose() * Tq.w[i] * D - expect).cwiseAbs().maxCoeff(), 1e-9);
      }
    }
}

TEST(Symmetry, FirstGeneratorNegatesOrthogonalForms) {
  const GHSpace s = GHSpace::multi_taub_nut(32.0);
  const auto& R1 = s.generators()[0];
  std::mt19937_64 rng(15);
  for (int k = 0; k < 20; ++k) {
    const ChartPoint p{kTrivialisation, random_triv(rng, 20.0)};
    const ChartPoint q = apply_symmetry(s, R1, p);
    const Mat4 D = symmetry_differential(s, R1, p);
    const HKTriple Tp = hk_triple(s, p), Tq = hk_triple(s, q);
    EXPECT_LT((D.transpose() * Tq.w[0] * D - Tp.w[0]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((D.transpose() * Tq.w[1] * D + Tp.w[1]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((D.transpose() * Tq.w[2] * D + Tp.w[2]).cwiseAbs().maxCoeff(), 1e-12);
  }
}
