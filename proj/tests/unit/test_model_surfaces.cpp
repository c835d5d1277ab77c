#include <gtest/gtest.h>

#include <random>

#include "ghsurf/model_surfaces.hpp"

using namespace ghsurf;

namespace {
double bisect(const std::function<double(double)>& f, double a, double b) {
  for (int k = 0; k < 200; ++k) {
    const double c = 0.5 * (a + b);
    (f(a) * f(c) <= 0 ? b : a) = c;
  }
  return 0.5 * (a + b);
}
constexpr double kS2 = 0.70710678118654752440;
}  // namespace

TEST(Scherk, ProjectionFixesTheOrigin) {
  const ScherkSurface s;
  EXPECT_EQ(scherk_project(s, Vec3::Zero()), Vec3::Zero());
}

TEST(Scherk, ProjectionLandsOnTheLevelSet) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int periods : {1, 2})
    for (double m : {1.0, 1.1}) {
      ScherkSurface s;
      s.periods = periods;
      s.m = m;
      s.tau = M_PI / (2 * periods);
      int n = 0;
      while (n < 100) {
        const Vec3 g(U(rng), U(rng), 3 * U(rng));
        if (!(std::abs(s.level(g)) < 0.5)) continue;
        EXPECT_LT(std::abs(s.level(scherk_project(s, g))), 1e-12);
        ++n;
      }
    }
  EXPECT_THROW(scherk_project(ScherkSurface{}, Vec3(3, 0.5, 0)), DomainError);
}

TEST(Scherk, GraphValueAgainstBisection) {
  ScherkSurface s;
  s.t0 = 0.5;
  const double oracle = bisect([](double v) { return std::sinh(1.0) * std::sinh(v) - 1.0; }, 0, 2);
  EXPECT_NEAR(oracle, 0.7719368329, 1e-9);
  EXPECT_NEAR(scherk_end_profile(s, 0, 1.0, M_PI / 2), oracle, 1e-14);
  // the same point via projection along v only
  const double v = scherk_end_profile(s, 0, 1.0, M_PI / 2);
  EXPECT_LT(std::abs(s.level(Vec3(kS2 * (1 - v), kS2 * (1 + v), M_PI / 2))), 1e-14);
}

TEST(Scherk, EndProfileProperties) {
  const ScherkSurface s;
  for (double x : {3.0, 5.0, 9.0}) {
    EXPECT_EQ(scherk_end_profile(s, 1, x, 0.0), 0.0);
    for (double ph : {0.3, 1.1, 2.5})
      EXPECT_DOUBLE_EQ(scherk_end_profile(s, 2, x, ph), -scherk_end_profile(s, 2, x, -ph));
  }
  double prev = 0;
  for (double x : {6.0, 8.0, 10.0}) {
    const double r = scherk_end_profile(s, 0, x, M_PI / 2) * std::exp(x);
    EXPECT_NEAR(r, 2.0, 2e-5 + 10 * std::exp(-2 * x));
    if (prev) EXPECT_LT(std::abs(r - 2), std::abs(prev - 2));
    prev = r;
  }
  EXPECT_THROW(scherk_end_profile(s, 0, 2.9, 1.0), DomainError);
}

TEST(Scherk, EndsAreGraphsWithTheSameProfile) {
  ScherkSurface s;
  s.tau = M_PI / 2;
  for (int e = 0; e < 4; ++e)
    for (double x : {3.0, 4.5})
      for (double ph : {-1.0, 0.4, 2.0}) {
        const double w = scherk_end_profile(s, e, x, ph);
        const Vec2 p = x * scherk_end_direction(e) + w * scherk_end_normal(e);
        EXPECT_LT(std::abs(s.level(Vec3(p(0), p(1), ph + s.tau))), 1e-12);
      }
}

TEST(Scherk, EndProfileDecayConstant) {
  const ScherkSurface s;
  double C = 0;
  for (double x = 3; x <= 12; x += 0.25)
    for (double ph = 0; ph < 2 * M_PI; ph += 0.1)
      C = std::max(C, std::abs(scherk_end_profile(s, 0, x, ph)) * std::exp(x));
  EXPECT_LT(C, 2.01);
}

TEST(Scherk, GaussMapAtTheSaddleIsVertical) {
  const ScherkSurface s;
  const Vec3 N = scherk_gauss_map(s, Vec3::Zero());
  EXPECT_NEAR(std::abs(N(2)), 1.0, 1e-15);
}

TEST(Scherk, GaussMapInverseRoundTrip) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int periods : {1, 2}) {
    ScherkSurface s;
    s.periods = periods;
    s.m = 1.0625;
    s.tau = M_PI / (2 * periods);
    for (int k = 0; k < 200; ++k) {
      Vec3 N(U(rng), U(rng), U(rng));
      N.normalize();
      for (int b = 0; b < periods; ++b) {
        const Vec3 p = scherk_gauss_inverse(s, N, b);
        EXPECT_LT(std::abs(s.level(p)), 1e-9 * (1 + std::abs(s.level_gradient(p).norm())));
        EXPECT_LT((scherk_gauss_map(s, p) - N).norm(), 1e-9);
      }
    }
  }
}

TEST(Scherk, GaussImageFractionTendsToOne) {
  const ScherkSurface s;
  double prev = 0;
  for (double T : {1.0, 6.0, 9.0, 12.0}) {
    const double f = scherk_gauss_image_fraction(s, T, 200000, 3);
    // four disjoint polar caps of height 1 - tanh(T) are missed
    const double exact = 1 - 2 * (1 - std::tanh(T));
    EXPECT_NEAR(f, exact, 5e-3);
    EXPECT_GE(f, prev);
    prev = f;
  }
  EXPECT_GT(prev, 0.999);
}

TEST(Scherk, GaussMapIsConformalWithFactorHalfII) {
  ScherkSurface s;
  s.m = 1.2;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1, 1);
  const double r = std::sqrt(s.m);
  for (int k = 0; k < 30; ++k) {
    Vec3 N(U(rng), U(rng), U(rng));
    N.normalize();
    const Vec3 p = scherk_gauss_inverse(s, N);
    // tangent basis in orthonormal coordinates, pushed through the Gauss map by differences
    const Vec3 g = scherk_gauss_map(s, p);
    Vec3 a = g.cross(Vec3(0.3, 0.5, 0.7)).normalized();
    Vec3 b = g.cross(a);
    const double h = 1e-6;
    double ratio = 0;
    for (const Vec3& dir : {a, b}) {
      const Vec3 dx(dir(0) / r, dir(1) / r, dir(2) * r);  // coordinate displacement
      const Vec3 pp = scherk_project(s, p + h * dx), pm = scherk_project(s, p - h * dx);
      ratio += (scherk_gauss_map(s, pp) - scherk_gauss_map(s, pm)).squaredNorm() / (4 * h * h);
    }
    EXPECT_NEAR(ratio, scherk_second_fundamental_norm2(s, p), 1e-4 * (1 + ratio));
  }
}

TEST(Scherk, KernelCoefficients) {
  ScherkSurface s;
  s.m = 1.1;
  const Vec3 p = scherk_gauss_inverse(s, Vec3(0.2, -0.4, 0.3).normalized());
  const auto X = scherk_kernel_coefficients(s, p);
  EXPECT_EQ(X[3], Vec2(0, 1));
  const Vec3 n = scherk_normal_vector(s, p);
  // <nu1, d_x1> = m n^x1, <nu1, d_t> = n^t / m
  EXPECT_NEAR(X[0](0), s.m * n(0), 1e-14);
  EXPECT_NEAR(X[1](0), s.m * n(1), 1e-14);
  EXPECT_NEAR(X[2](0), n(2) / s.m, 1e-14);
  EXPECT_NEAR(s.m * (n(0) * n(0) + n(1) * n(1)) + n(2) * n(2) / s.m, 1.0, 1e-14);
}

TEST(Cigar, SubstitutionValues) {
  const CigarGeometry c = cigar_geometry(0.5);
  EXPECT_DOUBLE_EQ(c.phi, 2.0);
  EXPECT_NEAR(c.fibre_length, 2 * M_PI / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cigar_geometry(1e8).fibre_length, 2 * M_PI, 1e-7);
  double prev = 0;
  for (double x : {0.1, 1.0, 10.0, 100.0}) {
    EXPECT_GT(cigar_geometry(x).fibre_length, prev);
    prev = cigar_geometry(x).fibre_length;
  }
}

TEST(Cigar, TotalCurvatureIsTwoPi) {
  // closed form of the truncated integral: 2 pi (1 - (2 xmax + 1)^{-2})
  for (double xmax : {5.0, 60.0}) {
    const double exact = 2 * M_PI * (1 - 1 / std::pow(2 * xmax + 1, 2));
    EXPECT_NEAR(cigar_total_curvature(xmax), exact, 1e-6);
  }
  EXPECT_NEAR(cigar_total_curvature(1e4, 200000), 2 * M_PI, 1e-6);
}

TEST(Cigar, GrowingSectionIsHolomorphicWithNormRho) {
  const Section a = [](double x, double t) {
    const double phi = 1 + 1 / (2 * x);
    return cigar_rho(x) * std::exp(std::complex<double>(0, -t)) * std::sqrt(phi);
  };
  const DbarReport r = cigar_dbar_check(a, 0.1, 4.0, 60, 16, cigar_rho);
  EXPECT_LT(r.residual, 1e-8);
  EXPECT_LT(r.max_norm_error, 1e-8);
  EXPECT_NEAR(cigar_rho(1.0), M_E, 1e-15);
  for (double v : r.frame_norm) EXPECT_GT(v, 0);
}

TEST(Cigar, SingularSectionIsHolomorphicAndBlowsUp) {
  const Section a = [](double x, double) { return std::complex<double>(std::sqrt(1 + 1 / (2 * x))); };
  const DbarReport r = cigar_dbar_check(a, 0.1, 4.0);
  EXPECT_LT(r.residual, 1e-8);
  const DbarReport r2 = cigar_dbar_check(a, 1e-2, 1.0, 10);
  EXPECT_GT(r2.norm.front(), 7.0);
  EXPECT_GT(r2.norm.front(), r.norm.front());
}

TEST(Cigar, ConstantSectionIsNotHolomorphic) {
  const Section a = [](double, double) { return std::complex<double>(1.0); };
  const DbarReport r = cigar_dbar_check(a, 1.0, 1.0, 1, 4);
  // e1(phi^{-1/2}) at x1 = 1: phi = 3/2, d phi / dx = -1/2
  const double e1 = std::pow(1.5, -0.5) * (-0.5) * std::pow(1.5, -1.5) * (-0.5);
  const double rel = std::abs(e1) / (std::abs(e1) + std::pow(1.5, -0.5));
  EXPECT_NEAR(r.residual, rel, 1e-9);
  EXPECT_GT(r.residual, 1e-3);
}

TEST(Cigar, NonPeriodicSectionIsRejected) {
  const Section a = [](double, double t) { return std::complex<double>(t); };
  EXPECT_THROW(cigar_dbar_check(a, 0.1, 1.0), DomainError);
}

TEST(Blocks, ModelDescriptors) {
  EXPECT_EQ(block_model(BlockKind::Scherk).operator_pair, "(Delta_S2 + 2, Delta_S2)");
  EXPECT_EQ(block_model(BlockKind::Cylinder).operator_pair, "(Delta_C, Delta_C)");
}
