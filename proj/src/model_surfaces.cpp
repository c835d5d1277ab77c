#include "ghsurf/model_surfaces.hpp"

#include <cmath>
#include <random>

namespace ghsurf {

namespace {
constexpr double kS2 = 0.70710678118654752440;

// Orthonormal-frame scaling: X = sqrt(m) x, T = t / sqrt(m).
Mat3 frame_scale(double m) {
  const double r = std::sqrt(m);
  return Vec3(1 / r, 1 / r, r).asDiagonal();
}
}  // namespace

double ScherkSurface::level(const Vec3& p) const {
  const double u = kS2 * (p(0) + p(1)), v = kS2 * (p(1) - p(0));
  return std::sinh(k() * u) * std::sinh(k() * v) - std::sin(periods * (p(2) - tau));
}

Vec3 ScherkSurface::level_gradient(const Vec3& p) const {
  const double K = k();
  const double u = kS2 * (p(0) + p(1)), v = kS2 * (p(1) - p(0));
  const double Fu = K * std::cosh(K * u) * std::sinh(K * v);
  const double Fv = K * std::sinh(K * u) * std::cosh(K * v);
  return Vec3(kS2 * (Fu - Fv), kS2 * (Fu + Fv), -periods * std::cos(periods * (p(2) - tau)));
}

Mat3 ScherkSurface::level_hessian(const Vec3& p) const {
  const double K = k();
  const double u = kS2 * (p(0) + p(1)), v = kS2 * (p(1) - p(0));
  const double Fuu = K * K * std::sinh(K * u) * std::sinh(K * v);
  const double Fuv = K * K * std::cosh(K * u) * std::cosh(K * v);
  // d/dx1 = kS2 (d_u - d_v), d/dx2 = kS2 (d_u + d_v)
  Mat3 H = Mat3::Zero();
  H(0, 0) = 0.5 * (Fuu - 2 * Fuv + Fuu);
  H(1, 1) = 0.5 * (Fuu + 2 * Fuv + Fuu);
  H(0, 1) = H(1, 0) = 0.5 * (Fuu - Fuu);
  H(2, 2) = periods * periods * std::sin(periods * (p(2) - tau));
  return H;
}

Vec2 scherk_end_direction(int end) {
  static const Vec2 dirs[4] = {Vec2(kS2, kS2), Vec2(kS2, -kS2), Vec2(-kS2, -kS2), Vec2(-kS2, kS2)};
  if (end < 0 || end > 3) throw DomainError("end label must be 0..3");
  return dirs[end];
}

Vec2 scherk_end_normal(int end) {
  const Vec2 e = scherk_end_direction(end);
  // Alternating rotation makes the graph function identical on all four ends.
  return (end % 2 == 0) ? Vec2(-e(1), e(0)) : Vec2(e(1), -e(0));
}

Vec3 scherk_project(const ScherkSurface& s, const Vec3& guess) {
  if (!(std::abs(s.level(guess)) < 0.5)) throw DomainError("projection guess too far from the surface");
  Vec3 x = guess;
  for (int it = 0; it < 50; ++it) {
    const double F = s.level(x);
    if (std::abs(F) < 1e-12) return x;
    const Vec3 g = s.level_gradient(x);
    const double n2 = g.squaredNorm();
    if (n2 < 1e-24) throw DomainError("level gradient vanishes during projection");
    x -= F / n2 * g;
  }
  if (std::abs(s.level(x)) < 1e-12) return x;
  throw DomainError("projection did not converge in 50 steps");
}

double scherk_end_profile(const ScherkSurface& s, int end, double arclength, double phi) {
  scherk_end_direction(end);
  if (arclength < s.t0) throw DomainError("end profile requested below t0");
  const double K = s.k();
  return std::asinh(std::sin(s.periods * phi) / std::sinh(K * arclength)) / K;
}

Vec3 scherk_gauss_map(const ScherkSurface& s, const Vec3& p) {
  const Vec3 g = frame_scale(s.m) * s.level_gradient(p);
  return g.normalized();
}

Vec3 scherk_gauss_inverse(const ScherkSurface& s, const Vec3& N, int branch) {
  const double Nu = kS2 * (N(0) + N(1)), Nv = kS2 * (N(1) - N(0));
  if (std::abs(Nu) >= 1 || std::abs(Nv) >= 1) throw DomainError("Gauss image of an end");
  if (branch < 0 || branch >= s.periods) throw DomainError("branch out of range");
  const double K = s.k();
  const double u = std::atanh(Nv) / K, v = std::atanh(Nu) / K;
  const double th = std::atan2(Nu * Nv, -N(2)) + 2 * M_PI * branch;
  return Vec3(kS2 * (u - v), kS2 * (u + v), th / s.periods + s.tau);
}

double scherk_gauss_image_fraction(const ScherkSurface& s, double T, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> G;
  int hit = 0;
  for (int k = 0; k < samples; ++k) {
    Vec3 N(G(rng), G(rng), G(rng));
    N.normalize();
    const double Nu = kS2 * (N(0) + N(1)), Nv = kS2 * (N(1) - N(0));
    if (std::abs(Nu) >= 1 || std::abs(Nv) >= 1) continue;
    const double u = std::atanh(Nv) / s.k(), v = std::atanh(Nu) / s.k();
    if (std::max(std::abs(u), std::abs(v)) <= T) ++hit;
  }
  return static_cast<double>(hit) / samples;
}

double scherk_second_fundamental_norm2(const ScherkSurface& s, const Vec3& p) {
  const Mat3 D = frame_scale(s.m);
  const Vec3 g = D * s.level_gradient(p);
  const Mat3 H = D * s.level_hessian(p) * D;
  const Vec3 n = g.normalized();
  const Mat3 P = Mat3::Identity() - n * n.transpose();
  const Mat3 II = P * H * P / g.norm();
  return II.squaredNorm();
}

Vec3 scherk_normal_vector(const ScherkSurface& s, const Vec3& p) {
  return frame_scale(s.m) * scherk_gauss_map(s, p);
}

std::array<Vec2, 4> scherk_kernel_coefficients(const ScherkSurface& s, const Vec3& p) {
  const Vec3 N = scherk_gauss_map(s, p);
  const double r = std::sqrt(s.m);
  return {Vec2(r * N(0), 0), Vec2(r * N(1), 0), Vec2(N(2) / r, 0), Vec2(0, 1)};
}

CigarGeometry cigar_geometry(double x1, double ell) {
  if (x1 < 0) throw DomainError("cigar coordinate must be non-negative");
  CigarGeometry c;
  if (x1 == 0) {
    c.phi = std::numeric_limits<double>::infinity();
    c.g11 = c.phi;
    c.gtt = 0;
    c.fibre_length = 0;
    return c;
  }
  c.phi = 1 / ell + 1 / (2 * x1);
  c.g11 = c.phi;
  c.gtt = 1 / c.phi;
  c.fibre_length = 2 * M_PI / std::sqrt(c.phi);
  return c;
}

double cigar_total_curvature(double xmax, int n, double ell) {
  // rho = sqrt(2 x1): E = phi rho^2, G = 1/phi, sqrt(EG) = rho.
  auto sqrtG = [&](double r) { return r / std::sqrt(r * r / ell + 1); };
  auto sqrtE = [&](double r) { return std::sqrt(r * r / ell + 1); };
  const double dl = 1e-4;
  auto h = [&](double r) { return (sqrtG(r + dl) - sqrtG(r - dl)) / (2 * dl) / sqrtE(r); };
  auto integrand = [&](double r) { return -(h(r + dl) - h(r - dl)) / (2 * dl); };
  const double R = std::sqrt(2 * xmax);
  if (n % 2) ++n;
  const double dr = R / n;
  double acc = integrand(0) + integrand(R);
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4 : 2) * integrand(k * dr);
  return 2 * M_PI * acc * dr / 3;
}

double cigar_rho(double x1) { return std::sqrt(x1) * std::exp(x1); }

DbarReport cigar_dbar_check(const Section& a, double xmin, double xmax, int nx, int nt,
                            const std::function<double(double)>& expected_norm, double ell) {
  const double h = 1e-3;
  if (xmin - 3 * h <= 0) throw DomainError("dbar check needs xmin > 3h");
  for (int i = 0; i <= 4; ++i) {
    const double x = xmin + (xmax - xmin) * i / 4;
    const auto a0 = a(x, 0.0), a1 = a(x, 2 * M_PI);
    if (std::abs(a0 - a1) > 1e-9 * (1 + std::abs(a0))) throw DomainError("section not periodic in t");
  }
  auto phi = [&](double x) { return 1 / ell + 1 / (2 * x); };
  auto f = [&](double x, double t) { return a(x, t) / std::sqrt(phi(x)); };
  static const double c[3] = {45.0 / 60, -9.0 / 60, 1.0 / 60};
  DbarReport rep;
  for (int i = 0; i < nx; ++i) {
    const double x = xmin + (xmax - xmin) * i / std::max(1, nx - 1);
    double nrm = 0, fnrm = 0;
    for (int j = 0; j < nt; ++j) {
      const double t = 2 * M_PI * j / nt;
      std::complex<double> fx = 0, ft = 0;
      for (int k = 1; k <= 3; ++k) {
        fx += c[k - 1] * (f(x + k * h, t) - f(x - k * h, t));
        ft += c[k - 1] * (f(x, t + k * h) - f(x, t - k * h));
      }
      fx /= h;
      ft /= h;
      const std::complex<double> e1 = fx / std::sqrt(phi(x));
      const std::complex<double> e0 = -ft * std::sqrt(phi(x));
      const std::complex<double> res = e1 + std::complex<double>(0, 1) * e0;
      const double scale = std::abs(e1) + std::abs(e0) + std::abs(f(x, t));
      rep.residual = std::max(rep.residual, std::abs(res) / scale);
      nrm = std::max(nrm, std::abs(a(x, t)));
      fnrm = std::max(fnrm, std::abs(f(x, t)));
      if (expected_norm) {
        const double e = expected_norm(x);
        rep.max_norm_error = std::max(rep.max_norm_error, std::abs(std::abs(f(x, t)) - e) / e);
      }
    }
    rep.x1.push_back(x);
    rep.norm.push_back(nrm);
    rep.frame_norm.push_back(fnrm);
  }
  return rep;
}

BlockJacobiModel block_model(BlockKind kind) {
  switch (kind) {
    case BlockKind::Scherk:
      return {kind, "(Delta_S2 + 2, Delta_S2)", "|II|^2 / 2 via the Gauss map"};
    case BlockKind::Cylinder:
      return {kind, "(Delta_C, Delta_C)", "1"};
    case BlockKind::Cigar:
      return {kind, "dbar on (e2 - i e3) with a = phi^{1/2}, rho e^{-it} phi^{1/2}", "1"};
  }
  throw DomainError("unknown block kind");
}

}  // namespace ghsurf
