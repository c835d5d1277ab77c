#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>

#include "ghsurf/geometry.hpp"

namespace ghsurf {

// Scherk tower sinh(k u) sinh(k v) = sin(n (t - tau)), k = n m, with
// u = (x1 + x2)/sqrt2, v = (x2 - x1)/sqrt2. Minimal for m dx.dx + dt^2/m.
// Points are (x1, x2, t); x3 = 0.
struct ScherkSurface {
  int periods = 1;
  double m = 1.0;
  double tau = 0.0;
  double t0 = 3.0;  // ends are graphs beyond this arclength

  double k() const { return periods * m; }
  double level(const Vec3& p) const;
  Vec3 level_gradient(const Vec3& p) const;
  Mat3 level_hessian(const Vec3& p) const;
};

// Unit directions of the four ends: end e points along p_hat_e, graph direction p_hat_perp_e.
Vec2 scherk_end_direction(int end);
Vec2 scherk_end_normal(int end);

Vec3 scherk_project(const ScherkSurface& s, const Vec3& guess);

// Graph value w over the end cylinder: point = s p_hat + w p_hat_perp, fibre angle phi.
double scherk_end_profile(const ScherkSurface& s, int end, double arclength, double phi);

// Unit normal in the orthonormal frame (sqrt(m) dx1, sqrt(m) dx2, dt / sqrt(m)).
Vec3 scherk_gauss_map(const ScherkSurface& s, const Vec3& p);
// Preimage of a unit vector on period `branch`; ends (N on the four end normals) throw.
Vec3 scherk_gauss_inverse(const ScherkSurface& s, const Vec3& N, int branch = 0);
// Monte-Carlo area fraction of S^2 covered by the Gauss image of max(|u|,|v|) <= T.
double scherk_gauss_image_fraction(const ScherkSurface& s, double T, int samples, unsigned seed);
// |II|^2 of the tower in its flat metric.
double scherk_second_fundamental_norm2(const ScherkSurface& s, const Vec3& p);

// Bounded Jacobi fields as coefficients against (nu_1, nu_2), nu_2 = d/dx3 normalised:
// X1 = <nu1, d_x1> nu1, X2 = <nu1, d_x2> nu1, X3 = <nu1, d_t> nu1, X4 = nu2.
std::array<Vec2, 4> scherk_kernel_coefficients(const ScherkSurface& s, const Vec3& p);
// Unit normal nu_1 as a coordinate vector in (x1, x2, t).
Vec3 scherk_normal_vector(const ScherkSurface& s, const Vec3& p);

// Cigar: S^1-invariant disc over the ray x1 >= 0 through a Taub-NUT centre.
struct CigarGeometry {
  double phi = 1.0;
  double g11 = 1.0;  // coefficient of dx1^2
  double gtt = 1.0;  // coefficient of dt^2
  double fibre_length = 2 * M_PI;
};
CigarGeometry cigar_geometry(double x1, double ell = 1.0);
// Total Gaussian curvature by quadrature in rho = sqrt(2 x1) up to x1 = xmax.
double cigar_total_curvature(double xmax = 60.0, int n = 20000, double ell = 1.0);

// Section a(x1, t) (e2 - i e3) of the cigar normal bundle; frames e0 = -phi^{1/2} d_t,
// e1 = phi^{-1/2} d_x1. Residual e1(f) + i e0(f), f = a phi^{-1/2}, by sixth-order differences.
struct DbarReport {
  double residual = 0.0;        // sup |res| / (|e1 f| + |e0 f| + |f|)
  double max_norm_error = 0.0;  // sup | |f| - expected | / expected, if an expectation is given
  std::vector<double> x1;
  std::vector<double> norm;        // max over t of |a|
  std::vector<double> frame_norm;  // max over t of |f| = |a| phi^{-1/2}
};
using Section = std::function<std::complex<double>(double x1, double t)>;
DbarReport cigar_dbar_check(const Section& a, double xmin, double xmax, int nx = 60, int nt = 16,
                            const std::function<double(double)>& expected_norm = nullptr,
                            double ell = 1.0);
double cigar_rho(double x1);

enum class BlockKind { Scherk, Cylinder, Cigar };
struct BlockJacobiModel {
  BlockKind kind;
  std::string operator_pair;  // model operators on (nu_1, nu_2)
  std::string weight;         // conformal weight relating the model to L
};
BlockJacobiModel block_model(BlockKind kind);

}  // namespace ghsurf
