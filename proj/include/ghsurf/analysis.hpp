#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

#include "ghsurf/variation.hpp"

namespace ghsurf {

// Lowest eigenpairs of the pencil A - lambda diag(m), restricted to the free rows.
struct EigenSolution {
  std::vector<double> values;      // ascending
  Eigen::MatrixXd vectors;         // columns, m-normalised, full length (zero on fixed rows)
  std::vector<double> residuals;   // |M^{-1/2}(A v - lambda M v)|
  int iterations = 0;
  double shift = 0.0;
};
EigenSolution lowest_eigenpairs(const SpMat& A, const Eigen::VectorXd& m, const std::vector<bool>& fixed, int k,
                                double shift, double tol = 1e-13);
// Number of eigenvalues of the pencil below `shift` (LDL^T inertia).
int count_below(const SpMat& A, const Eigen::VectorXd& m, const std::vector<bool>& fixed, double shift);

// |<a, b>_M| / (|a|_M |b|_M)
double mass_correlation(const NormalField& a, const NormalField& b, const std::vector<double>& mass);
Eigen::VectorXd flatten(const NormalField& v);
NormalField unflatten(const Eigen::VectorXd& x);

struct SpectralReport {
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  std::vector<NormalField> fields;
  double h = 0.0;
  double threshold = 0.0;     // 10 h^2
  int negative = 0;           // lambda < -threshold
  int near_zero = 0;          // |lambda| <= threshold
  int inertia_negative = 0;   // LDL^T count below -threshold
  double shift = 0.0;
  std::vector<std::string> names;               // candidate fields
  std::vector<std::vector<double>> correlation;  // [candidate][eigenpair]
  int iterations = 0;
};
// Dirichlet rows are the mesh boundary vertices.
SpectralReport spectrum(const JacobiSystem& J, const SurfaceMesh& mesh, int k,
                        const std::vector<std::pair<std::string, NormalField>>& candidates = {});

struct WitnessReport {
  NormalField field;          // transplanted flat first Dirichlet eigenfield
  double value = 0.0;         // nu^T A nu / nu^T M nu on the surface
  double value_orth = 0.0;    // same after removing the Killing component
  double flat_eigenvalue = 0.0;
  double flat_value = 0.0;    // the witness on the flat control itself
  double transplant_defect = 0.0;  // max chart distance between matched vertices
  int matched = 0;
};
// Flat Scherk Dirichlet problem on the arms truncated at T1, transplanted by (arm, level, fibre).
WitnessReport second_variation_witness(const GHSpace& space, const InitialSurface& s, const JacobiSystem& J,
                                       const NormalField& killing);

// Positive Gauss lift a_i = -omega_i(e1, e2) / |.| at each vertex.
struct GaussLift {
  std::vector<Vec3> a;
  double degree = 0.0;      // signed spherical area / 4 pi
  double min_norm = 0.0;    // min |omega(e1, e2)| before normalising
};
GaussLift gauss_lift(const GHSpace& space, const SurfaceMesh& mesh, const std::vector<ChartPoint>& pos,
                     const std::vector<VertexFrame>& frames);
// Signed area of the spherical triangle (a, b, c).
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c);

// [S].[S] = 2 genus - 2 - 2 deg
int webster_self_intersection(int degree, int genus);

// Fibre winding of each neck ring at the level nearest (T1 + T2) / 2, oriented as the boundary
// of the core side. orientation = -1 reverses the surface.
std::array<double, 4> neck_windings(const GHSpace& space, const InitialSurface& s, const std::vector<ChartPoint>& pos,
                                    int orientation = 1);

// J_i = -G^{-1} W_i, so omega_i(X, Y) = g(J_i X, Y).
std::array<Mat4, 3> complex_structures(const GHSpace& space, const ChartPoint& p);

struct FueterReport {
  double sup = 0.0;         // sup over triangles of |da(j e1) - s a x da(e1)|
  double mean = 0.0;        // area-weighted mean of the same
  int sign = 1;             // s: +1 conformal, -1 anticonformal
  Vec3 periods = Vec3::Zero();   // int u^* omega_i, per-triangle quadrature
  Vec3 moments = Vec3::Zero();   // int x_i |grad u|^2 = 2 int a_i dA, vertex quadrature
  double area = 0.0;
  double route_gap = 0.0;        // max_i |moments_i + 2 periods_i| / (2 area)
  double nonholomorphic = 0.0;   // min over sampled a* of the RMS J_{a*} defect
};
FueterReport fueter_and_balancing(const GHSpace& space, const SurfaceMesh& mesh, const std::vector<ChartPoint>& pos,
                                  const std::vector<VertexFrame>& frames, const GaussLift& lift,
                                  int random_directions = 200, unsigned seed = 11);

// max over group elements and vertices of |g(X_i) - X_{perm(i)}| in the chart of the image.
double symmetry_defect(const GHSpace& space, const SurfaceMesh& mesh, const std::vector<ChartPoint>& pos);

struct TopologyReport {
  double degree_raw = 0.0;
  int degree = 0;
  int euler = 0;
  int genus = 0;
  int webster = 0;
  std::array<double, 4> windings_raw{};
  std::array<int, 4> windings{};
  double winding_margin = 0.0;   // min distance of the raw windings to the half-integers
  Vec3 periods = Vec3::Zero();
  FueterReport fueter;
  double cap_alignment = 0.0;    // max angle between tip lifts and +-p_i/|p_i|
};
TopologyReport topology_report(const GHSpace& space, const InitialSurface& s, const SolvedSurface& solved);

}  // namespace ghsurf
