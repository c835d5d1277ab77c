#pragma once

#include <Eigen/Sparse>

#include <random>
#include <string>
#include <vector>

#include "ghsurf/gluing.hpp"

namespace ghsurf {

// Per-vertex coefficients against the normal frame (n1, n2).
using NormalField = std::vector<Vec2>;

double sup_norm(const NormalField& v);
double l2_norm(const NormalField& v, const std::vector<double>& mass);
// sup |nu| + h sup |D nu| + h^2 sup |D^2 nu| with stencil derivatives of the coefficients.
double c2_proxy(const InitialSurface& s, const NormalField& v);

// Lumped vertex areas of the mesh at the given positions.
std::vector<double> vertex_masses(const GHSpace& space, const SurfaceMesh& mesh, const std::vector<ChartPoint>& pos);
// Smooth random field: low-frequency trigonometric functions of (x, t) against the frame.
NormalField smooth_random_field(const GHSpace& space, const InitialSurface& s, std::mt19937& rng,
                                double wavenumber = 0.3);

// Displaced vertex positions X + nu^k n_k in each vertex's chart.
std::vector<ChartPoint> graph_immersion(const GHSpace& space, const InitialSurface& s, const NormalField& nu,
                                        double max_norm = 0.2);
// Mean curvature of the displaced surface in its re-orthonormalised normal frame.
NormalField mean_curvature_of_graph(const GHSpace& space, const InitialSurface& s, const NormalField& nu);
// Same at one vertex, given all displaced positions.
Vec2 graph_mean_curvature_at(const GHSpace& space, const InitialSurface& s, const std::vector<ChartPoint>& pos,
                             int i);
// Displaced frame at vertex i: tangents of the displaced jet, reference normals re-orthonormalised.
VertexFrame displaced_frame(const GHSpace& space, const InitialSurface& s, const SurfaceJet& jet, int i);

// Induced action on normal coefficients: (g.nu)(perm[g][i]) = mat[g][i] * nu(i), a signed permutation.
struct NormalAction {
  std::vector<std::vector<int>> perm;
  std::vector<std::vector<Mat2>> mat;
  std::vector<int> eps;  // fibre orientation of each element
};
NormalAction normal_action(const GHSpace& space, const InitialSurface& s);
NormalField act(const NormalAction& a, int g, const NormalField& nu);
// Group average; twisted = true averages with the character eps (the fibre-rotation irrep).
NormalField equivariant_project(const NormalAction& a, const NormalField& nu, bool twisted = false);

// Coordinates on the (twisted) equivariant subspace: one unknown per orbit and stabiliser-fixed direction.
struct ReducedBasis {
  std::vector<int> rep;
  std::vector<Vec2> dir;  // unit direction at the representative
  std::vector<std::vector<std::pair<int, Vec2>>> support;  // (vertex, value) of each unknown
  std::vector<int> orbit_size;
  int vertices = 0;
};
ReducedBasis reduced_basis(const NormalAction& a, int vertices, bool twisted = false);
NormalField expand(const ReducedBasis& b, const Eigen::VectorXd& c);
Eigen::VectorXd restrict_to(const ReducedBasis& b, const NormalField& nu);

using SpMat = Eigen::SparseMatrix<double>;

// Jacobi operator L = Delta_perp + A + R in weak form: L ~ M^{-1}(-K) + S + R.
struct JacobiSystem {
  SpMat K;                     // connection-Laplacian stiffness, 2V x 2V, symmetric positive
  SpMat P;                     // block-diagonal S + R (pointwise 2x2 blocks)
  std::vector<double> mass;    // lumped vertex areas
  std::vector<Mat2> shape2;    // sum <A_ij, n_k><A_ij, n_l>
  std::vector<Mat2> curvature; // sum <R(n_l, e_i) e_i, n_k>
  NormalAction action;
  double h = 0.0;              // mesh step
  // Generalised pencil A - lambda M with A = K - M P (negative lambda: unstable directions).
  SpMat stability_matrix() const;
  SpMat mass_matrix() const;
  NormalField apply(const NormalField& nu) const;  // pointwise L nu
};
JacobiSystem assemble_jacobi(const GHSpace& space, const InitialSurface& s,
                             const std::vector<ChartPoint>& pos, const std::vector<VertexFrame>& frames);
JacobiSystem assemble_jacobi(const GHSpace& space, const InitialSurface& s);

// Derivative of the discrete mean-curvature map on the reduced basis, by central differences.
SpMat reduced_jacobian(const GHSpace& space, const InitialSurface& s, const ReducedBasis& b,
                       const NormalField& nu, double eps = 1e-6);

struct SolverConfig {
  double r = 0.2;         // trust radius in the sup norm
  int max_iter = 12;
  double tol = 1e-6;      // stop on sup |H|
  double fd_eps = 1e-6;
  int q_samples = 6;
  unsigned seed = 7;
};

struct NewtonReport {
  NormalField nu;
  std::vector<double> history;   // sup |H| before each step and at the end
  std::vector<double> step_norm;
  int steps = 0;
  bool converged = false;
  double H0 = 0.0;               // sup |H(0)| on the reduced rows
  double C = 0.0;                // estimate of ||J^{-1}|| in the sup norm (empirical)
  double q = 0.0;                // fitted quadratic constant (empirical)
  double r = 0.0;
  double nu_norm = 0.0;
  double sigma_min = 0.0;        // smallest mass-weighted singular value of the reduced linearisation
  bool smallness_ok = false;     // 2 C H0 < r and 4 C^2 q H0 < 1
  bool bound_ok = false;         // ||nu*|| <= 2 C H0
  int unknowns = 0;
  std::string message;
};
NewtonReport newton_solve(const GHSpace& space, const InitialSurface& s, const SolverConfig& cfg = {});

// Higham-Hager estimate of ||A^{-1}||_inf from a factorised square matrix.
double inverse_inf_norm(const SpMat& A);

// Killing field of the fibre rotation projected to the normal frame.
NormalField killing_normal_field(const GHSpace& space, const std::vector<ChartPoint>& pos,
                                 const std::vector<VertexFrame>& frames);
// Fibre rotation generator as a coordinate vector in the chart of p.
Vec4 fibre_killing_vector(const ChartPoint& p);

// The solved surface: displaced positions and frames.
struct SolvedSurface {
  std::vector<ChartPoint> pos;
  std::vector<VertexFrame> frames;
};
SolvedSurface solved_surface(const GHSpace& space, const InitialSurface& s, const NormalField& nu);

}  // namespace ghsurf
