#pragma once

#include <vector>

#include "ghsurf/geometry.hpp"
#include "ghsurf/mesh.hpp"

namespace ghsurf {

// Least-squares derivative weights on the face 2-ring of each vertex, in tangent coordinates
// of the reference mesh. Rows of w: d_a, d_b, d_aa, d_ab, d_bb applied to (X_j - X_i).
struct StencilSet {
  std::vector<std::vector<int>> idx;
  std::vector<Eigen::MatrixXd> w;
  std::vector<int> degree;
};

StencilSet build_stencils(const GHSpace& space, const SurfaceMesh& mesh, int degree = 4);

// Coordinates of q in the chart of p, fibre angle unwrapped to within pi of p's.
Vec4 coords_in_chart_of(const GHSpace& space, const ChartPoint& p, const ChartPoint& q);

struct SurfaceJet {
  ChartPoint at;
  std::array<Vec4, 2> d{Vec4::Zero(), Vec4::Zero()};                 // X_a, X_b
  std::array<Vec4, 3> dd{Vec4::Zero(), Vec4::Zero(), Vec4::Zero()};  // X_aa, X_ab, X_bb
};
SurfaceJet surface_jet(const GHSpace& space, const StencilSet& st, const std::vector<ChartPoint>& pos, int i);

// Mean-curvature vector (trace of the second fundamental form) in the chart of pos[i].
Vec4 mean_curvature_vector(const GHSpace& space, const SurfaceJet& jet);
std::vector<Vec4> mean_curvature_vectors(const GHSpace& space, const StencilSet& st,
                                         const std::vector<ChartPoint>& pos);
// Metric length of each mean-curvature vector.
std::vector<double> mean_curvature_norms(const GHSpace& space, const std::vector<ChartPoint>& pos,
                                         const std::vector<Vec4>& H);

std::vector<ChartPoint> reference_positions(const SurfaceMesh& mesh);

}  // namespace ghsurf
