#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ghsurf/geometry.hpp"
#include "ghsurf/model_surfaces.hpp"

namespace ghsurf {

enum class Region : std::uint8_t { Scherk = 0, Neck = 1, Cap = 2 };
const char* region_name(Region r);

struct MeshVertex {
  ChartPoint pos;
  Region region = Region::Scherk;
  int arm = -1;     // -1 for core diagonal and saddle vertices
  int level = 0;    // ring index along the arm, continuing into the cap
  int fibre = 0;    // index into the fibre grid, -1 at a cap tip
  int patch = -1;   // core patch of a diagonal vertex
  double s = 0.0;   // arm coordinate (distance along p_hat); 0 in the core
  double theta = 0.0;
  bool boundary = false;
};

// Polygon with 3 or 4 vertices, counter-clockwise for the mesh orientation.
struct Face {
  std::array<int, 4> v{-1, -1, -1, -1};
  int n = 4;
};

struct MeshSpec {
  int fibre_points = 96;   // vertices per 2 pi of fibre
  double step = 0.0;       // longitudinal step; 0 selects 2 pi / fibre_points
  double growth = 0.15;    // spacing increase per unit length in graded segments
  double max_step = 1.5;
  double cap_rho = 1.0;    // rings with rho <= cap_rho use the cap chart
  int cap_rings = 16;
  double blend_lo = 1.0;   // core-to-arm blend window in scaled units
  double blend_hi = 2.5;
};

// Arrangement of the tower: truncated (Dirichlet ring at `truncate`) or closed through the caps.
struct TowerLayout {
  ScherkSurface scherk;
  double truncate = 0.0;
  double T1 = std::numeric_limits<double>::infinity();
  double T2 = std::numeric_limits<double>::infinity();
  std::function<double(double)> cutoff;  // chi(s), 1 below T1, 0 above T2
  bool caps = false;
};

class SurfaceMesh {
 public:
  std::vector<MeshVertex> verts;
  std::vector<Face> faces;
  std::vector<std::vector<int>> perm;  // [group element][vertex] -> image vertex
  int periods = 1;
  int fibre_points = 96;
  double step = 0.0;
  double T1 = 0.0, T2 = 0.0;
  int levels_uniform = 0;  // arm levels with constant step

  int vertex_count() const { return static_cast<int>(verts.size()); }
  int euler_characteristic() const;
  int genus() const { return 1 - euler_characteristic() / 2; }
  std::vector<std::vector<int>> vertex_neighbours() const;
  std::vector<std::vector<int>> vertex_faces() const;
  // Triangles of both diagonal splits of each quad (weight 1/2) and each triangle (weight 1).
  std::vector<std::pair<std::array<int, 3>, double>> weighted_triangles() const;
  // Vertex index of arm ring (arm, level, fibre) or -1.
  int arm_vertex(int arm, int level, int fibre) const;
  std::vector<int> arm_index;  // flattened lookup for arm_vertex
  int arm_levels = 0;
};

// Cosine-clustered fibre grid: K points per half period of the Scherk fibre function.
std::vector<double> fibre_grid(int fibre_points, int periods, double tau);

SurfaceMesh build_tower_mesh(const GHSpace& space, const TowerLayout& layout, const MeshSpec& spec);
// Taub-NUT cigar disc rho <= rho_max in the cap chart of the single centre, Dirichlet outer ring.
SurfaceMesh build_cigar_mesh(const GHSpace& taub_nut, double rho_max, const MeshSpec& spec);

// Fills mesh.perm by matching vertex images under every group element.
void compute_symmetry_permutations(const GHSpace& space, SurfaceMesh& mesh, double tol = 1e-8);
// Maximum distance between group images of vertices and their matched vertices.
double symmetry_defect(const GHSpace& space, const SurfaceMesh& mesh);

}  // namespace ghsurf
