#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghsurf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Chart id: kTrivialisation for (x1,x2,x3,t); 0..k-1 for the cap chart of centre k.
inline constexpr int kTrivialisation = -1;

struct ChartPoint {
  int chart = kTrivialisation;
  Vec4 c = Vec4::Zero();
};

struct MetricJet {
  ChartPoint at;
  Mat4 g = Mat4::Identity();
  std::array<Mat4, 4> dg{};     // dg[k](i,j) = d_k g_ij
  std::array<Mat4, 4> gamma{};  // gamma[k](i,j) = Gamma^k_ij
};

struct HKTriple {
  ChartPoint at;
  std::array<Mat4, 3> w{};  // w[i](a,b) = omega_i(e_a, e_b)
};

// Element of the symmetry group: base map B, fibre map t -> eps*t + c.
struct SymmetryElement {
  std::string label;
  Mat3 base = Mat3::Identity();
  int eps = 1;
  double c = 0.0;
};

struct GaugeGridSpec {
  int nr = 64;
  int nalpha = 48;
  int nbeta = 96;
  double rmax_frac = 0.95;    // cache covers |x| <= rmax_frac * d
  double declared_tol = 5e-3; // bound on |cache - radial gauge| checked at build
};

struct SpaceConfig {
  double d = 32.0;
  double ell = 1.0;
  int periods = 1;  // Scherk periods n, fixes the fibre lifts
  bool build_cache = false;
  GaugeGridSpec grid;
  std::string cache_dir;  // empty: no persistence
};

// Radial-gauge connection samples on a spherical grid, cubic interpolation.
class GaugeCache {
 public:
  GaugeCache(const class GHSpace& space, const GaugeGridSpec& spec);
  static std::unique_ptr<GaugeCache> load(const std::string& path, const GaugeGridSpec& spec,
                                          std::uint64_t hash);
  void save(const std::string& path, std::uint64_t hash) const;

  // Spherical components (a_alpha, a_beta) of the connection at x.
  Vec2 eval(const Vec3& x) const;
  double rmax() const { return rmax_; }
  double measured_error() const { return measured_error_; }
  const GaugeGridSpec& spec() const { return spec_; }

 private:
  GaugeCache() = default;
  double sample(int comp, int ir, int ia, int ib) const;
  GaugeGridSpec spec_;
  double rmax_ = 0.0;
  double measured_error_ = 0.0;
  std::vector<double> aa_, ab_;  // [ir][ia][ib]
};

class GHSpace {
 public:
  GHSpace(std::vector<Vec3> centres, double ell, double d, int periods = 1);

  static GHSpace multi_taub_nut(const SpaceConfig& cfg);
  static GHSpace multi_taub_nut(double d, int periods = 1);
  static GHSpace taub_nut(double ell = 1.0);
  // No centres, phi = m: the flat metric m dx.dx + dt^2/m with the square's symmetries.
  static GHSpace flat(double m = 1.0, int periods = 1);
  // 2k centres on a regular polygon of circumradius d in the x3 = 0 plane.
  static GHSpace polygon(int k, double d);

  const std::vector<Vec3>& centres() const { return centres_; }
  int centre_count() const { return static_cast<int>(centres_.size()); }
  double ell() const { return ell_; }
  double d() const { return d_; }
  int periods() const { return periods_; }
  bool is_x_d() const { return x_d_; }
  // Fibre offset of the Scherk block, fixed by the fibre lifts.
  double tau() const;
  std::uint64_t content_hash() const;

  // Rotation with R e1 = unit(p_i), used by cap chart i.
  const Mat3& cap_rotation(int i) const { return cap_rot_[i]; }

  void attach_cache(std::shared_ptr<const GaugeCache> cache) { cache_ = std::move(cache); }
  const GaugeCache* gauge_cache() const { return cache_.get(); }

  bool has_group() const { return !group_.empty(); }
  const std::vector<SymmetryElement>& group() const;
  const std::vector<SymmetryElement>& generators() const;
  // Permutation of centres induced by a base map.
  int centre_image(const Mat3& base, int i) const;

 private:
  std::vector<Vec3> centres_;
  std::vector<Mat3> cap_rot_;
  double ell_;
  double d_;
  int periods_;
  bool x_d_ = false;
  std::shared_ptr<const GaugeCache> cache_;
  double triv_radius_ = 0.0;
  double cap_radius_ = 0.0;
  std::vector<SymmetryElement> gens_, group_;
  std::vector<std::vector<Mat4>> cap_maps_;  // [element][cap] linear map on q
  void build_group();

 public:
  double trivialisation_radius() const { return triv_radius_; }
  double cap_radius() const { return cap_radius_; }
  const Mat4& cap_map(int element, int cap) const { return cap_maps_[element][cap]; }
  int element_index(const SymmetryElement& s) const;
};

// Potential phi = 1/ell + sum 1/(2|x - p_i|).
double potential(const GHSpace& space, const Vec3& x);
Vec3 potential_gradient(const GHSpace& space, const Vec3& x);
// Closed-form radial-gauge connection (a_r = 0, a(0) = 0) in Cartesian components.
Vec3 connection(const GHSpace& space, const Vec3& x);
// Spherical components (a_alpha, a_beta) from the gauge cache (polar axis x3).
Vec2 connection_radial_gauge(const GHSpace& space, const Vec3& x);
// Same components from the closed form.
Vec2 connection_radial_gauge_exact(const GHSpace& space, const Vec3& x);

// Chart handling.
bool chart_valid(const GHSpace& space, const ChartPoint& p);
void require_chart(const GHSpace& space, const ChartPoint& p);
ChartPoint to_trivialisation(const GHSpace& space, const ChartPoint& p);
ChartPoint to_cap(const GHSpace& space, int i, const ChartPoint& p);
ChartPoint to_chart(const GHSpace& space, int chart, const ChartPoint& p);
// Base point x of a chart point.
Vec3 base_point(const GHSpace& space, const ChartPoint& p);
// Jacobian d(x,t)/dq of cap chart i at q.
Mat4 cap_to_trivialisation_jacobian(const GHSpace& space, int i, const Vec4& q);
// Quaternion helpers for the cap charts: y = (1/2) conj(q) i q.
Vec3 hopf(const Vec4& q);
Vec4 hopf_lift(const Vec3& y, double t);

Mat4 metric(const GHSpace& space, const ChartPoint& p);
MetricJet metric_jet(const GHSpace& space, const ChartPoint& p);
// Riemann tensor R^a_{bcd} by central differences of Christoffels (step h).
std::array<std::array<Mat4, 4>, 4> riemann(const GHSpace& space, const ChartPoint& p,
                                           double h = 1e-4);
HKTriple hk_triple(const GHSpace& space, const ChartPoint& p);
// Orientation of a chart relative to (x1,x2,x3,t).
int chart_orientation(const GHSpace& space, int chart);

// Symmetry action.
ChartPoint apply_symmetry(const GHSpace& space, const SymmetryElement& s, const ChartPoint& p);
// Differential of the symmetry between the chart of p and the chart of its image.
Mat4 symmetry_differential(const GHSpace& space, const SymmetryElement& s, const ChartPoint& p);
SymmetryElement compose(const SymmetryElement& a, const SymmetryElement& b);
bool same_element(const SymmetryElement& a, const SymmetryElement& b, double tol = 1e-12);

// 2-form helpers.
double wedge(const Mat4& a, const Mat4& b);  // coefficient of dx0^dx1^dx2^dx3
Mat4 hodge_star(const Mat4& w, const Mat4& g, int orientation);

}  // namespace ghsurf
