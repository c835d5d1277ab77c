#include "ghsurf/geometry.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <cmath>
#include <cstring>
#include <map>
#include <random>
#include <sstream>

namespace ghsurf {

namespace {

using AD = Eigen::AutoDiffScalar<Eigen::Matrix<double, 4, 1>>;
template <class T>
using V3 = Eigen::Matrix<T, 3, 1>;
template <class T>
using V4 = Eigen::Matrix<T, 4, 1>;
template <class T>
using M4 = Eigen::Matrix<T, 4, 4>;

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_angle(double t) {
  double r = std::fmod(t, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

template <class T>
T norm3(const V3<T>& v) {
  using std::sqrt;
  return sqrt(v.squaredNorm());
}

// Radial-from-origin gauge of the monopole 1/(2|x-p|): string on the outward ray beyond p.
template <class T>
V3<T> monopole(const V3<T>& x, const Vec3& p) {
  const double pn = p.norm();
  const V3<T> pc = p.cast<T>();
  const V3<T> dx = x - pc;
  const T r = norm3<T>(dx);
  const T den = r * (pn * r + pn * pn - x.dot(pc));
  return (T(-0.5) / den) * x.cross(pc);
}

template <class T>
T phi_t(const GHSpace& s, const V3<T>& x, int skip = -1) {
  T v = T(1.0 / s.ell());
  for (int i = 0; i < s.centre_count(); ++i) {
    if (i == skip) continue;
    v += T(0.5) / norm3<T>(V3<T>(x - s.centres()[i].cast<T>()));
  }
  return v;
}

template <class T>
V3<T> conn_t(const GHSpace& s, const V3<T>& x, int skip = -1) {
  V3<T> a = V3<T>::Zero();
  for (int i = 0; i < s.centre_count(); ++i) {
    if (i == skip) continue;
    a += monopole<T>(x, s.centres()[i]);
  }
  return a;
}

template <class T>
V4<T> qmul(const V4<T>& a, const V4<T>& b) {
  V4<T> r;
  r(0) = a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3);
  r(1) = a(0) * b(1) + a(1) * b(0) + a(2) * b(3) - a(3) * b(2);
  r(2) = a(0) * b(2) - a(1) * b(3) + a(2) * b(0) + a(3) * b(1);
  r(3) = a(0) * b(3) + a(1) * b(2) - a(2) * b(1) + a(3) * b(0);
  return r;
}

template <class T>
V4<T> qconj(const V4<T>& a) {
  return V4<T>(a(0), -a(1), -a(2), -a(3));
}

template <class T>
V4<T> qi(const V4<T>& q) {  // left multiplication by i
  return V4<T>(-q(1), q(0), -q(3), q(2));
}

template <class T>
V3<T> hopf_t(const V4<T>& q) {
  const V4<T> w = qmul<T>(qconj<T>(q), qi<T>(q));
  return V3<T>(T(0.5) * w(1), T(0.5) * w(2), T(0.5) * w(3));
}

// dy/dq for y = hopf(q): column k = Im(conj(q) i e_k).
template <class T>
Eigen::Matrix<T, 3, 4> hopf_jac(const V4<T>& q) {
  Eigen::Matrix<T, 3, 4> m;
  for (int k = 0; k < 4; ++k) {
    V4<T> e = V4<T>::Zero();
    e(k) = T(1);
    const V4<T> w = qmul<T>(qconj<T>(q), qi<T>(e));
    m(0, k) = w(1);
    m(1, k) = w(2);
    m(2, k) = w(3);
  }
  return m;
}

template <class T>
M4<T> metric_triv(const GHSpace& s, const V4<T>& c) {
  const V3<T> x = c.template head<3>();
  const T f = phi_t<T>(s, x);
  const V3<T> a = conn_t<T>(s, x);
  M4<T> g;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) g(i, j) = a(i) * a(j) / f + (i == j ? f : T(0));
    g(i, 3) = a(i) / f;
    g(3, i) = a(i) / f;
  }
  g(3, 3) = T(1) / f;
  return g;
}

// Cap chart metric, smooth through q = 0.
template <class T>
M4<T> metric_cap(const GHSpace& s, int i, const V4<T>& q) {
  const Mat3& R = s.cap_rotation(i);
  const V3<T> y = hopf_t<T>(q);
  const V3<T> x = s.centres()[i].cast<T>() + R.cast<T>() * y;
  const T h = phi_t<T>(s, x, i);
  const V3<T> b = conn_t<T>(s, x, i);
  const Eigen::Matrix<T, 3, 4> My = hopf_jac<T>(q);
  const V4<T> cvec = My.transpose() * (R.transpose().cast<T>() * b);
  const V4<T> K = qi<T>(q);
  const T q2 = q.squaredNorm();
  const T psi = T(1) + h * q2;
  M4<T> g = M4<T>::Identity() * psi;
  g -= (h * (T(1) + psi) / psi) * (K * K.transpose());
  g -= (T(1) / psi) * (K * cvec.transpose() + cvec * K.transpose());
  g += (q2 / psi) * (cvec * cvec.transpose());
  return g;
}

template <class T>
M4<T> metric_any(const GHSpace& s, int chart, const V4<T>& c) {
  if (chart == kTrivialisation) return metric_triv<T>(s, c);
  return metric_cap<T>(s, chart, c);
}

Mat4 wedge1(const Vec4& u, const Vec4& v) { return u * v.transpose() - v * u.transpose(); }

// Constant flat triple of R^4 in the cap chart (y-frame).
std::array<Mat4, 3> flat_cap_triple() {
  const Vec4 q(1, 0, 0, 0);
  const Eigen::Matrix<double, 3, 4> M = hopf_jac<double>(q);
  const Vec4 K = qi<double>(q);
  std::array<Mat4, 3> w;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    w[a] = -wedge1(M.row(a).transpose(), K) + wedge1(M.row(b).transpose(), M.row(c).transpose());
  }
  return w;
}

}  // namespace

// ---------------------------------------------------------------- GHSpace

GHSpace::GHSpace(std::vector<Vec3> centres, double ell, double d, int periods)
    : centres_(std::move(centres)), ell_(ell), d_(d), periods_(periods) {
  if (!(ell_ > 0)) throw DomainError("asymptotic constant must be positive");
  for (size_t i = 0; i < centres_.size(); ++i)
    for (size_t j = i + 1; j < centres_.size(); ++j)
      if ((centres_[i] - centres_[j]).norm() < 1e-12)
        throw DomainError("centres must be pairwise distinct");
  bool at_origin = false;
  for (const auto& p : centres_) {
    Mat3 R = Mat3::Identity();
    const double n = p.norm();
    if (n < 1e-14) {
      at_origin = true;
      R << -1, 0, 0, 0, -1, 0, 0, 0, 1;  // cigar runs along +e1
    } else {
      const Vec3 e = p / n;
      Vec3 f = Vec3::UnitZ().cross(e);
      if (f.norm() < 1e-12) f = Vec3::UnitX().cross(e);
      f.normalize();
      // columns e, f, e x f form a right-handed frame: f = e3 x e, so e x f = e3 for planar e
      R.col(0) = e;
      R.col(1) = f;
      R.col(2) = e.cross(f);
    }
    cap_rot_.push_back(R);
  }
  triv_radius_ = at_origin ? 0.0 : d_;
  cap_radius_ = at_origin ? std::numeric_limits<double>::infinity() : 0.5 * d_;
}

GHSpace GHSpace::multi_taub_nut(double d, int periods) {
  SpaceConfig cfg;
  cfg.d = d;
  cfg.periods = periods;
  return multi_taub_nut(cfg);
}

GHSpace GHSpace::multi_taub_nut(const SpaceConfig& cfg) {
  if (!(cfg.d > 0)) throw DomainError("d must be positive");
  if (cfg.periods < 1 || cfg.periods > 2)
    throw DomainError("unsupported symmetry group: periods must be 1 or 2");
  const double a = std::sqrt(2.0) / 2.0 * cfg.d;
  std::vector<Vec3> c = {Vec3(a, a, 0), Vec3(a, -a, 0), Vec3(-a, -a, 0), Vec3(-a, a, 0)};
  GHSpace s(c, cfg.ell, cfg.d, cfg.periods);
  s.x_d_ = true;
  s.build_group();
  if (cfg.build_cache) {
    std::shared_ptr<const GaugeCache> cache;
    const std::uint64_t h = s.content_hash();
    std::string path;
    if (!cfg.cache_dir.empty()) {
      std::ostringstream os;
      os << cfg.cache_dir << "/gauge_" << std::hex << h << ".bin";
      path = os.str();
      cache = GaugeCache::load(path, cfg.grid, h);
    }
    if (!cache) {
      auto built = std::make_shared<GaugeCache>(s, cfg.grid);
      if (!path.empty()) built->save(path, h);
      cache = built;
    }
    s.attach_cache(cache);
  }
  return s;
}

GHSpace GHSpace::taub_nut(double ell) {
  GHSpace s({Vec3::Zero()}, ell, std::numeric_limits<double>::infinity(), 1);
  return s;
}

GHSpace GHSpace::flat(double m, int periods) {
  if (!(m > 0)) throw DomainError("flat model needs m > 0");
  if (periods < 1 || periods > 2) throw DomainError("unsupported symmetry group: periods must be 1 or 2");
  GHSpace s({}, 1.0 / m, std::numeric_limits<double>::infinity(), periods);
  s.x_d_ = false;
  s.build_group();
  return s;
}

GHSpace GHSpace::polygon(int k, double d) {
  if (k < 1) throw DomainError("polygon needs k >= 1");
  std::vector<Vec3> c;
  for (int j = 0; j < 2 * k; ++j) {
    const double a = M_PI / 4 - M_PI * j / k;
    c.emplace_back(d * std::cos(a), d * std::sin(a), 0);
  }
  GHSpace s(c, 1.0, d, 1);
  if (k == 2) {
    s.x_d_ = true;
    s.build_group();
  }
  return s;
}

double GHSpace::tau() const { return M_PI / (2.0 * periods_); }

std::uint64_t GHSpace::content_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& c : centres_) mix(c.data(), 3 * sizeof(double));
  mix(&ell_, sizeof(double));
  mix(&d_, sizeof(double));
  mix(&periods_, sizeof(int));
  return h;
}

int GHSpace::centre_image(const Mat3& base, int i) const {
  const Vec3 y = base * centres_[i];
  for (int j = 0; j < centre_count(); ++j)
    if ((y - centres_[j]).norm() < 1e-9 * std::max(1.0, d_)) return j;
  throw DomainError("base map does not preserve the centres");
}

const std::vector<SymmetryElement>& GHSpace::group() const {
  if (group_.empty()) throw DomainError("unsupported symmetry group");
  return group_;
}

const std::vector<SymmetryElement>& GHSpace::generators() const {
  if (gens_.empty()) throw DomainError("unsupported symmetry group");
  return gens_;
}

int GHSpace::element_index(const SymmetryElement& s) const {
  for (size_t k = 0; k < group_.size(); ++k)
    if (same_element(group_[k], s, 1e-9)) return static_cast<int>(k);
  throw DomainError("element not in group");
}

void GHSpace::build_group() {
  const double c45 = M_PI / periods_;
  auto gen = [](const std::string& l, Mat3 b, double c) {
    SymmetryElement e;
    e.label = l;
    e.base = b;
    e.eps = -1;
    e.c = c;
    return e;
  };
  Mat3 b1 = Mat3::Identity(), b2 = Mat3::Identity(), b3 = Mat3::Identity(), b4, b5;
  b1(0, 0) = -1;
  b2(1, 1) = -1;
  b3(2, 2) = -1;
  b4 << 0, 1, 0, 1, 0, 0, 0, 0, 1;
  b5 << 0, -1, 0, -1, 0, 0, 0, 0, 1;
  gens_ = {gen("R1", b1, 0.0), gen("R2", b2, 0.0), gen("R3", b3, 0.0), gen("R4", b4, c45),
           gen("R5", b5, c45)};
  SymmetryElement id;
  id.label = "e";
  group_ = {id};
  for (size_t k = 0; k < group_.size(); ++k) {
    for (const auto& g : gens_) {
      SymmetryElement n = compose(g, group_[k]);
      n.label = group_[k].label == "e" ? g.label : g.label + "*" + group_[k].label;
      bool found = false;
      for (const auto& e : group_)
        if (same_element(e, n, 1e-9)) {
          found = true;
          break;
        }
      if (!found) group_.push_back(n);
    }
    if (group_.size() > 64) throw DomainError("symmetry group does not close");
  }
  // Linear action on each cap chart, fitted from sample points and checked.
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  cap_maps_.assign(group_.size(), std::vector<Mat4>(centres_.size(), Mat4::Identity()));
  for (size_t e = 0; e < group_.size(); ++e) {
    const auto& s = group_[e];
    for (int i = 0; i < centre_count(); ++i) {
      const int j = centre_image(s.base, i);
      Eigen::Matrix<double, 4, 12> Q, Qp;
      for (int k = 0; k < 12; ++k) {
        Vec4 q;
        do {
          q = Vec4(U(rng), U(rng), U(rng), U(rng));
        } while (q.norm() < 0.3 || std::hypot(q(2), q(3)) < 0.1);
        const Vec3 y = hopf_t<double>(q);
        const double t = wrap_angle(-std::atan2(q(3), q(2)));
        const Vec3 x = centres_[i] + cap_rot_[i] * y;
        const Vec3 xp = s.base * x;
        const double tp = wrap_angle(s.eps * t + s.c);
        const Vec3 yp = cap_rot_[j].transpose() * (xp - centres_[j]);
        Q.col(k) = q;
        Qp.col(k) = hopf_lift(yp, tp);
      }
      const Mat4 L = Qp.leftCols<8>() * Q.leftCols<8>().completeOrthogonalDecomposition().pseudoInverse();
      const double res = (L * Q - Qp).cwiseAbs().maxCoeff();
      if (res > 1e-10) throw DomainError("symmetry action on cap chart is not linear");
      cap_maps_[e][i] = L;
    }
  }
}

// ---------------------------------------------------------------- potential & connection

double potential(const GHSpace& space, const Vec3& x) {
  for (int i = 0; i < space.centre_count(); ++i)
    if ((x - space.centres()[i]).norm() == 0.0) {
      std::ostringstream os;
      os << "potential evaluated at centre " << i << " (" << space.centres()[i].transpose() << ")";
      throw DomainError(os.str());
    }
  return phi_t<double>(space, x);
}

Vec3 potential_gradient(const GHSpace& space, const Vec3& x) {
  Vec3 g = Vec3::Zero();
  for (const auto& p : space.centres()) {
    const Vec3 d = x - p;
    const double r = d.norm();
    g -= 0.5 * d / (r * r * r);
  }
  return g;
}

Vec3 connection(const GHSpace& space, const Vec3& x) { return conn_t<double>(space, x); }

namespace {
void spherical_frame(const Vec3& x, double& r, Vec3& ea, Vec3& eb, double& sa) {
  r = x.norm();
  const double al = std::acos(std::clamp(x(2) / r, -1.0, 1.0));
  const double be = std::atan2(x(1), x(0));
  sa = std::sin(al);
  ea = Vec3(std::cos(al) * std::cos(be), std::cos(al) * std::sin(be), -sa);
  eb = Vec3(-std::sin(be), std::cos(be), 0);
}

void require_triv_base(const GHSpace& space, const Vec3& x) {
  if (x.norm() == 0.0) throw DomainError("radial gauge components undefined at the origin");
  if (!(x.norm() < space.trivialisation_radius()))
    throw DomainError("point outside the trivialisation chart");
  for (int i = 0; i < space.centre_count(); ++i)
    if ((x - space.centres()[i]).norm() < 1e-12) throw DomainError("point is a centre");
}
}  // namespace

Vec2 connection_radial_gauge_exact(const GHSpace& space, const Vec3& x) {
  require_triv_base(space, x);
  double r, sa;
  Vec3 ea, eb;
  spherical_frame(x, r, ea, eb, sa);
  const Vec3 a = connection(space, x);
  return Vec2(r * a.dot(ea), r * sa * a.dot(eb));
}

Vec2 connection_radial_gauge(const GHSpace& space, const Vec3& x) {
  require_triv_base(space, x);
  const GaugeCache* c = space.gauge_cache();
  if (!c) throw DomainError("space has no gauge cache");
  if (x.norm() > c->rmax()) throw DomainError("point outside the gauge cache");
  return c->eval(x);
}

// ---------------------------------------------------------------- charts

Vec3 hopf(const Vec4& q) { return hopf_t<double>(q); }

Vec4 hopf_lift(const Vec3& y, double t) {
  const double r = y.norm();
  // sqrt of the larger of r +- y0; the other from |y_perp| to avoid cancellation
  const double perp = std::hypot(y(1), y(2));
  double m1, m2;
  if (y(0) >= 0) {
    m1 = std::sqrt(r + y(0));
    m2 = m1 > 0 ? perp / m1 : 0.0;
  } else {
    m2 = std::sqrt(r - y(0));
    m1 = perp / m2;
  }
  const double ph = std::atan2(-y(1), y(2));
  const double a2 = -t;
  const double a1 = a2 - ph;
  return Vec4(m1 * std::cos(a1), m1 * std::sin(a1), m2 * std::cos(a2), m2 * std::sin(a2));
}

bool chart_valid(const GHSpace& space, const ChartPoint& p) {
  if (!p.c.allFinite()) return false;
  if (p.chart == kTrivialisation) {
    const Vec3 x = p.c.head<3>();
    if (!(x.norm() < space.trivialisation_radius())) return false;
    for (const auto& c : space.centres())
      if ((x - c).norm() < 1e-12) return false;
    return true;
  }
  if (p.chart < 0 || p.chart >= space.centre_count()) return false;
  return 0.5 * p.c.squaredNorm() < space.cap_radius();
}

void require_chart(const GHSpace& space, const ChartPoint& p) {
  if (!chart_valid(space, p)) {
    std::ostringstream os;
    os << "chart invalid at point (chart " << p.chart << ", " << p.c.transpose() << ")";
    throw DomainError(os.str());
  }
}

Vec3 base_point(const GHSpace& space, const ChartPoint& p) {
  if (p.chart == kTrivialisation) return p.c.head<3>();
  return space.centres()[p.chart] + space.cap_rotation(p.chart) * hopf(p.c);
}

ChartPoint to_trivialisation(const GHSpace& space, const ChartPoint& p) {
  if (p.chart == kTrivialisation) return p;
  const Vec4& q = p.c;
  if (std::hypot(q(2), q(3)) == 0.0) throw DomainError("cap point on the fibre-degenerate ray");
  ChartPoint r;
  r.chart = kTrivialisation;
  r.c.head<3>() = base_point(space, p);
  r.c(3) = wrap_angle(-std::atan2(q(3), q(2)));
  return r;
}

ChartPoint to_cap(const GHSpace& space, int i, const ChartPoint& p) {
  if (p.chart == i) return p;
  const ChartPoint t = to_trivialisation(space, p);
  const Vec3 y = space.cap_rotation(i).transpose() * (t.c.head<3>() - space.centres()[i]);
  ChartPoint r;
  r.chart = i;
  r.c = hopf_lift(y, t.c(3));
  return r;
}

ChartPoint to_chart(const GHSpace& space, int chart, const ChartPoint& p) {
  if (chart == p.chart) return p;
  if (chart == kTrivialisation) return to_trivialisation(space, p);
  return to_cap(space, chart, p);
}

Mat4 cap_to_trivialisation_jacobian(const GHSpace& space, int i, const Vec4& q) {
  Mat4 J = Mat4::Zero();
  J.topRows<3>() = space.cap_rotation(i) * hopf_jac<double>(q);
  const double n2 = q(2) * q(2) + q(3) * q(3);
  // t = -atan2(q3, q2)
  J(3, 2) = q(3) / n2;
  J(3, 3) = -q(2) / n2;
  return J;
}

// ---------------------------------------------------------------- metric

Mat4 metric(const GHSpace& space, const ChartPoint& p) {
  require_chart(space, p);
  return metric_any<double>(space, p.chart, p.c);
}

MetricJet metric_jet(const GHSpace& space, const ChartPoint& p) {
  require_chart(space, p);
  V4<AD> c;
  for (int k = 0; k < 4; ++k) c(k) = AD(p.c(k), 4, k);
  const M4<AD> g = metric_any<AD>(space, p.chart, c);
  MetricJet J;
  J.at = p;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      J.g(i, j) = g(i, j).value();
      for (int k = 0; k < 4; ++k) J.dg[k](i, j) = g(i, j).derivatives()(k);
    }
  const Mat4 gi = J.g.inverse();
  for (int k = 0; k < 4; ++k) {
    Mat4 G;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0;
        for (int l = 0; l < 4; ++l)
          s += gi(k, l) * (J.dg[i](j, l) + J.dg[j](i, l) - J.dg[l](i, j));
        G(i, j) = 0.5 * s;
      }
    J.gamma[k] = G;
  }
  return J;
}

std::array<std::array<Mat4, 4>, 4> riemann(const GHSpace& space, const ChartPoint& p, double h) {
  std::array<std::array<Mat4, 4>, 4> dG;  // dG[c][a](b,d) = d_c Gamma^a_bd
  const MetricJet J0 = metric_jet(space, p);
  for (int c = 0; c < 4; ++c) {
    ChartPoint pp = p, pm = p;
    pp.c(c) += h;
    pm.c(c) -= h;
    const MetricJet Jp = metric_jet(space, pp), Jm = metric_jet(space, pm);
    for (int a = 0; a < 4; ++a) dG[c][a] = (Jp.gamma[a] - Jm.gamma[a]) / (2 * h);
  }
  std::array<std::array<Mat4, 4>, 4> R;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double v = dG[c][a](d, b) - dG[d][a](c, b);
          for (int e = 0; e < 4; ++e)
            v += J0.gamma[a](c, e) * J0.gamma[e](d, b) - J0.gamma[a](d, e) * J0.gamma[e](c, b);
          R[a][b](c, d) = v;
        }
  return R;
}

// ---------------------------------------------------------------- triple

HKTriple hk_triple(const GHSpace& space, const ChartPoint& p) {
  require_chart(space, p);
  HKTriple T;
  T.at = p;
  if (p.chart == kTrivialisation) {
    const Vec3 x = p.c.head<3>();
    const double f = phi_t<double>(space, x);
    const Vec3 a = conn_t<double>(space, x);
    const Vec4 th(a(0), a(1), a(2), 1.0);
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      T.w[i] = wedge1(Vec4::Unit(i), th) + f * wedge1(Vec4::Unit(j), Vec4::Unit(k));
    }
    return T;
  }
  static const std::array<Mat4, 3> flat = flat_cap_triple();
  const int ci = p.chart;
  const Vec4& q = p.c;
  const Mat3& R = space.cap_rotation(ci);
  const Vec3 x = space.centres()[ci] + R * hopf(q);
  const double h = phi_t<double>(space, x, ci);
  const Vec3 b = conn_t<double>(space, x, ci);
  const Eigen::Matrix<double, 3, 4> M = hopf_jac<double>(q);
  const Vec4 cv = M.transpose() * (R.transpose() * b);
  std::array<Mat4, 3> wy;
  for (int a = 0; a < 3; ++a) {
    const int bb = (a + 1) % 3, cc = (a + 2) % 3;
    wy[a] = flat[a] + h * wedge1(M.row(bb).transpose(), M.row(cc).transpose()) +
            wedge1(M.row(a).transpose(), cv);
  }
  for (int i = 0; i < 3; ++i) {
    T.w[i] = Mat4::Zero();
    for (int a = 0; a < 3; ++a) T.w[i] += R(i, a) * wy[a];
  }
  return T;
}

int chart_orientation(const GHSpace& space, int chart) {
  if (chart == kTrivialisation) return 1;
  const Vec4 q(0.3, -0.2, 0.5, 0.4);
  return cap_to_trivialisation_jacobian(space, chart, q).determinant() > 0 ? 1 : -1;
}

double wedge(const Mat4& a, const Mat4& b) {
  return a(0, 1) * b(2, 3) - a(0, 2) * b(1, 3) + a(0, 3) * b(1, 2) + a(1, 2) * b(0, 3) -
         a(1, 3) * b(0, 2) + a(2, 3) * b(0, 1);
}

Mat4 hodge_star(const Mat4& w, const Mat4& g, int orientation) {
  const Mat4 gi = g.inverse();
  const Mat4 wu = gi * w * gi.transpose();
  const double vol = orientation * std::sqrt(std::abs(g.determinant()));
  static const int perm[6][4] = {{0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2},
                                 {1, 2, 0, 3}, {1, 3, 2, 0}, {2, 3, 0, 1}};
  // (*w)_{ab} = vol * w^{cd} for (a,b,c,d) an even permutation
  Mat4 s = Mat4::Zero();
  for (const auto& p : perm) {
    s(p[0], p[1]) = vol * wu(p[2], p[3]);
    s(p[1], p[0]) = -s(p[0], p[1]);
  }
  return s;
}

// ---------------------------------------------------------------- symmetry

SymmetryElement compose(const SymmetryElement& a, const SymmetryElement& b) {
  SymmetryElement r;
  r.label = a.label + "*" + b.label;
  r.base = a.base * b.base;
  r.eps = a.eps * b.eps;
  r.c = wrap_angle(a.eps * b.c + a.c);
  return r;
}

bool same_element(const SymmetryElement& a, const SymmetryElement& b, double tol) {
  if (a.eps != b.eps) return false;
  if ((a.base - b.base).cwiseAbs().maxCoeff() > tol) return false;
  double dc = std::fmod(std::abs(a.c - b.c), kTwoPi);
  dc = std::min(dc, kTwoPi - dc);
  return dc <= tol;
}

ChartPoint apply_symmetry(const GHSpace& space, const SymmetryElement& s, const ChartPoint& p) {
  require_chart(space, p);
  ChartPoint r;
  if (p.chart == kTrivialisation) {
    r.chart = kTrivialisation;
    r.c.head<3>() = s.base * p.c.head<3>();
    r.c(3) = wrap_angle(s.eps * p.c(3) + s.c);
  } else {
    const int e = space.element_index(s);
    r.chart = space.centre_image(s.base, p.chart);
    r.c = space.cap_map(e, p.chart) * p.c;
  }
  require_chart(space, r);
  return r;
}

Mat4 symmetry_differential(const GHSpace& space, const SymmetryElement& s, const ChartPoint& p) {
  if (p.chart == kTrivialisation) {
    Mat4 D = Mat4::Zero();
    D.topLeftCorner<3, 3>() = s.base;
    D(3, 3) = s.eps;
    return D;
  }
  return space.cap_map(space.element_index(s), p.chart);
}

}  // namespace ghsurf
