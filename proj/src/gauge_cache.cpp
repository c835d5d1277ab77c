#include <cmath>
#include <fstream>
#include <random>

#include "ghsurf/geometry.hpp"

namespace ghsurf {

namespace {

constexpr std::uint32_t kMagic = 0x43474847;  // "GHGC"
constexpr std::uint32_t kVersion = 1;

Vec3 ray_dir(double al, double be) {
  return Vec3(std::sin(al) * std::cos(be), std::sin(al) * std::sin(be), std::cos(al));
}

// Right-hand side of the radial ODE: d a_alpha/dr = r grad(phi).e_beta,
// d a_beta/dr = -r sin(alpha) grad(phi).e_alpha.
Vec2 radial_rhs(const GHSpace& s, double r, double al, double be) {
  const Vec3 x = r * ray_dir(al, be);
  const Vec3 gp = potential_gradient(s, x);
  const Vec3 ea(std::cos(al) * std::cos(be), std::cos(al) * std::sin(be), -std::sin(al));
  const Vec3 eb(-std::sin(be), std::cos(be), 0);
  return Vec2(r * gp.dot(eb), -r * std::sin(al) * gp.dot(ea));
}

// Cubic Lagrange weights on nodes -1,0,1,2 at fractional offset u in [0,1].
void cubic_weights(double u, double w[4]) {
  w[0] = -u * (u - 1) * (u - 2) / 6;
  w[1] = (u + 1) * (u - 1) * (u - 2) / 2;
  w[2] = -(u + 1) * u * (u - 2) / 2;
  w[3] = (u + 1) * u * (u - 1) / 6;
}

}  // namespace

GaugeCache::GaugeCache(const GHSpace& space, const GaugeGridSpec& spec) : spec_(spec) {
  if (spec.nr < 4 || spec.nalpha < 4 || spec.nbeta < 4) throw DomainError("gauge grid too small");
  rmax_ = spec.rmax_frac * space.trivialisation_radius();
  const int nr = spec.nr, na = spec.nalpha, nb = spec.nbeta;
  aa_.assign(static_cast<size_t>(nr) * na * nb, 0.0);
  ab_.assign(aa_.size(), 0.0);
  const double dr = rmax_ / (nr - 1);
  for (int ia = 0; ia < na; ++ia) {
    const double al = (ia + 0.5) * M_PI / na;
    for (int ib = 0; ib < nb; ++ib) {
      const double be = 2 * M_PI * ib / nb;
      for (const auto& p : space.centres()) {
        const Vec3 u = ray_dir(al, be);
        const double tca = p.dot(u);
        if (tca > 0 && tca < rmax_ && (p - tca * u).norm() < 1e-6)
          throw DomainError("gauge ray passes through a centre");
      }
      Vec2 y(0, 0);
      for (int ir = 1; ir < nr; ++ir) {
        const double r0 = (ir - 1) * dr;
        const Vec2 k1 = radial_rhs(space, r0, al, be);
        const Vec2 k2 = radial_rhs(space, r0 + 0.5 * dr, al, be);
        const Vec2 k4 = radial_rhs(space, r0 + dr, al, be);
        // k3 equals k2 because the right-hand side does not depend on the state.
        y += dr / 6 * (k1 + 4 * k2 + k4);
        const size_t idx = (static_cast<size_t>(ir) * na + ia) * nb + ib;
        aa_[idx] = y(0);
        ab_[idx] = y(1);
      }
    }
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  double err = 0;
  int n = 0;
  while (n < 2000) {
    Vec3 x(U(rng), U(rng), U(rng));
    if (x.norm() > 1) continue;
    x *= 0.98 * rmax_;
    bool near = false;
    for (const auto& p : space.centres()) near |= (x - p).norm() < 0.25 * space.d();
    if (near || x.norm() < 1e-3) continue;
    const Vec2 e = connection_radial_gauge_exact(space, x);
    const Vec2 c = eval(x);
    err = std::max(err, (e - c).cwiseAbs().maxCoeff());
    ++n;
  }
  measured_error_ = err;
  if (err > spec.declared_tol) throw DomainError("gauge cache misses its declared tolerance");
}

double GaugeCache::sample(int comp, int ir, int ia, int ib) const {
  const int na = spec_.nalpha, nb = spec_.nbeta;
  double sign = 1.0;
  if (ia < 0) {
    ia = -ia - 1;
    ib += nb / 2;
    if (comp == 0) sign = -1;
  } else if (ia >= na) {
    ia = 2 * na - ia - 1;
    ib += nb / 2;
    if (comp == 0) sign = -1;
  }
  ib = ((ib % nb) + nb) % nb;
  const size_t idx = (static_cast<size_t>(ir) * na + ia) * nb + ib;
  return sign * (comp == 0 ? aa_[idx] : ab_[idx]);
}

Vec2 GaugeCache::eval(const Vec3& x) const {
  const int nr = spec_.nr, na = spec_.nalpha, nb = spec_.nbeta;
  const double r = x.norm();
  const double al = std::acos(std::clamp(x(2) / r, -1.0, 1.0));
  double be = std::atan2(x(1), x(0));
  if (be < 0) be += 2 * M_PI;
  const double dr = rmax_ / (nr - 1);
  const double fr = r / dr;
  int i0 = static_cast<int>(std::floor(fr)) - 1;
  i0 = std::clamp(i0, 0, nr - 4);
  const double ur = fr - (i0 + 1);
  const double fa = al / (M_PI / na) - 0.5;
  const int j0 = static_cast<int>(std::floor(fa)) - 1;
  const double ua = fa - (j0 + 1);
  const double fb = be / (2 * M_PI / nb);
  const int k0 = static_cast<int>(std::floor(fb)) - 1;
  const double ub = fb - (k0 + 1);
  double wr[4], wa[4], wb[4];
  cubic_weights(ur, wr);
  cubic_weights(ua, wa);
  cubic_weights(ub, wb);
  Vec2 out(0, 0);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        const double w = wr[a] * wa[b] * wb[c];
        out(0) += w * sample(0, i0 + a, j0 + b, k0 + c);
        out(1) += w * sample(1, i0 + a, j0 + b, k0 + c);
      }
  return out;
}

void GaugeCache::save(const std::string& path, std::uint64_t hash) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write gauge cache " + path);
  auto put = [&](const void* p, size_t n) { f.write(static_cast<const char*>(p), n); };
  put(&kMagic, 4);
  put(&kVersion, 4);
  put(&hash, 8);
  put(&spec_.nr, 4);
  put(&spec_.nalpha, 4);
  put(&spec_.nbeta, 4);
  put(&rmax_, 8);
  put(&measured_error_, 8);
  put(aa_.data(), aa_.size() * 8);
  put(ab_.data(), ab_.size() * 8);
}

std::unique_ptr<GaugeCache> GaugeCache::load(const std::string& path, const GaugeGridSpec& spec,
                                             std::uint64_t hash) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return nullptr;
  auto get = [&](void* p, size_t n) { return static_cast<bool>(f.read(static_cast<char*>(p), n)); };
  std::uint32_t magic = 0, version = 0;
  std::uint64_t h = 0;
  std::unique_ptr<GaugeCache> c(new GaugeCache());
  c->spec_ = spec;
  int nr, na, nb;
  if (!get(&magic, 4) || !get(&version, 4) || !get(&h, 8)) return nullptr;
  if (magic != kMagic || version != kVersion || h != hash) return nullptr;
  if (!get(&nr, 4) || !get(&na, 4) || !get(&nb, 4)) return nullptr;
  if (nr != spec.nr || na != spec.nalpha || nb != spec.nbeta) return nullptr;
  if (!get(&c->rmax_, 8) || !get(&c->measured_error_, 8)) return nullptr;
  c->aa_.resize(static_cast<size_t>(nr) * na * nb);
  c->ab_.resize(c->aa_.size());
  if (!get(c->aa_.data(), c->aa_.size() * 8) || !get(c->ab_.data(), c->ab_.size() * 8))
    return nullptr;
  return c;
}

}  // namespace ghsurf
