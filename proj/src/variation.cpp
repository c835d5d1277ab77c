#include "ghsurf/variation.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace ghsurf {

namespace {

double ip(const Mat4& G, const Vec4& a, const Vec4& b) { return a.dot(G * b); }

double comp_sup(const NormalField& v) {
  double m = 0;
  for (const Vec2& x : v) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

ChartPoint displace(const InitialSurface& s, int j, const Vec2& v) {
  ChartPoint p = s.mesh.verts[j].pos;
  p.c += v(0) * s.frames[j].n[0] + v(1) * s.frames[j].n[1];
  return p;
}

// Vector v attached at q, expressed in the coordinates of chart `target`.
Vec4 vector_in_chart(const GHSpace& space, int target, const ChartPoint& q, const Vec4& v) {
  if (q.chart == target) return v;
  Vec4 w = v;
  ChartPoint at = q;
  if (q.chart != kTrivialisation) {
    w = cap_to_trivialisation_jacobian(space, q.chart, q.c) * w;
    at = to_trivialisation(space, q);
  }
  if (target == kTrivialisation) return w;
  const ChartPoint c = to_cap(space, target, at);
  return cap_to_trivialisation_jacobian(space, target, c.c).partialPivLu().solve(w);
}

Mat2 orthogonal_part(const Mat2& M) {
  Eigen::JacobiSVD<Mat2> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

// Coefficient frame at b carried to a: T(k, l) ~ <n_k(a), transport n_l(b)>.
Mat2 transport(const GHSpace& space, const std::vector<ChartPoint>& pos, const std::vector<VertexFrame>& F, int a,
               int b) {
  const ChartPoint& A = pos[a];
  const Vec4 xb = coords_in_chart_of(space, A, pos[b]);
  ChartPoint mid = A;
  mid.c = 0.5 * (A.c + xb);
  const MetricJet mj = metric_jet(space, mid);
  const Vec4 dx = A.c - xb;
  const Mat4 G = metric(space, A);
  Mat2 M;
  for (int l = 0; l < 2; ++l) {
    Vec4 v = vector_in_chart(space, A.chart, pos[b], F[b].n[l]);
    Vec4 corr;
    for (int k = 0; k < 4; ++k) corr(k) = dx.dot(mj.gamma[k] * v);
    v -= corr;
    for (int k = 0; k < 2; ++k) M(k, l) = ip(G, F[a].n[k], v);
  }
  return orthogonal_part(M);
}

Vec4 orthonormal_against(const Mat4& G, Vec4 v, const Vec4* const* b, int nb) {
  for (int k = 0; k < nb; ++k) v -= ip(G, v, *b[k]) * (*b[k]);
  const double l = std::sqrt(std::max(0.0, ip(G, v, v)));
  if (!(l > 1e-8)) throw DomainError("displaced frame degenerates");
  return v / l;
}

}  // namespace

double sup_norm(const NormalField& v) {
  double m = 0;
  for (const Vec2& x : v) m = std::max(m, x.norm());
  return m;
}

double l2_norm(const NormalField& v, const std::vector<double>& mass) {
  double s = 0;
  for (size_t i = 0; i < v.size(); ++i) s += mass[i] * v[i].squaredNorm();
  return std::sqrt(s);
}

double c2_proxy(const InitialSurface& s, const NormalField& v) {
  double d0 = 0, d1 = 0, d2 = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    d0 = std::max(d0, v[i].norm());
    const auto& idx = s.stencils.idx[i];
    const Eigen::MatrixXd& W = s.stencils.w[i];
    Eigen::Matrix<double, 5, 2> D = Eigen::Matrix<double, 5, 2>::Zero();
    for (size_t j = 0; j < idx.size(); ++j) D += W.col(j) * (v[idx[j]] - v[i]).transpose();
    d1 = std::max(d1, D.topRows<2>().norm());
    d2 = std::max(d2, D.bottomRows<3>().norm());
  }
  const double h = s.mesh.step;
  return d0 + h * d1 + h * h * d2;
}

std::vector<double> vertex_masses(const GHSpace& space, const SurfaceMesh& mesh, const std::vector<ChartPoint>& pos) {
  std::vector<double> m(pos.size(), 0.0);
  for (const auto& [tri, w] : mesh.weighted_triangles()) {
    const ChartPoint& P = pos[tri[0]];
    const Vec4 e1 = coords_in_chart_of(space, P, pos[tri[1]]) - P.c;
    const Vec4 e2 = coords_in_chart_of(space, P, pos[tri[2]]) - P.c;
    ChartPoint C = P;
    C.c += (e1 + e2) / 3;
    const Mat4 G = metric(space, C);
    const double a = ip(G, e1, e1), b = ip(G, e2, e2), c = ip(G, e1, e2);
    const double area = 0.5 * std::sqrt(std::max(0.0, a * b - c * c));
    for (int k : tri) m[k] += w * area / 3;
  }
  return m;
}

NormalField smooth_random_field(const GHSpace& space, const InitialSurface& s, std::mt19937& rng, double wavenumber) {
  std::normal_distribution<double> N01;
  std::uniform_real_distribution<double> U(0, 2 * M_PI);
  struct Mode {
    Vec3 w;
    double ph, amp, fib, psi;
  };
  std::array<std::array<Mode, 3>, 3> modes;
  for (auto& comp : modes)
    for (Mode& m : comp) {
      Vec3 dir(N01(rng), N01(rng), N01(rng));
      m.w = wavenumber * dir.normalized();
      m.ph = U(rng);
      m.amp = N01(rng);
      m.fib = 0.5 * N01(rng);
      m.psi = U(rng);
    }
  const int n = std::max(1, space.periods());
  const int nv = s.mesh.vertex_count();
  NormalField out(nv, Vec2::Zero());
  for (int i = 0; i < nv; ++i) {
    const ChartPoint& P = s.mesh.verts[i].pos;
    if (P.chart != kTrivialisation && P.c.tail<2>().norm() == 0.0) continue;  // fibre-degenerate point
    const Vec3 x = base_point(space, P);
    const double t = to_trivialisation(space, P).c(3);
    double w = 1;
    for (const Vec3& c : space.centres()) {
      const double r2 = (x - c).squaredNorm();
      w *= r2 / (1 + r2);
    }
    Vec3 base = Vec3::Zero();
    for (int k = 0; k < 3; ++k)
      for (const Mode& m : modes[k]) base(k) += w * m.amp * std::sin(m.w.dot(x) + m.ph) * (1 + m.fib * std::cos(n * t + m.psi));
    // horizontal lift in the chart of P: d(pi) v = base, <v, K> = 0
    const Mat4 G = metric(space, P);
    Mat4 A = Mat4::Zero();
    if (P.chart == kTrivialisation)
      A.topLeftCorner<3, 3>().setIdentity();
    else
      A.topRows<3>() = cap_to_trivialisation_jacobian(space, P.chart, P.c).topRows<3>();
    A.row(3) = (G * fibre_killing_vector(P)).transpose();
    Vec4 rhs;
    rhs << base, 0.0;
    const Vec4 v = A.partialPivLu().solve(rhs);
    out[i] = Vec2(ip(G, v, s.frames[i].n[0]), ip(G, v, s.frames[i].n[1]));
  }
  return out;
}

std::vector<ChartPoint> graph_immersion(const GHSpace& space, const InitialSurface& s, const NormalField& nu,
                                        double max_norm) {
  if (nu.size() != s.frames.size()) throw DomainError("normal field size differs from the mesh");
  if (comp_sup(nu) > max_norm) throw DomainError("normal field exceeds the graph radius");
  std::vector<ChartPoint> pos(nu.size());
  for (size_t j = 0; j < nu.size(); ++j) {
    pos[j] = displace(s, static_cast<int>(j), nu[j]);
    if (!chart_valid(space, pos[j])) throw DomainError("displaced vertex leaves its chart");
  }
  return pos;
}

VertexFrame displaced_frame(const GHSpace& space, const InitialSurface& s, const SurfaceJet& jet, int i) {
  const Mat4 G = metric(space, jet.at);
  VertexFrame f;
  f.t[0] = orthonormal_against(G, jet.d[0], nullptr, 0);
  const Vec4* b1[] = {&f.t[0]};
  f.t[1] = orthonormal_against(G, jet.d[1], b1, 1);
  const Vec4* b2[] = {&f.t[0], &f.t[1]};
  f.n[0] = orthonormal_against(G, s.frames[i].n[0], b2, 2);
  const Vec4* b3[] = {&f.t[0], &f.t[1], &f.n[0]};
  f.n[1] = orthonormal_against(G, s.frames[i].n[1], b3, 3);
  return f;
}

Vec2 graph_mean_curvature_at(const GHSpace& space, const InitialSurface& s, const std::vector<ChartPoint>& pos,
                             int i) {
  const SurfaceJet jet = surface_jet(space, s.stencils, pos, i);
  const VertexFrame f = displaced_frame(space, s, jet, i);
  const Vec4 H = mean_curvature_vector(space, jet);
  const Mat4 G = metric(space, jet.at);
  return Vec2(ip(G, H, f.n[0]), ip(G, H, f.n[1]));
}

NormalField mean_curvature_of_graph(const GHSpace& space, const InitialSurface& s, const NormalField& nu) {
  const auto pos = graph_immersion(space, s, nu, std::numeric_limits<double>::infinity());
  NormalField H(pos.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < static_cast<int>(pos.size()); ++i) H[i] = graph_mean_curvature_at(space, s, pos, i);
  return H;
}

SolvedSurface solved_surface(const GHSpace& space, const InitialSurface& s, const NormalField& nu) {
  SolvedSurface out;
  out.pos = graph_immersion(space, s, nu, std::numeric_limits<double>::infinity());
  out.frames.resize(out.pos.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < static_cast<int>(out.pos.size()); ++i)
    out.frames[i] = displaced_frame(space, s, surface_jet(space, s.stencils, out.pos, i), i);
  return out;
}

NormalAction normal_action(const GHSpace& space, const InitialSurface& s) {
  const auto& group = space.group();
  if (s.mesh.perm.size() != group.size()) throw DomainError("mesh has no symmetry permutations");
  NormalAction a;
  a.perm = s.mesh.perm;
  a.mat.assign(group.size(), {});
  for (size_t g = 0; g < group.size(); ++g) {
    a.eps.push_back(group[g].eps);
    auto& mg = a.mat[g];
    mg.resize(s.frames.size());
    for (size_t i = 0; i < s.frames.size(); ++i) {
      const int j = a.perm[g][i];
      const ChartPoint& P = s.mesh.verts[i].pos;
      const Mat4 D = symmetry_differential(space, group[g], P);
      const Mat4 G = metric(space, s.mesh.verts[j].pos);
      Mat2 Q;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) Q(l, k) = ip(G, D * s.frames[i].n[k], s.frames[j].n[l]);
      const Mat2 R = Q.array().round().matrix();
      if ((Q - R).cwiseAbs().maxCoeff() > 1e-6 || (R.transpose() * R - Mat2::Identity()).cwiseAbs().maxCoeff() > 0)
        throw DomainError("normal frames are not equivariant up to a signed permutation");
      mg[i] = R;
    }
  }
  return a;
}

NormalField act(const NormalAction& a, int g, const NormalField& nu) {
  NormalField out(nu.size());
  for (size_t i = 0; i < nu.size(); ++i) out[a.perm[g][i]] = a.mat[g][i] * nu[i];
  return out;
}

NormalField equivariant_project(const NormalAction& a, const NormalField& nu, bool twisted) {
  NormalField out(nu.size(), Vec2::Zero());
  const double w = 1.0 / static_cast<double>(a.perm.size());
  for (size_t g = 0; g < a.perm.size(); ++g) {
    const double chi = twisted ? a.eps[g] : 1.0;
    for (size_t i = 0; i < nu.size(); ++i) out[a.perm[g][i]] += w * chi * (a.mat[g][i] * nu[i]);
  }
  return out;
}

ReducedBasis reduced_basis(const NormalAction& a, int vertices, bool twisted) {
  ReducedBasis b;
  b.vertices = vertices;
  std::vector<char> seen(vertices, 0);
  for (int r = 0; r < vertices; ++r) {
    if (seen[r]) continue;
    int orbit = 0;
    Mat2 avg = Mat2::Zero();
    int stab = 0;
    for (size_t g = 0; g < a.perm.size(); ++g) {
      const int j = a.perm[g][r];
      if (!seen[j]) {
        seen[j] = 1;
        ++orbit;
      }
      if (j == r) {
        avg += (twisted ? a.eps[g] : 1) * a.mat[g][r];
        ++stab;
      }
    }
    // Projector onto the stabiliser-fixed directions at r.
    avg /= stab;
    std::vector<Vec2> dirs;
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (avg + avg.transpose()));
    for (int k = 1; k >= 0; --k)
      if (es.eigenvalues()(k) > 0.5) {
        Vec2 e = es.eigenvectors().col(k);
        if (std::abs(avg(0, 0) - 1) < 1e-12 && std::abs(avg(1, 1) - 1) < 1e-12) e = Vec2::Unit(1 - k);
        dirs.push_back(e);
      }
    for (const Vec2& e : dirs) {
      std::map<int, Vec2> sup;
      for (size_t g = 0; g < a.perm.size(); ++g) {
        const Vec2 v = (twisted ? a.eps[g] : 1) * (a.mat[g][r] * e);
        auto [it, fresh] = sup.emplace(a.perm[g][r], v);
        if (!fresh && (it->second - v).norm() > 1e-12) throw DomainError("inconsistent orbit in reduced basis");
      }
      b.rep.push_back(r);
      b.dir.push_back(e);
      b.support.emplace_back(sup.begin(), sup.end());
      b.orbit_size.push_back(orbit);
    }
  }
  return b;
}

NormalField expand(const ReducedBasis& b, const Eigen::VectorXd& c) {
  NormalField nu(b.vertices, Vec2::Zero());
  for (size_t u = 0; u < b.rep.size(); ++u)
    for (const auto& [j, v] : b.support[u]) nu[j] += c(u) * v;
  return nu;
}

Eigen::VectorXd restrict_to(const ReducedBasis& b, const NormalField& nu) {
  Eigen::VectorXd c(b.rep.size());
  for (size_t u = 0; u < b.rep.size(); ++u) c(u) = b.dir[u].dot(nu[b.rep[u]]);
  return c;
}

SpMat JacobiSystem::mass_matrix() const {
  const int n = static_cast<int>(mass.size());
  SpMat M(2 * n, 2 * n);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(2 * i, 2 * i, mass[i]);
    t.emplace_back(2 * i + 1, 2 * i + 1, mass[i]);
  }
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

SpMat JacobiSystem::stability_matrix() const {
  SpMat A = K - mass_matrix() * P;
  return SpMat(0.5 * (A + SpMat(A.transpose())));
}

NormalField JacobiSystem::apply(const NormalField& nu) const {
  const int n = static_cast<int>(nu.size());
  Eigen::VectorXd x(2 * n);
  for (int i = 0; i < n; ++i) x.segment<2>(2 * i) = nu[i];
  const Eigen::VectorXd kx = K * x, px = P * x;
  NormalField out(n);
  for (int i = 0; i < n; ++i) out[i] = -kx.segment<2>(2 * i) / mass[i] + px.segment<2>(2 * i);
  return out;
}

JacobiSystem assemble_jacobi(const GHSpace& space, const InitialSurface& s, const std::vector<ChartPoint>& pos,
                             const std::vector<VertexFrame>& frames) {
  const SurfaceMesh& mesh = s.mesh;
  const int nv = mesh.vertex_count();
  JacobiSystem J;
  J.h = mesh.step;
  if (space.has_group() && mesh.perm.size() == space.group().size()) J.action = normal_action(space, s);
  J.mass = vertex_masses(space, mesh, pos);

  std::vector<Eigen::Triplet<double>> kt;
  std::map<std::pair<int, int>, Mat2> tcache;
  auto T = [&](int a, int b) -> Mat2 {
    const bool flip = a > b;
    if (flip) std::swap(a, b);
    auto it = tcache.find({a, b});
    if (it == tcache.end()) it = tcache.emplace(std::make_pair(a, b), transport(space, pos, frames, a, b)).first;
    return flip ? Mat2(it->second.transpose()) : it->second;
  };
  auto add_edge = [&](int a, int b, double w) {
    const Mat2 Tab = T(a, b);
    for (int k = 0; k < 2; ++k) {
      kt.emplace_back(2 * a + k, 2 * a + k, w);
      kt.emplace_back(2 * b + k, 2 * b + k, w);
      for (int l = 0; l < 2; ++l) {
        kt.emplace_back(2 * a + k, 2 * b + l, -w * Tab(k, l));
        kt.emplace_back(2 * b + l, 2 * a + k, -w * Tab(k, l));
      }
    }
  };
  for (const auto& [tri, w] : mesh.weighted_triangles()) {
    const ChartPoint& P = pos[tri[0]];
    const Vec4 e1 = coords_in_chart_of(space, P, pos[tri[1]]) - P.c;
    const Vec4 e2 = coords_in_chart_of(space, P, pos[tri[2]]) - P.c;
    const Vec4 e3 = e2 - e1;
    ChartPoint C = P;
    C.c += (e1 + e2) / 3;
    const Mat4 G = metric(space, C);
    const double a = ip(G, e1, e1), b = ip(G, e2, e2), c = ip(G, e1, e2);
    const double A2 = std::sqrt(std::max(0.0, a * b - c * c));  // twice the area
    if (!(A2 > 0)) throw DomainError("degenerate triangle in the Jacobi assembly");
    const double cot0 = c / A2, cot1 = -ip(G, e1, e3) / A2, cot2 = ip(G, e2, e3) / A2;
    add_edge(tri[1], tri[2], 0.5 * w * cot0);
    add_edge(tri[0], tri[2], 0.5 * w * cot1);
    add_edge(tri[0], tri[1], 0.5 * w * cot2);
  }
  J.K.resize(2 * nv, 2 * nv);
  J.K.setFromTriplets(kt.begin(), kt.end());

  J.shape2.assign(nv, Mat2::Zero());
  J.curvature.assign(nv, Mat2::Zero());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nv; ++i) {
    const SurfaceJet jet = surface_jet(space, s.stencils, pos, i);
    const MetricJet mj = metric_jet(space, pos[i]);
    const Mat4& G = mj.g;
    Mat2 g;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) g(a, b) = ip(G, jet.d[a], jet.d[b]);
    const Mat2 gi = g.inverse();
    std::array<Mat2, 2> A;  // A[k](a, b) = <II(X_a, X_b), n_k>
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Vec4 v = jet.dd[a + b];
        for (int k = 0; k < 4; ++k) v(k) += jet.d[a].dot(mj.gamma[k] * jet.d[b]);
        for (int k = 0; k < 2; ++k) A[k](a, b) = ip(G, v, frames[i].n[k]);
      }
    Mat2 S;
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) S(k, l) = (gi * A[k] * gi * A[l].transpose()).trace();
    J.shape2[i] = S;
    const auto R = riemann(space, pos[i]);
    Mat2 Rc = Mat2::Zero();
    for (int l = 0; l < 2; ++l) {
      Vec4 acc = Vec4::Zero();
      for (const Vec4& e : frames[i].t)
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) acc(a) += e(b) * frames[i].n[l].dot(R[a][b] * e);
      for (int k = 0; k < 2; ++k) Rc(k, l) = ip(G, acc, frames[i].n[k]);
    }
    J.curvature[i] = 0.5 * (Rc + Rc.transpose());
  }
  std::vector<Eigen::Triplet<double>> pt;
  for (int i = 0; i < nv; ++i) {
    const Mat2 B = J.shape2[i] + J.curvature[i];
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) pt.emplace_back(2 * i + k, 2 * i + l, B(k, l));
  }
  J.P.resize(2 * nv, 2 * nv);
  J.P.setFromTriplets(pt.begin(), pt.end());
  return J;
}

JacobiSystem assemble_jacobi(const GHSpace& space, const InitialSurface& s) {
  return assemble_jacobi(space, s, reference_positions(s.mesh), s.frames);
}

namespace {

// Representative rows whose stencils see each vertex.
std::vector<std::vector<int>> touching_reps(const InitialSurface& s, const std::vector<int>& reps) {
  std::vector<std::vector<int>> touch(s.mesh.vertex_count());
  for (int r : reps) {
    touch[r].push_back(r);
    for (int j : s.stencils.idx[r]) touch[j].push_back(r);
  }
  return touch;
}

std::vector<int> unique_reps(const ReducedBasis& b) {
  std::vector<int> r = b.rep;
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

Eigen::VectorXd reduced_residual(const GHSpace& space, const InitialSurface& s, const ReducedBasis& b,
                                 const Eigen::VectorXd& c, double max_norm) {
  const auto pos = graph_immersion(space, s, expand(b, c), max_norm);
  const std::vector<int> reps = unique_reps(b);
  std::vector<Vec2> H(s.mesh.vertex_count());
#pragma omp parallel for schedule(static)
  for (int k = 0; k < static_cast<int>(reps.size()); ++k) H[reps[k]] = graph_mean_curvature_at(space, s, pos, reps[k]);
  Eigen::VectorXd F(b.rep.size());
  for (size_t u = 0; u < b.rep.size(); ++u) F(u) = b.dir[u].dot(H[b.rep[u]]);
  return F;
}

}  // namespace

SpMat reduced_jacobian(const GHSpace& space, const InitialSurface& s, const ReducedBasis& b, const NormalField& nu,
                       double eps) {
  const int nv = b.vertices;
  const int nu_count = static_cast<int>(b.rep.size());
  const auto pos = graph_immersion(space, s, nu, std::numeric_limits<double>::infinity());
  const auto touch = touching_reps(s, unique_reps(b));
  std::vector<std::vector<int>> units_at(nv);
  for (int u = 0; u < nu_count; ++u) units_at[b.rep[u]].push_back(u);
  std::vector<Eigen::Triplet<double>> trip;
#pragma omp parallel
  {
    std::vector<ChartPoint> local = pos;
    std::vector<int> mark(nv, -1);
    std::vector<Eigen::Triplet<double>> mine;
    std::vector<Vec2> Hp(nv);
#pragma omp for schedule(dynamic, 16)
    for (int u = 0; u < nu_count; ++u) {
      std::vector<int> rows;
      for (const auto& [j, sv] : b.support[u])
        for (int r : touch[j])
          if (mark[r] != u) {
            mark[r] = u;
            rows.push_back(r);
          }
      for (int side : {1, -1}) {
        for (const auto& [j, sv] : b.support[u]) local[j] = displace(s, j, nu[j] + side * eps * sv);
        for (int r : rows) {
          const Vec2 h = graph_mean_curvature_at(space, s, local, r);
          Hp[r] = side > 0 ? h : Vec2((Hp[r] - h) / (2 * eps));
        }
      }
      for (const auto& [j, sv] : b.support[u]) local[j] = pos[j];
      for (int r : rows)
        for (int w : units_at[r]) {
          const double v = b.dir[w].dot(Hp[r]);
          if (v != 0.0) mine.emplace_back(w, u, v);
        }
    }
#pragma omp critical
    trip.insert(trip.end(), mine.begin(), mine.end());
  }
  SpMat J(nu_count, nu_count);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

double inverse_inf_norm(const SpMat& A) {
  const int n = static_cast<int>(A.rows());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw DomainError("linearisation is singular");
  // ||A^{-1}||_inf = ||B||_1 with B = A^{-T}: B x = A^{-T} x, B^T x = A^{-1} x.
  auto Bx = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return lu.transpose().solve(x); };
  auto Btx = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return lu.solve(x); };
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
  double est = 0;
  int jprev = -1;
  for (int it = 0; it < 5; ++it) {
    const Eigen::VectorXd y = Bx(x);
    est = y.lpNorm<1>();
    Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
    const Eigen::VectorXd z = Btx(xi);
    int j;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x) || j == jprev) break;
    jprev = j;
    x.setZero();
    x(j) = 1;
  }
  // Higham's alternating test vector guards against unlucky sign patterns.
  Eigen::VectorXd alt(n);
  for (int i = 0; i < n; ++i) alt(i) = (i % 2 ? -1.0 : 1.0) * (1 + static_cast<double>(i) / std::max(1, n - 1));
  const double alt_est = 2 * Bx(alt).lpNorm<1>() / (3.0 * n);
  return std::max(est, alt_est);
}

namespace {

// Smallest singular value of W J W^{-1} by inverse iteration on its normal equations.
double weighted_sigma_min(Eigen::SparseLU<SpMat>& lu, const Eigen::VectorXd& w, int iters = 40) {
  const int n = static_cast<int>(w.size());
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  x.normalize();
  double mu = 0;
  for (int it = 0; it < iters; ++it) {
    // y = A^{-1} A^{-T} x with A = W J W^{-1}
    Eigen::VectorXd y = lu.transpose().solve(Eigen::VectorXd(x.cwiseQuotient(w)));
    y = y.cwiseProduct(w);
    y = lu.solve(Eigen::VectorXd(y.cwiseQuotient(w)));
    y = y.cwiseProduct(w);
    mu = y.norm();
    x = y / mu;
  }
  return 1.0 / std::sqrt(mu);
}

}  // namespace

NewtonReport newton_solve(const GHSpace& space, const InitialSurface& s, const SolverConfig& cfg) {
  NewtonReport rep;
  rep.r = cfg.r;
  const int nv = s.mesh.vertex_count();
  const NormalAction action = normal_action(space, s);
  const ReducedBasis b = reduced_basis(action, nv);
  const int n = static_cast<int>(b.rep.size());
  rep.unknowns = n;

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd F0 = reduced_residual(space, s, b, c, cfg.r);
  rep.H0 = F0.lpNorm<Eigen::Infinity>();

  SpMat J = reduced_jacobian(space, s, b, expand(b, c), cfg.fd_eps);
  auto factor = [&](const SpMat& A) {
    auto lu = std::make_unique<Eigen::SparseLU<SpMat>>();
    lu->compute(A);
    if (lu->info() != Eigen::Success) throw DomainError("equivariant linearisation is singular");
    return lu;
  };
  auto lu = factor(J);
  rep.C = inverse_inf_norm(J);

  const auto mass = vertex_masses(space, s.mesh, reference_positions(s.mesh));
  Eigen::VectorXd w(n);
  for (int u = 0; u < n; ++u) w(u) = std::sqrt(mass[b.rep[u]] * b.orbit_size[u]);
  rep.sigma_min = weighted_sigma_min(*lu, w);

  // Quadratic constant fitted on smooth equivariant probes.
  std::mt19937 rng(cfg.seed);
  for (int k = 0; k < cfg.q_samples; ++k) {
    Eigen::VectorXd p = restrict_to(b, equivariant_project(action, smooth_random_field(space, s, rng)));
    const double pn = p.lpNorm<Eigen::Infinity>();
    if (!(pn > 0)) continue;
    const double amp = 0.02 / (1 << (k % 3));
    p *= amp / pn;
    const Eigen::VectorXd R = reduced_residual(space, s, b, p, cfg.r) - F0 - J * p;
    rep.q = std::max(rep.q, R.lpNorm<Eigen::Infinity>() / (amp * amp));
  }
  rep.smallness_ok = 2 * rep.C * rep.H0 < cfg.r && 4 * rep.C * rep.C * rep.q * rep.H0 < 1;

  Eigen::VectorXd F = F0;
  double fn = rep.H0;
  bool fresh = true;
  for (int it = 0;; ++it) {
    const NormalField H = mean_curvature_of_graph(space, s, expand(b, c));
    rep.history.push_back(sup_norm(H));
    if (rep.history.back() < cfg.tol) {
      rep.converged = true;
      break;
    }
    if (it >= cfg.max_iter) break;
    const Eigen::VectorXd delta = -lu->solve(F);
    double lambda = 1;
    bool accepted = false;
    Eigen::VectorXd cn, Fn;
    for (int ls = 0; ls < 8; ++ls, lambda *= 0.5) {
      cn = c + lambda * delta;
      if (cn.lpNorm<Eigen::Infinity>() > cfg.r) continue;
      try {
        Fn = reduced_residual(space, s, b, cn, cfg.r);
      } catch (const DomainError&) {
        continue;
      }
      if (Fn.lpNorm<Eigen::Infinity>() < fn) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (fresh) {
        rep.message = "no descent step inside the trust radius";
        break;
      }
      J = reduced_jacobian(space, s, b, expand(b, c), cfg.fd_eps);
      lu = factor(J);
      fresh = true;
      continue;
    }
    rep.step_norm.push_back((cn - c).lpNorm<Eigen::Infinity>());
    const double ratio = Fn.lpNorm<Eigen::Infinity>() / fn;
    c = cn;
    F = Fn;
    fn = F.lpNorm<Eigen::Infinity>();
    ++rep.steps;
    fresh = false;
    if (ratio > 0.1) {
      J = reduced_jacobian(space, s, b, expand(b, c), cfg.fd_eps);
      lu = factor(J);
      fresh = true;
    }
  }
  rep.nu = expand(b, c);
  rep.nu_norm = c.lpNorm<Eigen::Infinity>();
  rep.bound_ok = rep.nu_norm <= 2 * rep.C * rep.H0;
  if (rep.message.empty()) {
    std::ostringstream os;
    os << (rep.converged ? "converged" : "not converged") << " in " << rep.steps << " steps";
    rep.message = os.str();
  }
  return rep;
}

Vec4 fibre_killing_vector(const ChartPoint& p) {
  if (p.chart == kTrivialisation) return Vec4::Unit(3);
  const Vec4& q = p.c;
  return Vec4(q(1), -q(0), q(3), -q(2));
}

NormalField killing_normal_field(const GHSpace& space, const std::vector<ChartPoint>& pos,
                                 const std::vector<VertexFrame>& frames) {
  NormalField out(pos.size());
  for (size_t i = 0; i < pos.size(); ++i) {
    const Mat4 G = metric(space, pos[i]);
    const Vec4 K = fibre_killing_vector(pos[i]);
    out[i] = Vec2(ip(G, K, frames[i].n[0]), ip(G, K, frames[i].n[1]));
  }
  return out;
}

}  // namespace ghsurf
