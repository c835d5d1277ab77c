#include "ghsurf/discrete.hpp"

#include <algorithm>
#include <cmath>

namespace ghsurf {

namespace {

double ip(const Mat4& G, const Vec4& a, const Vec4& b) { return a.dot(G * b); }

// G-orthonormal tangent pair from two spanning vectors, and a G-orthonormal normal pair.
void frame_from(const Mat4& G, Vec4 e1, Vec4 e2, std::array<Vec4, 2>& t, std::array<Vec4, 2>& n) {
  e1 /= std::sqrt(ip(G, e1, e1));
  e2 -= ip(G, e2, e1) * e1;
  e2 /= std::sqrt(ip(G, e2, e2));
  t = {e1, e2};
  int k = 0;
  for (int c = 0; c < 4 && k < 2; ++c) {
    Vec4 v = Vec4::Unit(c);
    for (const Vec4& b : {e1, e2}) v -= ip(G, v, b) * b;
    for (int j = 0; j < k; ++j) v -= ip(G, v, n[j]) * n[j];
    const double l = std::sqrt(std::max(0.0, ip(G, v, v)));
    if (l > 0.3) n[k++] = v / l;
  }
  if (k < 2) throw DomainError("could not complete the normal frame");
}

std::vector<std::pair<int, int>> monomials(int degree) {
  std::vector<std::pair<int, int>> m;
  for (int s = 1; s <= degree; ++s)
    for (int p = s; p >= 0; --p) m.push_back({p, s - p});
  return m;
}

Eigen::MatrixXd vandermonde(const std::vector<Vec2>& ab, const std::vector<std::pair<int, int>>& mono) {
  Eigen::MatrixXd V(ab.size(), mono.size());
  for (size_t j = 0; j < ab.size(); ++j)
    for (size_t c = 0; c < mono.size(); ++c)
      V(j, c) = std::pow(ab[j](0), mono[c].first) * std::pow(ab[j](1), mono[c].second);
  return V;
}

}  // namespace

Vec4 coords_in_chart_of(const GHSpace& space, const ChartPoint& p, const ChartPoint& q) {
  Vec4 c = to_chart(space, p.chart, q).c;
  if (p.chart == kTrivialisation) {
    double dt = std::remainder(c(3) - p.c(3), 2 * M_PI);
    c(3) = p.c(3) + dt;
  }
  return c;
}

std::vector<ChartPoint> reference_positions(const SurfaceMesh& mesh) {
  std::vector<ChartPoint> p;
  p.reserve(mesh.verts.size());
  for (const auto& v : mesh.verts) p.push_back(v.pos);
  return p;
}

StencilSet build_stencils(const GHSpace& space, const SurfaceMesh& mesh, int degree) {
  const int nv = mesh.vertex_count();
  const auto vf = mesh.vertex_faces();
  const auto nb = mesh.vertex_neighbours();
  StencilSet st;
  st.idx.resize(nv);
  st.w.resize(nv);
  st.degree.assign(nv, degree);
  std::vector<int> mark(nv, -1);
#pragma omp parallel for schedule(dynamic, 64) firstprivate(mark)
  for (int i = 0; i < nv; ++i) {
    std::vector<int> ring1{i}, ring2;
    mark[i] = i;
    for (int f : vf[i])
      for (int k = 0; k < mesh.faces[f].n; ++k) {
        const int j = mesh.faces[f].v[k];
        if (mark[j] != i) {
          mark[j] = i;
          ring1.push_back(j);
        }
      }
    for (int r : ring1)
      for (int f : vf[r])
        for (int k = 0; k < mesh.faces[f].n; ++k) {
          const int j = mesh.faces[f].v[k];
          if (mark[j] != i) {
            mark[j] = i;
            ring2.push_back(j);
          }
        }
    std::vector<int> idx(ring1.begin() + 1, ring1.end());
    idx.insert(idx.end(), ring2.begin(), ring2.end());
    const ChartPoint& P = mesh.verts[i].pos;
    const Mat4 G = metric(space, P);
    std::vector<Vec4> Y;
    for (int j : idx) Y.push_back(coords_in_chart_of(space, P, mesh.verts[j].pos) - P.c);
    // Initial tangent plane: the most orthogonal pair of edges.
    double best = -1;
    Vec4 e1, e2;
    for (size_t a = 0; a < nb[i].size(); ++a)
      for (size_t b = a + 1; b < nb[i].size(); ++b) {
        const Vec4 u = coords_in_chart_of(space, P, mesh.verts[nb[i][a]].pos) - P.c;
        const Vec4 v = coords_in_chart_of(space, P, mesh.verts[nb[i][b]].pos) - P.c;
        const double uu = ip(G, u, u), vv = ip(G, v, v), uv = ip(G, u, v);
        const double s = 1 - uv * uv / (uu * vv);
        if (s > best) {
          best = s;
          e1 = u;
          e2 = v;
        }
      }
    std::array<Vec4, 2> T, Nf;
    frame_from(G, e1, e2, T, Nf);
    std::vector<Vec2> ab(Y.size());
    const auto quad = monomials(2);
    for (int it = 0; it < 40; ++it) {
      Eigen::MatrixXd Z(Y.size(), 2);
      for (size_t j = 0; j < Y.size(); ++j) {
        ab[j] = Vec2(ip(G, Y[j], T[0]), ip(G, Y[j], T[1]));
        Z(j, 0) = ip(G, Y[j], Nf[0]);
        Z(j, 1) = ip(G, Y[j], Nf[1]);
      }
      const Eigen::MatrixXd C = vandermonde(ab, quad).colPivHouseholderQr().solve(Z);
      const Vec4 t1 = T[0] + C(0, 0) * Nf[0] + C(0, 1) * Nf[1];
      const Vec4 t2 = T[1] + C(1, 0) * Nf[0] + C(1, 1) * Nf[1];
      frame_from(G, t1, t2, T, Nf);
      if (C.topRows<2>().cwiseAbs().maxCoeff() < 1e-15) break;
    }
    for (size_t j = 0; j < Y.size(); ++j) ab[j] = Vec2(ip(G, Y[j], T[0]), ip(G, Y[j], T[1]));
    double sa = 0, sb = 0;
    for (const Vec2& p : ab) {
      sa = std::max(sa, std::abs(p(0)));
      sb = std::max(sb, std::abs(p(1)));
    }
    std::vector<Vec2> sc(ab.size());
    for (size_t j = 0; j < ab.size(); ++j) sc[j] = Vec2(ab[j](0) / sa, ab[j](1) / sb);
    Eigen::MatrixXd W;
    int deg = degree;
    for (; deg >= 2; --deg) {
      const auto mono = monomials(deg);
      if (sc.size() < mono.size() + 2) continue;
      const Eigen::MatrixXd V = vandermonde(sc, mono);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& S = svd.singularValues();
      if (S(S.size() - 1) < 1e-6 * S(0)) continue;
      const Eigen::MatrixXd pinv =
          svd.matrixV() * S.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
      // monomial order for degree >= 2: a, b, a^2, ab, b^2, ...
      W.resize(5, sc.size());
      W.row(0) = pinv.row(0) / sa;
      W.row(1) = pinv.row(1) / sb;
      W.row(2) = 2 * pinv.row(2) / (sa * sa);
      W.row(3) = pinv.row(3) / (sa * sb);
      W.row(4) = 2 * pinv.row(4) / (sb * sb);
      break;
    }
    if (deg < 2) throw DomainError("degenerate stencil at vertex " + std::to_string(i));
    // Make (d_a, d_b) positively oriented for the mesh orientation.
    double area = 0;
    for (int f : vf[i]) {
      const Face& F = mesh.faces[f];
      int k = 0;
      while (F.v[k] != i) ++k;
      const Vec4 y1 = coords_in_chart_of(space, P, mesh.verts[F.v[(k + 1) % F.n]].pos) - P.c;
      const Vec4 y2 = coords_in_chart_of(space, P, mesh.verts[F.v[(k + F.n - 1) % F.n]].pos) - P.c;
      area += ip(G, y1, T[0]) * ip(G, y2, T[1]) - ip(G, y1, T[1]) * ip(G, y2, T[0]);
    }
    if (area < 0) {
      W.row(1) *= -1;
      W.row(3) *= -1;
    }
    st.idx[i] = std::move(idx);
    st.w[i] = std::move(W);
    st.degree[i] = deg;
  }
  return st;
}

SurfaceJet surface_jet(const GHSpace& space, const StencilSet& st, const std::vector<ChartPoint>& pos, int i) {
  SurfaceJet J;
  const ChartPoint& P = pos[i];
  J.at = P;
  const auto& idx = st.idx[i];
  const Eigen::MatrixXd& W = st.w[i];
  for (size_t j = 0; j < idx.size(); ++j) {
    const Vec4 y = coords_in_chart_of(space, P, pos[idx[j]]) - P.c;
    J.d[0] += W(0, j) * y;
    J.d[1] += W(1, j) * y;
    J.dd[0] += W(2, j) * y;
    J.dd[1] += W(3, j) * y;
    J.dd[2] += W(4, j) * y;
  }
  return J;
}

Vec4 mean_curvature_vector(const GHSpace& space, const SurfaceJet& jet) {
  const MetricJet mj = metric_jet(space, jet.at);
  const Mat4& G = mj.g;
  Mat2 g;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) g(a, b) = ip(G, jet.d[a], jet.d[b]);
  if (!(g.determinant() > 1e-14 * g.trace() * g.trace())) throw DomainError("degenerate induced metric");
  const Mat2 gi = g.inverse();
  auto accel = [&](int a, int b) {
    Vec4 v = jet.dd[a + b];
    for (int k = 0; k < 4; ++k) v(k) += jet.d[a].dot(mj.gamma[k] * jet.d[b]);
    return v;
  };
  Vec4 h = Vec4::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) h += gi(a, b) * accel(a, b);
  // remove the tangential part
  Vec2 c(ip(G, h, jet.d[0]), ip(G, h, jet.d[1]));
  c = gi * c;
  return h - c(0) * jet.d[0] - c(1) * jet.d[1];
}

std::vector<Vec4> mean_curvature_vectors(const GHSpace& space, const StencilSet& st,
                                         const std::vector<ChartPoint>& pos) {
  const int nv = static_cast<int>(pos.size());
  std::vector<Vec4> H(nv);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nv; ++i) H[i] = mean_curvature_vector(space, surface_jet(space, st, pos, i));
  return H;
}

std::vector<double> mean_curvature_norms(const GHSpace& space, const std::vector<ChartPoint>& pos,
                                         const std::vector<Vec4>& H) {
  std::vector<double> n(H.size());
  for (size_t i = 0; i < H.size(); ++i) n[i] = std::sqrt(std::max(0.0, ip(metric(space, pos[i]), H[i], H[i])));
  return n;
}

}  // namespace ghsurf
