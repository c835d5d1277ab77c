#include "ghsurf/analysis.hpp"

#include <arpack/arpack.hpp>

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ghsurf {

namespace {

double ip(const Mat4& G, const Vec4& a, const Vec4& b) { return a.dot(G * b); }

// Free-row restriction of A - shift M.
struct Restricted {
  std::vector<int> full;   // free index -> full index
  std::vector<int> local;  // full index -> free index or -1
  SpMat A;
  Eigen::VectorXd m;
};

Restricted restrict_rows(const SpMat& A, const Eigen::VectorXd& m, const std::vector<bool>& fixed) {
  Restricted R;
  const int n = static_cast<int>(A.rows());
  R.local.assign(n, -1);
  for (int i = 0; i < n; ++i)
    if (!fixed[i]) {
      R.local[i] = static_cast<int>(R.full.size());
      R.full.push_back(i);
    }
  const int nf = static_cast<int>(R.full.size());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(A.nonZeros());
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      const int i = R.local[it.row()], j = R.local[it.col()];
      if (i >= 0 && j >= 0) t.emplace_back(i, j, it.value());
    }
  R.A.resize(nf, nf);
  R.A.setFromTriplets(t.begin(), t.end());
  R.m.resize(nf);
  for (int i = 0; i < nf; ++i) R.m(i) = m(R.full[i]);
  return R;
}

SpMat shifted(const Restricted& R, double shift) {
  SpMat B = R.A;
  for (int i = 0; i < B.rows(); ++i) B.coeffRef(i, i) -= shift * R.m(i);
  B.makeCompressed();
  return B;
}

Vec4 edge(const GHSpace& space, const std::vector<ChartPoint>& pos, int a, int b) {
  return coords_in_chart_of(space, pos[a], pos[b]) - pos[a].c;
}

}  // namespace

EigenSolution lowest_eigenpairs(const SpMat& A, const Eigen::VectorXd& m, const std::vector<bool>& fixed, int k,
                                double shift, double tol) {
  const Restricted R = restrict_rows(A, m, fixed);
  const int n = static_cast<int>(R.full.size());
  if (k < 1 || k >= n) throw DomainError("eigensolve: bad number of eigenpairs");
  Eigen::SimplicialLDLT<SpMat> ldlt(shifted(R, shift));
  if (ldlt.info() != Eigen::Success) throw DomainError("eigensolve: factorisation failed");

  const int ncv = std::min(n, std::max(2 * k + 1, k + 24));
  const int lworkl = ncv * (ncv + 8);
  std::vector<double> resid(n, 0.0), v(static_cast<size_t>(n) * ncv), workd(3 * static_cast<size_t>(n)),
      workl(lworkl);
  std::array<a_int, 11> iparam{}, ipntr{};
  iparam[0] = 1;
  iparam[2] = 3000;
  iparam[6] = 3;
  a_int ido = 0, info = 0;
  // Deterministic start vector.
  for (int i = 0; i < n; ++i) resid[i] = 1.0 + 0.5 * std::sin(0.7 * i);
  info = 1;
  Eigen::VectorXd x(n);
  for (;;) {
    arpack::saupd(ido, arpack::bmat::generalized, n, arpack::which::largest_magnitude, k, tol, resid.data(), ncv,
                  v.data(), n, iparam.data(), ipntr.data(), workd.data(), workl.data(), lworkl, info);
    if (ido == -1 || ido == 1) {
      double* in = workd.data() + ipntr[0] - 1;
      double* out = workd.data() + ipntr[1] - 1;
      if (ido == -1) {
        for (int i = 0; i < n; ++i) x(i) = R.m(i) * in[i];
      } else {
        const double* bx = workd.data() + ipntr[2] - 1;
        for (int i = 0; i < n; ++i) x(i) = bx[i];
      }
      const Eigen::VectorXd y = ldlt.solve(x);
      for (int i = 0; i < n; ++i) out[i] = y(i);
    } else if (ido == 2) {
      double* in = workd.data() + ipntr[0] - 1;
      double* out = workd.data() + ipntr[1] - 1;
      for (int i = 0; i < n; ++i) out[i] = R.m(i) * in[i];
    } else {
      break;
    }
  }
  if (info < 0) throw DomainError("eigensolve: ARPACK error " + std::to_string(info));
  if (info == 1) throw DomainError("eigensolve did not converge");
  std::vector<a_int> select(ncv, 1);
  std::vector<double> d(k);
  std::vector<double> z(static_cast<size_t>(n) * k);
  a_int rinfo = 0;
  arpack::seupd(1, arpack::howmny::ritz_vectors, select.data(), d.data(), z.data(), n, shift,
                arpack::bmat::generalized, n, arpack::which::largest_magnitude, k, tol, resid.data(), ncv, v.data(),
                n, iparam.data(), ipntr.data(), workd.data(), workl.data(), lworkl, rinfo);
  if (rinfo != 0) throw DomainError("eigensolve: ARPACK extraction error " + std::to_string(rinfo));
  const int found = iparam[4];
  if (found < k) throw DomainError("eigensolve did not converge");

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  EigenSolution S;
  S.shift = shift;
  S.iterations = iparam[2];
  S.vectors = Eigen::MatrixXd::Zero(A.rows(), k);
  for (int c = 0; c < k; ++c) {
    const int j = order[c];
    Eigen::Map<const Eigen::VectorXd> w(z.data() + static_cast<size_t>(j) * n, n);
    const double nrm = std::sqrt(w.dot(R.m.cwiseProduct(w)));
    Eigen::VectorXd u = w / nrm;
    // sign: largest entry positive
    Eigen::Index imax;
    u.cwiseAbs().maxCoeff(&imax);
    if (u(imax) < 0) u = -u;
    const Eigen::VectorXd r = R.A * u - d[j] * R.m.cwiseProduct(u);
    S.values.push_back(d[j]);
    S.residuals.push_back(std::sqrt(r.cwiseProduct(R.m.cwiseInverse()).dot(r)));
    for (int i = 0; i < n; ++i) S.vectors(R.full[i], c) = u(i);
  }
  return S;
}

int count_below(const SpMat& A, const Eigen::VectorXd& m, const std::vector<bool>& fixed, double shift) {
  const Restricted R = restrict_rows(A, m, fixed);
  Eigen::SimplicialLDLT<SpMat> ldlt(shifted(R, shift));
  if (ldlt.info() != Eigen::Success) throw DomainError("inertia: factorisation failed");
  const Eigen::VectorXd D = ldlt.vectorD();
  return static_cast<int>((D.array() < 0).count());
}

Eigen::VectorXd flatten(const NormalField& v) {
  Eigen::VectorXd x(2 * v.size());
  for (size_t i = 0; i < v.size(); ++i) x.segment<2>(2 * i) = v[i];
  return x;
}

NormalField unflatten(const Eigen::VectorXd& x) {
  NormalField v(x.size() / 2);
  for (size_t i = 0; i < v.size(); ++i) v[i] = x.segment<2>(2 * i);
  return v;
}

double mass_correlation(const NormalField& a, const NormalField& b, const std::vector<double>& mass) {
  double ab = 0, aa = 0, bb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ab += mass[i] * a[i].dot(b[i]);
    aa += mass[i] * a[i].squaredNorm();
    bb += mass[i] * b[i].squaredNorm();
  }
  if (aa == 0 || bb == 0) return 0;
  return std::abs(ab) / std::sqrt(aa * bb);
}

SpectralReport spectrum(const JacobiSystem& J, const SurfaceMesh& mesh, int k,
                        const std::vector<std::pair<std::string, NormalField>>& candidates) {
  const int nv = mesh.vertex_count();
  std::vector<bool> fixed(2 * nv, false);
  for (int i = 0; i < nv; ++i)
    if (mesh.verts[i].boundary) fixed[2 * i] = fixed[2 * i + 1] = true;
  Eigen::VectorXd m(2 * nv);
  for (int i = 0; i < nv; ++i) m(2 * i) = m(2 * i + 1) = J.mass[i];
  const SpMat A = J.stability_matrix();

  // K >= 0, so the pencil is bounded below by -max |S + R|.
  double bound = 0;
  for (int i = 0; i < nv; ++i) {
    const Mat2 B = J.P.block(2 * i, 2 * i, 2, 2).toDense();
    bound = std::max(bound, B.operatorNorm());
  }
  const EigenSolution first = lowest_eigenpairs(A, m, fixed, 1, -bound - 0.5);
  const double lmin = first.values[0];
  const double shift = lmin - 0.05 * std::max(1.0, std::abs(lmin));
  const EigenSolution S = lowest_eigenpairs(A, m, fixed, k, shift);

  SpectralReport rep;
  rep.h = J.h;
  rep.threshold = 10 * J.h * J.h;
  rep.shift = shift;
  rep.iterations = S.iterations;
  rep.eigenvalues = S.values;
  rep.residuals = S.residuals;
  for (int c = 0; c < k; ++c) rep.fields.push_back(unflatten(S.vectors.col(c)));
  for (double l : S.values) {
    if (l < -rep.threshold) ++rep.negative;
    else if (l <= rep.threshold) ++rep.near_zero;
  }
  rep.inertia_negative = count_below(A, m, fixed, -rep.threshold);
  for (const auto& [name, f] : candidates) {
    rep.names.push_back(name);
    std::vector<double> c;
    for (const NormalField& e : rep.fields) c.push_back(mass_correlation(e, f, J.mass));
    rep.correlation.push_back(std::move(c));
  }
  return rep;
}

WitnessReport second_variation_witness(const GHSpace& space, const InitialSurface& s, const JacobiSystem& J,
                                       const NormalField& killing) {
  const GHSpace flat = GHSpace::flat(s.scherk.m, s.scherk.periods);
  const InitialSurface F = build_flat_scherk(flat, s.schedule.T1, s.spec);
  const JacobiSystem J0 = assemble_jacobi(flat, F);
  const SpectralReport S0 = spectrum(J0, F.mesh, 1);
  const NormalField& e = S0.fields[0];

  WitnessReport w;
  w.flat_eigenvalue = S0.eigenvalues[0];
  {
    const Eigen::VectorXd x = flatten(e);
    const SpMat A0 = J0.stability_matrix();
    double xm = 0;
    for (size_t i = 0; i < e.size(); ++i) xm += J0.mass[i] * e[i].squaredNorm();
    w.flat_value = x.dot(A0 * x) / xm;
  }
  const SurfaceMesh& G = s.mesh;
  const SurfaceMesh& H = F.mesh;
  w.field.assign(G.vertex_count(), Vec2::Zero());
  auto match = [&](int gi, int hi) {
    if (gi < 0 || hi < 0) return;
    const Vec3 a = base_point(space, G.verts[gi].pos), b = base_point(flat, H.verts[hi].pos);
    double dt = 0;
    if (G.verts[gi].pos.chart == kTrivialisation && H.verts[hi].pos.chart == kTrivialisation)
      dt = std::abs(std::remainder(G.verts[gi].pos.c(3) - H.verts[hi].pos.c(3), 2 * M_PI));
    w.transplant_defect = std::max(w.transplant_defect, std::max((a - b).norm(), dt));
    w.field[gi] = e[hi];
    ++w.matched;
  };
  for (int i = 0; i < H.vertex_count(); ++i)
    if (H.verts[i].arm < 0) match(i, i);
  for (int a = 0; a < 4; ++a)
    for (int l = 1; l <= H.arm_levels; ++l)
      for (int f = 0; f < H.fibre_points; ++f) match(G.arm_vertex(a, l, f), H.arm_vertex(a, l, f));
  if (w.transplant_defect > 1e-9) throw DomainError("witness transplant: meshes do not agree on the Scherk region");

  const SpMat A = J.stability_matrix();
  auto rayleigh = [&](const NormalField& v) {
    const Eigen::VectorXd x = flatten(v);
    double xm = 0;
    for (size_t i = 0; i < v.size(); ++i) xm += J.mass[i] * v[i].squaredNorm();
    return x.dot(A * x) / xm;
  };
  w.value = rayleigh(w.field);
  double vk = 0, kk = 0;
  for (size_t i = 0; i < killing.size(); ++i) {
    vk += J.mass[i] * w.field[i].dot(killing[i]);
    kk += J.mass[i] * killing[i].squaredNorm();
  }
  NormalField orth = w.field;
  for (size_t i = 0; i < orth.size(); ++i) orth[i] -= (vk / kk) * killing[i];
  w.value_orth = rayleigh(orth);
  return w;
}

double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 2 * std::atan2(a.dot(b.cross(c)), 1 + a.dot(b) + b.dot(c) + c.dot(a));
}

GaussLift gauss_lift(const GHSpace& space, const SurfaceMesh& mesh, const std::vector<ChartPoint>& pos,
                     const std::vector<VertexFrame>& frames) {
  const int nv = mesh.vertex_count();
  GaussLift L;
  L.a.resize(nv);
  std::vector<double> norms(nv);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nv; ++i) {
    const HKTriple T = hk_triple(space, pos[i]);
    Vec3 w;
    for (int k = 0; k < 3; ++k) w(k) = frames[i].t[0].dot(T.w[k] * frames[i].t[1]);
    norms[i] = w.norm();
    L.a[i] = -w / w.norm();
  }
  L.min_norm = *std::min_element(norms.begin(), norms.end());
  if (!(L.min_norm > 1e-6)) throw DomainError("Gauss lift: degenerate tangent plane");
  double total = 0;
  for (const auto& [tri, wt] : mesh.weighted_triangles())
    total += wt * solid_angle(L.a[tri[0]], L.a[tri[1]], L.a[tri[2]]);
  L.degree = total / (4 * M_PI);
  return L;
}

int webster_self_intersection(int degree, int genus) { return 2 * genus - 2 - 2 * degree; }

std::array<double, 4> neck_windings(const GHSpace& space, const InitialSurface& s, const std::vector<ChartPoint>& pos,
                                    int orientation) {
  const SurfaceMesh& M = s.mesh;
  const double target = 0.5 * (s.schedule.T1 + s.schedule.T2);
  std::array<double, 4> out{};
  const auto vf = M.vertex_faces();
  for (int a = 0; a < 4; ++a) {
    int best = -1;
    double gap = 1e300;
    for (int l = 1; l <= M.arm_levels; ++l) {
      const int v = M.arm_vertex(a, l, 0);
      if (v < 0) continue;
      const double g = std::abs(M.verts[v].s - target);
      if (g < gap) {
        gap = g;
        best = l;
      }
    }
    std::vector<int> ring;
    for (int f = 0; f < M.fibre_points; ++f) {
      const int v = M.arm_vertex(a, best, f);
      if (v >= 0) ring.push_back(v);
    }
    if (best < 0 || ring.size() < 3) throw DomainError("neck cross-section extraction failed");
    // Direction of the ring as the boundary of the levels below it.
    int dir = 0;
    for (int f : vf[ring[0]]) {
      const Face& F = M.faces[f];
      bool core_side = false;
      for (int k = 0; k < F.n; ++k) core_side |= M.verts[F.v[k]].level < best || M.verts[F.v[k]].arm != a;
      if (!core_side) continue;
      for (int k = 0; k < F.n; ++k) {
        const int u = F.v[k], v = F.v[(k + 1) % F.n];
        if (u == ring[0] && v == ring[1]) dir = 1;
        if (u == ring[1] && v == ring[0]) dir = -1;
      }
    }
    if (dir == 0) throw DomainError("neck cross-section extraction failed");
    double wind = 0;
    for (size_t j = 0; j < ring.size(); ++j) {
      const ChartPoint p = to_trivialisation(space, pos[ring[j]]);
      const ChartPoint q = to_trivialisation(space, pos[ring[(j + 1) % ring.size()]]);
      wind += std::remainder(q.c(3) - p.c(3), 2 * M_PI);
    }
    out[a] = orientation * dir * wind / (2 * M_PI);
  }
  return out;
}

std::array<Mat4, 3> complex_structures(const GHSpace& space, const ChartPoint& p) {
  const HKTriple T = hk_triple(space, p);
  const Mat4 Gi = metric(space, p).inverse();
  std::array<Mat4, 3> J;
  for (int i = 0; i < 3; ++i) J[i] = -Gi * T.w[i];
  return J;
}

FueterReport fueter_and_balancing(const GHSpace& space, const SurfaceMesh& mesh, const std::vector<ChartPoint>& pos,
                                  const std::vector<VertexFrame>& frames, const GaussLift& lift,
                                  int random_directions, unsigned seed) {
  FueterReport R;
  const auto tris = mesh.weighted_triangles();
  const int nt = static_cast<int>(tris.size());
  std::vector<double> res[2];
  res[0].resize(nt);
  res[1].resize(nt);
  std::vector<double> tri_area(nt);
  std::vector<Vec3> tri_period(nt);
#pragma omp parallel for schedule(static)
  for (int t = 0; t < nt; ++t) {
    const auto& [v, w] = tris[t];
    const Vec4 E1 = edge(space, pos, v[0], v[1]), E2 = edge(space, pos, v[0], v[2]);
    ChartPoint C = pos[v[0]];
    C.c += (E1 + E2) / 3;
    const Mat4 G = metric(space, C);
    const HKTriple T = hk_triple(space, C);
    for (int k = 0; k < 3; ++k) tri_period[t](k) = w * 0.5 * E1.dot(T.w[k] * E2);
    const double l1 = std::sqrt(ip(G, E1, E1));
    const Vec4 f1 = E1 / l1;
    Vec4 f2 = E2 - ip(G, E2, f1) * f1;
    const double h2 = std::sqrt(ip(G, f2, f2));
    f2 /= h2;
    tri_area[t] = w * 0.5 * l1 * h2;
    Mat2 P;
    P << l1, ip(G, E2, f1), 0, h2;
    Eigen::Matrix<double, 3, 2> D;
    D.col(0) = lift.a[v[1]] - lift.a[v[0]];
    D.col(1) = lift.a[v[2]] - lift.a[v[0]];
    const Eigen::Matrix<double, 3, 2> da = D * P.inverse();
    const Vec3 abar = (lift.a[v[0]] + lift.a[v[1]] + lift.a[v[2]]).normalized();
    res[0][t] = (da.col(1) - abar.cross(da.col(0))).norm();
    res[1][t] = (da.col(1) + abar.cross(da.col(0))).norm();
  }
  double mean[2] = {0, 0};
  for (int t = 0; t < nt; ++t) {
    R.area += tri_area[t];
    R.periods += tri_period[t];
    for (int s = 0; s < 2; ++s) mean[s] += tri_area[t] * res[s][t];
  }
  const int si = mean[0] <= mean[1] ? 0 : 1;
  R.sign = si == 0 ? 1 : -1;
  R.mean = mean[si] / R.area;
  R.sup = *std::max_element(res[si].begin(), res[si].end());

  const std::vector<double> mass = vertex_masses(space, mesh, pos);
  double vertex_area = 0;
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    R.moments += 2 * mass[i] * lift.a[i];
    vertex_area += mass[i];
  }
  for (int k = 0; k < 3; ++k)
    R.route_gap = std::max(R.route_gap, std::abs(R.moments(k) + 2 * R.periods(k)) / (2 * R.area));

  // RMS of |J_b e1 - e2| for fixed directions b.
  const int nv = mesh.vertex_count();
  std::vector<std::array<Vec4, 3>> Je1(nv);
  std::vector<Mat4> Gs(nv);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nv; ++i) {
    const auto Js = complex_structures(space, pos[i]);
    for (int k = 0; k < 3; ++k) Je1[i][k] = Js[k] * frames[i].t[0];
    Gs[i] = metric(space, pos[i]);
  }
  std::vector<Vec3> dirs;
  for (int k = 0; k < 3; ++k) {
    dirs.push_back(Vec3::Unit(k));
    dirs.push_back(-Vec3::Unit(k));
  }
  std::mt19937 rng(seed);
  std::normal_distribution<double> N(0, 1);
  for (int r = 0; r < random_directions; ++r) {
    Vec3 b(N(rng), N(rng), N(rng));
    dirs.push_back(b.normalized());
  }
  R.nonholomorphic = 1e300;
  for (const Vec3& b : dirs) {
    double acc = 0;
    for (int i = 0; i < nv; ++i) {
      const Vec4 d = b(0) * Je1[i][0] + b(1) * Je1[i][1] + b(2) * Je1[i][2] - frames[i].t[1];
      acc += mass[i] * ip(Gs[i], d, d);
    }
    R.nonholomorphic = std::min(R.nonholomorphic, std::sqrt(acc / vertex_area));
  }
  return R;
}

double symmetry_defect(const GHSpace& space, const SurfaceMesh& mesh, const std::vector<ChartPoint>& pos) {
  const auto& group = space.group();
  if (mesh.perm.size() != group.size()) throw DomainError("mesh has no symmetry permutations");
  double worst = 0;
  for (size_t g = 0; g < group.size(); ++g)
    for (size_t i = 0; i < pos.size(); ++i) {
      const ChartPoint& target = pos[mesh.perm[g][i]];
      const ChartPoint img = apply_symmetry(space, group[g], pos[i]);
      worst = std::max(worst, (coords_in_chart_of(space, target, img) - target.c).norm());
    }
  return worst;
}

TopologyReport topology_report(const GHSpace& space, const InitialSurface& s, const SolvedSurface& solved) {
  TopologyReport T;
  const GaussLift L = gauss_lift(space, s.mesh, solved.pos, solved.frames);
  T.degree_raw = L.degree;
  T.degree = static_cast<int>(std::lround(L.degree));
  T.euler = s.mesh.euler_characteristic();
  T.genus = s.mesh.genus();
  T.webster = webster_self_intersection(T.degree, T.genus);
  if (s.closed) {
    T.windings_raw = neck_windings(space, s, solved.pos);
    T.winding_margin = 1e300;
    for (int a = 0; a < 4; ++a) {
      T.windings[a] = static_cast<int>(std::lround(T.windings_raw[a]));
      T.winding_margin = std::min(T.winding_margin, 0.5 - std::abs(T.windings_raw[a] - T.windings[a]));
    }
    for (int i = 0; i < s.mesh.vertex_count(); ++i) {
      const auto& v = s.mesh.verts[i];
      if (v.fibre != -1 || solved.pos[i].chart < 0) continue;
      const Vec3 p = space.centres()[solved.pos[i].chart].normalized();
      const double c = std::min(1.0, std::abs(L.a[i].dot(p)));
      T.cap_alignment = std::max(T.cap_alignment, std::acos(c));
    }
  }
  T.fueter = fueter_and_balancing(space, s.mesh, solved.pos, solved.frames, L);
  T.periods = T.fueter.periods;
  return T;
}

}  // namespace ghsurf
