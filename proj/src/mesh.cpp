#include "ghsurf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace ghsurf {

namespace {

constexpr double kS2 = 0.70710678118654752440;

double wrap(double t) {
  double r = std::fmod(t, 2 * M_PI);
  if (r < 0) r += 2 * M_PI;
  return r;
}

double smoothstep(double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  return x * x * x * (10 - 15 * x + 6 * x * x);
}

// Ring of vertices around an arm; vid[j] sits at fibre index j * stride.
struct Ring {
  std::vector<int> vid;
  int stride = 1;
};

void connect_rings(const Ring& a, const Ring& b, std::vector<Face>& faces) {
  const int na = static_cast<int>(a.vid.size());
  if (b.stride == a.stride) {
    for (int j = 0; j < na; ++j) {
      const int j1 = (j + 1) % na;
      faces.push_back({{a.vid[j], b.vid[j], b.vid[j1], a.vid[j1]}, 4});
    }
  } else if (b.stride == 2 * a.stride) {
    const int nb = static_cast<int>(b.vid.size());
    for (int j = 0; j < nb; ++j) {
      const int a0 = a.vid[2 * j], a1 = a.vid[2 * j + 1], a2 = a.vid[(2 * j + 2) % na];
      const int b0 = b.vid[j], b1 = b.vid[(j + 1) % nb];
      faces.push_back({{a0, b0, a1, -1}, 3});
      faces.push_back({{a1, b0, b1, -1}, 3});
      faces.push_back({{a1, b1, a2, -1}, 3});
    }
  } else {
    throw DomainError("ring strides must match or double");
  }
}

void close_ring(const Ring& a, int tip, std::vector<Face>& faces) {
  const int na = static_cast<int>(a.vid.size());
  for (int j = 0; j < na; ++j) faces.push_back({{a.vid[j], tip, a.vid[(j + 1) % na], -1}, 3});
}

// Largest coarsening exponent allowed by the fibre grid and the ring radius.
int cap_coarsening(double rho, double rho_c, int half_period_points) {
  int c = 0;
  while (c < 3 && rho <= rho_c / (2 << c) && half_period_points % (2 << c) == 0) ++c;
  return c;
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Consistent orientation by breadth-first propagation; the seed face keeps its order.
void orient(SurfaceMesh& mesh, int seed) {
  const int nf = static_cast<int>(mesh.faces.size());
  std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
  edge_faces.reserve(nf * 2);
  for (int f = 0; f < nf; ++f) {
    const Face& F = mesh.faces[f];
    for (int k = 0; k < F.n; ++k) edge_faces[edge_key(F.v[k], F.v[(k + 1) % F.n])].push_back(f);
  }
  for (const auto& [k, fs] : edge_faces)
    if (fs.size() > 2) throw DomainError("mesh edge shared by more than two faces");
  auto directed = [](const Face& F, int a, int b) {
    for (int k = 0; k < F.n; ++k)
      if (F.v[k] == a && F.v[(k + 1) % F.n] == b) return true;
    return false;
  };
  std::vector<int> state(nf, 0);
  for (int start = 0; start < nf; ++start) {
    const int s0 = start == 0 ? seed : start;
    if (state[s0]) continue;
    state[s0] = 1;
    std::deque<int> queue{s0};
    while (!queue.empty()) {
      const int f = queue.front();
      queue.pop_front();
      const Face& F = mesh.faces[f];
      for (int k = 0; k < F.n; ++k) {
        const int a = F.v[k], b = F.v[(k + 1) % F.n];
        for (int g : edge_faces[edge_key(a, b)]) {
          if (g == f) continue;
          Face& G = mesh.faces[g];
          const bool bad = directed(G, a, b);
          if (!state[g]) {
            if (bad) std::reverse(G.v.begin(), G.v.begin() + G.n);
            state[g] = 1;
            queue.push_back(g);
          } else if (bad) {
            throw DomainError("mesh is not orientable");
          }
        }
      }
    }
  }
}

struct Builder {
  SurfaceMesh mesh;
  std::vector<double> theta;  // fibre grid, unwrapped
  int N = 0, K = 0, n = 1;

  int add(const MeshVertex& v) {
    mesh.verts.push_back(v);
    return static_cast<int>(mesh.verts.size()) - 1;
  }
};

}  // namespace

const char* region_name(Region r) {
  switch (r) {
    case Region::Scherk: return "scherk";
    case Region::Neck: return "neck";
    case Region::Cap: return "cap";
  }
  return "?";
}

std::vector<double> fibre_grid(int fibre_points, int periods, double tau) {
  if (periods < 1 || fibre_points % (2 * periods) != 0)
    throw DomainError("fibre points must be a multiple of 2 * periods");
  const int K = fibre_points / (2 * periods);
  if (K < 2 || K % 2) throw DomainError("fibre grid needs an even count per half period");
  std::vector<double> t(fibre_points);
  for (int g = 0; g < fibre_points; ++g) {
    const int k = g / K, j = g % K;
    const double Th = k * M_PI + 0.5 * M_PI * (1 - std::cos(M_PI * j / K));
    t[g] = tau + Th / periods;
  }
  return t;
}

int SurfaceMesh::euler_characteristic() const {
  std::unordered_map<std::uint64_t, int> edges;
  for (const Face& F : faces)
    for (int k = 0; k < F.n; ++k) edges[edge_key(F.v[k], F.v[(k + 1) % F.n])] = 1;
  return vertex_count() - static_cast<int>(edges.size()) + static_cast<int>(faces.size());
}

std::vector<std::vector<int>> SurfaceMesh::vertex_neighbours() const {
  std::vector<std::vector<int>> nb(verts.size());
  for (const Face& F : faces)
    for (int k = 0; k < F.n; ++k) {
      const int a = F.v[k], b = F.v[(k + 1) % F.n];
      nb[a].push_back(b);
      nb[b].push_back(a);
    }
  for (auto& l : nb) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  return nb;
}

std::vector<std::vector<int>> SurfaceMesh::vertex_faces() const {
  std::vector<std::vector<int>> vf(verts.size());
  for (int f = 0; f < static_cast<int>(faces.size()); ++f)
    for (int k = 0; k < faces[f].n; ++k) vf[faces[f].v[k]].push_back(f);
  return vf;
}

std::vector<std::pair<std::array<int, 3>, double>> SurfaceMesh::weighted_triangles() const {
  std::vector<std::pair<std::array<int, 3>, double>> t;
  t.reserve(faces.size() * 4);
  for (const Face& F : faces) {
    const auto& v = F.v;
    if (F.n == 3) {
      t.push_back({{v[0], v[1], v[2]}, 1.0});
    } else {
      t.push_back({{v[0], v[1], v[2]}, 0.5});
      t.push_back({{v[0], v[2], v[3]}, 0.5});
      t.push_back({{v[0], v[1], v[3]}, 0.5});
      t.push_back({{v[1], v[2], v[3]}, 0.5});
    }
  }
  return t;
}

int SurfaceMesh::arm_vertex(int arm, int level, int fibre) const {
  if (arm < 0 || arm > 3 || level < 1 || level > arm_levels || fibre < 0 || fibre >= fibre_points)
    return -1;
  return arm_index[(static_cast<size_t>(arm) * arm_levels + (level - 1)) * fibre_points + fibre];
}

SurfaceMesh build_tower_mesh(const GHSpace& space, const TowerLayout& layout, const MeshSpec& spec) {
  const ScherkSurface& sc = layout.scherk;
  Builder B;
  B.n = sc.periods;
  B.N = spec.fibre_points;
  B.K = B.N / (2 * B.n);
  B.theta = fibre_grid(B.N, B.n, sc.tau);
  const int N = B.N, K = B.K, n = B.n;
  const double ks = sc.k();
  const bool caps = layout.caps;
  if (caps && space.centre_count() != 4) throw DomainError("closed tower needs the four-centre space");
  if (!caps && !(layout.truncate > 0)) throw DomainError("open tower needs a truncation length");
  if (caps && !(layout.T2 > layout.T1 && layout.cutoff)) throw DomainError("closed tower needs T1 < T2 and a cutoff");

  // Longitudinal levels: uniform to the anchor, graded through the segment.
  const double anchor = caps ? layout.T1 : layout.truncate;
  if (anchor * ks < spec.blend_hi) throw DomainError("arms too short for the core blend");
  const double h0 = spec.step > 0 ? spec.step : 2 * M_PI / N;
  const int L1 = std::max(1, static_cast<int>(std::lround(anchor / h0)));
  const double h = anchor / L1;
  std::vector<double> xi;  // xi[l-1] for arm level l
  const double s_uniform = caps ? layout.T2 + 0.5 : layout.truncate;
  for (int l = 1; l * h <= s_uniform + 1e-9; ++l) xi.push_back(l * h);
  const double rho_c = spec.cap_rho;
  if (caps) {
    const double s_end = space.d() - 0.5 * rho_c * rho_c;
    const double s_u = xi.back();
    if (s_end <= s_u + h) throw DomainError("centres too close for the arm layout");
    const double h_cap = rho_c * rho_c / spec.cap_rings;
    auto spacing = [&](double s) {
      return std::min({spec.max_step, h + spec.growth * (s - s_u), h_cap + spec.growth * (s_end - s)});
    };
    std::vector<double> g{s_u};
    while (g.back() < s_end) g.push_back(g.back() + std::max(1e-3, spacing(g.back())));
    const double scale = (s_end - s_u) / (g.back() - s_u);
    for (size_t i = 1; i < g.size(); ++i) xi.push_back(s_u + (g[i] - s_u) * scale);
  }
  const int La = static_cast<int>(xi.size());
  std::vector<double> cap_rho;
  if (caps)
    for (int r = 1; r < spec.cap_rings; ++r) cap_rho.push_back(rho_c * (1.0 - double(r) / spec.cap_rings));
  const int Lc = static_cast<int>(cap_rho.size());

  SurfaceMesh& M = B.mesh;
  M.periods = n;
  M.fibre_points = N;
  M.step = h;
  M.T1 = caps ? layout.T1 : 0.0;
  M.T2 = caps ? layout.T2 : 0.0;
  M.levels_uniform = L1;
  M.arm_levels = La + Lc;
  M.arm_index.assign(static_cast<size_t>(4) * M.arm_levels * N, -1);

  auto region_of = [&](double s) {
    if (!caps || s < layout.T1) return Region::Scherk;
    return s <= layout.T2 ? Region::Neck : Region::Cap;
  };
  auto blend = [&](double X) { return smoothstep((X - spec.blend_lo) / (spec.blend_hi - spec.blend_lo)); };
  // Scaled half-width alpha on the long side given the core coordinate X = ks * xi >= 0.
  auto solve_alpha = [&](double X, double S) {
    const double w = 1 - blend(X);
    if (S == 0 || w == 0) return X;
    double a = std::max(X, std::asinh(std::sqrt(S)));
    for (int it = 0; it < 100; ++it) {
      const double sh = std::sinh(a);
      const double beta = std::asinh(S / sh);
      const double dbeta = -S * std::cosh(a) / (sh * sh * std::sqrt(1 + S * S / (sh * sh)));
      const double G = a - X - w * beta;
      const double step = G / (1 - w * dbeta);
      a -= step;
      if (a <= 0) a = 1e-3;
      if (std::abs(step) < 1e-15 * (1 + a)) break;
    }
    return a;
  };
  auto sin_abs = [&](int g) { return g % K == 0 ? 0.0 : std::abs(std::sin(n * (B.theta[g] - sc.tau))); };
  auto sin_sign = [&](int g) { return (g / K) % 2 == 0 ? 1 : -1; };
  auto triv_point = [&](double U, double V, double t) {
    const double u = U / ks, v = V / ks;
    ChartPoint p;
    p.chart = kTrivialisation;
    p.c = Vec4(kS2 * (u - v), kS2 * (u + v), 0.0, wrap(t));
    return p;
  };
  auto arm_is_u = [](int a) { return a == 0 || a == 2; };
  auto arm_sign = [](int a) { return (a == 0 || a == 3) ? 1 : -1; };

  // Saddles.
  std::vector<int> saddle(2 * n);
  for (int k = 0; k < 2 * n; ++k) {
    MeshVertex v;
    v.pos = triv_point(0, 0, B.theta[k * K]);
    v.fibre = k * K;
    v.theta = B.theta[k * K];
    saddle[k] = B.add(v);
  }
  // Diagonals: patch (k, su), index p = 2k + (su < 0).
  std::vector<std::vector<int>> diag(4 * n, std::vector<int>(K, -1));
  for (int k = 0; k < 2 * n; ++k)
    for (int q = 0; q < 2; ++q) {
      const int su = q == 0 ? 1 : -1, sv = su * (k % 2 == 0 ? 1 : -1);
      for (int j = 1; j < K; ++j) {
        const int g = k * K + j;
        const double a = std::asinh(std::sqrt(sin_abs(g)));
        MeshVertex v;
        v.pos = triv_point(su * a, sv * a, B.theta[g]);
        v.fibre = g;
        v.patch = 2 * k + q;
        v.theta = B.theta[g];
        diag[2 * k + q][j] = B.add(v);
      }
    }
  // Arm rings.
  std::vector<std::vector<Ring>> rings(4);
  for (int a = 0; a < 4; ++a) {
    for (int l = 1; l <= La; ++l) {
      const double s = xi[l - 1];
      const double X = ks * s;
      Ring R;
      for (int g = 0; g < N; ++g) {
        const double t = B.theta[g];
        const double S = sin_abs(g);
        double alpha = solve_alpha(X, S);
        double beta = S == 0 ? 0.0 : std::asinh(S / std::sinh(alpha));
        if (caps && s >= layout.T1) beta *= (s > layout.T2 ? 0.0 : layout.cutoff(s));
        const int sm = arm_sign(a), so = sm * sin_sign(g);
        const double U = arm_is_u(a) ? sm * alpha : so * beta;
        const double V = arm_is_u(a) ? so * beta : sm * alpha;
        MeshVertex v;
        v.pos = triv_point(U, V, t);
        v.region = region_of(s);
        v.arm = a;
        v.level = l;
        v.fibre = g;
        v.s = s;
        v.theta = t;
        v.boundary = !caps && l == La;
        const int id = B.add(v);
        R.vid.push_back(id);
        M.arm_index[(static_cast<size_t>(a) * M.arm_levels + (l - 1)) * N + g] = id;
      }
      rings[a].push_back(R);
    }
    for (int r = 0; r < Lc; ++r) {
      const double rho = cap_rho[r];
      const int stride = 1 << cap_coarsening(rho, rho_c, K);
      Ring R;
      R.stride = stride;
      for (int g = 0; g < N; g += stride) {
        const double t = B.theta[g];
        MeshVertex v;
        v.pos.chart = a;
        v.pos.c = Vec4(0, 0, rho * std::cos(t), -rho * std::sin(t));
        v.region = Region::Cap;
        v.arm = a;
        v.level = La + 1 + r;
        v.fibre = g;
        v.s = space.d() - 0.5 * rho * rho;
        v.theta = t;
        const int id = B.add(v);
        R.vid.push_back(id);
        M.arm_index[(static_cast<size_t>(a) * M.arm_levels + (La + r)) * N + g] = id;
      }
      rings[a].push_back(R);
    }
  }
  // Core faces: columns -1, 0, 1 of each patch.
  auto core_vertex = [&](int patch, int col, int g) {
    const int k = patch / 2, su = patch % 2 == 0 ? 1 : -1, sv = su * (k % 2 == 0 ? 1 : -1);
    const int gm = g % N;
    if (col == 0) return gm % K == 0 ? saddle[gm / K] : diag[patch][g - k * K];
    const int arm = col > 0 ? (su > 0 ? 0 : 2) : (sv > 0 ? 3 : 1);
    return rings[arm][0].vid[gm];
  };
  for (int p = 0; p < 4 * n; ++p) {
    const int k = p / 2;
    for (int g = k * K; g < (k + 1) * K; ++g)
      for (int col : {-1, 0})
        M.faces.push_back(
            {{core_vertex(p, col, g), core_vertex(p, col + 1, g), core_vertex(p, col + 1, g + 1),
              core_vertex(p, col, g + 1)},
             4});
  }
  const int seed = static_cast<int>(M.faces.size());
  for (int a = 0; a < 4; ++a) {
    for (size_t r = 0; r + 1 < rings[a].size(); ++r) connect_rings(rings[a][r], rings[a][r + 1], M.faces);
    if (caps) {
      MeshVertex v;
      v.pos.chart = a;
      v.region = Region::Cap;
      v.arm = a;
      v.level = La + Lc + 1;
      v.fibre = -1;
      v.s = space.d();
      close_ring(rings[a].back(), B.add(v), M.faces);
    }
  }
  orient(M, seed);
  return M;
}

SurfaceMesh build_cigar_mesh(const GHSpace& tn, double rho_max, const MeshSpec& spec) {
  if (tn.centre_count() != 1) throw DomainError("cigar mesh needs a single centre");
  const int N = spec.fibre_points;
  if (N % 16) throw DomainError("cigar fibre count must be a multiple of 16");
  SurfaceMesh M;
  M.fibre_points = N;
  M.step = rho_max / spec.cap_rings;
  M.arm_levels = spec.cap_rings;
  M.arm_index.assign(static_cast<size_t>(4) * M.arm_levels * N, -1);
  std::vector<Ring> rings;
  for (int r = 0; r < spec.cap_rings; ++r) {
    const double rho = rho_max * (1.0 - double(r) / spec.cap_rings);
    const int stride = 1 << cap_coarsening(rho, rho_max, N / 2);
    Ring R;
    R.stride = stride;
    for (int g = 0; g < N; g += stride) {
      const double t = 2 * M_PI * g / N;
      MeshVertex v;
      v.pos.chart = 0;
      v.pos.c = Vec4(0, 0, rho * std::cos(t), -rho * std::sin(t));
      v.region = Region::Cap;
      v.arm = 0;
      v.level = r + 1;
      v.fibre = g;
      v.s = 0.5 * rho * rho;
      v.theta = t;
      v.boundary = r == 0;
      M.verts.push_back(v);
      const int id = M.vertex_count() - 1;
      R.vid.push_back(id);
      M.arm_index[static_cast<size_t>(r) * N + g] = id;
    }
    rings.push_back(R);
  }
  for (size_t r = 0; r + 1 < rings.size(); ++r) connect_rings(rings[r], rings[r + 1], M.faces);
  MeshVertex tip;
  tip.pos.chart = 0;
  tip.region = Region::Cap;
  tip.arm = 0;
  tip.level = spec.cap_rings + 1;
  tip.fibre = -1;
  M.verts.push_back(tip);
  close_ring(rings.back(), M.vertex_count() - 1, M.faces);
  orient(M, 0);
  (void)tn;
  return M;
}

namespace {
using Key = Eigen::Matrix<double, 5, 1>;

Key vertex_key(const GHSpace& space, const ChartPoint& p) {
  Key k;
  k.head<3>() = base_point(space, p);
  double r = 1, t = p.c(3);
  if (p.chart != kTrivialisation) {
    r = p.c.norm();
    t = -std::atan2(p.c(3), p.c(2));
  }
  k(3) = r * std::cos(t);
  k(4) = r * std::sin(t);
  return k;
}

struct KeyIndex {
  std::vector<std::pair<double, int>> sorted;
  std::vector<Key> keys;
  int find(const Key& k, double tol, double* dist = nullptr) const {
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), std::make_pair(k(0) - tol, -1));
    int best = -1;
    double bd = tol;
    for (auto it = lo; it != sorted.end() && it->first <= k(0) + tol; ++it) {
      const double dd = (keys[it->second] - k).cwiseAbs().maxCoeff();
      if (dd <= bd) {
        bd = dd;
        best = it->second;
      }
    }
    if (dist) *dist = bd;
    return best;
  }
};

KeyIndex make_index(const GHSpace& space, const SurfaceMesh& mesh) {
  KeyIndex idx;
  idx.keys.reserve(mesh.verts.size());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    idx.keys.push_back(vertex_key(space, mesh.verts[i].pos));
    idx.sorted.push_back({idx.keys.back()(0), i});
  }
  std::sort(idx.sorted.begin(), idx.sorted.end());
  return idx;
}
}  // namespace

void compute_symmetry_permutations(const GHSpace& space, SurfaceMesh& mesh, double tol) {
  const KeyIndex idx = make_index(space, mesh);
  const auto& G = space.group();
  mesh.perm.assign(G.size(), std::vector<int>(mesh.verts.size(), -1));
  for (size_t e = 0; e < G.size(); ++e)
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      const Key k = vertex_key(space, apply_symmetry(space, G[e], mesh.verts[i].pos));
      const int j = idx.find(k, tol * (1 + k.head<3>().norm()));
      if (j < 0) throw DomainError("mesh is not invariant under " + G[e].label);
      mesh.perm[e][i] = j;
    }
}

double symmetry_defect(const GHSpace& space, const SurfaceMesh& mesh) {
  const KeyIndex idx = make_index(space, mesh);
  double worst = 0;
  for (const auto& s : space.group())
    for (const auto& v : mesh.verts) {
      const Key k = vertex_key(space, apply_symmetry(space, s, v.pos));
      double d = 0;
      if (idx.find(k, 1e-3, &d) < 0) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, d);
    }
  return worst;
}

}  // namespace ghsurf
