#include "artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ghsurf::cli {

namespace {

template <class T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& f) {
  T v;
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!f) throw DomainError("truncated binary file");
  return v;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw DomainError("cannot write " + path);
  return f;
}

}  // namespace

std::uint64_t config_hash(const json& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : cfg.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char b[17];
  std::snprintf(b, sizeof b, "%016llx", static_cast<unsigned long long>(v));
  return b;
}

void write_mesh(const std::string& path, const SurfaceMesh& mesh, const std::vector<ChartPoint>& pos) {
  auto f = open_out(path, true);
  f.write("GHSM", 4);
  put<std::uint32_t>(f, 1);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(mesh.vertex_count()));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(mesh.faces.size()));
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const MeshVertex& v = mesh.verts[i];
    put<std::int32_t>(f, pos[i].chart);
    for (int k = 0; k < 4; ++k) put<double>(f, pos[i].c(k));
    put<std::int32_t>(f, static_cast<std::int32_t>(v.region));
    put<std::int32_t>(f, v.arm);
    put<std::int32_t>(f, v.level);
    put<std::int32_t>(f, v.fibre);
    put<std::uint8_t>(f, v.boundary);
  }
  for (const Face& F : mesh.faces) {
    put<std::int32_t>(f, F.n);
    for (int k = 0; k < 4; ++k) put<std::int32_t>(f, F.v[k]);
  }
}

void write_field(const std::string& path, const NormalField& nu) {
  auto f = open_out(path, true);
  f.write("GHSF", 4);
  put<std::uint32_t>(f, 1);
  put<std::uint32_t>(f, static_cast<std::uint32_t>(nu.size()));
  for (const Vec2& v : nu) {
    put<double>(f, v(0));
    put<double>(f, v(1));
  }
}

NormalField read_field(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot read " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "GHSF", 4) != 0 || get<std::uint32_t>(f) != 1) throw DomainError("not a field file");
  NormalField nu(get<std::uint32_t>(f));
  for (Vec2& v : nu) {
    v(0) = get<double>(f);
    v(1) = get<double>(f);
  }
  return nu;
}

json to_json(const MeshSpec& m) {
  return {{"fibre_points", m.fibre_points}, {"step", m.step},         {"growth", m.growth},
          {"max_step", m.max_step},         {"cap_rho", m.cap_rho},   {"cap_rings", m.cap_rings},
          {"blend_lo", m.blend_lo},         {"blend_hi", m.blend_hi}};
}

json to_json(const SolverConfig& c) {
  return {{"r", c.r},           {"max_iter", c.max_iter},   {"tol", c.tol},
          {"fd_eps", c.fd_eps}, {"q_samples", c.q_samples}, {"seed", c.seed}};
}

json to_json(const NewtonReport& r) {
  return {{"converged", r.converged}, {"steps", r.steps},       {"history", r.history},
          {"step_norm", r.step_norm}, {"H0", r.H0},             {"C", r.C},
          {"q", r.q},                 {"r", r.r},               {"nu_norm", r.nu_norm},
          {"sigma_min", r.sigma_min}, {"smallness_ok", r.smallness_ok}, {"bound_ok", r.bound_ok},
          {"unknowns", r.unknowns},   {"message", r.message}};
}

json to_json(const SpectralReport& r) {
  json c = json::object();
  for (size_t i = 0; i < r.names.size(); ++i) c[r.names[i]] = r.correlation[i];
  return {{"eigenvalues", r.eigenvalues}, {"residuals", r.residuals},  {"h", r.h},
          {"threshold", r.threshold},     {"negative", r.negative},    {"near_zero", r.near_zero},
          {"inertia_negative", r.inertia_negative}, {"shift", r.shift}, {"correlation", c}};
}

json to_json(const WitnessReport& w) {
  return {{"value", w.value},
          {"value_killing_orthogonal", w.value_orth},
          {"flat_eigenvalue", w.flat_eigenvalue},
          {"flat_value", w.flat_value},
          {"matched_vertices", w.matched},
          {"transplant_defect", w.transplant_defect}};
}

json to_json(const TopologyReport& t) {
  const FueterReport& F = t.fueter;
  return {{"degree_raw", t.degree_raw},
          {"degree", t.degree},
          {"euler", t.euler},
          {"genus", t.genus},
          {"webster", t.webster},
          {"windings_raw", t.windings_raw},
          {"windings", t.windings},
          {"winding_margin", t.winding_margin},
          {"cap_alignment", t.cap_alignment},
          {"fueter",
           {{"sup", F.sup},
            {"mean", F.mean},
            {"sign", F.sign},
            {"periods", {F.periods(0), F.periods(1), F.periods(2)}},
            {"moments", {F.moments(0), F.moments(1), F.moments(2)}},
            {"area", F.area},
            {"route_gap", F.route_gap},
            {"nonholomorphic", F.nonholomorphic}}}};
}

json to_json(const CheckResult& r) {
  json v = json::object();
  for (const auto& [k, x] : r.values) v[k] = x;
  return {{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"values", v}, {"detail", r.detail}};
}

json to_json(const DecayReport& d) {
  json rows = json::array();
  for (const DecayRow& r : d.rows)
    rows.push_back({{"d", r.d},
                    {"T1", r.T1},
                    {"T2", r.T2},
                    {"vertices", r.vertices},
                    {"H_scherk", r.H.scherk},
                    {"H_neck", r.H.neck},
                    {"H_cap", r.H.cap},
                    {"normalised", r.normalised}});
  return {{"rows", rows},
          {"band_ratio", d.band_ratio},
          {"band_ok", d.band_ok},
          {"decreasing", d.decreasing},
          {"exponent", d.exponent},
          {"neck_below_scherk", d.neck_below_scherk},
          {"scherk_ratio", d.scherk_ratio},
          {"scherk_ratio_predicted", d.scherk_ratio_predicted}};
}

void write_text(const std::string& path, const std::string& text) {
  auto f = open_out(path, false);
  f << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void append_line(const std::string& path, const std::string& line) {
  std::ofstream f(path, std::ios::app);
  if (!f) throw DomainError("cannot append to " + path);
  f << line << "\n";
}

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool logx, bool logy) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return logy ? std::log10(std::abs(v)) : v; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const Series& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const double py = 0.05 * (y1 - y0);
  y0 -= py;
  y1 += py;
  auto X = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto Y = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + k * (x1 - x0) / 4, yv = y0 + k * (y1 - y0) / 4;
    const double px = L + k * (W - L - R) / 4, pyy = H - B - k * (H - T - B) / 4;
    char bx[32], by[32];
    std::snprintf(bx, sizeof bx, "%.3g", logx ? std::pow(10, xv) : xv);
    std::snprintf(by, sizeof by, "%.3g", logy ? std::pow(10, yv) : yv);
    o << "<text x=\"" << px << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << bx << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << pyy + 4 << "\" text-anchor=\"end\">" << by << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* c = colours[s % 5];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
    for (size_t i = 0; i < series[s].x.size(); ++i) o << X(series[s].x[i]) << "," << Y(series[s].y[i]) << " ";
    o << "\"/>\n";
    for (size_t i = 0; i < series[s].x.size(); ++i)
      o << "<circle cx=\"" << X(series[s].x[i]) << "\" cy=\"" << Y(series[s].y[i]) << "\" r=\"3\" fill=\"" << c
        << "\"/>\n";
    o << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 16 * (s + 1) << "\" fill=\"" << c << "\">" << series[s].label
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string svg_density(const std::string& title, const std::vector<Vec3>& a, const std::vector<double>& weight,
                        int nx, int ny) {
  std::vector<double> bins(static_cast<size_t>(nx) * ny, 0.0);
  for (size_t i = 0; i < a.size(); ++i) {
    const double lon = std::atan2(a[i](1), a[i](0));
    const int ix = std::clamp(static_cast<int>((lon + M_PI) / (2 * M_PI) * nx), 0, nx - 1);
    const int iy = std::clamp(static_cast<int>((a[i](2) + 1) / 2 * ny), 0, ny - 1);
    bins[static_cast<size_t>(iy) * nx + ix] += weight[i];
  }
  const double mx = *std::max_element(bins.begin(), bins.end());
  const double cw = 12, ch = 12, L = 40, T = 40;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << L + nx * cw + 20 << "\" height=\"" << T + ny * ch + 40
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << L << "\" y=\"22\" font-size=\"14\">" << title << "</text>\n";
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      // four decades of log scale
      const double b = bins[static_cast<size_t>(iy) * nx + ix];
      const double v = mx > 0 && b > 0 ? std::clamp(1 + std::log10(b / mx) / 4, 0.0, 1.0) : 0;
      const int g = static_cast<int>(255 * (1 - v));
      o << "<rect x=\"" << L + ix * cw << "\" y=\"" << T + (ny - 1 - iy) * ch << "\" width=\"" << cw
        << "\" height=\"" << ch << "\" fill=\"rgb(" << g << "," << g << ",255)\"/>\n";
    }
  o << "<text x=\"" << L << "\" y=\"" << T + ny * ch + 20 << "\">longitude of a (horizontal), a_3 (vertical), log area density</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace ghsurf::cli
