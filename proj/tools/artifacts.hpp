#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "ghsurf/checks.hpp"

namespace ghsurf::cli {

using nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

// FNV-1a of the canonical config dump.
std::uint64_t config_hash(const json& cfg);
std::string hex(std::uint64_t v);

// Versioned little-endian binaries.
void write_mesh(const std::string& path, const SurfaceMesh& mesh, const std::vector<ChartPoint>& pos);
void write_field(const std::string& path, const NormalField& nu);
NormalField read_field(const std::string& path);

json to_json(const MeshSpec& m);
json to_json(const SolverConfig& c);
json to_json(const NewtonReport& r);
json to_json(const SpectralReport& r);
json to_json(const WitnessReport& w);
json to_json(const TopologyReport& t);
json to_json(const CheckResult& r);
json to_json(const DecayReport& d);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const json& j);
void append_line(const std::string& path, const std::string& line);

struct Series {
  std::string label;
  std::vector<double> x, y;
};
// Line/marker plot with optional log axes.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool logx = false, bool logy = false);
// Area-weighted density of the Gauss lift in (longitude, sin latitude), an equal-area chart, log colour scale.
std::string svg_density(const std::string& title, const std::vector<Vec3>& a, const std::vector<double>& weight,
                        int nx = 48, int ny = 24);

}  // namespace ghsurf::cli
