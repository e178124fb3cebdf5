#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcquad/events.hpp"
#include "rcquad/lattice.hpp"
#include "rcquad/measure.hpp"

namespace rcquad {

inline constexpr const char* kCsvVersion = "#rcquad-v1";

nlohmann::json region_to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);  // {lattice, a, b, c, d}

// Non-singleton blocks as vertex-id lists.
nlohmann::json bc_to_json(const BoundaryCondition& bc);
// A name ("free", "wired", ...) or a list of vertex-id blocks.
BoundaryCondition bc_from_json(const nlohmann::json& j, const Region& region);

// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_number(double x);

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& os_;
  std::size_t width_;
};

void write_file(const std::filesystem::path& path, const std::string& contents);

struct SvgStyle {
  double scale = 12.0;  // pixels per lattice unit
  double margin = 1.5;  // lattice units around the region
};

// Open edges solid, dual-open edges (duals of closed edges) dashed, and the
// witness path drawn on top in a highlight colour.
std::string render_svg(const Region& region, const Configuration& cfg, const std::optional<CrossingPath>& witness,
                       const SvgStyle& style = {});

}  // namespace rcquad
