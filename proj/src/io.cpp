#include "rcquad/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace rcquad {

nlohmann::json region_to_json(const Region& r) {
  return {{"lattice", r.lattice->name}, {"a", r.rect.a}, {"b", r.rect.b}, {"c", r.rect.c}, {"d", r.rect.d}};
}

Region region_from_json(const nlohmann::json& j) {
  try {
    const std::string lat = j.contains("lattice") ? j.at("lattice").get<std::string>() : "square";
    for (const auto& [k, v] : j.items()) {
      if (k != "lattice" && k != "a" && k != "b" && k != "c" && k != "d") {
        throw GeometryError("unknown region key '" + k + "'");
      }
    }
    const Rect r{j.at("a").get<int>(), j.at("b").get<int>(), j.at("c").get<int>(), j.at("d").get<int>()};
    return build_region(Lattice::by_name(lat), r);
  } catch (const nlohmann::json::exception& e) {
    throw GeometryError(std::string("malformed region description: ") + e.what());
  }
}

nlohmann::json bc_to_json(const BoundaryCondition& bc) {
  auto out = nlohmann::json::array();
  for (const auto& b : bc.blocks()) {
    if (b.size() > 1) out.push_back(b);
  }
  return out;
}

BoundaryCondition bc_from_json(const nlohmann::json& j, const Region& region) {
  if (j.is_string()) return BoundaryCondition::named(j.get<std::string>(), region);
  if (!j.is_array()) throw BoundaryError("boundary condition must be a name or a list of blocks");
  std::vector<BoundaryCondition::Block> blocks;
  try {
    for (const auto& b : j) blocks.push_back(b.get<BoundaryCondition::Block>());
  } catch (const nlohmann::json::exception& e) {
    throw BoundaryError(std::string("malformed boundary block: ") + e.what());
  }
  return BoundaryCondition::from_blocks(region.graph, std::move(blocks));
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& columns) : os_(os), width_(columns.size()) {
  os_ << kCsvVersion << '\n';
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os_ << ',';
    const auto& c = cells[i];
    if (c.find_first_of(",\"\n") != std::string::npos) {
      os_ << '"';
      for (char ch : c) {
        if (ch == '"') os_ << '"';
        os_ << ch;
      }
      os_ << '"';
    } else {
      os_ << c;
    }
  }
  os_ << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << contents;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::string render_svg(const Region& region, const Configuration& cfg, const std::optional<CrossingPath>& witness,
                       const SvgStyle& style) {
  const auto& g = region.graph;
  int xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    const auto p = g.vertices[v];
    if (v == 0 || p.x < xmin) xmin = p.x;
    if (v == 0 || p.x > xmax) xmax = p.x;
    if (v == 0 || p.y < ymin) ymin = p.y;
    if (v == 0 || p.y > ymax) ymax = p.y;
  }
  const double s = style.scale;
  const double m = style.margin;
  // Half-unit coordinates to pixels, y pointing up.
  auto px = [&](double hx) { return (hx / 2.0 - xmin / 2.0 + m) * s; };
  auto py = [&](double hy) { return (ymax / 2.0 - hy / 2.0 + m) * s; };
  const double w = ((xmax - xmin) / 2.0 + 2 * m) * s;
  const double h = ((ymax - ymin) / 2.0 + 2 * m) * s;

  std::ostringstream o;
  auto line = [&](double x1, double y1, double x2, double y2) {
    o << "<line x1=\"" << format_number(x1) << "\" y1=\"" << format_number(y1) << "\" x2=\"" << format_number(x2)
      << "\" y2=\"" << format_number(y2) << "\"/>\n";
  };
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(w) << "\" height=\"" << format_number(h)
    << "\" viewBox=\"0 0 " << format_number(w) << ' ' << format_number(h) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<g id=\"open\" stroke=\"black\" stroke-width=\"" << format_number(s / 6) << "\" stroke-linecap=\"round\">\n";
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (!cfg[e]) continue;
    const auto a = g.vertices[g.edges[e].u], b = g.vertices[g.edges[e].v];
    line(px(a.x), py(a.y), px(b.x), py(b.y));
  }
  o << "</g>\n";
  o << "<g id=\"dual-open\" stroke=\"#c0392b\" stroke-width=\"" << format_number(s / 10) << "\" stroke-dasharray=\""
    << format_number(s / 5) << ',' << format_number(s / 8) << "\">\n";
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (cfg[e]) continue;
    const auto a = g.vertices[g.edges[e].u], b = g.vertices[g.edges[e].v];
    const double mx = (a.x + b.x) / 2.0, my = (a.y + b.y) / 2.0;
    const double dx = (b.x - a.x) / 2.0, dy = (b.y - a.y) / 2.0;
    line(px(mx - dy), py(my + dx), px(mx + dy), py(my - dx));
  }
  o << "</g>\n";
  o << "<g id=\"vertices\" fill=\"black\">\n";
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    o << "<circle cx=\"" << format_number(px(g.vertices[v].x)) << "\" cy=\"" << format_number(py(g.vertices[v].y))
      << "\" r=\"" << format_number(s / 10) << "\"/>\n";
  }
  o << "</g>\n";
  if (witness && !witness->edges.empty()) {
    o << "<g id=\"witness\" stroke=\"#2e86de\" stroke-width=\"" << format_number(s / 3)
      << "\" stroke-linecap=\"round\" stroke-opacity=\"0.8\">\n";
    for (EdgeId e : witness->edges) {
      const auto a = g.vertices[g.edges[e].u], b = g.vertices[g.edges[e].v];
      line(px(a.x), py(a.y), px(b.x), py(b.y));
    }
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace rcquad
