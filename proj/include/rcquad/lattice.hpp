#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace rcquad {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

// Errors raised on malformed geometric input (bad rectangles, undeclared symmetries).
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Positions are stored in half-units so that primal vertices (even coordinates)
// and dual vertices at face centres (odd coordinates) share one type.
struct Point {
  std::int32_t x = 0;
  std::int32_t y = 0;

  static constexpr Point primal(std::int32_t x, std::int32_t y) { return {2 * x, 2 * y}; }
  friend constexpr bool operator==(Point, Point) = default;
  friend constexpr auto operator<=>(Point a, Point b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

inline std::uint64_t point_key(Point p) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
         static_cast<std::uint32_t>(p.y);
}

struct Edge {
  VertexId u = 0;
  VertexId v = 0;
};

struct Rect {
  std::int32_t a = 0, b = 0, c = 0, d = 0;  // [a,b] x [c,d]

  std::int32_t width() const { return b - a; }
  std::int32_t height() const { return d - c; }
  bool contains(std::int32_t x, std::int32_t y) const { return a <= x && x <= b && c <= y && y <= d; }
  bool contains(const Rect& r) const { return a <= r.a && r.b <= b && c <= r.c && r.d <= d; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

void validate_rect(const Rect& r);

// Finite planar graph with a distinguished boundary vertex set. Regions of the
// primal lattice and their planar duals are both stored this way.
class Graph {
 public:
  struct Incidence {
    VertexId neighbor;
    EdgeId edge;
  };

  std::vector<Point> vertices;
  std::vector<Edge> edges;
  std::vector<VertexId> boundary;  // sorted ascending

  // Builds adjacency and the position index; call after filling the vectors.
  void finalize();

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_edges() const { return edges.size(); }
  std::optional<VertexId> find(Point p) const;
  std::optional<EdgeId> find_edge(Point p, Point q) const;
  bool is_boundary(VertexId v) const { return boundary_flag_[v] != 0; }

  const Incidence* adj_begin(VertexId v) const { return adjacency_.data() + offsets_[v]; }
  const Incidence* adj_end(VertexId v) const { return adjacency_.data() + offsets_[v + 1]; }
  std::size_t degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<Incidence> adjacency_;
  std::vector<std::uint8_t> boundary_flag_;
  std::unordered_map<std::uint64_t, VertexId> index_;
};

enum class Symmetry { Rot90, ReflectX, ReflectY, Translate };

struct SymmetryOp {
  Symmetry kind = Symmetry::Translate;
  std::int32_t dx = 0, dy = 0;  // translation vector (integer lattice units)

  static SymmetryOp rot90() { return {Symmetry::Rot90}; }
  static SymmetryOp reflect_x() { return {Symmetry::ReflectX}; }
  static SymmetryOp reflect_y() { return {Symmetry::ReflectY}; }
  static SymmetryOp translate(std::int32_t dx, std::int32_t dy) { return {Symmetry::Translate, dx, dy}; }

  // Image of a point given in half-units.
  Point apply(Point p) const;
  Rect apply(const Rect& r) const;
};

// Biperiodic planar lattice described by a unit cell. Vertices sit at integer
// offsets inside a period x period cell; each edge template joins cell vertex
// `from` to vertex `to` of the cell translated by (dx, dy) periods.
struct Lattice {
  struct EdgeTemplate {
    int from = 0;
    int to = 0;
    int dx = 0;
    int dy = 0;
  };

  std::string name;
  int period = 1;
  std::vector<std::array<int, 2>> cell_vertices;
  std::vector<EdgeTemplate> edge_templates;
  int max_edge_length = 1;
  bool rot90 = false;
  bool reflect_x = false;
  bool reflect_y = false;

  static std::shared_ptr<const Lattice> square();
  // Square lattice plus the (1,1) diagonal. Planar, biperiodic, no declared symmetries.
  static std::shared_ptr<const Lattice> square_with_diagonal();
  static std::shared_ptr<const Lattice> by_name(const std::string& name);

  bool declares(const SymmetryOp& s) const;
  bool is_square() const { return name == "square"; }
};

enum class Side { Top, Left, Bottom, Right };

// Subgraph induced by lattice edges with at least one endpoint in `rect`.
struct Region {
  std::shared_ptr<const Lattice> lattice;
  Rect rect;
  Graph graph;

  std::size_t num_edges() const { return graph.num_edges(); }
  std::size_t num_vertices() const { return graph.num_vertices(); }
};

Region build_region(std::shared_ptr<const Lattice> lattice, const Rect& rect);

// Boundary recomputed by comparing each vertex's degree in the region with its lattice degree.
std::vector<VertexId> boundary_by_degree(const Region& region);

// Vertices inside the rectangle within the L-thick slab at the named side.
std::vector<VertexId> side_vertices(const Region& region, Side side);

// Boundary vertices lying beyond the named side of the rectangle (pendant endpoints).
std::vector<VertexId> boundary_arc(const Region& region, Side side);

struct SymmetryImage {
  Region region;
  std::vector<EdgeId> edge_map;    // source edge id -> image edge id
  std::vector<VertexId> vertex_map;
};

SymmetryImage apply_symmetry(const Region& region, const SymmetryOp& sym);

// Planar dual on the square lattice: dual vertices at face centres, dual edge i
// crosses primal edge i.
struct DualMap {
  Graph dual;
  std::vector<EdgeId> to_dual;
  std::vector<EdgeId> to_primal;
};

// Dual of any graph whose edges are unit axis-parallel segments. Boundary of the
// dual = dual vertices with fewer than four dual edges.
DualMap dual_of(const Graph& graph);
inline DualMap dual_of(const Region& region) { return dual_of(region.graph); }

// Edge ids of `sub` expressed as edge ids of `host`; throws if some edge is missing.
std::vector<EdgeId> embed_edges(const Graph& sub, const Graph& host);

}  // namespace rcquad
