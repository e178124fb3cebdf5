#include "rcquad/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace rcquad {

namespace {

constexpr std::size_t kMaxRegionEdges = std::size_t{1} << 26;

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int floor_mod(int a, int b) { return a - b * floor_div(a, b); }

// Neighbour offsets (lattice units) of each cell vertex type.
std::vector<std::vector<std::array<int, 2>>> neighbor_offsets(const Lattice& lat) {
  std::vector<std::vector<std::array<int, 2>>> out(lat.cell_vertices.size());
  for (const auto& t : lat.edge_templates) {
    const auto& f = lat.cell_vertices[t.from];
    const auto& g = lat.cell_vertices[t.to];
    const int vx = t.dx * lat.period + g[0] - f[0];
    const int vy = t.dy * lat.period + g[1] - f[1];
    out[t.from].push_back({vx, vy});
    out[t.to].push_back({-vx, -vy});
  }
  return out;
}

int cell_type(const Lattice& lat, int x, int y) {
  const int ox = floor_mod(x, lat.period);
  const int oy = floor_mod(y, lat.period);
  for (std::size_t i = 0; i < lat.cell_vertices.size(); ++i) {
    if (lat.cell_vertices[i][0] == ox && lat.cell_vertices[i][1] == oy) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

void validate_rect(const Rect& r) {
  if (r.a > r.b || r.c > r.d) {
    throw GeometryError("malformed rectangle: need a <= b and c <= d");
  }
}

void Graph::finalize() {
  const auto nv = vertices.size();
  offsets_.assign(nv + 1, 0);
  for (const auto& e : edges) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < nv; ++i) offsets_[i + 1] += offsets_[i];
  adjacency_.resize(offsets_[nv]);
  std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (EdgeId id = 0; id < edges.size(); ++id) {
    const auto& e = edges[id];
    adjacency_[fill[e.u]++] = {e.v, id};
    adjacency_[fill[e.v]++] = {e.u, id};
  }
  std::sort(boundary.begin(), boundary.end());
  boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());
  boundary_flag_.assign(nv, 0);
  for (auto v : boundary) boundary_flag_[v] = 1;
  index_.clear();
  index_.reserve(nv * 2);
  for (VertexId v = 0; v < nv; ++v) index_.emplace(point_key(vertices[v]), v);
}

std::optional<VertexId> Graph::find(Point p) const {
  auto it = index_.find(point_key(p));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeId> Graph::find_edge(Point p, Point q) const {
  auto u = find(p);
  auto v = find(q);
  if (!u || !v) return std::nullopt;
  for (auto it = adj_begin(*u); it != adj_end(*u); ++it) {
    if (it->neighbor == *v) return it->edge;
  }
  return std::nullopt;
}

Point SymmetryOp::apply(Point p) const {
  switch (kind) {
    case Symmetry::Rot90: return {-p.y, p.x};
    case Symmetry::ReflectX: return {-p.x, p.y};
    case Symmetry::ReflectY: return {p.x, -p.y};
    case Symmetry::Translate: return {p.x + 2 * dx, p.y + 2 * dy};
  }
  return p;
}

Rect SymmetryOp::apply(const Rect& r) const {
  switch (kind) {
    case Symmetry::Rot90: return {-r.d, -r.c, r.a, r.b};
    case Symmetry::ReflectX: return {-r.b, -r.a, r.c, r.d};
    case Symmetry::ReflectY: return {r.a, r.b, -r.d, -r.c};
    case Symmetry::Translate: return {r.a + dx, r.b + dx, r.c + dy, r.d + dy};
  }
  return r;
}

std::shared_ptr<const Lattice> Lattice::square() {
  static const auto lat = [] {
    auto l = std::make_shared<Lattice>();
    l->name = "square";
    l->period = 1;
    l->cell_vertices = {{0, 0}};
    l->edge_templates = {{0, 0, 1, 0}, {0, 0, 0, 1}};
    l->max_edge_length = 1;
    l->rot90 = l->reflect_x = l->reflect_y = true;
    return std::shared_ptr<const Lattice>(std::move(l));
  }();
  return lat;
}

std::shared_ptr<const Lattice> Lattice::square_with_diagonal() {
  static const auto lat = [] {
    auto l = std::make_shared<Lattice>();
    l->name = "square-diagonal";
    l->period = 1;
    l->cell_vertices = {{0, 0}};
    l->edge_templates = {{0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 1, 1}};
    l->max_edge_length = 2;
    return std::shared_ptr<const Lattice>(std::move(l));
  }();
  return lat;
}

std::shared_ptr<const Lattice> Lattice::by_name(const std::string& name) {
  if (name == "square") return square();
  if (name == "square-diagonal") return square_with_diagonal();
  throw GeometryError("unknown lattice '" + name + "'");
}

bool Lattice::declares(const SymmetryOp& s) const {
  switch (s.kind) {
    case Symmetry::Rot90: return rot90;
    case Symmetry::ReflectX: return reflect_x;
    case Symmetry::ReflectY: return reflect_y;
    case Symmetry::Translate: return s.dx % period == 0 && s.dy % period == 0;
  }
  return false;
}

Region build_region(std::shared_ptr<const Lattice> lattice, const Rect& rect) {
  validate_rect(rect);
  const Lattice& lat = *lattice;
  const int P = lat.period;
  const int L = lat.max_edge_length;
  const auto approx_edges = (static_cast<std::size_t>(rect.width()) + 2 * L + 1) *
                            (static_cast<std::size_t>(rect.height()) + 2 * L + 1) *
                            lat.edge_templates.size();
  if (approx_edges > kMaxRegionEdges) throw GeometryError("region exceeds the 2^26 edge cap");

  std::vector<std::pair<Point, Point>> raw;
  const int cx0 = floor_div(rect.a - L, P) - 1, cx1 = floor_div(rect.b + L, P) + 1;
  const int cy0 = floor_div(rect.c - L, P) - 1, cy1 = floor_div(rect.d + L, P) + 1;
  for (int cy = cy0; cy <= cy1; ++cy) {
    for (int cx = cx0; cx <= cx1; ++cx) {
      for (const auto& t : lat.edge_templates) {
        const int ux = cx * P + lat.cell_vertices[t.from][0];
        const int uy = cy * P + lat.cell_vertices[t.from][1];
        const int vx = (cx + t.dx) * P + lat.cell_vertices[t.to][0];
        const int vy = (cy + t.dy) * P + lat.cell_vertices[t.to][1];
        if (!rect.contains(ux, uy) && !rect.contains(vx, vy)) continue;
        Point pu = Point::primal(ux, uy), pv = Point::primal(vx, vy);
        if (pv < pu) std::swap(pu, pv);
        raw.emplace_back(pu, pv);
      }
    }
  }
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());

  Region region{std::move(lattice), rect, {}};
  Graph& g = region.graph;
  for (const auto& [p, q] : raw) {
    g.vertices.push_back(p);
    g.vertices.push_back(q);
  }
  std::sort(g.vertices.begin(), g.vertices.end());
  g.vertices.erase(std::unique(g.vertices.begin(), g.vertices.end()), g.vertices.end());
  auto id_of = [&](Point p) {
    return static_cast<VertexId>(std::lower_bound(g.vertices.begin(), g.vertices.end(), p) - g.vertices.begin());
  };
  g.edges.reserve(raw.size());
  for (const auto& [p, q] : raw) g.edges.push_back({id_of(p), id_of(q)});
  g.finalize();  // index needed for the boundary scan below

  const auto offsets = neighbor_offsets(lat);
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const int x = g.vertices[v].x / 2, y = g.vertices[v].y / 2;
    const int type = cell_type(lat, x, y);
    for (const auto& o : offsets[type]) {
      if (!g.find(Point::primal(x + o[0], y + o[1]))) {
        g.boundary.push_back(v);
        break;
      }
    }
  }
  g.finalize();
  return region;
}

std::vector<VertexId> boundary_by_degree(const Region& region) {
  const auto offsets = neighbor_offsets(*region.lattice);
  std::vector<VertexId> out;
  const auto& g = region.graph;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const int type = cell_type(*region.lattice, g.vertices[v].x / 2, g.vertices[v].y / 2);
    if (g.degree(v) < offsets[type].size()) out.push_back(v);
  }
  return out;
}

std::vector<VertexId> side_vertices(const Region& region, Side side) {
  const Rect& r = region.rect;
  const int L = region.lattice->max_edge_length;
  std::vector<VertexId> out;
  const auto& g = region.graph;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const int x = g.vertices[v].x / 2, y = g.vertices[v].y / 2;
    if (!r.contains(x, y)) continue;
    bool in = false;
    switch (side) {
      case Side::Left: in = x <= r.a + L - 1; break;
      case Side::Right: in = x >= r.b - L + 1; break;
      case Side::Bottom: in = y <= r.c + L - 1; break;
      case Side::Top: in = y >= r.d - L + 1; break;
    }
    if (in) out.push_back(v);
  }
  return out;
}

std::vector<VertexId> boundary_arc(const Region& region, Side side) {
  const Rect& r = region.rect;
  std::vector<VertexId> out;
  const auto& g = region.graph;
  for (auto v : g.boundary) {
    const int x = g.vertices[v].x / 2, y = g.vertices[v].y / 2;
    Side s;
    if (y < r.c) s = Side::Bottom;
    else if (y > r.d) s = Side::Top;
    else if (x < r.a) s = Side::Left;
    else if (x > r.b) s = Side::Right;
    else continue;  // boundary vertex inside the rectangle (decorated lattices)
    if (s == side) out.push_back(v);
  }
  return out;
}

SymmetryImage apply_symmetry(const Region& region, const SymmetryOp& sym) {
  if (!region.lattice->declares(sym)) {
    throw GeometryError("symmetry not declared for lattice '" + region.lattice->name + "'");
  }
  SymmetryImage img{build_region(region.lattice, sym.apply(region.rect)), {}, {}};
  const auto& src = region.graph;
  const auto& dst = img.region.graph;
  img.vertex_map.resize(src.num_vertices());
  for (VertexId v = 0; v < src.num_vertices(); ++v) {
    auto w = dst.find(sym.apply(src.vertices[v]));
    if (!w) throw GeometryError("symmetry image is missing a vertex");
    img.vertex_map[v] = *w;
  }
  img.edge_map.resize(src.num_edges());
  for (EdgeId e = 0; e < src.num_edges(); ++e) {
    auto f = dst.find_edge(dst.vertices[img.vertex_map[src.edges[e].u]], dst.vertices[img.vertex_map[src.edges[e].v]]);
    if (!f) throw GeometryError("symmetry image is missing an edge");
    img.edge_map[e] = *f;
  }
  if (dst.num_edges() != src.num_edges()) throw GeometryError("symmetry image has a different edge count");
  return img;
}

DualMap dual_of(const Graph& graph) {
  std::vector<std::pair<Point, Point>> dual_edges;
  dual_edges.reserve(graph.num_edges());
  for (const auto& e : graph.edges) {
    const Point p = graph.vertices[e.u], q = graph.vertices[e.v];
    const int hx = (q.x - p.x) / 2, hy = (q.y - p.y) / 2;
    if (std::abs(hx) + std::abs(hy) != 1) {
      throw GeometryError("dual map needs unit axis-parallel edges");
    }
    const Point m{(p.x + q.x) / 2, (p.y + q.y) / 2};
    Point r{m.x - hy, m.y + hx}, s{m.x + hy, m.y - hx};
    if (s < r) std::swap(r, s);
    dual_edges.emplace_back(r, s);
  }
  DualMap dm;
  Graph& d = dm.dual;
  for (const auto& [r, s] : dual_edges) {
    d.vertices.push_back(r);
    d.vertices.push_back(s);
  }
  std::sort(d.vertices.begin(), d.vertices.end());
  d.vertices.erase(std::unique(d.vertices.begin(), d.vertices.end()), d.vertices.end());
  auto id_of = [&](Point p) {
    return static_cast<VertexId>(std::lower_bound(d.vertices.begin(), d.vertices.end(), p) - d.vertices.begin());
  };
  for (const auto& [r, s] : dual_edges) d.edges.push_back({id_of(r), id_of(s)});
  d.finalize();
  for (VertexId v = 0; v < d.num_vertices(); ++v) {
    if (d.degree(v) < 4) d.boundary.push_back(v);
  }
  d.finalize();
  dm.to_dual.resize(graph.num_edges());
  dm.to_primal.resize(graph.num_edges());
  for (EdgeId e = 0; e < graph.num_edges(); ++e) dm.to_dual[e] = dm.to_primal[e] = e;
  return dm;
}

std::vector<EdgeId> embed_edges(const Graph& sub, const Graph& host) {
  std::vector<EdgeId> out(sub.num_edges());
  for (EdgeId e = 0; e < sub.num_edges(); ++e) {
    auto f = host.find_edge(sub.vertices[sub.edges[e].u], sub.vertices[sub.edges[e].v]);
    if (!f) throw GeometryError("subgraph edge not present in host graph");
    out[e] = *f;
  }
  return out;
}

}  // namespace rcquad
