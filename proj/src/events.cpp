#include "rcquad/events.hpp"

#include <algorithm>
#include <cstdlib>
#include <unordered_map>

namespace rcquad {

std::string rect_label(const Rect& r) {
  return "[" + std::to_string(r.a) + "," + std::to_string(r.b) + "]x[" + std::to_string(r.c) + "," +
         std::to_string(r.d) + "]";
}

namespace {

Rect rect_union(const Rect& x, const Rect& y) {
  return {std::min(x.a, y.a), std::max(x.b, y.b), std::min(x.c, y.c), std::max(x.d, y.d)};
}

bool primal_in(const Point& p, const Rect& r) {
  return p.x % 2 == 0 && p.y % 2 == 0 && r.contains(p.x / 2, p.y / 2);
}

// Rectangle in half-units, used for dual views.
struct HalfRect {
  int x0, x1, y0, y1;
  bool contains(const Point& p) const { return x0 <= p.x && p.x <= x1 && y0 <= p.y && p.y <= y1; }
};

template <class Src, class Tgt, class Lvl>
Connection primal_connection(const Region& host, const std::shared_ptr<const Graph>& view, const Rect& domain,
                             Src is_source, Tgt is_target, Lvl level, std::int32_t max_level, bool with_levels) {
  const auto& g = *view;
  Connection c;
  c.view = view;
  c.is_target.assign(g.num_vertices(), 0);
  c.edge_allowed.assign(g.num_edges(), 0);
  if (with_levels) c.level.assign(g.num_vertices(), -1);
  c.max_level = max_level;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const auto& p = g.vertices[v];
    if (!primal_in(p, domain)) continue;
    const int x = p.x / 2, y = p.y / 2;
    if (is_source(x, y)) c.sources.push_back(v);
    if (is_target(x, y)) c.is_target[v] = 1;
    if (with_levels) c.level[v] = level(x, y);
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edges[e];
    c.edge_allowed[e] = primal_in(g.vertices[ed.u], domain) && primal_in(g.vertices[ed.v], domain);
  }
  (void)host;
  return c;
}

struct DualView {
  std::shared_ptr<const Graph> graph;
  std::shared_ptr<const std::vector<EdgeId>> to_primal;
};

// Dual crossing between the two sides of the half-unit rectangle `hr`,
// restricted to dual edges whose primal edge lies inside `primal_rect`.
Connection dual_connection(const Region& host, const DualView& dv, const HalfRect& hr, const Rect& primal_rect,
                           bool vertical) {
  const auto& g = *dv.graph;
  Connection c;
  c.view = dv.graph;
  c.view_to_host = dv.to_primal;
  c.dual = true;
  c.is_target.assign(g.num_vertices(), 0);
  c.edge_allowed.assign(g.num_edges(), 0);
  c.level.assign(g.num_vertices(), -1);
  c.max_level = vertical ? (hr.y1 - hr.y0) / 2 : (hr.x1 - hr.x0) / 2;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const auto& p = g.vertices[v];
    if (!hr.contains(p)) continue;
    const int lvl = vertical ? (p.y - hr.y0) / 2 : (p.x - hr.x0) / 2;
    c.level[v] = lvl;
    if (lvl == 0) c.sources.push_back(v);
    if (lvl == c.max_level) c.is_target[v] = 1;
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edges[e];
    if (!hr.contains(g.vertices[ed.u]) || !hr.contains(g.vertices[ed.v])) continue;
    const auto& pe = host.graph.edges[(*dv.to_primal)[e]];
    c.edge_allowed[e] = primal_in(host.graph.vertices[pe.u], primal_rect) &&
                        primal_in(host.graph.vertices[pe.v], primal_rect);
  }
  return c;
}

Connection crossing_connection(const Region& host, const std::shared_ptr<const Graph>& view, const Rect& r,
                               bool vertical, int slab) {
  if (vertical) {
    return primal_connection(
        host, view, r, [&](int, int y) { return y <= r.c + slab - 1; }, [&](int, int y) { return y >= r.d - slab + 1; },
        [&](int, int y) { return y - r.c; }, r.d - r.c, true);
  }
  return primal_connection(
      host, view, r, [&](int x, int) { return x <= r.a + slab - 1; }, [&](int x, int) { return x >= r.b - slab + 1; },
      [&](int x, int) { return x - r.a; }, r.b - r.a, true);
}

}  // namespace

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::H: return "H";
    case EventKind::V: return "V";
    case EventKind::Hc: return "Hc";
    case EventKind::Vc: return "Vc";
    case EventKind::OneArm: return "one-arm";
    case EventKind::BridgeA: return "bridge-A";
    case EventKind::StripE: return "strip-E";
    case EventKind::Custom: return "custom";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  for (auto k : {EventKind::H, EventKind::V, EventKind::Hc, EventKind::Vc, EventKind::OneArm, EventKind::BridgeA,
                 EventKind::StripE, EventKind::Custom}) {
    if (to_string(k) == s) return k;
  }
  throw GeometryError("unknown event kind '" + s + "'");
}

BridgeGeometry bridge_geometry(int n, int j) {
  if (n < 1) throw GeometryError("bridge event needs n >= 1");
  BridgeGeometry g;
  g.k = (n + 49) / 50;
  const int k = g.k;
  const Rect r0{-17 * k, 18 * k, 0, n};
  auto shift = [&](const Rect& r, int m) { return Rect{r.a + m * k, r.b + m * k, r.c, r.d}; };
  auto seg = [&](int m) { return Rect{m * k, (m + 1) * k, 0, 0}; };
  g.r_j = shift(r0, j);
  g.r_j4 = shift(r0, j + 4);
  g.s_j = seg(j);
  g.s_j2 = seg(j + 2);
  g.s_j4 = seg(j + 4);
  return g;
}

std::pair<Rect, Rect> strip_rects(int n, int i) {
  if (n < 1 || i < 0) throw GeometryError("strip event needs n >= 1 and i >= 0");
  const int ni = n << i;
  return {Rect{-8 * ni, -4 * ni, 0, n}, Rect{4 * ni, 8 * ni, 0, n}};
}

Rect CrossingEvent::extent() const {
  switch (kind) {
    case EventKind::OneArm: return {-n, n, -n, n};
    case EventKind::BridgeA: {
      const auto g = bridge_geometry(n, j);
      return rect_union(g.r_j, g.r_j4);
    }
    case EventKind::StripE: {
      const auto [lo, hi] = strip_rects(n, i);
      return rect_union(lo, hi);
    }
    default: return rect;
  }
}

std::string CrossingEvent::label() const {
  switch (kind) {
    case EventKind::OneArm: return "one-arm(n=" + std::to_string(n) + ")";
    case EventKind::BridgeA: return "A(n=" + std::to_string(n) + ",j=" + std::to_string(j) + ")";
    case EventKind::StripE: return "E(n=" + std::to_string(n) + ",i=" + std::to_string(i) + ")";
    case EventKind::Custom: return "custom" + rect_label(source) + "->" + rect_label(target) + "in" + rect_label(rect);
    default: return to_string(kind) + rect_label(rect);
  }
}

CrossingEvent horizontal_crossing(const Rect& r) {
  validate_rect(r);
  return {EventKind::H, r};
}

CrossingEvent vertical_crossing(const Rect& r) {
  validate_rect(r);
  return {EventKind::V, r};
}

CrossingEvent one_arm(int n) {
  if (n < 1) throw GeometryError("one-arm event needs n >= 1");
  CrossingEvent ev{EventKind::OneArm, Rect{-n, n, -n, n}};
  ev.n = n;
  return ev;
}

CrossingEvent bridge_event_Aj(int n, int j) {
  CrossingEvent ev{EventKind::BridgeA};
  ev.n = n;
  ev.j = j;
  ev.rect = ev.extent();
  return ev;
}

CrossingEvent strip_event_Ei(int n, int i) {
  CrossingEvent ev{EventKind::StripE};
  ev.n = n;
  ev.i = i;
  ev.rect = ev.extent();
  return ev;
}

CrossingEvent custom_connection(const Rect& source, const Rect& target, const Rect& domain) {
  validate_rect(source);
  validate_rect(target);
  validate_rect(domain);
  CrossingEvent ev{EventKind::Custom, domain};
  ev.source = source;
  ev.target = target;
  return ev;
}

nlohmann::json rect_to_json(const Rect& r) { return {{"a", r.a}, {"b", r.b}, {"c", r.c}, {"d", r.d}}; }

Rect rect_from_json(const nlohmann::json& j) {
  Rect r;
  try {
    if (j.is_array()) {
      if (j.size() != 4) throw GeometryError("rectangle arrays need four entries");
      r = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
    } else {
      r = {j.at("a").get<int>(), j.at("b").get<int>(), j.at("c").get<int>(), j.at("d").get<int>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw GeometryError(std::string("malformed rectangle: ") + e.what());
  }
  validate_rect(r);
  return r;
}

nlohmann::json to_json(const CrossingEvent& ev) {
  nlohmann::json params = nlohmann::json::object();
  switch (ev.kind) {
    case EventKind::OneArm: params["n"] = ev.n; break;
    case EventKind::BridgeA: params = {{"n", ev.n}, {"j", ev.j}}; break;
    case EventKind::StripE: params = {{"n", ev.n}, {"i", ev.i}}; break;
    case EventKind::Custom: params = {{"source", rect_to_json(ev.source)}, {"target", rect_to_json(ev.target)}}; break;
    default: break;
  }
  return {{"kind", to_string(ev.kind)}, {"rect", rect_to_json(ev.rect)}, {"params", params}};
}

CrossingEvent event_from_json(const nlohmann::json& j) {
  try {
    const auto kind = event_kind_from_string(j.at("kind").get<std::string>());
    const auto params = j.contains("params") ? j.at("params") : nlohmann::json::object();
    switch (kind) {
      case EventKind::OneArm: return one_arm(params.at("n").get<int>());
      case EventKind::BridgeA: return bridge_event_Aj(params.at("n").get<int>(), params.at("j").get<int>());
      case EventKind::StripE: return strip_event_Ei(params.at("n").get<int>(), params.at("i").get<int>());
      case EventKind::Custom:
        return custom_connection(rect_from_json(params.at("source")), rect_from_json(params.at("target")), rect_from_json(j.at("rect")));
      default: {
        CrossingEvent ev{kind, rect_from_json(j.at("rect"))};
        return ev;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw GeometryError(std::string("malformed event description: ") + e.what());
  }
}

void ConnectionSearch::prepare(std::size_t n) {
  if (mark_.size() < n) mark_.assign(n, 0);
  if (++stamp_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0);
    stamp_ = 1;
  }
  queue_.clear();
}

bool ConnectionSearch::connected(const Connection& c, const Configuration& cfg, EdgeId skip) {
  const auto& g = *c.view;
  prepare(g.num_vertices());
  for (auto s : c.sources) {
    if (c.is_target[s]) return true;
    mark_[s] = stamp_;
    queue_.push_back(s);
  }
  for (std::size_t h = 0; h < queue_.size(); ++h) {
    const auto v = queue_[h];
    for (auto it = g.adj_begin(v); it != g.adj_end(v); ++it) {
      if (mark_[it->neighbor] == stamp_ || it->edge == skip || !c.edge_allowed[it->edge]) continue;
      if (!c.edge_open(cfg, it->edge)) continue;
      if (c.is_target[it->neighbor]) return true;
      mark_[it->neighbor] = stamp_;
      queue_.push_back(it->neighbor);
    }
  }
  return false;
}

std::int32_t ConnectionSearch::reach(const Connection& c, const Configuration& cfg, EdgeId skip) {
  const auto& g = *c.view;
  prepare(g.num_vertices());
  std::int32_t best = -1;
  auto level_of = [&](VertexId v) -> std::int32_t {
    if (!c.level.empty()) return c.level[v];
    return c.is_target[v] ? c.max_level : 0;
  };
  for (auto s : c.sources) {
    mark_[s] = stamp_;
    queue_.push_back(s);
    best = std::max(best, level_of(s));
  }
  for (std::size_t h = 0; h < queue_.size() && best < c.max_level; ++h) {
    const auto v = queue_[h];
    for (auto it = g.adj_begin(v); it != g.adj_end(v); ++it) {
      if (mark_[it->neighbor] == stamp_ || it->edge == skip || !c.edge_allowed[it->edge]) continue;
      if (!c.edge_open(cfg, it->edge)) continue;
      mark_[it->neighbor] = stamp_;
      queue_.push_back(it->neighbor);
      best = std::max(best, level_of(it->neighbor));
    }
  }
  return best;
}

CompiledEvent::CompiledEvent(const CrossingEvent& ev, const Region& host) : event_(ev) {
  if (!host.rect.contains(ev.extent())) {
    throw GeometryError("event " + ev.label() + " is not inside the host rectangle " + rect_label(host.rect));
  }
  // The graph is shared without ownership transfer; the region must outlive the event.
  std::shared_ptr<const Graph> view(std::shared_ptr<const Graph>{}, &host.graph);
  const int slab = host.lattice->max_edge_length;

  auto dual_view = [&]() -> std::optional<DualView> {
    try {
      auto dm = std::make_shared<DualMap>(dual_of(host.graph));
      DualView dv;
      dv.graph = std::shared_ptr<const Graph>(dm, &dm->dual);
      dv.to_primal = std::shared_ptr<const std::vector<EdgeId>>(dm, &dm->to_primal);
      return dv;
    } catch (const GeometryError&) {
      return std::nullopt;
    }
  };

  const Rect& r = ev.rect;
  switch (ev.kind) {
    case EventKind::H:
    case EventKind::V:
      connections_.push_back(crossing_connection(host, view, r, ev.kind == EventKind::V, slab));
      positive_ = connections_.front();
      break;
    case EventKind::Hc:
    case EventKind::Vc: {
      const bool horizontal = ev.kind == EventKind::Hc;
      connections_.push_back(crossing_connection(host, view, r, !horizontal, slab));
      negated_ = true;
      if (host.lattice->is_square()) {
        if (auto dv = dual_view()) {
          // No primal horizontal crossing iff a dual vertical one between the
          // dual rows just below and just above the rectangle.
          const HalfRect hr = horizontal ? HalfRect{2 * r.a + 1, 2 * r.b - 1, 2 * r.c - 1, 2 * r.d + 1}
                                         : HalfRect{2 * r.a - 1, 2 * r.b + 1, 2 * r.c + 1, 2 * r.d - 1};
          if (hr.x0 <= hr.x1 && hr.y0 <= hr.y1) positive_ = dual_connection(host, *dv, hr, r, horizontal);
        }
      }
      break;
    }
    case EventKind::OneArm: {
      const int n = ev.n;
      connections_.push_back(primal_connection(
          host, view, ev.extent(), [](int x, int y) { return x == 0 && y == 0; },
          [&](int x, int y) { return std::max(std::abs(x), std::abs(y)) >= n - slab + 1; },
          [](int x, int y) { return std::max(std::abs(x), std::abs(y)); }, n, true));
      positive_ = connections_.front();
      break;
    }
    case EventKind::BridgeA: {
      const auto g = bridge_geometry(ev.n, ev.j);
      const Rect domain = rect_union(g.r_j, g.r_j4);
      connections_.push_back(primal_connection(
          host, view, domain, [&](int x, int y) { return g.s_j.contains(x, y); },
          [&](int x, int y) { return g.s_j2.contains(x, y) || g.s_j4.contains(x, y); }, [](int, int) { return 0; }, 1,
          false));
      positive_ = connections_.front();
      break;
    }
    case EventKind::StripE: {
      const auto [lo, hi] = strip_rects(ev.n, ev.i);
      connections_.push_back(crossing_connection(host, view, lo, true, slab));
      connections_.push_back(crossing_connection(host, view, hi, true, slab));
      break;
    }
    case EventKind::Custom: {
      const Rect src = ev.source, tgt = ev.target;
      connections_.push_back(primal_connection(
          host, view, r, [&](int x, int y) { return src.contains(x, y); },
          [&](int x, int y) { return tgt.contains(x, y); }, [](int, int) { return 0; }, 1, false));
      positive_ = connections_.front();
      break;
    }
  }
}

bool CompiledEvent::operator()(const Configuration& cfg) const {
  bool all = true;
  for (const auto& c : connections_) {
    if (!search_.connected(c, cfg)) {
      all = false;
      break;
    }
  }
  return negated_ ? !all : all;
}

std::optional<Connection> CompiledEvent::positive_connection() const { return positive_; }

EventPredicate CompiledEvent::predicate() const {
  auto self = std::make_shared<CompiledEvent>(*this);
  return {event_.label(), [self](const Configuration& c) { return (*self)(c); },
          event_.increasing() ? Monotonicity::Increasing : Monotonicity::Decreasing};
}

bool is_crossed(const Configuration& cfg, const Region& host, const CrossingEvent& ev) {
  if (cfg.size() != host.num_edges()) throw GeometryError("configuration does not match the host region");
  return CompiledEvent(ev, host)(cfg);
}

namespace {

constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

}  // namespace

std::optional<CrossingPath> leftmost_vertical_crossing(const Configuration& cfg, const Region& region, const Rect& rect,
                                                       int source_lo, int source_hi) {
  if (!region.lattice->is_square()) throw GeometryError("left-most exploration is implemented for the square lattice");
  if (!region.rect.contains(rect)) throw GeometryError("exploration rectangle is not inside the region");
  const auto& g = region.graph;
  auto vertex_at = [&](int x, int y) -> std::optional<VertexId> {
    if (!rect.contains(x, y)) return std::nullopt;
    return g.find(Point::primal(x, y));
  };
  auto open_edge = [&](int x, int y, int dir) -> std::optional<std::pair<VertexId, EdgeId>> {
    const auto w = vertex_at(x + kDx[dir], y + kDy[dir]);
    if (!w) return std::nullopt;
    const auto e = g.find_edge(Point::primal(x, y), Point::primal(x + kDx[dir], y + kDy[dir]));
    if (!e || !cfg[*e]) return std::nullopt;
    return std::make_pair(*w, *e);
  };

  // Clusters inside the rectangle; find the left-most source in a cluster touching the top.
  std::vector<std::int32_t> comp(g.num_vertices(), -1);
  std::vector<std::uint8_t> reaches_top;
  auto label = [&](VertexId s) {
    const auto id = static_cast<std::int32_t>(reaches_top.size());
    reaches_top.push_back(0);
    std::vector<VertexId> stack{s};
    comp[s] = id;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      const int x = g.vertices[v].x / 2, y = g.vertices[v].y / 2;
      if (y == rect.d) reaches_top[id] = 1;
      for (int dir = 0; dir < 4; ++dir) {
        if (auto step = open_edge(x, y, dir); step && comp[step->first] < 0) {
          comp[step->first] = id;
          stack.push_back(step->first);
        }
      }
    }
  };
  std::optional<VertexId> start;
  for (int x = std::max(source_lo, rect.a); x <= std::min(source_hi, rect.b) && !start; ++x) {
    const auto v = vertex_at(x, rect.c);
    if (!v) continue;
    if (comp[*v] < 0) label(*v);
    if (reaches_top[comp[*v]]) start = v;
  }
  if (!start) return std::nullopt;

  CrossingPath path;
  std::unordered_map<VertexId, std::size_t> position;
  path.vertices.push_back(*start);
  position[*start] = 0;
  VertexId v = *start;
  int dir = 1;  // arriving upwards
  const std::size_t limit = 4 * g.num_edges() + 8;
  for (std::size_t steps = 0; g.vertices[v].y / 2 != rect.d; ++steps) {
    if (steps > limit) throw GeometryError("left-most exploration did not terminate");
    const int x = g.vertices[v].x / 2, y = g.vertices[v].y / 2;
    bool moved = false;
    for (int turn : {1, 0, 3, 2}) {
      const int nd = (dir + turn) % 4;
      if (auto step = open_edge(x, y, nd)) {
        v = step->first;
        dir = nd;
        if (auto it = position.find(v); it != position.end()) {
          // Loop erasure.
          for (std::size_t k = it->second + 1; k < path.vertices.size(); ++k) position.erase(path.vertices[k]);
          path.vertices.resize(it->second + 1);
          path.edges.resize(it->second);
        } else {
          position[v] = path.vertices.size();
          path.vertices.push_back(v);
          path.edges.push_back(step->second);
        }
        moved = true;
        break;
      }
    }
    if (!moved) return std::nullopt;
  }
  return path;
}

std::optional<CrossingPath> connection_witness(const Connection& c, const Configuration& cfg) {
  if (c.dual) return std::nullopt;
  const auto& g = *c.view;
  constexpr EdgeId kNone = ConnectionSearch::kNoEdge;
  std::vector<EdgeId> via(g.num_vertices(), kNone);
  std::vector<std::uint8_t> seen(g.num_vertices(), 0);
  std::vector<VertexId> queue;
  for (auto s : c.sources) {
    if (!seen[s]) queue.push_back(s);
    seen[s] = 1;
  }
  auto trace = [&](VertexId v) {
    CrossingPath path;
    path.vertices.push_back(v);
    while (via[v] != kNone) {
      const auto& e = g.edges[via[v]];
      path.edges.push_back(via[v]);
      v = e.u == v ? e.v : e.u;
      path.vertices.push_back(v);
    }
    std::reverse(path.vertices.begin(), path.vertices.end());
    std::reverse(path.edges.begin(), path.edges.end());
    return path;
  };
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const auto v = queue[h];
    if (c.is_target[v]) return trace(v);
    for (auto it = g.adj_begin(v); it != g.adj_end(v); ++it) {
      if (seen[it->neighbor] || !c.edge_allowed[it->edge] || !c.edge_open(cfg, it->edge)) continue;
      seen[it->neighbor] = 1;
      via[it->neighbor] = it->edge;
      queue.push_back(it->neighbor);
    }
  }
  return std::nullopt;
}

bool is_valid_path(const CrossingPath& path, const Region& region, const Configuration& cfg) {
  if (path.vertices.empty() || path.edges.size() + 1 != path.vertices.size()) return false;
  const auto& g = region.graph;
  for (std::size_t k = 0; k < path.edges.size(); ++k) {
    const auto& e = g.edges[path.edges[k]];
    const auto a = path.vertices[k], b = path.vertices[k + 1];
    if (!((e.u == a && e.v == b) || (e.u == b && e.v == a))) return false;
    if (!cfg[path.edges[k]]) return false;
  }
  return true;
}

}  // namespace rcquad
