#include <doctest.h>

#include <functional>
#include <set>

#include "rcquad/events.hpp"
#include "rcquad/rng.hpp"

using namespace rcquad;

namespace {

Region square_region(const Rect& r) { return build_region(Lattice::square(), r); }

Configuration random_config(std::size_t n, StreamRng& rng, double density) {
  Configuration c(n);
  for (EdgeId e = 0; e < n; ++e) c.set(e, rng.uniform() < density);
  return c;
}

// Independent connectivity: DFS over open edges with both endpoints in `domain`.
bool dfs_connects(const Region& r, const Configuration& cfg, const Rect& domain,
                  const std::function<bool(int, int)>& src, const std::function<bool(int, int)>& tgt) {
  const auto& g = r.graph;
  auto in = [&](VertexId v) { return domain.contains(g.vertices[v].x / 2, g.vertices[v].y / 2); };
  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<VertexId> stack;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (in(v) && src(g.vertices[v].x / 2, g.vertices[v].y / 2)) {
      seen[v] = 1;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (tgt(g.vertices[v].x / 2, g.vertices[v].y / 2)) return true;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const auto& ed = g.edges[e];
      if (!cfg[e] || (ed.u != v && ed.v != v)) continue;
      const auto w = ed.u == v ? ed.v : ed.u;
      if (!seen[w] && in(w)) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return false;
}

bool primal_in_box(const Point& p) { return std::abs(p.x) <= 2 && std::abs(p.y) <= 2; }

}  // namespace

TEST_CASE("crossings of trivial configurations") {
  const Rect rect{0, 4, 0, 3};
  const auto host = square_region({-1, 5, -1, 4});
  const Configuration open(host.num_edges(), true), closed(host.num_edges());
  for (auto ev : {horizontal_crossing(rect), vertical_crossing(rect), one_arm(1), bridge_event_Aj(2, 0)}) {
    const auto h = square_region(ev.extent());
    CHECK(is_crossed(Configuration(h.num_edges(), true), h, ev));
    CHECK_FALSE(is_crossed(Configuration(h.num_edges()), h, ev));
  }
  CHECK(is_crossed(closed, host, CrossingEvent{EventKind::Hc, rect}));
  CHECK_FALSE(is_crossed(open, host, CrossingEvent{EventKind::Vc, rect}));
}

TEST_CASE("a single open row crosses horizontally only") {
  const Rect rect{0, 4, 0, 3};
  const auto host = square_region(rect);
  Configuration cfg(host.num_edges());
  for (int x = 0; x < 4; ++x) cfg.set(*host.graph.find_edge(Point::primal(x, 1), Point::primal(x + 1, 1)), true);
  CHECK(is_crossed(cfg, host, horizontal_crossing(rect)));
  CHECK_FALSE(is_crossed(cfg, host, vertical_crossing(rect)));
}

TEST_CASE("events outside the host are rejected") {
  const auto host = square_region({0, 3, 0, 3});
  CHECK_THROWS_AS(is_crossed(Configuration(host.num_edges()), host, horizontal_crossing({0, 4, 0, 1})), GeometryError);
  CHECK_THROWS_AS(is_crossed(Configuration(host.num_edges()), host, one_arm(2)), GeometryError);
}

TEST_CASE("rotation transports horizontal crossings to vertical ones") {
  StreamRng rng(2, 0);
  const Rect rect{0, 3, 0, 2};
  const auto host = square_region({-1, 4, -1, 3});
  for (int t = 0; t < 300; ++t) {
    const auto cfg = random_config(host.num_edges(), rng, 0.5);
    const auto img = apply_symmetry(host, SymmetryOp::rot90());
    Configuration rotated(host.num_edges());
    for (EdgeId e = 0; e < host.num_edges(); ++e) rotated.set(img.edge_map[e], cfg[e]);
    const auto rrect = SymmetryOp::rot90().apply(rect);
    CHECK(is_crossed(cfg, host, horizontal_crossing(rect)) == is_crossed(rotated, img.region, vertical_crossing(rrect)));
  }
}

TEST_CASE("primal and dual crossings are complementary on every small rectangle") {
  // All rectangles whose region has at most 16 edges, enumerated exhaustively.
  int checked = 0;
  for (int w = 0; w <= 4; ++w) {
    for (int h = 0; h <= 4; ++h) {
      const auto r = square_region({0, w, 0, h});
      if (r.num_edges() > 16) continue;
      for (auto kind : {EventKind::Hc, EventKind::Vc}) {
        const CompiledEvent comp(CrossingEvent{kind, r.rect}, r);
        const auto dual = comp.positive_connection();
        if ((kind == EventKind::Hc && w == 0) || (kind == EventKind::Vc && h == 0)) {
          CHECK_FALSE(dual.has_value());
          continue;
        }
        REQUIRE(dual.has_value());
        ConnectionSearch search;
        Configuration cfg(r.num_edges());
        for (std::uint64_t i = 0; i < (std::uint64_t{1} << r.num_edges()); ++i) {
          cfg.assign_bits(i);
          CHECK(comp(cfg) == search.connected(*dual, cfg));
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 100000);
}

TEST_CASE("strip event E_0 at n=4") {
  const auto ev = strip_event_Ei(4, 0);
  const auto [lo, hi] = strip_rects(4, 0);
  CHECK(lo == Rect{-32, -16, 0, 4});
  CHECK(hi == Rect{16, 32, 0, 4});
  const auto host = square_region(ev.extent());
  StreamRng rng(4, 0);
  for (int t = 0; t < 100; ++t) {
    const auto cfg = random_config(host.num_edges(), rng, 0.6);
    CHECK(is_crossed(cfg, host, ev) ==
          (is_crossed(cfg, host, vertical_crossing(lo)) && is_crossed(cfg, host, vertical_crossing(hi))));
  }
}

TEST_CASE("bridge event geometry and connectivity at n=50") {
  const auto g = bridge_geometry(50, 0);
  CHECK(g.k == 1);
  CHECK(g.r_j == Rect{-17, 18, 0, 50});
  CHECK(g.s_j2 == Rect{2, 3, 0, 0});
  CHECK(bridge_geometry(51, 1).k == 2);
  const auto ev = bridge_event_Aj(50, 0);
  const auto host = square_region({-18, 23, -1, 51});
  const CompiledEvent comp(ev, host);
  const Rect domain{-17, 22, 0, 50};
  StreamRng rng(9, 0);
  int hits = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto cfg = random_config(host.num_edges(), rng, 0.3 + 0.3 * (t % 3) / 2.0);
    const bool a = comp(cfg);
    const bool b = dfs_connects(
        host, cfg, domain, [&](int x, int y) { return g.s_j.contains(x, y); },
        [&](int x, int y) { return g.s_j2.contains(x, y) || g.s_j4.contains(x, y); });
    CHECK(a == b);
    hits += a;
  }
  CHECK(hits > 100);
  CHECK(hits < 9900);
}

TEST_CASE("one-arm at n=1 against direct counting") {
  // Bernoulli(1/2): the event depends only on the 12 edges inside Lambda_1.
  const auto host = square_region({-1, 1, -1, 1});
  const CompiledEvent comp(one_arm(1), host);
  std::vector<EdgeId> inner;
  for (EdgeId e = 0; e < host.num_edges(); ++e) {
    const auto& ed = host.graph.edges[e];
    if (primal_in_box(host.graph.vertices[ed.u]) && primal_in_box(host.graph.vertices[ed.v])) inner.push_back(e);
  }
  REQUIRE(inner.size() == 12);
  int count_a = 0, count_b = 0;
  for (std::uint32_t m = 0; m < 4096; ++m) {
    Configuration cfg(host.num_edges());
    for (std::size_t k = 0; k < 12; ++k) cfg.set(inner[k], (m >> k) & 1);
    count_a += comp(cfg);
    count_b += dfs_connects(
        host, cfg, {-1, 1, -1, 1}, [](int x, int y) { return x == 0 && y == 0; },
        [](int x, int y) { return std::abs(x) == 1 || std::abs(y) == 1; });
  }
  CHECK(count_a == count_b);
  // Origin isolated iff its four edges are closed: 1 - 1/16.
  CHECK(count_a == 4096 - 256);
}

TEST_CASE("declared monotonicity holds on random pairs") {
  const auto host = square_region({-6, 6, -6, 6});
  for (auto ev : {horizontal_crossing({-3, 3, -2, 2}), CrossingEvent{EventKind::Vc, {-3, 3, -2, 2}}, one_arm(4),
                  custom_connection({-1, 1, 0, 0}, {4, 6, 6, 6}, {-6, 6, -6, 6})}) {
    const auto pred = CompiledEvent(ev, host).predicate();
    CHECK(spot_check_monotonicity(pred, host.num_edges(), 500, 3) == 0);
  }
}

TEST_CASE("event JSON round trip") {
  for (auto ev : {horizontal_crossing({0, 4, 0, 2}), CrossingEvent{EventKind::Vc, {1, 2, 3, 4}}, one_arm(5),
                  bridge_event_Aj(60, 2), strip_event_Ei(3, 1), custom_connection({0, 0, 0, 0}, {3, 3, 0, 3}, {0, 3, 0, 3})}) {
    const auto back = event_from_json(to_json(ev));
    CHECK(back.label() == ev.label());
    CHECK(to_json(back) == to_json(ev));
  }
  CHECK_THROWS_AS(event_from_json(nlohmann::json{{"kind", "Z"}, {"rect", {0, 1, 0, 1}}}), GeometryError);
  CHECK_THROWS_AS(event_from_json(nlohmann::json{{"kind", "H"}, {"rect", {1, 0, 0, 1}}}), GeometryError);
}

TEST_CASE("left-most crossing picks the left column") {
  const Rect rect{0, 6, 0, 4};
  const auto r = square_region(rect);
  Configuration cfg(r.num_edges());
  for (int x : {2, 5}) {
    for (int y = 0; y < 4; ++y) cfg.set(*r.graph.find_edge(Point::primal(x, y), Point::primal(x, y + 1)), true);
  }
  const auto path = leftmost_vertical_crossing(cfg, r, rect, 0, 6);
  REQUIRE(path.has_value());
  CHECK(is_valid_path(*path, r, cfg));
  for (auto v : path->vertices) CHECK(r.graph.vertices[v].x == 4);
  CHECK_FALSE(leftmost_vertical_crossing(Configuration(r.num_edges()), r, rect, 0, 6).has_value());
}

TEST_CASE("left-most crossing against brute-force path enumeration") {
  const Rect rect{0, 3, 0, 3};
  const auto r = square_region(rect);
  const auto& g = r.graph;
  auto inside = [&](VertexId v) { return rect.contains(g.vertices[v].x / 2, g.vertices[v].y / 2); };
  StreamRng rng(13, 0);
  int found = 0;
  for (int t = 0; t < 400; ++t) {
    const auto cfg = random_config(g.num_edges(), rng, 0.55);
    const auto path = leftmost_vertical_crossing(cfg, r, rect, 0, 3);
    const bool crossed = is_crossed(cfg, r, vertical_crossing(rect));
    CHECK(path.has_value() == crossed);
    if (!path) continue;
    ++found;
    CHECK(is_valid_path(*path, r, cfg));
    CHECK(g.vertices[path->vertices.front()].y == 0);
    CHECK(g.vertices[path->vertices.back()].y == 6);
    std::set<VertexId> on_path(path->vertices.begin(), path->vertices.end());
    CHECK(on_path.size() == path->vertices.size());

    // Vertices strictly left of the path: reachable from the left column
    // through lattice edges inside the rectangle without touching the path.
    std::vector<char> left(g.num_vertices(), 0);
    std::vector<VertexId> stack;
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      if (inside(v) && g.vertices[v].x == 0 && !on_path.count(v)) {
        left[v] = 1;
        stack.push_back(v);
      }
    }
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto it = g.adj_begin(v); it != g.adj_end(v); ++it) {
        const auto w = it->neighbor;
        if (!left[w] && inside(w) && !on_path.count(w)) {
          left[w] = 1;
          stack.push_back(w);
        }
      }
    }
    // No open crossing path may visit such a vertex: enumerate all simple open paths.
    bool violation = false;
    std::vector<char> used(g.num_vertices(), 0);
    std::function<void(VertexId, bool)> walk = [&](VertexId v, bool touched_left) {
      if (g.vertices[v].y == 6) {
        if (touched_left) violation = true;
        return;
      }
      for (auto it = g.adj_begin(v); it != g.adj_end(v); ++it) {
        const auto w = it->neighbor;
        if (used[w] || !inside(w) || !cfg[it->edge]) continue;
        used[w] = 1;
        walk(w, touched_left || left[w]);
        used[w] = 0;
      }
    };
    for (VertexId s = 0; s < g.num_vertices() && !violation; ++s) {
      if (inside(s) && g.vertices[s].y == 0) {
        used[s] = 1;
        walk(s, left[s]);
        used[s] = 0;
      }
    }
    CHECK_FALSE(violation);

    // Resampling edges off the path and not touching its left side keeps it.
    std::set<EdgeId> path_edges(path->edges.begin(), path->edges.end());
    for (int k = 0; k < 5; ++k) {
      auto other = cfg;
      for (EdgeId e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edges[e];
        if (path_edges.count(e) || left[ed.u] || left[ed.v]) continue;
        // Chords between two path vertices may lie on either side.
        if (on_path.count(ed.u) && on_path.count(ed.v)) continue;
        other.set(e, rng.uniform() < 0.5);
      }
      const auto again = leftmost_vertical_crossing(other, r, rect, 0, 3);
      REQUIRE(again.has_value());
      CHECK(again->vertices == path->vertices);
    }
  }
  CHECK(found > 50);
}

TEST_CASE("connection witness exists exactly when the crossing does") {
  const Rect rect{0, 3, 0, 2};
  const auto host = square_region({-1, 4, -1, 3});
  const CompiledEvent h(horizontal_crossing(rect), host);
  const CompiledEvent hc(CrossingEvent{EventKind::Hc, rect}, host);
  StreamRng rng(7, 0);
  int crossed = 0;
  for (int t = 0; t < 400; ++t) {
    const auto cfg = random_config(host.num_edges(), rng, 0.5);
    const auto path = connection_witness(*h.positive_connection(), cfg);
    REQUIRE(path.has_value() == h(cfg));
    CHECK_FALSE(connection_witness(*hc.positive_connection(), cfg));
    if (!path) continue;
    ++crossed;
    CHECK(is_valid_path(*path, host, cfg));
    CHECK(host.graph.vertices[path->vertices.front()].x == 0);
    CHECK(host.graph.vertices[path->vertices.back()].x == 6);
  }
  CHECK(crossed > 0);
}
