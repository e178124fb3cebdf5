#include <doctest.h>

#include <algorithm>
#include <set>

#include "rcquad/lattice.hpp"

using namespace rcquad;

namespace {

Region square_region(int a, int b, int c, int d) { return build_region(Lattice::square(), {a, b, c, d}); }

std::set<std::pair<int, int>> positions(const Region& r, const std::vector<VertexId>& vs) {
  std::set<std::pair<int, int>> out;
  for (auto v : vs) out.insert({r.graph.vertices[v].x, r.graph.vertices[v].y});
  return out;
}

}  // namespace

TEST_CASE("single-site rectangle has four pendant edges") {
  const auto r = square_region(0, 0, 0, 0);
  CHECK(r.num_edges() == 4);
  CHECK(r.num_vertices() == 5);
  CHECK(r.graph.boundary.size() == 4);
  const auto centre = r.graph.find(Point::primal(0, 0));
  REQUIRE(centre);
  CHECK_FALSE(r.graph.is_boundary(*centre));
}

TEST_CASE("unit square region counts") {
  const auto r = square_region(0, 1, 0, 1);
  CHECK(r.num_edges() == 12);
  CHECK(r.num_vertices() == 12);
  CHECK(r.graph.boundary.size() == 8);
}

TEST_CASE("Lambda_1 counts") {
  const auto r = square_region(-1, 1, -1, 1);
  CHECK(r.num_edges() == 24);
  CHECK(r.num_vertices() == 21);
}

TEST_CASE("malformed rectangles are rejected") {
  CHECK_THROWS_AS(square_region(1, 0, 0, 0), GeometryError);
  CHECK_THROWS_AS(square_region(0, 0, 2, 1), GeometryError);
}

TEST_CASE("every edge touches the rectangle and ids are dense") {
  for (auto rect : {Rect{0, 0, 0, 0}, Rect{0, 3, 0, 1}, Rect{-2, 2, -1, 3}, Rect{5, 9, -4, -4}}) {
    const auto r = build_region(Lattice::square(), rect);
    for (const auto& e : r.graph.edges) {
      const auto pu = r.graph.vertices[e.u], pv = r.graph.vertices[e.v];
      CHECK((rect.contains(pu.x / 2, pu.y / 2) || rect.contains(pv.x / 2, pv.y / 2)));
    }
    for (EdgeId e = 0; e < r.num_edges(); ++e) {
      const auto& ed = r.graph.edges[e];
      CHECK(r.graph.find_edge(r.graph.vertices[ed.u], r.graph.vertices[ed.v]) == e);
    }
  }
}

TEST_CASE("boundary by neighbour scan agrees with the degree count") {
  for (auto rect : {Rect{0, 0, 0, 0}, Rect{0, 1, 0, 1}, Rect{0, 4, 0, 2}, Rect{-3, 3, -3, 3}}) {
    for (const auto& lat : {Lattice::square(), Lattice::square_with_diagonal()}) {
      const auto r = build_region(lat, rect);
      CHECK(boundary_by_degree(r) == r.graph.boundary);
    }
  }
}

TEST_CASE("side sets on the square lattice are the side lines") {
  const auto r = square_region(0, 2, 0, 1);
  const auto left = positions(r, side_vertices(r, Side::Left));
  CHECK(left == std::set<std::pair<int, int>>{{0, 0}, {0, 2}});
  const auto dot = square_region(0, 0, 0, 0);
  CHECK(side_vertices(dot, Side::Top) == side_vertices(dot, Side::Bottom));
  CHECK(side_vertices(dot, Side::Top).size() == 1);
}

TEST_CASE("reflection maps the right side onto the left side") {
  const auto r = square_region(0, 4, 0, 2);
  const auto img = apply_symmetry(r, SymmetryOp::reflect_x());
  std::vector<VertexId> mapped;
  for (auto v : side_vertices(r, Side::Right)) mapped.push_back(img.vertex_map[v]);
  std::sort(mapped.begin(), mapped.end());
  auto left = side_vertices(img.region, Side::Left);
  std::sort(left.begin(), left.end());
  CHECK(mapped == left);
}

TEST_CASE("symmetry images") {
  const auto r = square_region(0, 2, 0, 1);
  const auto t = apply_symmetry(r, SymmetryOp::translate(1, 0));
  CHECK(t.region.rect == Rect{1, 3, 0, 1});
  std::vector<EdgeId> sorted = t.edge_map;
  std::sort(sorted.begin(), sorted.end());
  for (EdgeId e = 0; e < sorted.size(); ++e) CHECK(sorted[e] == e);

  const auto rot = apply_symmetry(r, SymmetryOp::rot90());
  CHECK(rot.region.rect.width() == 1);
  CHECK(rot.region.rect.height() == 2);

  const auto once = apply_symmetry(r, SymmetryOp::reflect_x());
  const auto twice = apply_symmetry(once.region, SymmetryOp::reflect_x());
  CHECK(twice.region.rect == r.rect);
  for (EdgeId e = 0; e < r.num_edges(); ++e) CHECK(twice.edge_map[once.edge_map[e]] == e);

  auto full = r;
  for (int i = 0; i < 4; ++i) {
    const auto step = apply_symmetry(full, SymmetryOp::rot90());
    full = step.region;
  }
  CHECK(full.rect == r.rect);
}

TEST_CASE("undeclared symmetries are refused") {
  const auto r = build_region(Lattice::square_with_diagonal(), {0, 2, 0, 1});
  CHECK_THROWS_AS(apply_symmetry(r, SymmetryOp::rot90()), GeometryError);
  CHECK_NOTHROW(apply_symmetry(r, SymmetryOp::translate(2, 3)));
}

TEST_CASE("dual map") {
  const auto r = square_region(0, 1, 0, 1);
  const auto dm = dual_of(r);
  CHECK(dm.dual.num_edges() == r.num_edges());
  const auto centre = dm.dual.find(Point{1, 1});
  REQUIRE(centre);
  CHECK(dm.dual.degree(*centre) == 4);
  for (const auto& p : dm.dual.vertices) {
    CHECK(p.x % 2 != 0);
    CHECK(p.y % 2 != 0);
  }

  const auto wide = square_region(0, 2, 0, 1);
  const auto dw = dual_of(wide);
  CHECK(dw.dual.num_edges() == wide.num_edges());
  const auto back = dual_of(dw.dual);
  for (EdgeId e = 0; e < wide.num_edges(); ++e) {
    CHECK(dw.to_primal[dw.to_dual[e]] == e);
    const auto& a = wide.graph.edges[e];
    const auto& b = back.dual.edges[back.to_dual[dw.to_dual[e]]];
    const auto pa = std::minmax(wide.graph.vertices[a.u], wide.graph.vertices[a.v]);
    const auto pb = std::minmax(back.dual.vertices[b.u], back.dual.vertices[b.v]);
    CHECK(pa == pb);
  }
}

TEST_CASE("dual of a non-unit lattice is refused") {
  const auto r = build_region(Lattice::square_with_diagonal(), {0, 1, 0, 1});
  CHECK_THROWS_AS(dual_of(r), GeometryError);
}

TEST_CASE("edge embedding of a subrectangle") {
  const auto host = square_region(0, 3, 0, 2);
  const auto sub = square_region(1, 2, 0, 1);
  const auto emb = embed_edges(sub.graph, host.graph);
  REQUIRE(emb.size() == sub.num_edges());
  for (EdgeId e = 0; e < emb.size(); ++e) {
    const auto& se = sub.graph.edges[e];
    const auto& he = host.graph.edges[emb[e]];
    CHECK(std::minmax(sub.graph.vertices[se.u], sub.graph.vertices[se.v]) ==
          std::minmax(host.graph.vertices[he.u], host.graph.vertices[he.v]));
  }
  CHECK_THROWS_AS(embed_edges(host.graph, sub.graph), GeometryError);
}
