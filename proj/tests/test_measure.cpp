#include <doctest.h>

#include <cmath>
#include <functional>

#include "rcquad/measure.hpp"
#include "rcquad/rng.hpp"

using namespace rcquad;

namespace {

// Two vertices joined by one edge, both on the boundary.
Graph single_edge() {
  Graph g;
  g.vertices = {Point{0, 0}, Point{2, 0}};
  g.edges = {{0, 1}};
  g.boundary = {0, 1};
  g.finalize();
  return g;
}

int dfs_clusters(const Graph& g, const BoundaryCondition& bc, const Configuration& cfg) {
  std::vector<int> comp(g.num_vertices(), -1);
  std::vector<std::vector<VertexId>> partners(g.num_vertices());
  for (const auto& b : bc.blocks()) {
    for (auto v : b) partners[v] = b;
  }
  int count = 0;
  for (VertexId s = 0; s < g.num_vertices(); ++s) {
    if (comp[s] >= 0) continue;
    std::vector<VertexId> stack{s};
    comp[s] = count;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      auto push = [&](VertexId w) {
        if (comp[w] < 0) {
          comp[w] = count;
          stack.push_back(w);
        }
      };
      for (auto it = g.adj_begin(v); it != g.adj_end(v); ++it) {
        if (cfg[it->edge]) push(it->neighbor);
      }
      for (auto w : partners[v]) push(w);
    }
    ++count;
  }
  return count;
}

Configuration random_config(std::size_t n, StreamRng& rng, double density) {
  Configuration c(n);
  for (EdgeId e = 0; e < n; ++e) c.set(e, rng.uniform() < density);
  return c;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((ModelParams{1.5, 2}.validate()), ParameterError);
  CHECK_THROWS_AS((ModelParams{0.5, 0}.validate()), ParameterError);
  CHECK_NOTHROW((ModelParams{0, 0.3}.validate()));
}

TEST_CASE("configuration bit operations") {
  Configuration c(70);
  c.set(0, true);
  c.set(69, true);
  CHECK(c.count_open() == 2);
  CHECK(c.complement().count_open() == 68);
  CHECK(c.complement().complement() == c);
  CHECK(c.below(Configuration(70, true)));
  CHECK_FALSE(Configuration(70, true).below(c));
  CHECK(Configuration(70, true).count_open() == 70);
  CHECK(Configuration::from_bits(0b101, 3)[2]);
}

TEST_CASE("cluster counts on the single edge") {
  const auto g = single_edge();
  const Configuration closed(1);
  CHECK(cluster_count(g, BoundaryCondition::free(g), closed) == 2);
  CHECK(cluster_count(g, BoundaryCondition::wired(g), closed) == 1);
  const auto r = build_region(Lattice::square(), {0, 1, 0, 1});
  CHECK(cluster_count(r.graph, BoundaryCondition::free(r.graph), Configuration(r.num_edges(), true)) == 1);
}

TEST_CASE("invalid partitions are rejected") {
  const auto r = build_region(Lattice::square(), {0, 1, 0, 1});
  const auto interior = *r.graph.find(Point::primal(0, 0));
  CHECK_THROWS_AS(BoundaryCondition::from_blocks(r.graph, {{interior}}), BoundaryError);
  const auto b = r.graph.boundary;
  CHECK_THROWS_AS(BoundaryCondition::from_blocks(r.graph, {{b[0], b[1]}, {b[1], b[2]}}), BoundaryError);
  const auto other = build_region(Lattice::square(), {0, 2, 0, 1});
  CHECK_THROWS_AS(cluster_count(r.graph, BoundaryCondition::wired(other.graph), Configuration(r.num_edges())),
                  BoundaryError);
  CHECK_THROWS_AS(BoundaryCondition::named("bogus", r), BoundaryError);
}

TEST_CASE("log weights") {
  const auto g = single_edge();
  const auto free_bc = BoundaryCondition::free(g);
  const ModelParams half{0.5, 2};
  const double wo = std::exp(log_weight(half, g, free_bc, Configuration(1, true)));
  const double wc = std::exp(log_weight(half, g, free_bc, Configuration(1, false)));
  CHECK(wo / wc == doctest::Approx(0.5));
  CHECK(wo / (wo + wc) == doctest::Approx(1.0 / 3));
  const auto r = build_region(Lattice::square(), {0, 1, 0, 1});
  StreamRng rng(1, 0);
  for (int i = 0; i < 10; ++i) {
    CHECK(log_weight({0.5, 1}, r.graph, BoundaryCondition::free(r.graph), random_config(12, rng, 0.5)) == 0.0);
  }
  CHECK_THROWS_AS(log_weight({0.0, 2}, g, free_bc, Configuration(1)), ParameterError);
  CHECK_THROWS_AS(log_weight({1.0, 2}, g, free_bc, Configuration(1)), ParameterError);
}

TEST_CASE("heat-bath conditional") {
  const auto g = single_edge();
  const Configuration c(1);
  CHECK(heat_bath_prob({0.5, 2}, g, BoundaryCondition::free(g), c, 0) == doctest::Approx(1.0 / 3));
  CHECK(heat_bath_prob({0.7, 5}, g, BoundaryCondition::wired(g), c, 0) == doctest::Approx(0.7));
  CHECK(heat_bath_prob({0.3, 1}, g, BoundaryCondition::free(g), c, 0) == doctest::Approx(0.3));

  // Endpoints joined through the rest of the square.
  const auto r = build_region(Lattice::square(), {0, 1, 0, 1});
  const auto a = *r.graph.find(Point::primal(0, 0));
  const auto b = *r.graph.find(Point::primal(1, 0));
  const auto e = *r.graph.find_edge(r.graph.vertices[a], r.graph.vertices[b]);
  Configuration all(r.num_edges(), true);
  CHECK(heat_bath_prob({0.5, 2}, r.graph, BoundaryCondition::free(r.graph), all, e) == doctest::Approx(0.5));
  Configuration none(r.num_edges());
  CHECK(heat_bath_prob({0.5, 2}, r.graph, BoundaryCondition::free(r.graph), none, e) == doctest::Approx(1.0 / 3));
}

TEST_CASE("heat-bath equals the weight ratio on random configurations") {
  const auto r = build_region(Lattice::square(), {0, 2, 0, 1});
  StreamRng rng(7, 0);
  for (const char* name : {"free", "wired", "dobrushin", "mix", "star-mix"}) {
    const auto bc = BoundaryCondition::named(name, r);
    for (int t = 0; t < 40; ++t) {
      const ModelParams mp{0.1 + 0.8 * rng.uniform(), 0.5 + 5 * rng.uniform()};
      auto cfg = random_config(r.num_edges(), rng, rng.uniform());
      const auto e = static_cast<EdgeId>(rng.below(r.num_edges()));
      cfg.set(e, true);
      const double wo = log_weight(mp, r.graph, bc, cfg);
      cfg.set(e, false);
      const double wc = log_weight(mp, r.graph, bc, cfg);
      const double exact = 1.0 / (1.0 + std::exp(wc - wo));
      CHECK(heat_bath_prob(mp, r.graph, bc, cfg, e) == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("cluster count matches an independent DFS and moves by one per edge") {
  const auto r = build_region(Lattice::square(), {-2, 2, -1, 2});
  StreamRng rng(11, 0);
  const auto& g = r.graph;
  const std::vector<BoundaryCondition> bcs = {
      BoundaryCondition::free(g), BoundaryCondition::wired(g), BoundaryCondition::dobrushin(r),
      BoundaryCondition::named("mix", r), BoundaryCondition::named("star-mix", r)};
  for (int t = 0; t < 200; ++t) {
    auto cfg = random_config(g.num_edges(), rng, rng.uniform());
    const int kf = cluster_count(g, bcs[0], cfg);
    const int kw = cluster_count(g, bcs[1], cfg);
    for (const auto& bc : bcs) {
      const int k = cluster_count(g, bc, cfg);
      CHECK(k == dfs_clusters(g, bc, cfg));
      CHECK(kf >= k);
      CHECK(k >= kw);
      const auto e = static_cast<EdgeId>(rng.below(g.num_edges()));
      auto opened = cfg;
      opened.set(e, true);
      auto closed = cfg;
      closed.set(e, false);
      const int d = cluster_count(g, bc, opened) - cluster_count(g, bc, closed);
      CHECK((d == 0 || d == -1));
    }
  }
}

TEST_CASE("boundary condition constructors and domination") {
  const auto r = build_region(Lattice::square(), {0, 2, 0, 1});
  const auto& g = r.graph;
  const auto fr = BoundaryCondition::free(g);
  const auto wi = BoundaryCondition::wired(g);
  const auto mx = BoundaryCondition::named("mix", r);
  const auto sm = BoundaryCondition::named("star-mix", r);
  const auto db = BoundaryCondition::dobrushin(r);
  CHECK(fr.num_blocks() == g.boundary.size());
  CHECK(wi.num_blocks() == 1);
  CHECK(mx.num_blocks() == sm.num_blocks() + 1);
  const std::vector<BoundaryCondition> all = {fr, wi, mx, sm, db};
  for (const auto& x : all) {
    CHECK(bc_dominates(fr, x));
    CHECK(bc_dominates(x, wi));
    CHECK(bc_dominates(x, x));
    for (const auto& y : all) {
      if (bc_dominates(x, y) && bc_dominates(y, x)) CHECK(x == y);
      for (const auto& z : all) {
        if (bc_dominates(x, y) && bc_dominates(y, z)) CHECK(bc_dominates(x, z));
      }
    }
  }
  CHECK(bc_dominates(mx, sm));
  CHECK_FALSE(bc_dominates(sm, mx));
  // Canonical form does not depend on how the blocks are listed.
  const auto b = g.boundary;
  CHECK(BoundaryCondition::from_blocks(g, {{b[3], b[1]}, {b[2], b[0]}}) ==
        BoundaryCondition::from_blocks(g, {{b[0], b[2]}, {b[1], b[3]}}));
  const auto small = build_region(Lattice::square(), {0, 1, 0, 1});
  CHECK_THROWS_AS(bc_dominates(fr, BoundaryCondition::free(small.graph)), BoundaryError);
}

TEST_CASE("induced boundary conditions") {
  const auto host = build_region(Lattice::square(), {0, 3, 0, 2});
  const auto sub = build_region(Lattice::square(), {1, 2, 0, 1});
  const Configuration closed(host.num_edges()), open(host.num_edges(), true);
  CHECK(induced_bc(host, sub, closed, BoundaryCondition::free(host.graph)) == BoundaryCondition::free(sub.graph));
  const auto inner = build_region(Lattice::square(), {1, 2, 1, 1});
  CHECK(induced_bc(host, inner, open, BoundaryCondition::free(host.graph)) == BoundaryCondition::wired(inner.graph));
  // Pendants of sub below the host reach nothing through outer edges under free outer bc.
  CHECK(induced_bc(host, sub, open, BoundaryCondition::free(host.graph)).num_blocks() == 3);
  CHECK(induced_bc(host, sub, open, BoundaryCondition::dobrushin(host)) == BoundaryCondition::wired(sub.graph));

  // Closed outside, wired outside: exactly the subregion boundary vertices on the host boundary merge.
  const auto w = induced_bc(host, sub, closed, BoundaryCondition::wired(host.graph));
  BoundaryCondition::Block on_host;
  for (auto v : sub.graph.boundary) {
    if (host.graph.is_boundary(*host.graph.find(sub.graph.vertices[v]))) on_host.push_back(v);
  }
  CHECK(on_host.size() == 2);
  CHECK(w == BoundaryCondition::from_blocks(sub.graph, {on_host}));

  const auto other = build_region(Lattice::square(), {4, 5, 0, 1});
  CHECK_THROWS_AS(induced_bc(host, other, closed, BoundaryCondition::free(host.graph)), BoundaryError);
  CHECK_THROWS_AS(induced_bc(host, sub, Configuration(3), BoundaryCondition::free(host.graph)), BoundaryError);
}

TEST_CASE("dual parameters") {
  CHECK(dual_params({2.0 / 3, 2}).p == doctest::Approx(0.5));
  CHECK(dual_params({0.3, 1}).p == doctest::Approx(0.7));
  CHECK(self_dual_point(2) == doctest::Approx(0.585786).epsilon(1e-6));
  CHECK(dual_params({self_dual_point(2), 2}).p == doctest::Approx(self_dual_point(2)));
  CHECK(dual_params({0, 3}).p == 1.0);
  CHECK(dual_params({1, 3}).p == 0.0);
  StreamRng rng(3, 0);
  for (int i = 0; i < 100; ++i) {
    const ModelParams mp{0.01 + 0.98 * rng.uniform(), 0.1 + 20 * rng.uniform()};
    const auto d = dual_params(mp);
    CHECK(std::abs(dual_params(d).p - mp.p) < 1e-12);
    CHECK(mp.p * d.p / ((1 - mp.p) * (1 - d.p)) == doctest::Approx(mp.q).epsilon(1e-12));
  }
}

TEST_CASE("dual configurations") {
  const auto r = build_region(Lattice::square(), {0, 2, 0, 1});
  const auto dm = dual_of(r);
  CHECK(dual_config(dm, Configuration(r.num_edges(), true)).count_open() == 0);
  StreamRng rng(5, 0);
  for (int i = 0; i < 20; ++i) {
    const auto cfg = random_config(r.num_edges(), rng, 0.4);
    const auto d = dual_config(dm, cfg);
    CHECK(cfg.count_open() + d.count_open() == r.num_edges());
    const auto back = dual_of(dm.dual);
    CHECK(dual_config(back, d) == cfg);
  }
}
