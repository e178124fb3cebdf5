#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rcquad/events.hpp"
#include "rcquad/exact.hpp"
#include "rcquad/rng.hpp"

using namespace rcquad;

namespace {

Graph make_graph(std::vector<Point> vertices, std::vector<Edge> edges, std::vector<VertexId> boundary) {
  Graph g;
  g.vertices = std::move(vertices);
  g.edges = std::move(edges);
  g.boundary = std::move(boundary);
  g.finalize();
  return g;
}

Graph single_edge() { return make_graph({Point{0, 0}, Point{2, 0}}, {{0, 1}}, {0, 1}); }

// Unit square cycle; all four corners on the boundary.
Graph four_cycle() {
  return make_graph({Point{0, 0}, Point{2, 0}, Point{0, 2}, Point{2, 2}}, {{0, 1}, {1, 3}, {2, 3}, {0, 2}},
                    {0, 1, 2, 3});
}

double total(const ExactDistribution& d) {
  double s = 0;
  for (std::uint64_t i = 0; i < d.num_configs(); ++i) s += d.prob(i);
  return s;
}

}  // namespace

TEST_CASE("single-edge probabilities") {
  const auto g = single_edge();
  CHECK(exact_prob(enumerate(g, BoundaryCondition::free(g), {0.5, 2}), edge_open_event(0)) ==
        doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(exact_prob(enumerate(g, BoundaryCondition::wired(g), {0.7, 5}), edge_open_event(0)) ==
        doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("q = 1 is a product measure") {
  const auto r = build_region(Lattice::square(), {0, 2, 0, 1});
  const auto d = enumerate(r, BoundaryCondition::named("mix", r), {0.3, 1});
  const auto ne = r.num_edges();
  for (std::uint64_t i = 0; i < d.num_configs(); i += 37) {
    const int k = std::popcount(i);
    CHECK(d.prob(i) == doctest::Approx(std::pow(0.3, k) * std::pow(0.7, ne - k)).epsilon(1e-12));
  }
  CHECK(exact_prob(d, all_open_event(ne)) == doctest::Approx(std::pow(0.3, ne)).epsilon(1e-12));
  CHECK(exact_prob(d, always_event()) == doctest::Approx(1.0).epsilon(kExactTol));
}

TEST_CASE("probabilities sum to one and degenerate p is a point mass") {
  const auto r = build_region(Lattice::square(), {0, 1, 0, 1});
  for (double p : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    const auto d = enumerate(r, BoundaryCondition::free(r.graph), {p, 4});
    CHECK(std::abs(total(d) - 1) < 1e-10);
  }
  CHECK(enumerate(r, BoundaryCondition::free(r.graph), {0, 3}).prob(0) == doctest::Approx(1.0));
  CHECK(exact_prob(enumerate(r, BoundaryCondition::free(r.graph), {1, 3}), all_open_event(12)) == doctest::Approx(1.0));
}

TEST_CASE("parallel enumeration matches the serial reference exactly") {
  const auto r = build_region(Lattice::square(), {0, 2, 0, 1});
  for (const char* name : {"free", "wired", "dobrushin", "mix", "star-mix"}) {
    const auto bc = BoundaryCondition::named(name, r);
    const auto a = enumerate(r.graph, bc, {0.4, 2.5});
    const auto b = enumerate_serial(r.graph, bc, {0.4, 2.5});
    CHECK(a.clusters() == b.clusters());
    CHECK(a.log_z() == b.log_z());
  }
}

TEST_CASE("partition function does not depend on edge order") {
  const auto r = build_region(Lattice::square(), {0, 1, 0, 1});
  const auto base = enumerate(r, BoundaryCondition::named("mix", r), {0.35, 3});
  StreamRng rng(21, 0);
  for (int t = 0; t < 5; ++t) {
    Graph g = r.graph;
    std::vector<std::size_t> perm(g.edges.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<Edge> edges(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) edges[i] = g.edges[perm[i]];
    g.edges = edges;
    g.finalize();
    const auto bc = BoundaryCondition::from_blocks(g, BoundaryCondition::named("mix", r).blocks());
    CHECK(std::abs(enumerate(g, bc, {0.35, 3}).log_z() - base.log_z()) < 1e-12);
  }
}

TEST_CASE("oversized graphs are refused") {
  const auto r = build_region(Lattice::square(), {0, 3, 0, 2});
  REQUIRE(r.num_edges() > kMaxExactEdges);
  CHECK_THROWS_AS(enumerate(r, BoundaryCondition::free(r.graph), {0.5, 2}), OracleError);
}

TEST_CASE("frozen crossing probability of the unit square") {
  const auto r = build_region(Lattice::square(), {0, 1, 0, 1});
  const auto ev = CompiledEvent(horizontal_crossing(r.rect), r).predicate();
  const double h = exact_prob(enumerate(r, BoundaryCondition::free(r.graph), {0.5, 2}), ev);
  CHECK(h == doctest::Approx(23.0 / 41).epsilon(1e-12));
}

TEST_CASE("FKG examples") {
  const auto g = four_cycle();
  const auto d = enumerate(g, BoundaryCondition::free(g), {0.5, 2});
  const auto same = verify_fkg(d, edge_open_event(0), edge_open_event(0));
  CHECK(same.pass);
  const auto strict = verify_fkg(d, edge_open_event(0), edge_open_event(2));
  CHECK(strict.pass);
  CHECK(strict.margin > 1e-6);
  const auto indep = verify_fkg(d.with_params({0.5, 1}), edge_open_event(0), edge_open_event(2));
  CHECK(std::abs(indep.margin) < 1e-14);
  CHECK_THROWS_AS(verify_fkg(d, complement_event(edge_open_event(0)), edge_open_event(1)), OracleError);
  const auto flipped = verify_fkg(d, edge_open_event(0), edge_open_event(2), OracleFaults{true});
  CHECK_FALSE(flipped.pass);
}

TEST_CASE("CBC examples") {
  const auto g = single_edge();
  const auto v = verify_cbc(g, {0.5, 2}, BoundaryCondition::free(g), BoundaryCondition::wired(g), edge_open_event(0));
  CHECK(v.pass);
  CHECK(v.lhs == doctest::Approx(1.0 / 3));
  CHECK(v.rhs == doctest::Approx(0.5));
  const auto eq = verify_cbc(g, {0.5, 1}, BoundaryCondition::free(g), BoundaryCondition::wired(g), edge_open_event(0));
  CHECK(std::abs(eq.margin) < 1e-14);
  CHECK_THROWS_AS(
      verify_cbc(g, {0.5, 2}, BoundaryCondition::wired(g), BoundaryCondition::free(g), edge_open_event(0)),
      OracleError);
}

TEST_CASE("SMP examples") {
  const auto host = build_region(Lattice::square(), {0, 2, 0, 1});
  const auto strip = build_region(Lattice::square(), {0, 2, 0, 0});
  const ModelParams mp{0.4, 3};
  CHECK(verify_smp(host, host, BoundaryCondition::free(host.graph), mp, Configuration(host.num_edges())).pass);
  const Configuration open(host.num_edges(), true);
  CHECK(induced_bc(host, strip, open, BoundaryCondition::wired(host.graph)) == BoundaryCondition::wired(strip.graph));
  CHECK(verify_smp(host, strip, BoundaryCondition::wired(host.graph), mp, open).pass);
  StreamRng rng(17, 0);
  for (int t = 0; t < 20; ++t) {
    Configuration outer(host.num_edges());
    for (EdgeId e = 0; e < host.num_edges(); ++e) outer.set(e, rng.uniform() < 0.5);
    for (const char* name : {"free", "wired", "dobrushin", "mix", "star-mix"}) {
      const auto v = verify_smp(host, strip, BoundaryCondition::named(name, host), mp, outer);
      CHECK(v.pass);
      CHECK(v.lhs < 1e-12);
    }
  }
}

TEST_CASE("duality examples") {
  const auto g = single_edge();
  // A horizontal unit edge; its dual is the vertical unit edge through the midpoint.
  const auto dm = dual_of(g);
  const ModelParams mp{0.3, 2.5};
  const auto v = verify_duality(g, dm, mp, edge_open_event(0));
  CHECK(v.pass);
  const double ps = dual_params(mp).p;
  CHECK(1 - mp.p == doctest::Approx(ps / (ps + mp.q * (1 - ps))));

  const auto c4 = four_cycle();
  const auto v4 = verify_duality(c4, dual_of(c4), {2.0 / 3, 2}, edge_open_event(1));
  CHECK(v4.pass);
  CHECK(v4.margin > 0);

  const auto r = build_region(Lattice::square(), {0, 1, 0, 1});
  const auto ev = CompiledEvent(horizontal_crossing(r.rect), r).predicate();
  CHECK(verify_duality(r.graph, dual_of(r), {0.5, 1}, ev).pass);
  CHECK(verify_duality(r.graph, dual_of(r), {0.7, 4}, ev, DualPairing::FreePrimal).pass);
}

TEST_CASE("finite-energy ratio") {
  const auto g = single_edge();
  const auto v = verify_fi(g, {0.5, 2}, {0}, {1}, edge_open_event(0));
  CHECK(v.pass);
  CHECK(v.lhs == doctest::Approx(1.5));
  CHECK(verify_fi(g, {0.5, 1}, {0}, {1}, edge_open_event(0)).lhs == doctest::Approx(1.0));
  CHECK(verify_fi(g, {0.5, 7}, {0}, {1}, always_event()).lhs == doctest::Approx(1.0));
}

TEST_CASE("domain monotonicity") {
  const auto big = build_region(Lattice::square(), {0, 2, 0, 1});
  const auto small = build_region(Lattice::square(), {1, 1, 0, 1});
  const auto ev = CompiledEvent(vertical_crossing(small.rect), small).predicate();
  for (const char* name : {"free", "wired", "mix"}) {
    const auto xi = BoundaryCondition::named(name, big);
    CHECK(domain_precedes(big, xi, small, BoundaryCondition::wired(small.graph), DomainOrder::Wired));
    const auto v = verify_mon(big, xi, small, BoundaryCondition::wired(small.graph), {0.5, 3}, ev, DomainOrder::Wired);
    CHECK(v.pass);
    CHECK(domain_precedes(small, BoundaryCondition::free(small.graph), big, xi, DomainOrder::Free));
    CHECK(verify_mon(small, BoundaryCondition::free(small.graph), big, xi, {0.5, 3}, ev, DomainOrder::Free).pass);
  }
  CHECK_FALSE(domain_precedes(big, BoundaryCondition::free(big.graph), small, BoundaryCondition::free(small.graph),
                              DomainOrder::Wired));
}
