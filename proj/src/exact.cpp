#include "rcquad/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <omp.h>

#include "rcquad/rng.hpp"

namespace rcquad {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// n * log x with the convention 0 * log 0 = 0.
double scaled_log(double n, double log_x) { return n == 0 ? 0.0 : n * log_x; }

void check_size(const Graph& g) {
  if (g.num_edges() > kMaxExactEdges) {
    throw OracleError("exact enumeration is limited to " + std::to_string(kMaxExactEdges) + " edges, got " +
                      std::to_string(g.num_edges()));
  }
  if (g.num_vertices() > 255) throw OracleError("exact enumeration needs fewer than 256 vertices");
}

void merge_blocks(RollbackUnionFind& uf, const BoundaryCondition& bc) {
  for (const auto& b : bc.blocks()) {
    for (std::size_t i = 1; i < b.size(); ++i) uf.unite(b[0], b[i]);
  }
}

void dfs(RollbackUnionFind& uf, const Graph& g, std::size_t e, std::uint64_t index, std::uint8_t* out) {
  if (e == g.num_edges()) {
    out[index] = static_cast<std::uint8_t>(uf.components());
    return;
  }
  dfs(uf, g, e + 1, index, out);
  uf.unite(g.edges[e].u, g.edges[e].v);
  dfs(uf, g, e + 1, index | (std::uint64_t{1} << e), out);
  uf.rollback();
}

}  // namespace

ExactDistribution::ExactDistribution(Graph graph, BoundaryCondition bc, ModelParams params,
                                     std::vector<std::uint8_t> clusters)
    : graph_(std::move(graph)), bc_(std::move(bc)), params_(params), clusters_(std::move(clusters)) {
  params_.validate();
  log_p_ = params_.p == 0.0 ? kNegInf : std::log(params_.p);
  log_1mp_ = params_.p == 1.0 ? kNegInf : std::log1p(-params_.p);
  log_q_ = std::log(params_.q);
  double mx = kNegInf;
  for (std::uint64_t i = 0; i < clusters_.size(); ++i) mx = std::max(mx, log_weight(i));
  double s = 0;
  for (std::uint64_t i = 0; i < clusters_.size(); ++i) {
    const double w = log_weight(i);
    if (w != kNegInf) s += std::exp(w - mx);
  }
  log_z_ = mx + std::log(s);
}

double ExactDistribution::log_weight(std::uint64_t config) const {
  const auto open = static_cast<double>(std::popcount(config));
  const auto closed = static_cast<double>(graph_.num_edges()) - open;
  return scaled_log(open, log_p_) + scaled_log(closed, log_1mp_) + clusters_[config] * log_q_;
}

ExactDistribution ExactDistribution::with_params(const ModelParams& params) const {
  return ExactDistribution(graph_, bc_, params, clusters_);
}

ExactDistribution enumerate(const Graph& g, const BoundaryCondition& bc, const ModelParams& params) {
  check_size(g);
  bc.validate(g);
  params.validate();
  const std::size_t ne = g.num_edges();
  std::vector<std::uint8_t> clusters(std::size_t{1} << ne);
  // The first `split` edges are fixed per task; the rest are walked depth first.
  const std::size_t split = std::min<std::size_t>(ne, 6);
  const auto tasks = static_cast<std::int64_t>(1) << split;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < tasks; ++t) {
    RollbackUnionFind uf(g.num_vertices());
    merge_blocks(uf, bc);
    for (std::size_t e = 0; e < split; ++e) {
      if ((t >> e) & 1) uf.unite(g.edges[e].u, g.edges[e].v);
    }
    dfs(uf, g, split, static_cast<std::uint64_t>(t), clusters.data());
  }
  return ExactDistribution(g, bc, params, std::move(clusters));
}

ExactDistribution enumerate_serial(const Graph& g, const BoundaryCondition& bc, const ModelParams& params) {
  check_size(g);
  bc.validate(g);
  params.validate();
  const std::size_t ne = g.num_edges();
  std::vector<std::uint8_t> clusters(std::size_t{1} << ne);
  Configuration cfg(ne);
  for (std::uint64_t i = 0; i < clusters.size(); ++i) {
    if (ne > 0) cfg.assign_bits(i);
    clusters[i] = static_cast<std::uint8_t>(ClusterStructure(g, bc, cfg).count());
  }
  return ExactDistribution(g, bc, params, std::move(clusters));
}

EventPredicate always_event() {
  return {"always", [](const Configuration&) { return true; }, Monotonicity::Increasing};
}

EventPredicate edge_open_event(EdgeId e) {
  return {"open(" + std::to_string(e) + ")", [e](const Configuration& c) { return c[e]; }, Monotonicity::Increasing};
}

EventPredicate all_open_event(std::size_t num_edges) {
  return {"all-open", [num_edges](const Configuration& c) { return c.count_open() == num_edges; },
          Monotonicity::Increasing};
}

EventPredicate complement_event(const EventPredicate& ev) {
  auto mono = ev.monotonicity == Monotonicity::Increasing   ? Monotonicity::Decreasing
              : ev.monotonicity == Monotonicity::Decreasing ? Monotonicity::Increasing
                                                            : Monotonicity::None;
  auto test = ev.test;
  return {"not(" + ev.name + ")", [test](const Configuration& c) { return !test(c); }, mono};
}

EventPredicate intersect_events(const EventPredicate& a, const EventPredicate& b) {
  auto mono = a.monotonicity == b.monotonicity ? a.monotonicity : Monotonicity::None;
  auto ta = a.test, tb = b.test;
  return {a.name + "&" + b.name, [ta, tb](const Configuration& c) { return ta(c) && tb(c); }, mono};
}

EventPredicate pullback_event(const EventPredicate& ev, std::vector<EdgeId> sub_to_host) {
  auto test = ev.test;
  auto map = std::make_shared<const std::vector<EdgeId>>(std::move(sub_to_host));
  return {ev.name,
          [test, map](const Configuration& host) {
            Configuration sub(map->size());
            for (EdgeId e = 0; e < map->size(); ++e) sub.set(e, host[(*map)[e]]);
            return test(sub);
          },
          ev.monotonicity};
}

std::vector<std::uint8_t> tabulate(const EventPredicate& ev, std::size_t num_edges) {
  if (num_edges > kMaxExactEdges) throw OracleError("event table too large");
  std::vector<std::uint8_t> table(std::size_t{1} << num_edges);
  Configuration cfg(num_edges);
  for (std::uint64_t i = 0; i < table.size(); ++i) {
    if (num_edges > 0) cfg.assign_bits(i);
    table[i] = ev(cfg) ? 1 : 0;
  }
  return table;
}

double exact_prob(const ExactDistribution& dist, const std::vector<std::uint8_t>& table) {
  if (table.size() != dist.num_configs()) throw OracleError("event table does not match the distribution");
  double s = 0;
  for (std::uint64_t i = 0; i < table.size(); ++i) {
    if (table[i]) s += dist.prob(i);
  }
  return s;
}

double exact_prob(const ExactDistribution& dist, const EventPredicate& ev) {
  return exact_prob(dist, tabulate(ev, dist.num_edges()));
}

std::size_t spot_check_monotonicity(const EventPredicate& ev, std::size_t num_edges, std::size_t pairs,
                                    std::uint64_t seed) {
  if (ev.monotonicity == Monotonicity::None || num_edges == 0) return 0;
  StreamRng rng(seed, 0);
  std::size_t violations = 0;
  Configuration lo(num_edges), hi(num_edges);
  for (std::size_t k = 0; k < pairs; ++k) {
    const double density = rng.uniform();
    for (EdgeId e = 0; e < num_edges; ++e) {
      const bool open = rng.uniform() < density;
      lo.set(e, open);
      hi.set(e, open || rng.uniform() < 0.3);
    }
    const bool a = ev(lo), b = ev(hi);
    if (ev.monotonicity == Monotonicity::Increasing ? (a && !b) : (b && !a)) ++violations;
  }
  return violations;
}

Verification verify_fkg(const ExactDistribution& dist, const EventPredicate& a, const EventPredicate& b,
                        const OracleFaults& faults) {
  if (a.monotonicity != Monotonicity::Increasing || b.monotonicity != Monotonicity::Increasing) {
    throw OracleError("FKG check requires increasing events");
  }
  const auto ta = tabulate(a, dist.num_edges());
  const auto tb = tabulate(b, dist.num_edges());
  std::vector<std::uint8_t> tab(ta.size());
  for (std::size_t i = 0; i < ta.size(); ++i) tab[i] = ta[i] & tb[i];
  Verification v{"FKG"};
  v.lhs = exact_prob(dist, tab);
  v.rhs = exact_prob(dist, ta) * exact_prob(dist, tb);
  v.margin = v.lhs - v.rhs;
  if (faults.flip_fkg) v.margin = -v.margin - 1.0;
  v.pass = v.margin >= -kExactTol;
  return v;
}

Verification verify_cbc(const ExactDistribution& xi_dist, const ExactDistribution& zeta_dist,
                        const EventPredicate& ev) {
  if (ev.monotonicity != Monotonicity::Increasing) throw OracleError("CBC check requires an increasing event");
  if (!bc_dominates(xi_dist.bc(), zeta_dist.bc())) throw OracleError("second boundary condition must dominate the first");
  if (xi_dist.num_edges() != zeta_dist.num_edges()) throw OracleError("distributions live on different graphs");
  const auto table = tabulate(ev, xi_dist.num_edges());
  Verification v{"CBC"};
  v.lhs = exact_prob(xi_dist, table);
  v.rhs = exact_prob(zeta_dist, table);
  v.margin = v.rhs - v.lhs;
  v.pass = v.margin >= -kExactTol;
  return v;
}

Verification verify_cbc(const Graph& g, const ModelParams& params, const BoundaryCondition& xi,
                        const BoundaryCondition& zeta, const EventPredicate& ev) {
  if (!bc_dominates(xi, zeta)) throw OracleError("second boundary condition must dominate the first");
  return verify_cbc(enumerate(g, xi, params), enumerate(g, zeta, params), ev);
}

Verification verify_smp(const ExactDistribution& host, const Region& region, const Region& subregion,
                        const Configuration& outer) {
  if (host.num_edges() > 20) throw OracleError("spatial Markov check is limited to 20 edges");
  const auto sub_to_host = embed_edges(subregion.graph, region.graph);
  const auto induced = induced_bc(region, subregion, outer, host.bc());
  const auto sub = enumerate(subregion.graph, induced, host.params());

  std::uint64_t base = 0;
  std::uint64_t sub_mask = 0;
  for (auto e : sub_to_host) sub_mask |= std::uint64_t{1} << e;
  for (EdgeId e = 0; e < region.graph.num_edges(); ++e) {
    if (outer[e]) base |= std::uint64_t{1} << e;
  }
  base &= ~sub_mask;

  // Conditional law of the subregion edges under the host measure.
  const std::size_t nsub = sub_to_host.size();
  std::vector<double> cond(std::size_t{1} << nsub);
  double mx = kNegInf;
  for (std::uint64_t s = 0; s < cond.size(); ++s) {
    std::uint64_t idx = base;
    for (std::size_t e = 0; e < nsub; ++e) {
      if ((s >> e) & 1) idx |= std::uint64_t{1} << sub_to_host[e];
    }
    cond[s] = host.log_weight(idx);
    mx = std::max(mx, cond[s]);
  }
  if (mx == kNegInf) throw OracleError("conditioning event has probability zero");
  double z = 0;
  for (auto w : cond) z += std::exp(w - mx);
  double tv = 0;
  for (std::uint64_t s = 0; s < cond.size(); ++s) tv += std::abs(std::exp(cond[s] - mx) / z - sub.prob(s));
  Verification v{"SMP"};
  v.lhs = 0.5 * tv;
  v.rhs = 0;
  v.margin = kExactTol - v.lhs;
  v.pass = v.lhs < kExactTol;
  return v;
}

Verification verify_smp(const Region& region, const Region& subregion, const BoundaryCondition& bc,
                        const ModelParams& params, const Configuration& outer) {
  if (region.graph.num_edges() > 20) throw OracleError("spatial Markov check is limited to 20 edges");
  return verify_smp(enumerate(region.graph, bc, params), region, subregion, outer);
}

Verification verify_duality(const Graph& g, const DualMap& dm, const ModelParams& params, const EventPredicate& ev,
                            DualPairing pairing) {
  if (g.num_edges() > 20) throw OracleError("duality check is limited to 20 edges");
  if (dm.dual.num_edges() != g.num_edges()) throw OracleError("dual map does not match the graph");
  const bool wired_primal = pairing == DualPairing::WiredPrimal;
  const auto primal = enumerate(g, wired_primal ? BoundaryCondition::wired(g) : BoundaryCondition::free(g), params);
  const auto dual = enumerate(dm.dual, wired_primal ? BoundaryCondition::free(dm.dual) : BoundaryCondition::wired(dm.dual),
                              dual_params(params));
  const std::size_t ne = g.num_edges();
  const auto table = tabulate(ev, ne);
  const std::uint64_t full = ne == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << ne) - 1;
  double tv = 0, pe = 0, de = 0;
  for (std::uint64_t i = 0; i < primal.num_configs(); ++i) {
    // Dual edge to_dual[e] is open iff primal edge e is closed.
    std::uint64_t j = 0;
    const std::uint64_t closed = ~i & full;
    for (EdgeId e = 0; e < ne; ++e) {
      if ((closed >> e) & 1) j |= std::uint64_t{1} << dm.to_dual[e];
    }
    const double a = primal.prob(i), b = dual.prob(j);
    tv += std::abs(a - b);
    if (table[i]) {
      pe += a;
      de += b;
    }
  }
  Verification v{wired_primal ? "duality(wired)" : "duality(free)"};
  v.lhs = pe;
  v.rhs = de;
  v.margin = kDualTol - std::max(0.5 * tv, std::abs(pe - de));
  v.pass = v.margin > 0;
  return v;
}

Verification verify_fi(const ExactDistribution& mix, const ExactDistribution& star_mix, const EventPredicate& ev) {
  const auto table = tabulate(ev, mix.num_edges());
  const double pm = exact_prob(mix, table);
  const double ps = exact_prob(star_mix, table);
  if (pm <= 0 || ps <= 0) throw OracleError("finite-energy ratio undefined for a null event");
  const double q = mix.params().q;
  Verification v{"FI"};
  v.lhs = std::max(ps / pm, pm / ps);
  v.rhs = q;
  v.margin = q - v.lhs;
  v.pass = v.margin >= -kExactTol;
  return v;
}

Verification verify_fi(const Graph& g, const ModelParams& params, const BoundaryCondition::Block& a,
                       const BoundaryCondition::Block& b, const EventPredicate& ev) {
  return verify_fi(enumerate(g, BoundaryCondition::mix(g, a, b), params),
                   enumerate(g, BoundaryCondition::star_mix(g, a, b), params), ev);
}

bool domain_precedes(const Region& g, const BoundaryCondition& xi, const Region& g2, const BoundaryCondition& xi2,
                     DomainOrder order) {
  if (order == DomainOrder::Wired) {
    if (!g.rect.contains(g2.rect)) return false;
    const Configuration open(g.graph.num_edges(), true);
    return bc_dominates(induced_bc(g, g2, open, xi), xi2);
  }
  if (!g2.rect.contains(g.rect)) return false;
  const Configuration closed(g2.graph.num_edges(), false);
  return bc_dominates(xi, induced_bc(g2, g, closed, xi2));
}

Verification verify_mon(const Region& g, const BoundaryCondition& xi, const Region& g2, const BoundaryCondition& xi2,
                        const ModelParams& params, const EventPredicate& ev, DomainOrder order) {
  if (ev.monotonicity != Monotonicity::Increasing) throw OracleError("MON check requires an increasing event");
  if (!domain_precedes(g, xi, g2, xi2, order)) throw OracleError("domains are not ordered");
  const bool second_smaller = order == DomainOrder::Wired;
  const Region& small = second_smaller ? g2 : g;
  const Region& large = second_smaller ? g : g2;
  const auto lifted = pullback_event(ev, embed_edges(small.graph, large.graph));
  const double p_g = exact_prob(enumerate(g.graph, xi, params), second_smaller ? lifted : ev);
  const double p_g2 = exact_prob(enumerate(g2.graph, xi2, params), second_smaller ? ev : lifted);
  Verification v{order == DomainOrder::Wired ? "MON1" : "MON0"};
  v.lhs = p_g;
  v.rhs = p_g2;
  v.margin = p_g2 - p_g;
  v.pass = v.margin >= -kExactTol;
  return v;
}

}  // namespace rcquad
