#include "rcquad/measure.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace rcquad {

void ModelParams::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("edge weight p must lie in [0,1]");
  if (!(q > 0.0)) throw ParameterError("cluster weight q must be positive");
}

Configuration::Configuration(std::size_t n, bool open) : n_(n), words_((n + 63) / 64, 0) {
  if (open) fill(true);
}

Configuration Configuration::from_bits(std::uint64_t bits, std::size_t n) {
  Configuration c(n);
  if (n > 0) c.assign_bits(bits);
  return c;
}

void Configuration::fill(bool open) {
  std::fill(words_.begin(), words_.end(), open ? ~std::uint64_t{0} : 0);
  if (open && n_ % 64 != 0) words_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
}

std::size_t Configuration::count_open() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

Configuration Configuration::complement() const {
  Configuration c(n_);
  for (std::size_t i = 0; i < words_.size(); ++i) c.words_[i] = ~words_[i];
  if (n_ % 64 != 0) c.words_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
  return c;
}

bool Configuration::below(const Configuration& other) const {
  if (other.n_ != n_) return false;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & ~other.words_[i]) return false;
  }
  return true;
}

BoundaryCondition::BoundaryCondition(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  for (auto& b : blocks_) std::sort(b.begin(), b.end());
  blocks_.erase(std::remove_if(blocks_.begin(), blocks_.end(), [](const Block& b) { return b.empty(); }),
                blocks_.end());
  std::sort(blocks_.begin(), blocks_.end(), [](const Block& x, const Block& y) { return x.front() < y.front(); });
}

BoundaryCondition BoundaryCondition::free(const Graph& g) {
  std::vector<Block> blocks;
  blocks.reserve(g.boundary.size());
  for (auto v : g.boundary) blocks.push_back({v});
  return BoundaryCondition(std::move(blocks));
}

BoundaryCondition BoundaryCondition::wired(const Graph& g) {
  if (g.boundary.empty()) return BoundaryCondition(std::vector<Block>{});
  return BoundaryCondition(std::vector<Block>{g.boundary});
}

BoundaryCondition BoundaryCondition::from_blocks(const Graph& g, std::vector<Block> blocks) {
  std::vector<std::uint8_t> seen(g.num_vertices(), 0);
  for (const auto& b : blocks) {
    for (auto v : b) {
      if (v >= g.num_vertices() || !g.is_boundary(v)) throw BoundaryError("block vertex is not a boundary vertex");
      if (seen[v]) throw BoundaryError("boundary blocks overlap");
      seen[v] = 1;
    }
  }
  for (auto v : g.boundary) {
    if (!seen[v]) blocks.push_back({v});
  }
  return BoundaryCondition(std::move(blocks));
}

BoundaryCondition BoundaryCondition::mix(const Graph& g, const Block& a, const Block& b) {
  return from_blocks(g, {a, b});
}

BoundaryCondition BoundaryCondition::star_mix(const Graph& g, const Block& a, const Block& b) {
  Block u = a;
  u.insert(u.end(), b.begin(), b.end());
  return from_blocks(g, {u});
}

BoundaryCondition BoundaryCondition::dobrushin(const Region& r) {
  return from_blocks(r.graph, {boundary_arc(r, Side::Bottom)});
}

BoundaryCondition BoundaryCondition::named(const std::string& name, const Region& r) {
  if (name == "free") return free(r.graph);
  if (name == "wired") return wired(r.graph);
  if (name == "dobrushin") return dobrushin(r);
  if (name == "mix") return mix(r.graph, boundary_arc(r, Side::Left), boundary_arc(r, Side::Right));
  if (name == "star-mix") return star_mix(r.graph, boundary_arc(r, Side::Left), boundary_arc(r, Side::Right));
  throw BoundaryError("unknown boundary condition '" + name + "'");
}

std::vector<VertexId> BoundaryCondition::support() const {
  std::vector<VertexId> s;
  for (const auto& b : blocks_) s.insert(s.end(), b.begin(), b.end());
  std::sort(s.begin(), s.end());
  return s;
}

void BoundaryCondition::validate(const Graph& g) const {
  auto s = support();
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw BoundaryError("boundary blocks overlap");
  if (s != g.boundary) throw BoundaryError("boundary condition is not a partition of the graph boundary");
}

BcLookup make_lookup(const Graph& g, const BoundaryCondition& bc) {
  BcLookup out;
  out.block_of.assign(g.num_vertices(), -1);
  for (const auto& b : bc.blocks()) {
    if (b.size() < 2) continue;
    const auto id = static_cast<std::int32_t>(out.blocks.size());
    for (auto v : b) out.block_of[v] = id;
    out.blocks.push_back(b);
  }
  return out;
}

void ConnectivitySearch::ensure(std::size_t nv, std::size_t nb) {
  for (int s = 0; s < 2; ++s) {
    if (mark_[s].size() < nv) mark_[s].assign(nv, 0);
    if (block_mark_[s].size() < nb) block_mark_[s].assign(nb, 0);
  }
  if (++stamp_ == 0) {
    for (int s = 0; s < 2; ++s) {
      std::fill(mark_[s].begin(), mark_[s].end(), 0);
      std::fill(block_mark_[s].begin(), block_mark_[s].end(), 0);
    }
    stamp_ = 1;
  }
}

bool ConnectivitySearch::connected(const Graph& g, const BcLookup& bc, const Configuration& cfg, VertexId u,
                                   VertexId v, EdgeId skip) {
  if (u == v) return true;
  if (bc.block_of[u] >= 0 && bc.block_of[u] == bc.block_of[v]) return true;
  ensure(g.num_vertices(), bc.blocks.size());
  const auto st = stamp_;
  std::size_t head[2] = {0, 0};
  queue_[0].clear();
  queue_[1].clear();

  // Returns true when the vertex was already reached from the other side.
  auto visit = [&](int side, VertexId w) -> bool {
    if (mark_[side][w] == st) return false;
    if (mark_[1 - side][w] == st) return true;
    mark_[side][w] = st;
    queue_[side].push_back(w);
    const auto b = bc.block_of[w];
    if (b >= 0 && block_mark_[side][b] != st) {
      block_mark_[side][b] = st;
      for (auto x : bc.blocks[b]) {
        if (mark_[side][x] == st) continue;
        if (mark_[1 - side][x] == st) return true;
        mark_[side][x] = st;
        queue_[side].push_back(x);
      }
    }
    return false;
  };

  if (visit(0, u) || visit(1, v)) return true;
  int side = 0;
  while (true) {
    if (head[side] == queue_[side].size()) return false;
    const VertexId w = queue_[side][head[side]++];
    for (auto it = g.adj_begin(w); it != g.adj_end(w); ++it) {
      if (it->edge == skip || !cfg[it->edge]) continue;
      if (visit(side, it->neighbor)) return true;
    }
    side = 1 - side;
  }
}

ClusterStructure::ClusterStructure(const Graph& g, const BoundaryCondition& bc, const Configuration& cfg)
    : uf_(g.num_vertices()) {
  for (const auto& b : bc.blocks()) {
    for (std::size_t i = 1; i < b.size(); ++i) uf_.unite(b[0], b[i]);
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (cfg[e]) uf_.unite(g.edges[e].u, g.edges[e].v);
  }
  count_ = static_cast<int>(uf_.components());
}

int cluster_count(const Graph& g, const BoundaryCondition& bc, const Configuration& cfg) {
  bc.validate(g);
  if (cfg.size() != g.num_edges()) throw BoundaryError("configuration does not match the graph");
  return ClusterStructure(g, bc, cfg).count();
}

double log_weight(const ModelParams& params, const Graph& g, const BoundaryCondition& bc, const Configuration& cfg) {
  params.validate();
  if (params.degenerate()) throw ParameterError("log weight is undefined at p in {0,1}");
  const double open = static_cast<double>(cfg.count_open());
  return open * std::log(params.p / (1.0 - params.p)) + cluster_count(g, bc, cfg) * std::log(params.q);
}

double heat_bath_prob(const ModelParams& params, const Graph& g, const BoundaryCondition& bc, const Configuration& cfg,
                      EdgeId edge) {
  params.validate();
  if (params.q == 1.0) return params.p;
  const auto lookup = make_lookup(g, bc);
  ConnectivitySearch search;
  const bool conn = search.connected(g, lookup, cfg, g.edges[edge].u, g.edges[edge].v, edge);
  return heat_bath_value(params, conn);
}

BoundaryCondition induced_bc(const Graph& host, const Graph& sub, const std::vector<EdgeId>& sub_to_host,
                             const Configuration& outer, const BoundaryCondition& outer_bc) {
  if (outer.size() != host.num_edges()) throw BoundaryError("outer configuration does not match the host edge set");
  if (sub_to_host.size() != sub.num_edges()) throw BoundaryError("edge embedding does not match the subgraph");
  std::vector<std::uint8_t> inside(host.num_edges(), 0);
  for (auto e : sub_to_host) inside[e] = 1;
  UnionFind uf(host.num_vertices());
  for (const auto& b : outer_bc.blocks()) {
    for (std::size_t i = 1; i < b.size(); ++i) uf.unite(b[0], b[i]);
  }
  for (EdgeId e = 0; e < host.num_edges(); ++e) {
    if (!inside[e] && outer[e]) uf.unite(host.edges[e].u, host.edges[e].v);
  }
  std::map<std::uint32_t, BoundaryCondition::Block> by_root;
  for (auto v : sub.boundary) {
    auto hv = host.find(sub.vertices[v]);
    if (!hv) throw BoundaryError("subgraph boundary vertex missing from host");
    by_root[uf.find(*hv)].push_back(v);
  }
  std::vector<BoundaryCondition::Block> blocks;
  for (auto& [root, b] : by_root) blocks.push_back(std::move(b));
  return BoundaryCondition::from_blocks(sub, std::move(blocks));
}

BoundaryCondition induced_bc(const Region& region, const Region& subregion, const Configuration& outer,
                             const BoundaryCondition& outer_bc) {
  if (!region.rect.contains(subregion.rect)) throw BoundaryError("subregion is not contained in the region");
  return induced_bc(region.graph, subregion.graph, embed_edges(subregion.graph, region.graph), outer, outer_bc);
}

bool bc_dominates(const BoundaryCondition& xi, const BoundaryCondition& zeta) {
  if (xi.support() != zeta.support()) throw BoundaryError("boundary conditions live on different boundaries");
  std::map<VertexId, std::size_t> block_of;
  for (std::size_t i = 0; i < zeta.blocks().size(); ++i) {
    for (auto v : zeta.blocks()[i]) block_of[v] = i;
  }
  for (const auto& b : xi.blocks()) {
    for (auto v : b) {
      if (block_of[v] != block_of[b.front()]) return false;
    }
  }
  return true;
}

ModelParams dual_params(const ModelParams& params) {
  params.validate();
  const double p = params.p, q = params.q;
  if (p == 0.0) return {1.0, q};
  if (p == 1.0) return {0.0, q};
  return {q * (1.0 - p) / (p + q * (1.0 - p)), q};
}

Configuration dual_config(const DualMap& dm, const Configuration& cfg) {
  Configuration out(cfg.size());
  for (EdgeId e = 0; e < cfg.size(); ++e) out.set(dm.to_dual[e], !cfg[e]);
  return out;
}

}  // namespace rcquad
