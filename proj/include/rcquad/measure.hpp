#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcquad/lattice.hpp"
#include "rcquad/union_find.hpp"

namespace rcquad {

class BoundaryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelParams {
  double p = 0.5;  // edge weight
  double q = 1.0;  // cluster weight

  void validate() const;
  bool degenerate() const { return p == 0.0 || p == 1.0; }
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Open/closed state of every edge, bit-packed by edge id.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::size_t n, bool open = false);

  static Configuration from_bits(std::uint64_t bits, std::size_t n);

  std::size_t size() const { return n_; }
  bool operator[](EdgeId e) const { return (words_[e >> 6] >> (e & 63)) & 1u; }
  void set(EdgeId e, bool open) {
    const auto mask = std::uint64_t{1} << (e & 63);
    if (open) words_[e >> 6] |= mask;
    else words_[e >> 6] &= ~mask;
  }
  void fill(bool open);
  // Overwrites the first word; only meaningful when size() <= 64.
  void assign_bits(std::uint64_t bits) { words_[0] = bits & low_mask(); }
  std::uint64_t low_bits() const { return words_.empty() ? 0 : words_[0]; }

  std::size_t count_open() const;
  Configuration complement() const;
  // Pointwise order: every edge open here is open in `other`.
  bool below(const Configuration& other) const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::uint64_t low_mask() const { return n_ >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_) - 1; }
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

// Partition of a graph's boundary, kept canonical: blocks sorted internally and
// ordered by their smallest vertex id, singletons included.
class BoundaryCondition {
 public:
  using Block = std::vector<VertexId>;

  BoundaryCondition() = default;

  static BoundaryCondition free(const Graph& g);
  static BoundaryCondition wired(const Graph& g);
  // Any vertex of the boundary not mentioned becomes a singleton.
  static BoundaryCondition from_blocks(const Graph& g, std::vector<Block> blocks);
  static BoundaryCondition mix(const Graph& g, const Block& a, const Block& b);
  static BoundaryCondition star_mix(const Graph& g, const Block& a, const Block& b);
  // Boundary vertices below the rectangle form one block.
  static BoundaryCondition dobrushin(const Region& r);
  // "free", "wired", "dobrushin", "mix", "star-mix"; mix variants use the left
  // and right boundary arcs as the two blocks.
  static BoundaryCondition named(const std::string& name, const Region& r);

  const std::vector<Block>& blocks() const { return blocks_; }
  std::vector<VertexId> support() const;
  std::size_t num_blocks() const { return blocks_.size(); }

  // Throws BoundaryError unless the blocks partition exactly g.boundary.
  void validate(const Graph& g) const;

  friend bool operator==(const BoundaryCondition&, const BoundaryCondition&) = default;

 private:
  explicit BoundaryCondition(std::vector<Block> blocks);
  std::vector<Block> blocks_;
};

// Per-vertex lookup of the non-singleton blocks of a boundary condition.
struct BcLookup {
  std::vector<std::int32_t> block_of;  // -1 outside non-singleton blocks
  std::vector<std::vector<VertexId>> blocks;
};

BcLookup make_lookup(const Graph& g, const BoundaryCondition& bc);

// Bidirectional breadth-first search for "u and v are joined by open edges once
// wired vertices are identified". Buffers are reused across queries.
class ConnectivitySearch {
 public:
  bool connected(const Graph& g, const BcLookup& bc, const Configuration& cfg, VertexId u, VertexId v,
                 EdgeId skip);

 private:
  void ensure(std::size_t nv, std::size_t nb);
  std::vector<std::uint32_t> mark_[2];
  std::vector<std::uint32_t> block_mark_[2];
  std::vector<VertexId> queue_[2];
  std::uint32_t stamp_ = 0;
};

// Clusters of a configuration with boundary blocks pre-merged.
class ClusterStructure {
 public:
  ClusterStructure(const Graph& g, const BoundaryCondition& bc, const Configuration& cfg);
  int count() const { return count_; }
  std::uint32_t root(VertexId v) { return uf_.find(v); }

 private:
  UnionFind uf_;
  int count_ = 0;
};

int cluster_count(const Graph& g, const BoundaryCondition& bc, const Configuration& cfg);

// |omega| log(p/(1-p)) + k log q, unnormalised; p must lie strictly inside (0,1).
double log_weight(const ModelParams& params, const Graph& g, const BoundaryCondition& bc, const Configuration& cfg);

// Probability that `edge` is open given the rest of the configuration.
double heat_bath_prob(const ModelParams& params, const Graph& g, const BoundaryCondition& bc, const Configuration& cfg,
                      EdgeId edge);

inline double heat_bath_value(const ModelParams& params, bool endpoints_connected) {
  if (endpoints_connected) return params.p;
  return params.p / (params.p + params.q * (1.0 - params.p));
}

// Boundary condition induced on `sub` by fixing the edges of `host` outside sub
// (given by `outer`, entries for sub's own edges are ignored) together with the
// host boundary condition.
BoundaryCondition induced_bc(const Graph& host, const Graph& sub, const std::vector<EdgeId>& sub_to_host,
                             const Configuration& outer, const BoundaryCondition& outer_bc);
BoundaryCondition induced_bc(const Region& region, const Region& subregion, const Configuration& outer,
                             const BoundaryCondition& outer_bc);

// True iff `zeta` dominates `xi`: vertices wired in xi are wired in zeta.
bool bc_dominates(const BoundaryCondition& xi, const BoundaryCondition& zeta);

// Parameters (p*, q) of the planar dual model.
ModelParams dual_params(const ModelParams& params);
inline double self_dual_point(double q) { return std::sqrt(q) / (1.0 + std::sqrt(q)); }

Configuration dual_config(const DualMap& dm, const Configuration& cfg);

}  // namespace rcquad
