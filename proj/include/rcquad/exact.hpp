#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcquad/lattice.hpp"
#include "rcquad/measure.hpp"

namespace rcquad {

class OracleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kMaxExactEdges = 24;

// Exact measure of a small graph. Configurations are indexed by the bit mask of
// open edges (bit e = edge e); the cluster count of every configuration is kept
// so that any (p, q) can be evaluated without re-enumerating.
class ExactDistribution {
 public:
  ExactDistribution(Graph graph, BoundaryCondition bc, ModelParams params, std::vector<std::uint8_t> clusters);

  const Graph& graph() const { return graph_; }
  const BoundaryCondition& bc() const { return bc_; }
  const ModelParams& params() const { return params_; }
  std::size_t num_edges() const { return graph_.num_edges(); }
  std::size_t num_configs() const { return clusters_.size(); }
  const std::vector<std::uint8_t>& clusters() const { return clusters_; }

  double log_z() const { return log_z_; }
  double log_weight(std::uint64_t config) const;
  double prob(std::uint64_t config) const { return std::exp(log_weight(config) - log_z_); }

  // Same graph and boundary condition at other parameters.
  ExactDistribution with_params(const ModelParams& params) const;

 private:
  Graph graph_;
  BoundaryCondition bc_;
  ModelParams params_;
  std::vector<std::uint8_t> clusters_;
  double log_p_ = 0, log_1mp_ = 0, log_q_ = 0;
  double log_z_ = 0;
};

ExactDistribution enumerate(const Graph& g, const BoundaryCondition& bc, const ModelParams& params);
inline ExactDistribution enumerate(const Region& r, const BoundaryCondition& bc, const ModelParams& params) {
  return enumerate(r.graph, bc, params);
}
// Reference: recounts clusters from scratch for every configuration, single thread.
ExactDistribution enumerate_serial(const Graph& g, const BoundaryCondition& bc, const ModelParams& params);

enum class Monotonicity { Increasing, Decreasing, None };

struct EventPredicate {
  std::string name;
  std::function<bool(const Configuration&)> test;
  Monotonicity monotonicity = Monotonicity::None;

  bool operator()(const Configuration& c) const { return test(c); }
};

EventPredicate always_event();
EventPredicate edge_open_event(EdgeId e);
EventPredicate all_open_event(std::size_t num_edges);
EventPredicate complement_event(const EventPredicate& ev);
EventPredicate intersect_events(const EventPredicate& a, const EventPredicate& b);
// Lifts an event on `sub` to configurations of `host` through an edge embedding.
EventPredicate pullback_event(const EventPredicate& ev, std::vector<EdgeId> sub_to_host);

// Indicator of the event for every configuration index.
std::vector<std::uint8_t> tabulate(const EventPredicate& ev, std::size_t num_edges);

double exact_prob(const ExactDistribution& dist, const EventPredicate& ev);
double exact_prob(const ExactDistribution& dist, const std::vector<std::uint8_t>& table);

// Samples random comparable pairs and checks the declared monotonicity; returns
// the number of violations found.
std::size_t spot_check_monotonicity(const EventPredicate& ev, std::size_t num_edges, std::size_t pairs,
                                    std::uint64_t seed);

struct Verification {
  std::string identity;
  double lhs = 0;
  double rhs = 0;
  double margin = 0;  // >= -tolerance on success
  bool pass = false;
};

inline constexpr double kExactTol = 1e-10;
inline constexpr double kDualTol = 1e-8;

// Test hook: flips the sign of the FKG margin so callers can exercise failure paths.
struct OracleFaults {
  bool flip_fkg = false;
};

Verification verify_fkg(const ExactDistribution& dist, const EventPredicate& a, const EventPredicate& b,
                        const OracleFaults& faults = {});
Verification verify_cbc(const ExactDistribution& xi_dist, const ExactDistribution& zeta_dist, const EventPredicate& ev);
Verification verify_cbc(const Graph& g, const ModelParams& params, const BoundaryCondition& xi,
                        const BoundaryCondition& zeta, const EventPredicate& ev);
// `outer` is a configuration of the host; its entries on subregion edges are ignored.
Verification verify_smp(const Region& region, const Region& subregion, const BoundaryCondition& bc,
                        const ModelParams& params, const Configuration& outer);
Verification verify_smp(const ExactDistribution& host, const Region& region, const Region& subregion,
                        const Configuration& outer);

enum class DualPairing { WiredPrimal, FreePrimal };

// Compares the primal measure with the pullback of the dual measure at p*, both
// for the full distribution (margin = total variation) and for one event.
Verification verify_duality(const Graph& g, const DualMap& dm, const ModelParams& params, const EventPredicate& ev,
                            DualPairing pairing = DualPairing::WiredPrimal);
Verification verify_fi(const Graph& g, const ModelParams& params, const BoundaryCondition::Block& a,
                       const BoundaryCondition::Block& b, const EventPredicate& ev);
Verification verify_fi(const ExactDistribution& mix, const ExactDistribution& star_mix, const EventPredicate& ev);

// Domain orderings: pushing wired boundary conditions inwards (kind 1) or free
// ones outwards (kind 0).
enum class DomainOrder { Wired, Free };
bool domain_precedes(const Region& g, const BoundaryCondition& xi, const Region& g2, const BoundaryCondition& xi2,
                     DomainOrder order);
// `ev` lives on the smaller of the two regions.
Verification verify_mon(const Region& g, const BoundaryCondition& xi, const Region& g2, const BoundaryCondition& xi2,
                        const ModelParams& params, const EventPredicate& ev, DomainOrder order);

}  // namespace rcquad
