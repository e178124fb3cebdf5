#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rcquad/events.hpp"
#include "rcquad/lattice.hpp"
#include "rcquad/measure.hpp"
#include "rcquad/rng.hpp"
#include "rcquad/stats.hpp"
#include "rcquad/union_find.hpp"

namespace rcquad {

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CouplingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Schedule {
  std::uint64_t burn_in = 200;
  std::uint64_t sweeps = 2000;  // measurement sweeps per chain
  std::uint64_t thin = 1;
  std::uint64_t chains = 4;
  std::uint64_t seed = 1;
  // Extends the burn-in to 64 tau_int (capped at 1e5 sweeps), with tau_int
  // measured on the open-edge density during the initial burn-in.
  bool adaptive_burn_in = false;

  void validate() const;
  std::uint64_t samples_per_chain() const { return sweeps / thin; }
};

struct Estimate {
  double mean = 0;
  double std_error = 0;
  double tau_int = 0.5;
  std::uint64_t n = 0;
  std::vector<double> chain_means;
  bool unreliable = false;
};

enum class Dynamics { Glauber, ChayesMachta };
// Chayes-Machta for 1 <= q <= 4, heat-bath Glauber otherwise.
Dynamics default_dynamics(const ModelParams& params);
std::string to_string(Dynamics d);

struct ChainState {
  Configuration cfg;
  std::uint64_t chain = 0;
  std::uint64_t sweep = 0;
};

// One sampler per worker: holds scratch buffers.
class Sampler {
 public:
  Sampler(const Graph& g, const BoundaryCondition& bc, const ModelParams& params, std::uint64_t seed);

  ChainState start(std::uint64_t chain, bool open) const;
  // Heat-bath update of every edge in id order; uniform for edge e at sweep t is
  // a function of (seed, chain, t, e) only.
  void glauber_sweep(ChainState& s);
  // Requires q >= 1.
  void chayes_machta_step(ChainState& s);
  void step(ChainState& s, Dynamics d);

  // Heat-bath probability that `e` is open given the rest of `cfg`.
  double open_probability(const Configuration& cfg, EdgeId e);

  const Graph& graph() const { return *g_; }
  const ModelParams& params() const { return params_; }
  const BcLookup& lookup() const { return lookup_; }
  std::uint64_t seed() const { return seed_; }

 private:
  const Graph* g_;
  BoundaryCondition bc_;
  BcLookup lookup_;
  ModelParams params_;
  std::uint64_t seed_;
  double p_free_ = 0;  // open probability when the endpoints are not otherwise joined
  ConnectivitySearch search_;
  UnionFind uf_;
  std::vector<std::uint8_t> active_;
};

// Observables write `count` doubles per configuration. Factories give each
// worker its own instance.
struct ObservableSpec {
  std::size_t count = 1;
  std::function<std::function<void(const Configuration&, double*)>()> make;
};

ObservableSpec event_observable(const CrossingEvent& ev, const Region& host);
ObservableSpec predicate_observable(std::function<EventPredicate()> make);

struct RunOptions {
  Dynamics dynamics = Dynamics::ChayesMachta;
  bool start_open = false;
};
RunOptions default_options(const ModelParams& params, const BoundaryCondition& bc);

std::vector<Estimate> estimate_observables(const Graph& g, const BoundaryCondition& bc, const ModelParams& params,
                                           const ObservableSpec& obs, const Schedule& schedule, const RunOptions& opt);
// Reference: chains run one after another on the calling thread.
std::vector<Estimate> estimate_observables_serial(const Graph& g, const BoundaryCondition& bc,
                                                  const ModelParams& params, const ObservableSpec& obs,
                                                  const Schedule& schedule, const RunOptions& opt);

Estimate estimate_event(const Region& region, const BoundaryCondition& bc, const ModelParams& params,
                        const CrossingEvent& ev, const Schedule& schedule);
Estimate estimate_event(const Region& region, const BoundaryCondition& bc, const ModelParams& params,
                        const CrossingEvent& ev, const Schedule& schedule, const RunOptions& opt);

struct PairEstimate {
  Estimate low;
  Estimate high;
  double gap() const { return high.mean - low.mean; }
};

// Two Glauber chains sharing every uniform: the low one starts all closed under
// bc_low, the high one all open under bc_high. The order low <= high is checked
// after every sweep; a violation throws CouplingError.
PairEstimate monotone_pair_run(const Region& region, const BoundaryCondition& bc_low,
                               const BoundaryCondition& bc_high, const ModelParams& params, const CrossingEvent& ev,
                               const Schedule& schedule);
PairEstimate monotone_pair_run(const Graph& g, const BoundaryCondition& bc_low, const BoundaryCondition& bc_high,
                               const ModelParams& params, const ObservableSpec& obs, const Schedule& schedule);

}  // namespace rcquad
