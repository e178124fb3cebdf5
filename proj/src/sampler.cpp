#include "rcquad/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <omp.h>

namespace rcquad {

namespace {

// Stream ids of the counter generator.
constexpr std::uint64_t kGlauberStream = 0;
constexpr std::uint64_t kActivationStream = 1;
constexpr std::uint64_t kBondStream = 2;

bool is_wired_like(const Graph& g, const BoundaryCondition& bc) {
  return !g.boundary.empty() && bc.num_blocks() == 1;
}

}  // namespace

void Schedule::validate() const {
  if (sweeps == 0 || thin == 0 || chains == 0) throw ScheduleError("schedule: sweeps, thin and chains must be positive");
  if (thin > sweeps) throw ScheduleError("schedule: thinning interval exceeds the number of sweeps");
}

Dynamics default_dynamics(const ModelParams& params) {
  // Cluster moves activate each cluster with probability 1/q and stall at large q.
  return params.q >= 1.0 && params.q <= 4.0 ? Dynamics::ChayesMachta : Dynamics::Glauber;
}

std::string to_string(Dynamics d) { return d == Dynamics::Glauber ? "glauber" : "chayes-machta"; }

Sampler::Sampler(const Graph& g, const BoundaryCondition& bc, const ModelParams& params, std::uint64_t seed)
    : g_(&g), bc_(bc), params_(params), seed_(seed) {
  params_.validate();
  bc_.validate(g);
  lookup_ = make_lookup(g, bc_);
  p_free_ = heat_bath_value(params_, false);
  active_.assign(g.num_vertices(), 0);
}

ChainState Sampler::start(std::uint64_t chain, bool open) const {
  ChainState s;
  s.cfg = Configuration(g_->num_edges(), open);
  s.chain = chain;
  return s;
}

double Sampler::open_probability(const Configuration& cfg, EdgeId e) {
  if (params_.q == 1.0) return params_.p;
  const auto& ed = g_->edges[e];
  return heat_bath_value(params_, search_.connected(*g_, lookup_, cfg, ed.u, ed.v, e));
}

void Sampler::glauber_sweep(ChainState& s) {
  const CounterRng rng(seed_, s.chain, kGlauberStream);
  const double p = params_.p;
  const double lo = std::min(p, p_free_), hi = std::max(p, p_free_);
  const std::size_t ne = g_->num_edges();
  for (EdgeId e = 0; e < ne; ++e) {
    const double u = rng.uniform(s.sweep, e);
    bool open;
    if (u < lo) open = true;
    else if (u >= hi) open = false;
    else open = u < open_probability(s.cfg, e);
    s.cfg.set(e, open);
  }
  ++s.sweep;
}

void Sampler::chayes_machta_step(ChainState& s) {
  if (params_.q < 1.0) throw ParameterError("Chayes-Machta dynamics needs q >= 1");
  const std::size_t ne = g_->num_edges();
  if (params_.degenerate()) {
    // Point mass; jump straight to it.
    s.cfg.fill(params_.p == 1.0);
    ++s.sweep;
    return;
  }
  const CounterRng act(seed_, s.chain, kActivationStream);
  const CounterRng bond(seed_, s.chain, kBondStream);
  uf_.reset(g_->num_vertices());
  for (const auto& blk : lookup_.blocks) {
    for (std::size_t i = 1; i < blk.size(); ++i) uf_.unite(blk[0], blk[i]);
  }
  for (EdgeId e = 0; e < ne; ++e) {
    if (s.cfg[e]) uf_.unite(g_->edges[e].u, g_->edges[e].v);
  }
  const double threshold = 1.0 / params_.q;
  const std::size_t nv = g_->num_vertices();
  for (VertexId v = 0; v < nv; ++v) {
    if (uf_.find(v) == v) active_[v] = act.uniform(s.sweep, v) < threshold;
  }
  for (EdgeId e = 0; e < ne; ++e) {
    const auto& ed = g_->edges[e];
    if (active_[uf_.find(ed.u)] && active_[uf_.find(ed.v)]) s.cfg.set(e, bond.uniform(s.sweep, e) < params_.p);
  }
  ++s.sweep;
}

void Sampler::step(ChainState& s, Dynamics d) {
  if (d == Dynamics::Glauber) glauber_sweep(s);
  else chayes_machta_step(s);
}

ObservableSpec event_observable(const CrossingEvent& ev, const Region& host) {
  ObservableSpec spec;
  spec.count = 1;
  const Region* h = &host;
  // Compile once up front so geometry errors surface on the calling thread.
  CompiledEvent probe(ev, host);
  (void)probe;
  spec.make = [ev, h]() {
    auto compiled = std::make_shared<CompiledEvent>(ev, *h);
    return std::function<void(const Configuration&, double*)>(
        [compiled](const Configuration& c, double* out) { out[0] = (*compiled)(c) ? 1.0 : 0.0; });
  };
  return spec;
}

ObservableSpec predicate_observable(std::function<EventPredicate()> make) {
  ObservableSpec spec;
  spec.count = 1;
  spec.make = [make]() {
    auto pred = std::make_shared<EventPredicate>(make());
    return std::function<void(const Configuration&, double*)>(
        [pred](const Configuration& c, double* out) { out[0] = (*pred)(c) ? 1.0 : 0.0; });
  };
  return spec;
}

RunOptions default_options(const ModelParams& params, const BoundaryCondition& bc) {
  (void)bc;
  RunOptions o;
  o.dynamics = default_dynamics(params);
  return o;
}

namespace {

// Burn-in length once the adaptive rule has looked at the open-edge density.
std::uint64_t burn_in_sweeps(Sampler& sampler, ChainState& s, const Schedule& sch, Dynamics d) {
  if (!sch.adaptive_burn_in) return sch.burn_in;
  std::vector<double> density;
  density.reserve(sch.burn_in);
  const double ne = static_cast<double>(std::max<std::size_t>(1, s.cfg.size()));
  for (std::uint64_t t = 0; t < sch.burn_in; ++t) {
    sampler.step(s, d);
    density.push_back(static_cast<double>(s.cfg.count_open()) / ne);
  }
  const auto st = analyze_series(density);
  const auto want = static_cast<std::uint64_t>(std::min(64.0 * st.tau_int, 1e5));
  return want > sch.burn_in ? want - sch.burn_in : 0;
}

// Runs one chain and returns per-observable series statistics.
std::vector<SeriesStats> run_chain(const Graph& g, const BoundaryCondition& bc, const ModelParams& params,
                                   const ObservableSpec& obs, const Schedule& sch, const RunOptions& opt,
                                   std::uint64_t chain) {
  Sampler sampler(g, bc, params, sch.seed);
  auto observe = obs.make();
  ChainState s = sampler.start(chain, opt.start_open);
  const auto extra = burn_in_sweeps(sampler, s, sch, opt.dynamics);
  for (std::uint64_t t = 0; t < extra; ++t) sampler.step(s, opt.dynamics);
  const auto m = sch.samples_per_chain();
  std::vector<std::vector<double>> series(obs.count, std::vector<double>(m));
  std::vector<double> buf(obs.count);
  for (std::uint64_t i = 0; i < m; ++i) {
    for (std::uint64_t t = 0; t < sch.thin; ++t) sampler.step(s, opt.dynamics);
    observe(s.cfg, buf.data());
    for (std::size_t k = 0; k < obs.count; ++k) series[k][i] = buf[k];
  }
  std::vector<SeriesStats> out;
  out.reserve(obs.count);
  for (const auto& x : series) out.push_back(analyze_series(x));
  return out;
}

std::vector<Estimate> combine(const std::vector<std::vector<SeriesStats>>& per_chain, std::size_t count) {
  std::vector<Estimate> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<SeriesStats> chains;
    for (const auto& c : per_chain) chains.push_back(c[k]);
    const auto m = merge_chains(chains);
    auto& e = out[k];
    e.mean = m.mean;
    e.std_error = m.std_error;
    e.tau_int = m.tau_int;
    e.n = m.n;
    e.unreliable = m.unreliable;
    for (const auto& c : chains) e.chain_means.push_back(c.mean);
  }
  return out;
}

void check_run(const ModelParams& params, const Schedule& sch, const RunOptions& opt) {
  params.validate();
  sch.validate();
  if (opt.dynamics == Dynamics::ChayesMachta && params.q < 1.0) {
    throw ParameterError("Chayes-Machta dynamics needs q >= 1");
  }
}

}  // namespace

std::vector<Estimate> estimate_observables(const Graph& g, const BoundaryCondition& bc, const ModelParams& params,
                                           const ObservableSpec& obs, const Schedule& schedule,
                                           const RunOptions& opt) {
  check_run(params, schedule, opt);
  bc.validate(g);
  const auto nc = static_cast<std::int64_t>(schedule.chains);
  std::vector<std::vector<SeriesStats>> per_chain(schedule.chains);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < nc; ++c) {
    try {
      per_chain[c] = run_chain(g, bc, params, obs, schedule, opt, static_cast<std::uint64_t>(c));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return combine(per_chain, obs.count);
}

std::vector<Estimate> estimate_observables_serial(const Graph& g, const BoundaryCondition& bc,
                                                  const ModelParams& params, const ObservableSpec& obs,
                                                  const Schedule& schedule, const RunOptions& opt) {
  check_run(params, schedule, opt);
  bc.validate(g);
  std::vector<std::vector<SeriesStats>> per_chain;
  for (std::uint64_t c = 0; c < schedule.chains; ++c) per_chain.push_back(run_chain(g, bc, params, obs, schedule, opt, c));
  return combine(per_chain, obs.count);
}

Estimate estimate_event(const Region& region, const BoundaryCondition& bc, const ModelParams& params,
                        const CrossingEvent& ev, const Schedule& schedule, const RunOptions& opt) {
  return estimate_observables(region.graph, bc, params, event_observable(ev, region), schedule, opt).front();
}

Estimate estimate_event(const Region& region, const BoundaryCondition& bc, const ModelParams& params,
                        const CrossingEvent& ev, const Schedule& schedule) {
  auto opt = default_options(params, bc);
  opt.start_open = is_wired_like(region.graph, bc);
  return estimate_event(region, bc, params, ev, schedule, opt);
}

namespace {

struct PairSeries {
  std::vector<SeriesStats> low, high;
};

PairSeries run_pair_chain(const Graph& g, const BoundaryCondition& bc_low, const BoundaryCondition& bc_high,
                          const ModelParams& params, const ObservableSpec& obs, const Schedule& sch,
                          std::uint64_t chain) {
  // Same seed and chain id: both samplers read identical uniforms.
  Sampler lo(g, bc_low, params, sch.seed), hi(g, bc_high, params, sch.seed);
  auto obs_lo = obs.make();
  auto obs_hi = obs.make();
  ChainState a = lo.start(chain, false), b = hi.start(chain, true);
  auto advance = [&]() {
    lo.glauber_sweep(a);
    hi.glauber_sweep(b);
    if (!a.cfg.below(b.cfg)) throw CouplingError("monotone coupling violated at sweep " + std::to_string(a.sweep));
  };
  for (std::uint64_t t = 0; t < sch.burn_in; ++t) advance();
  const auto m = sch.samples_per_chain();
  std::vector<std::vector<double>> xl(obs.count, std::vector<double>(m)), xh(obs.count, std::vector<double>(m));
  std::vector<double> buf(obs.count);
  for (std::uint64_t i = 0; i < m; ++i) {
    for (std::uint64_t t = 0; t < sch.thin; ++t) advance();
    obs_lo(a.cfg, buf.data());
    for (std::size_t k = 0; k < obs.count; ++k) xl[k][i] = buf[k];
    obs_hi(b.cfg, buf.data());
    for (std::size_t k = 0; k < obs.count; ++k) xh[k][i] = buf[k];
  }
  PairSeries out;
  for (std::size_t k = 0; k < obs.count; ++k) {
    out.low.push_back(analyze_series(xl[k]));
    out.high.push_back(analyze_series(xh[k]));
  }
  return out;
}

}  // namespace

PairEstimate monotone_pair_run(const Graph& g, const BoundaryCondition& bc_low, const BoundaryCondition& bc_high,
                               const ModelParams& params, const ObservableSpec& obs, const Schedule& schedule) {
  params.validate();
  schedule.validate();
  if (params.q < 1.0) throw ParameterError("monotone coupling needs q >= 1");
  bc_low.validate(g);
  bc_high.validate(g);
  if (!bc_dominates(bc_low, bc_high)) throw BoundaryError("monotone pair: bc_high must dominate bc_low");
  const auto nc = static_cast<std::int64_t>(schedule.chains);
  std::vector<PairSeries> per_chain(schedule.chains);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < nc; ++c) {
    try {
      per_chain[c] = run_pair_chain(g, bc_low, bc_high, params, obs, schedule, static_cast<std::uint64_t>(c));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  std::vector<std::vector<SeriesStats>> lows, highs;
  for (auto& pc : per_chain) {
    lows.push_back(pc.low);
    highs.push_back(pc.high);
  }
  PairEstimate r;
  r.low = combine(lows, obs.count).front();
  r.high = combine(highs, obs.count).front();
  return r;
}

PairEstimate monotone_pair_run(const Region& region, const BoundaryCondition& bc_low,
                               const BoundaryCondition& bc_high, const ModelParams& params, const CrossingEvent& ev,
                               const Schedule& schedule) {
  return monotone_pair_run(region.graph, bc_low, bc_high, params, event_observable(ev, region), schedule);
}

}  // namespace rcquad
