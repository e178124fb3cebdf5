#include "rcquad/rare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rcquad {

namespace {

constexpr EdgeId kNone = ConnectionSearch::kNoEdge;
constexpr std::uint64_t kConstrainedStream = 3;

// Reach of the sources of a connection, plus a witness set of vertices that
// certifies L >= threshold under the current configuration.
class LevelTracker {
 public:
  LevelTracker(const Connection& c, std::size_t host_edges) : c_(c) {
    const auto& g = *c.view;
    view_of_host_.assign(host_edges, kNone);
    if (c.view_to_host) {
      for (EdgeId ve = 0; ve < g.num_edges(); ++ve) view_of_host_[(*c.view_to_host)[ve]] = ve;
    } else {
      for (EdgeId e = 0; e < std::min<std::size_t>(host_edges, g.num_edges()); ++e) view_of_host_[e] = e;
    }
    witness_.assign(g.num_vertices(), 0);
    scratch_.assign(g.num_vertices(), 0);
  }

  std::int32_t level(VertexId v) const {
    if (!c_.level.empty()) return c_.level[v];
    return c_.is_target[v] ? c_.max_level : 0;
  }

  // BFS into the scratch marks, stopping once `stop_at` is reached.
  std::int32_t search(const Configuration& cfg, EdgeId skip, std::int32_t stop_at) {
    const auto& g = *c_.view;
    if (++scratch_stamp_ == 0) {
      std::fill(scratch_.begin(), scratch_.end(), 0);
      scratch_stamp_ = 1;
    }
    queue_.clear();
    std::int32_t best = -1;
    for (auto s : c_.sources) {
      if (scratch_[s] == scratch_stamp_) continue;
      scratch_[s] = scratch_stamp_;
      queue_.push_back(s);
      best = std::max(best, level(s));
    }
    for (std::size_t h = 0; h < queue_.size() && best < stop_at; ++h) {
      const auto v = queue_[h];
      for (auto it = g.adj_begin(v); it != g.adj_end(v); ++it) {
        const auto w = it->neighbor;
        if (scratch_[w] == scratch_stamp_ || it->edge == skip || !c_.edge_allowed[it->edge]) continue;
        if (!c_.edge_open(cfg, it->edge)) continue;
        scratch_[w] = scratch_stamp_;
        queue_.push_back(w);
        best = std::max(best, level(w));
      }
    }
    return best;
  }

  std::int32_t reach(const Configuration& cfg) { return search(cfg, kNone, c_.max_level); }

  // Recomputes the witness for `threshold`; false if the constraint fails.
  bool rebuild_witness(const Configuration& cfg, std::int32_t threshold) {
    if (search(cfg, kNone, threshold) < threshold) return false;
    adopt();
    return true;
  }

  // Applies the constrained heat-bath outcome `open` for host edge e.
  void update(Configuration& cfg, EdgeId e, bool open, std::int32_t threshold) {
    if (cfg[e] == open) return;
    const EdgeId ve = view_of_host_[e];
    if (ve == kNone || !c_.edge_allowed[ve]) {
      cfg.set(e, open);
      return;
    }
    const bool helpful = open != c_.dual;
    if (helpful) {
      cfg.set(e, open);
      return;
    }
    const auto& ed = c_.view->edges[ve];
    if (witness_[ed.u] != witness_stamp_ && witness_[ed.v] != witness_stamp_) {
      cfg.set(e, open);
      return;
    }
    if (search(cfg, ve, threshold) >= threshold) {
      adopt();
      cfg.set(e, open);
    }
  }

 private:
  void adopt() {
    std::swap(witness_, scratch_);
    std::swap(witness_stamp_, scratch_stamp_);
  }

  const Connection& c_;
  std::vector<EdgeId> view_of_host_;
  std::vector<std::uint32_t> witness_, scratch_;
  std::uint32_t witness_stamp_ = 0, scratch_stamp_ = 0;
  std::vector<VertexId> queue_;
};

struct StageSamples {
  std::vector<std::int32_t> levels;
  std::vector<Configuration> configs;
};

double log_or_neg_inf(double x) { return x > 0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

RareEstimate run_replica(const Graph& g, const BoundaryCondition& bc, const ModelParams& params,
                         const Connection& conn, const Schedule& sch, const RareOptions& opt,
                         std::uint64_t replica) {
  const std::int32_t top = conn.max_level;
  RareEstimate r;
  r.log_tail.assign(top + 1, 0.0);
  r.log_tail_stderr.assign(top + 1, 0.0);
  Sampler sampler(g, bc, params, sch.seed);
  LevelTracker tracker(conn, g.num_edges());
  const bool wired = !g.boundary.empty() && bc.num_blocks() == 1;
  ChainState s = sampler.start(replica, wired);
  const Dynamics dyn = default_dynamics(params);
  for (std::uint64_t t = 0; t < sch.burn_in; ++t) sampler.step(s, dyn);

  const double p = params.p, pf = heat_bath_value(params, false);
  const double lo = std::min(p, pf), hi = std::max(p, pf);
  std::int32_t threshold = 0;
  std::uint64_t stage = 0;
  std::uint64_t csweep = 0;

  auto constrained_sweep = [&](Configuration& cfg) {
    const CounterRng rng(sch.seed, (replica << 20) | stage, kConstrainedStream);
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const double u = rng.uniform(csweep, e);
      bool open;
      if (u < lo) open = true;
      else if (u >= hi) open = false;
      else open = u < sampler.open_probability(cfg, e);
      tracker.update(cfg, e, open, threshold);
    }
    ++csweep;
  };

  auto collect = [&](Configuration& cfg, std::size_t count, bool constrained, StageSamples& out) {
    for (std::size_t i = 0; i < count; ++i) {
      for (std::uint64_t t = 0; t < sch.thin; ++t) {
        if (constrained) constrained_sweep(cfg);
        else sampler.step(s, dyn);
      }
      out.levels.push_back(tracker.reach(cfg));
      out.configs.push_back(cfg);
    }
  };

  double log_p = 0, var_p = 0;
  Configuration cfg = s.cfg;
  StageSamples samples;
  collect(s.cfg, opt.samples_per_stage, false, samples);
  cfg = s.cfg;

  for (std::size_t k = 0; k < opt.max_stages; ++k) {
    auto frac_at = [&](std::int32_t l) {
      std::size_t hits = 0;
      for (auto v : samples.levels) hits += v >= l;
      return static_cast<double>(hits) / static_cast<double>(samples.levels.size());
    };
    std::size_t retries = 0;
    while (frac_at(threshold + 1) == 0.0 && threshold < top && retries < opt.max_retries) {
      const std::size_t more = samples.levels.size();
      if (stage == 0) collect(s.cfg, more, false, samples);
      else collect(cfg, more, true, samples);
      ++retries;
    }
    if (threshold >= top) break;
    if (frac_at(threshold + 1) == 0.0) {
      const double bound = log_p - std::log(static_cast<double>(samples.levels.size()));
      for (std::int32_t l = threshold + 1; l <= top; ++l) {
        r.log_tail[l] = bound;
        r.log_tail_stderr[l] = std::sqrt(var_p);
      }
      r.upper_bound = true;
      r.unreliable = true;
      break;
    }
    std::int32_t next = threshold + 1;
    for (std::int32_t l = top; l > threshold; --l) {
      if (frac_at(l) >= opt.stage_fraction) {
        next = l;
        break;
      }
    }
    std::vector<double> ind(samples.levels.size());
    for (std::size_t i = 0; i < ind.size(); ++i) ind[i] = samples.levels[i] >= next ? 1.0 : 0.0;
    const auto st = analyze_series(ind);
    if (!st.window_found || st.tau_int > static_cast<double>(ind.size()) / 10.0) r.unreliable = true;
    const double neff = static_cast<double>(ind.size()) / (2.0 * st.tau_int);
    for (std::int32_t l = threshold + 1; l <= next; ++l) {
      const double f = frac_at(l);
      r.log_tail[l] = log_p + log_or_neg_inf(f);
      r.log_tail_stderr[l] = f > 0 ? std::sqrt(var_p + (1.0 - f) / (f * neff)) : std::sqrt(var_p);
    }
    const double f = frac_at(next);
    log_p += std::log(f);
    var_p += (1.0 - f) / (f * neff);
    threshold = next;
    r.thresholds.push_back(next);
    if (threshold >= top) break;

    // Restart the conditioned chain from the latest sample above the new level.
    std::size_t pick = samples.levels.size();
    while (pick > 0 && samples.levels[pick - 1] < threshold) --pick;
    cfg = samples.configs[pick - 1];
    ++stage;
    csweep = 0;
    tracker.rebuild_witness(cfg, threshold);
    for (std::size_t t = 0; t < opt.stage_burn_in; ++t) constrained_sweep(cfg);
    samples = StageSamples{};
    collect(cfg, opt.samples_per_stage, true, samples);
  }
  if (threshold < top && !r.upper_bound) r.unreliable = true;
  r.log_prob = r.log_tail[top];
  r.log_stderr = r.log_tail_stderr[top];
  return r;
}

}  // namespace

Estimate RareEstimate::as_estimate() const {
  Estimate e;
  e.mean = std::exp(log_prob);
  e.std_error = e.mean * log_stderr;
  e.unreliable = unreliable;
  return e;
}

RareEstimate estimate_rare(const Graph& g, const BoundaryCondition& bc, const ModelParams& params,
                           const Connection& connection, const Schedule& schedule, const RareOptions& opt) {
  params.validate();
  schedule.validate();
  bc.validate(g);
  if (connection.sources.empty()) throw GeometryError("rare-event estimate: connection has no source vertex");
  if (opt.samples_per_stage < 2 || !(opt.stage_fraction > 0 && opt.stage_fraction < 1)) {
    throw ScheduleError("rare-event options: need >= 2 samples per stage and a stage fraction in (0,1)");
  }
  const auto nr = static_cast<std::int64_t>(schedule.chains);
  std::vector<RareEstimate> reps(schedule.chains);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < nr; ++i) {
    try {
      reps[i] = run_replica(g, bc, params, connection, schedule, opt, static_cast<std::uint64_t>(i));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  if (reps.size() == 1) return reps.front();

  // Inverse-variance combination level by level; the error is the larger of
  // the propagated one and the spread between replicas.
  RareEstimate out;
  const std::size_t nl = reps.front().log_tail.size();
  out.log_tail.assign(nl, 0.0);
  out.log_tail_stderr.assign(nl, 0.0);
  for (const auto& r : reps) {
    out.unreliable = out.unreliable || r.unreliable;
    out.upper_bound = out.upper_bound || r.upper_bound;
  }
  out.thresholds = reps.front().thresholds;
  for (std::size_t l = 0; l < nl; ++l) {
    double ws = 0, wm = 0;
    bool any_inf = false;
    for (const auto& r : reps) {
      if (!std::isfinite(r.log_tail[l])) {
        any_inf = true;
        continue;
      }
      const double s = std::max(r.log_tail_stderr[l], 1e-12);
      ws += 1.0 / (s * s);
      wm += r.log_tail[l] / (s * s);
    }
    if (ws == 0 || any_inf) {
      out.log_tail[l] = ws == 0 ? -std::numeric_limits<double>::infinity() : wm / ws;
      out.log_tail_stderr[l] = ws == 0 ? 0 : std::sqrt(1.0 / ws);
      if (any_inf) out.unreliable = true;
      continue;
    }
    const double mean = wm / ws;
    double spread = 0;
    for (const auto& r : reps) spread += (r.log_tail[l] - mean) * (r.log_tail[l] - mean);
    spread = std::sqrt(spread / static_cast<double>(reps.size() - 1) / static_cast<double>(reps.size()));
    out.log_tail[l] = mean;
    out.log_tail_stderr[l] = std::max(std::sqrt(1.0 / ws), spread);
  }
  out.log_prob = out.log_tail.back();
  out.log_stderr = out.log_tail_stderr.back();
  return out;
}

RareEstimate estimate_rare(const Region& region, const BoundaryCondition& bc, const ModelParams& params,
                           const CrossingEvent& ev, const Schedule& schedule, const RareOptions& opt) {
  CompiledEvent ce(ev, region);
  const auto pc = ce.positive_connection();
  if (!pc) throw GeometryError("event " + ev.label() + " has no single increasing connection form");
  return estimate_rare(region.graph, bc, params, *pc, schedule, opt);
}

std::pair<Estimate, bool> estimate_event_adaptive(const Region& region, const BoundaryCondition& bc,
                                                  const ModelParams& params, const CrossingEvent& ev,
                                                  const Schedule& schedule, const RareOptions& opt, double min_hits) {
  auto direct = estimate_event(region, bc, params, ev, schedule);
  const double neff = static_cast<double>(direct.n) / (2.0 * direct.tau_int);
  if (direct.mean * neff >= min_hits || params.degenerate()) return {direct, false};
  CompiledEvent ce(ev, region);
  if (!ce.positive_connection()) return {direct, false};
  auto rare = estimate_rare(region.graph, bc, params, *ce.positive_connection(), schedule, opt);
  auto e = rare.as_estimate();
  e.n = static_cast<std::uint64_t>(opt.samples_per_stage * std::max<std::size_t>(1, rare.thresholds.size())) *
        schedule.chains;
  e.tau_int = direct.tau_int;
  return {e, true};
}

}  // namespace rcquad
