#pragma once

#include <cstdint>
#include <vector>

#include "rcquad/events.hpp"
#include "rcquad/sampler.hpp"

namespace rcquad {

struct RareOptions {
  std::size_t samples_per_stage = 400;
  std::size_t stage_burn_in = 20;  // sweeps after each restart at a new level
  double stage_fraction = 0.2;     // target conditional probability per stage
  std::size_t max_stages = 400;
  std::size_t max_retries = 3;     // sample doublings when no sample passes the next level
};

// Multilevel splitting estimate of P[L >= level] for the reach L of a
// connection, as the product of conditional probabilities P[L >= t_{k+1} | L >= t_k]
// each estimated by a heat-bath chain conditioned on L >= t_k.
struct RareEstimate {
  double log_prob = 0;    // log P[L >= max_level]
  double log_stderr = 0;
  std::vector<double> log_tail;         // log P[L >= l], l = 0..max_level
  std::vector<double> log_tail_stderr;
  std::vector<std::int32_t> thresholds;
  bool unreliable = false;
  bool upper_bound = false;  // true when a stage saw no success; log_prob is then an upper bound

  Estimate as_estimate() const;
};

RareEstimate estimate_rare(const Graph& g, const BoundaryCondition& bc, const ModelParams& params,
                           const Connection& connection, const Schedule& schedule, const RareOptions& opt = {});
// Increasing events with a single positive connection (H, V, Hc, Vc, one-arm).
RareEstimate estimate_rare(const Region& region, const BoundaryCondition& bc, const ModelParams& params,
                           const CrossingEvent& ev, const Schedule& schedule, const RareOptions& opt = {});

// Direct estimate, replaced by the multilevel one when fewer than
// `min_hits` effective successes were seen. The second member tells which ran.
std::pair<Estimate, bool> estimate_event_adaptive(const Region& region, const BoundaryCondition& bc,
                                                  const ModelParams& params, const CrossingEvent& ev,
                                                  const Schedule& schedule, const RareOptions& opt = {},
                                                  double min_hits = 10.0);

}  // namespace rcquad
