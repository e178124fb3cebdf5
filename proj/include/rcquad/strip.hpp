#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rcquad/sampler.hpp"
#include "rcquad/stats.hpp"

namespace rcquad {

enum class StripBc { Free, Wired, Dobrushin };  // 0, 1, 0/1
std::string to_string(StripBc b);
StripBc strip_bc_from_string(const std::string& s);

// Truncated strip R_{m,n} = [-m,m] x [-n,2n].
struct StripSpec {
  int n = 1;
  StripBc bc = StripBc::Free;
  int m = 0;  // 0: 8 times the event's horizontal extent

  Rect rect() const { return {-m, m, -n, 2 * n}; }
};

BoundaryCondition strip_boundary(const Region& r, StripBc bc);

struct StripEstimate {
  Estimate estimate;       // at the final truncation
  int m = 0;
  Estimate coarse;         // at m, compared against 2m
  bool converged = true;   // |difference| <= 2 combined errors
  std::size_t doublings = 0;
};

// Estimate under the truncated measure, compared with the truncation 2m and
// doubled up to `max_doublings` times while the two disagree.
StripEstimate strip_estimate(StripSpec spec, const ModelParams& params, const CrossingEvent& ev,
                             const Schedule& schedule, std::size_t max_doublings = 1);

enum class Density { P, Q };

struct DensityEstimate {
  Density which = Density::P;
  int n = 1;
  ModelParams params;
  std::vector<double> alphas;
  std::vector<double> mean, std_error;
  std::vector<double> log_phi, log_err;
  std::vector<std::uint8_t> kept;  // points below the detection floor are dropped
  double slope = 0, slope_err = 0, intercept = 0, r2 = 0;
  double density = 0, density_err = 0;
  bool upper_bound = false;  // fewer than two usable points: `density` is an upper bound
  bool unreliable = false;
};

// Verbatim hosts [0, alpha n] x [-n, 2n]: free bc with the event H_{[0,alpha n] x [0,n]}
// for p_n, wired bc with V^c of the same rectangle for q_n.
DensityEstimate estimate_density(Density which, int n, const ModelParams& params, const std::vector<double>& alphas,
                                 const Schedule& schedule, double min_hits = 10.0);
inline DensityEstimate estimate_density_p(int n, const ModelParams& params, const std::vector<double>& alphas,
                                          const Schedule& schedule) {
  return estimate_density(Density::P, n, params, alphas, schedule);
}
inline DensityEstimate estimate_density_q(int n, const ModelParams& params, const std::vector<double>& alphas,
                                          const Schedule& schedule) {
  return estimate_density(Density::Q, n, params, alphas, schedule);
}

struct PowerCheck {
  double lhs = 0;  // density at lambda n
  double rhs = 0;  // density at n, to the power lambda
  double sigma = 0;
  bool pass = false;
};

PowerCheck check_power_monotonicity(double lambda, const DensityEstimate& at_n, const DensityEstimate& at_lambda_n);

struct DensityRelation {
  double lambda = 0;
  double k = 0;  // smallest constant making every sandwich hold
  std::vector<int> ns;
  std::vector<double> lower_residual, upper_residual;  // >= 0 when the sandwich holds with K = 0
};

// log p_{3n} between (3 + 3/lambda) log q_n - K and (3 - 9/lambda) log p_n + K.
DensityRelation check_density_relation(double lambda, const std::vector<int>& ns, const std::vector<double>& p_n,
                                       const std::vector<double>& q_n, const std::vector<double>& p_3n);

struct PushingBranch {
  std::string name;  // PushPrimal or PushDual
  std::vector<double> alphas, mean, std_error;
  std::vector<std::uint8_t> kept;
  double c = 0, c_err = 0, r2 = 0;
  bool fitted = false;
  bool bounded_below = false;  // c - 3 c_err >= floor
};

struct PushingReport {
  int n = 1;
  ModelParams params;
  PushingBranch primal, dual;
  double floor = 0.02;
  std::string branch;  // PushPrimal, PushDual, Both or None
  bool anomaly = false;
};

// Rbar = [0, alpha n] x [0, 26 n], R = [0, alpha n] x [0, n]; 1/0 wires the left,
// top and right arcs together, 0/1 wires the bottom arc.
PushingReport pushing_probe(int n, const std::vector<double>& alphas, const ModelParams& params,
                            const Schedule& schedule, double floor = 0.02, double min_hits = 10.0);

nlohmann::json to_json(const DensityEstimate& d);
nlohmann::json to_json(const PushingReport& r);
nlohmann::json to_json(const StripEstimate& s);

}  // namespace rcquad
