#include "rcquad/strip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rcquad {

namespace {

nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

int alpha_width(double alpha, int n) {
  const double w = alpha * n;
  const double r = std::round(w);
  if (alpha <= 0 || std::abs(w - r) > 1e-9) {
    throw ScheduleError("alpha * n must be a positive integer (alpha=" + std::to_string(alpha) + ")");
  }
  return static_cast<int>(r);
}

void check_grid(const std::vector<double>& alphas) {
  if (alphas.size() < 4) throw ScheduleError("alpha grid needs at least four points");
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (!(alphas[i] > alphas[i - 1])) throw ScheduleError("alpha grid must be strictly increasing");
  }
}

Schedule seeded(const Schedule& s, std::uint64_t k) {
  Schedule out = s;
  out.seed = mix64(s.seed ^ mix64(k));
  return out;
}

bool detectable(const Estimate& e, double min_hits) {
  return e.mean * static_cast<double>(e.n) / (2.0 * e.tau_int) >= min_hits;
}

}  // namespace

std::string to_string(StripBc b) {
  switch (b) {
    case StripBc::Free: return "0";
    case StripBc::Wired: return "1";
    case StripBc::Dobrushin: return "0/1";
  }
  return "0";
}

StripBc strip_bc_from_string(const std::string& s) {
  if (s == "0" || s == "free") return StripBc::Free;
  if (s == "1" || s == "wired") return StripBc::Wired;
  if (s == "0/1" || s == "dobrushin") return StripBc::Dobrushin;
  throw BoundaryError("unknown strip boundary condition '" + s + "'");
}

BoundaryCondition strip_boundary(const Region& r, StripBc bc) {
  switch (bc) {
    case StripBc::Free: return BoundaryCondition::free(r.graph);
    case StripBc::Wired: return BoundaryCondition::wired(r.graph);
    case StripBc::Dobrushin: return BoundaryCondition::dobrushin(r);
  }
  return BoundaryCondition::free(r.graph);
}

StripEstimate strip_estimate(StripSpec spec, const ModelParams& params, const CrossingEvent& ev,
                             const Schedule& schedule, std::size_t max_doublings) {
  if (spec.n < 1) throw ScheduleError("strip height parameter n must be positive");
  const Rect ext = ev.extent();
  const int reach = std::max(std::abs(ext.a), std::abs(ext.b));
  if (spec.m == 0) spec.m = std::max(1, 8 * (ext.b - ext.a));
  if (ext.c < -spec.n || ext.d > 2 * spec.n) throw GeometryError("event " + ev.label() + " leaves the strip");
  if (spec.m < 2 * reach) throw GeometryError("truncation m must be at least twice the event's horizontal extent");
  const auto lat = Lattice::square();
  auto run = [&](int m, std::uint64_t k) {
    StripSpec s = spec;
    s.m = m;
    const auto region = build_region(lat, s.rect());
    const auto bc = strip_boundary(region, spec.bc);
    RunOptions ro = default_options(params, bc);
    ro.start_open = spec.bc == StripBc::Wired;
    return estimate_event(region, bc, params, ev, seeded(schedule, k), ro);
  };
  StripEstimate out;
  int m = spec.m;
  Estimate cur = run(m, static_cast<std::uint64_t>(m));
  for (std::size_t d = 0;; ++d) {
    const Estimate next = run(2 * m, static_cast<std::uint64_t>(2 * m));
    out.coarse = cur;
    out.m = 2 * m;
    out.estimate = next;
    out.converged = std::abs(next.mean - cur.mean) <= 2.0 * std::hypot(next.std_error, cur.std_error);
    out.doublings = d;
    if (out.converged || d >= max_doublings) break;
    m *= 2;
    cur = next;
  }
  return out;
}

DensityEstimate estimate_density(Density which, int n, const ModelParams& params, const std::vector<double>& alphas,
                                 const Schedule& schedule, double min_hits) {
  check_grid(alphas);
  if (n < 1) throw ScheduleError("density: n must be positive");
  DensityEstimate d;
  d.which = which;
  d.n = n;
  d.params = params;
  d.alphas = alphas;
  const auto lat = Lattice::square();
  std::vector<double> xs, ys, ss;
  double floor_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const int w = alpha_width(alphas[i], n);
    const auto region = build_region(lat, {0, w, -n, 2 * n});
    CrossingEvent ev = horizontal_crossing({0, w, 0, n});
    BoundaryCondition bc = BoundaryCondition::free(region.graph);
    RunOptions ro = default_options(params, bc);
    if (which == Density::Q) {
      ev = vertical_crossing({0, w, 0, n});
      ev.kind = EventKind::Vc;
      bc = BoundaryCondition::wired(region.graph);
      ro.start_open = true;
    }
    const auto e = estimate_event(region, bc, params, ev, seeded(schedule, 17 * i + 1), ro);
    d.mean.push_back(e.mean);
    d.std_error.push_back(e.std_error);
    d.unreliable = d.unreliable || e.unreliable;
    const bool exact_one = e.mean == 1.0;
    const bool keep = exact_one || (e.mean > 0 && detectable(e, min_hits));
    d.kept.push_back(keep);
    d.log_phi.push_back(e.mean > 0 ? std::log(e.mean) : -std::numeric_limits<double>::infinity());
    d.log_err.push_back(e.mean > 0 ? e.std_error / e.mean : 0);
    if (keep) {
      xs.push_back(alphas[i]);
      ys.push_back(d.log_phi.back());
      ss.push_back(d.log_err.back());
    } else {
      // Below the floor of min_hits effective successes.
      const double neff = static_cast<double>(e.n) / (2.0 * e.tau_int);
      const double ceiling = params.degenerate() ? 0.0 : std::min(1.0, min_hits / neff);
      floor_bound = std::min(floor_bound, std::pow(ceiling, 1.0 / alphas[i]));
    }
  }
  if (xs.size() < 2) {
    d.upper_bound = true;
    d.density = std::isfinite(floor_bound) ? floor_bound : 1.0;
    return d;
  }
  const auto f = fit_linear(xs, ys, ss);
  d.slope = f.slope;
  d.slope_err = f.slope_stderr;
  d.intercept = f.intercept;
  d.r2 = f.r2;
  d.density = std::min(1.0, std::exp(f.slope));
  d.density_err = d.density * f.slope_stderr;
  return d;
}

PowerCheck check_power_monotonicity(double lambda, const DensityEstimate& at_n, const DensityEstimate& at_lambda_n) {
  PowerCheck c;
  c.lhs = at_lambda_n.density;
  c.rhs = std::pow(at_n.density, lambda);
  const double drhs = lambda * std::pow(at_n.density, lambda - 1) * at_n.density_err;
  c.sigma = std::hypot(at_lambda_n.density_err, drhs);
  c.pass = c.lhs >= c.rhs - 3.0 * c.sigma;
  return c;
}

DensityRelation check_density_relation(double lambda, const std::vector<int>& ns, const std::vector<double>& p_n,
                                       const std::vector<double>& q_n, const std::vector<double>& p_3n) {
  if (ns.size() != p_n.size() || ns.size() != q_n.size() || ns.size() != p_3n.size()) {
    throw ScheduleError("density relation: inconsistent input sizes");
  }
  DensityRelation r;
  r.lambda = lambda;
  r.ns = ns;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double lp3 = std::log(p_3n[i]);
    const double lower = lp3 - (3 + 3 / lambda) * std::log(q_n[i]);
    const double upper = (3 - 9 / lambda) * std::log(p_n[i]) - lp3;
    r.lower_residual.push_back(lower);
    r.upper_residual.push_back(upper);
    r.k = std::max({r.k, -lower, -upper});
  }
  return r;
}

PushingReport pushing_probe(int n, const std::vector<double>& alphas, const ModelParams& params,
                            const Schedule& schedule, double floor, double min_hits) {
  if (n < 1) throw ScheduleError("pushing probe: n must be positive");
  check_grid(alphas);
  PushingReport rep;
  rep.n = n;
  rep.params = params;
  rep.floor = floor;
  rep.primal.name = "PushPrimal";
  rep.dual.name = "PushDual";
  const auto lat = Lattice::square();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const int w = alpha_width(alphas[i], n);
    const auto region = build_region(lat, {0, w, 0, 26 * n});
    const Rect r{0, w, 0, n};
    std::vector<VertexId> lrt;
    for (Side s : {Side::Left, Side::Top, Side::Right}) {
      const auto arc = boundary_arc(region, s);
      lrt.insert(lrt.end(), arc.begin(), arc.end());
    }
    std::sort(lrt.begin(), lrt.end());
    lrt.erase(std::unique(lrt.begin(), lrt.end()), lrt.end());
    const auto bc10 = BoundaryCondition::from_blocks(region.graph, {lrt});
    const auto bc01 = BoundaryCondition::dobrushin(region);
    CrossingEvent vc = vertical_crossing(r);
    vc.kind = EventKind::Vc;
    RunOptions ro = default_options(params, bc10);
    const auto hp = estimate_event(region, bc10, params, horizontal_crossing(r), seeded(schedule, 31 * i + 1), ro);
    const auto hd = estimate_event(region, bc01, params, vc, seeded(schedule, 31 * i + 2), ro);
    for (auto [br, e] : {std::pair{&rep.primal, hp}, std::pair{&rep.dual, hd}}) {
      br->alphas.push_back(alphas[i]);
      br->mean.push_back(e.mean);
      br->std_error.push_back(e.std_error);
      br->kept.push_back(e.mean == 1.0 || (e.mean > 0 && detectable(e, min_hits)));
    }
  }
  for (auto* br : {&rep.primal, &rep.dual}) {
    std::vector<double> xs, ys, ss;
    for (std::size_t i = 0; i < br->alphas.size(); ++i) {
      if (!br->kept[i]) continue;
      xs.push_back(br->alphas[i]);
      ys.push_back(std::log(br->mean[i]));
      ss.push_back(br->mean[i] > 0 ? br->std_error[i] / br->mean[i] : 0);
    }
    if (xs.size() < 2) continue;
    const auto f = fit_linear(xs, ys, ss);
    br->fitted = true;
    br->c = std::min(1.0, std::exp(f.slope));
    br->c_err = br->c * f.slope_stderr;
    br->r2 = f.r2;
    br->bounded_below = br->c - 3.0 * br->c_err >= floor;
  }
  const bool a = rep.primal.bounded_below, b = rep.dual.bounded_below;
  rep.branch = a && b ? "Both" : a ? "PushPrimal" : b ? "PushDual" : "None";
  rep.anomaly = !a && !b;
  return rep;
}

nlohmann::json to_json(const DensityEstimate& d) {
  nlohmann::json j;
  j["density"] = d.which == Density::P ? "p_n" : "q_n";
  j["n"] = d.n;
  j["p"] = d.params.p;
  j["q"] = d.params.q;
  j["alphas"] = d.alphas;
  auto pts = nlohmann::json::array();
  for (std::size_t i = 0; i < d.alphas.size(); ++i) {
    pts.push_back({{"alpha", d.alphas[i]},
                   {"mean", d.mean[i]},
                   {"stderr", d.std_error[i]},
                   {"logp_hat", num(d.log_phi[i])},
                   {"log_stderr", num(d.log_err[i])},
                   {"kept", d.kept[i] != 0}});
  }
  j["points"] = pts;
  j["slope"] = d.slope;
  j["slope_err"] = d.slope_err;
  j["intercept"] = d.intercept;
  j["r2"] = d.r2;
  j["estimate"] = d.density;
  j["estimate_err"] = d.density_err;
  j["upper_bound"] = d.upper_bound;
  j["unreliable"] = d.unreliable;
  return j;
}

nlohmann::json to_json(const PushingReport& r) {
  auto branch = [](const PushingBranch& b) {
    auto pts = nlohmann::json::array();
    for (std::size_t i = 0; i < b.alphas.size(); ++i) {
      pts.push_back({{"alpha", b.alphas[i]}, {"mean", b.mean[i]}, {"stderr", b.std_error[i]}, {"kept", b.kept[i] != 0}});
    }
    return nlohmann::json{{"points", pts},   {"fitted", b.fitted},  {"c", b.c},
                          {"c_err", b.c_err}, {"r2", b.r2}, {"bounded_below", b.bounded_below}};
  };
  return {{"n", r.n},
          {"p", r.params.p},
          {"q", r.params.q},
          {"floor", r.floor},
          {"PushPrimal", branch(r.primal)},
          {"PushDual", branch(r.dual)},
          {"branch", r.branch},
          {"anomaly", r.anomaly}};
}

nlohmann::json to_json(const StripEstimate& s) {
  return {{"m", s.m},
          {"mean", s.estimate.mean},
          {"stderr", s.estimate.std_error},
          {"coarse_m", s.m / 2},
          {"coarse_mean", s.coarse.mean},
          {"coarse_stderr", s.coarse.std_error},
          {"converged", s.converged},
          {"doublings", s.doublings}};
}

}  // namespace rcquad
