#include "rcquad/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rcquad {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Rect box(int n) { return {-n, n, -n, n}; }

double safe_log(double x) { return x > 0 ? std::log(x) : kNegInf; }

// null for -inf / nan so that JSON stays valid
nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

struct Host {
  Region region;
  CrossingEvent event;
  BoundaryCondition bc;
  bool wired = false;
};

CellEstimate direct_cell(const Host& h, int n, const ModelParams& params, const Schedule& sch) {
  RunOptions ro = default_options(params, h.bc);
  ro.start_open = h.wired;
  const auto e = estimate_event(h.region, h.bc, params, h.event, sch, ro);
  CellEstimate c;
  c.n = n;
  c.mean = e.mean;
  c.std_error = e.std_error;
  c.unreliable = e.unreliable;
  c.n_eff = static_cast<double>(e.n) / (2.0 * e.tau_int);
  c.log_value = safe_log(e.mean);
  c.log_value_err = e.mean > 0 ? e.std_error / e.mean : 0;
  c.log_complement = safe_log(1 - e.mean);
  c.log_complement_err = e.mean < 1 ? e.std_error / (1 - e.mean) : 0;
  return c;
}

// Replaces a poorly resolved tail (event or complement) by a multilevel estimate.
void refine(CellEstimate& c, const Host& h, const ModelParams& params, const ClassifyOptions& opt, bool complement) {
  const double tail = complement ? 1 - c.mean : c.mean;
  if (tail * c.n_eff >= opt.min_hits || params.degenerate()) return;
  CrossingEvent ev = h.event;
  if (complement) ev.kind = EventKind::Hc;
  CompiledEvent ce(ev, h.region);
  const auto conn = ce.positive_connection();
  if (!conn) return;
  const auto r = estimate_rare(h.region.graph, h.bc, params, *conn, opt.schedule, opt.rare);
  if (r.unreliable) c.unreliable = true;
  if (complement) {
    c.log_complement = r.log_prob;
    c.log_complement_err = r.log_stderr;
    c.complement_multilevel = true;
  } else {
    c.log_value = r.log_prob;
    c.log_value_err = r.log_stderr;
    c.multilevel = true;
  }
}

DecayFit decay_fit(const std::vector<int>& ns, const std::vector<double>& logs, const Thresholds& th) {
  DecayFit d;
  for (double v : logs) {
    if (!std::isfinite(v)) return d;
  }
  std::vector<double> x(ns.begin(), ns.end());
  d.fit = fit_linear(x, logs);
  d.available = true;
  d.decays = d.fit.slope < 0 && d.fit.r2 >= th.min_r2 && std::exp(logs.back()) < th.decayed;
  return d;
}

Bracket bracket_for(const Host& h, int n, const ModelParams& params, const Schedule& sch) {
  const auto pr = monotone_pair_run(h.region, h.bc, h.bc, params, h.event, sch);
  return {n, pr.low.mean, pr.low.std_error, pr.high.mean, pr.high.std_error};
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::SubCrit: return "SubCrit";
    case Verdict::SupCrit: return "SupCrit";
    case Verdict::ContCrit: return "ContCrit";
    case Verdict::DiscontCrit: return "DiscontCrit";
    case Verdict::Undecided: return "Undecided";
  }
  return "Undecided";
}

bool has_drift(const std::vector<double>& mean, const std::vector<double>& err, double sigma) {
  const std::size_t k = mean.size();
  if (k < 2) return false;
  int sign = 0;
  for (std::size_t i = 1; i < k; ++i) {
    const double d = mean[i] - mean[i - 1];
    const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) return false;
    sign = s;
  }
  const bool total = std::abs(mean.back() - mean.front()) > sigma * std::hypot(err.back(), err.front());
  const bool last = std::abs(mean[k - 1] - mean[k - 2]) > sigma * std::hypot(err[k - 1], err[k - 2]);
  return total && last;
}

PhaseVerdict classify(const ModelParams& params, const std::vector<int>& n_grid, const ClassifyOptions& opt) {
  params.validate();
  if (params.q < 1) throw ParameterError("classify needs q >= 1");
  opt.schedule.validate();
  if (n_grid.size() < 4) throw ScheduleError("classify: the n-grid needs at least four points");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
      throw ScheduleError("classify: the n-grid must be positive and strictly increasing");
    }
  }
  const auto& th = opt.thresholds;
  PhaseVerdict v;
  v.params = params;
  v.n_grid = n_grid;
  v.thresholds = th;
  const auto lattice = Lattice::by_name(opt.lattice);

  std::vector<Host> free_hosts, wired_hosts;
  for (int n : n_grid) {
    Host f;
    f.region = build_region(lattice, box(2 * n));
    f.event = horizontal_crossing(box(n));
    f.bc = BoundaryCondition::free(f.region.graph);
    Host w = f;
    w.bc = BoundaryCondition::wired(w.region.graph);
    w.wired = true;
    free_hosts.push_back(std::move(f));
    wired_hosts.push_back(std::move(w));
  }
  // Distinct seeds per cell keep the cells independent.
  auto cell_schedule = [&](std::size_t i, int which) {
    Schedule s = opt.schedule;
    s.seed = mix64(opt.schedule.seed ^ mix64(i * 2 + static_cast<std::uint64_t>(which)));
    return s;
  };
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    v.free.push_back(direct_cell(free_hosts[i], n_grid[i], params, cell_schedule(i, 0)));
    v.wired.push_back(direct_cell(wired_hosts[i], n_grid[i], params, cell_schedule(i, 1)));
  }

  const bool cand_a = v.wired.back().mean < th.decayed;
  const bool cand_b = 1 - v.free.back().mean < th.decayed;
  const bool cand_c = v.free.back().mean < th.decayed && 1 - v.wired.back().mean < th.decayed;
  auto refined = [&](bool complement, bool wired) {
    ClassifyOptions o = opt;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      o.schedule = cell_schedule(i, wired ? 1 : 0);
      auto& cell = wired ? v.wired[i] : v.free[i];
      refine(cell, wired ? wired_hosts[i] : free_hosts[i], params, o, complement);
    }
  };
  if (cand_a || cand_c) refined(false, true);
  if (cand_b || cand_c) refined(true, false);
  if (cand_c) {
    refined(false, false);
    refined(true, true);
  }

  auto logs = [&](const std::vector<CellEstimate>& cells, bool complement) {
    std::vector<double> out;
    for (const auto& c : cells) out.push_back(complement ? c.log_complement : c.log_value);
    return out;
  };
  v.wired_decay = decay_fit(n_grid, logs(v.wired, false), th);
  v.free_complement_decay = decay_fit(n_grid, logs(v.free, true), th);
  v.free_decay = decay_fit(n_grid, logs(v.free, false), th);
  v.wired_complement_decay = decay_fit(n_grid, logs(v.wired, true), th);

  auto means = [](const std::vector<CellEstimate>& cells) {
    std::vector<double> m, e;
    for (const auto& c : cells) {
      m.push_back(c.mean);
      e.push_back(c.std_error);
    }
    return std::pair{m, e};
  };
  {
    const auto [mf, ef] = means(v.free);
    const auto [mw, ew] = means(v.wired);
    v.free_drift = has_drift(mf, ef, th.drift_sigma);
    v.wired_drift = has_drift(mw, ew, th.drift_sigma);
  }

  const bool want_brackets =
      cand_c && (opt.brackets == BracketMode::On || (opt.brackets == BracketMode::Auto && params.q > 4));
  bool rule_c = v.free_decay.decays && v.wired_complement_decay.decays;
  if (want_brackets) {
    v.brackets_separate = true;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      Schedule bs = opt.bracket_schedule;
      bs.seed = mix64(opt.bracket_schedule.seed ^ mix64(1000 + i));
      v.free_brackets.push_back(bracket_for(free_hosts[i], n_grid[i], params, bs));
      v.wired_brackets.push_back(bracket_for(wired_hosts[i], n_grid[i], params, bs));
      const auto& f = v.free_brackets.back();
      const auto& w = v.wired_brackets.back();
      if (!(f.high + th.drift_sigma * f.high_err < w.low - th.drift_sigma * w.low_err)) v.brackets_separate = false;
    }
    rule_c = rule_c && v.brackets_separate;
  }

  const bool rule_a = v.wired_decay.decays;
  const bool rule_b = v.free_complement_decay.decays;
  const int fired = int(rule_a) + int(rule_b) + int(rule_c);
  bool in_band = true;
  for (const auto* cells : {&v.free, &v.wired}) {
    for (const auto& c : *cells) {
      if (c.mean < th.delta || c.mean > 1 - th.delta) in_band = false;
    }
  }
  bool unreliable = false;
  for (const auto* cells : {&v.free, &v.wired}) {
    for (const auto& c : *cells) unreliable = unreliable || c.unreliable;
  }

  if (fired > 1) {
    v.verdict = Verdict::Undecided;
    v.note = "conflicting decay rules";
  } else if (rule_a) {
    v.verdict = Verdict::SubCrit;
  } else if (rule_b) {
    v.verdict = Verdict::SupCrit;
  } else if (rule_c) {
    v.verdict = Verdict::DiscontCrit;
  } else if (in_band && !v.free_drift && !v.wired_drift) {
    v.verdict = Verdict::ContCrit;
  } else {
    v.verdict = Verdict::Undecided;
    v.note = in_band ? "monotone drift in n" : "estimates leave the band without a decay fit";
  }
  if (unreliable && v.verdict != Verdict::Undecided) {
    v.note = "unreliable estimate (tau_int above a tenth of the window) overrides " + to_string(v.verdict);
    v.verdict = Verdict::Undecided;
  }
  if (v.note.empty()) {
    v.note = "thresholds: delta=" + std::to_string(th.delta) + ", R2>=" + std::to_string(th.min_r2) +
             ", decayed<" + std::to_string(th.decayed) + " (artifact constants)";
  }
  return v;
}

BoxCrossingReport box_crossing_check(const ModelParams& params, int rho, const std::vector<int>& n_grid,
                                     const Schedule& schedule, double delta, const std::string& lattice) {
  if (rho < 1) throw ScheduleError("box crossing: rho must be a positive integer");
  BoxCrossingReport rep;
  rep.params = params;
  rep.rho = rho;
  rep.n_grid = n_grid;
  rep.delta = delta;
  const auto lat = Lattice::by_name(lattice);
  std::uint64_t k = 0;
  for (const char* bcname : {"free", "wired"}) {
    for (int n : n_grid) {
      const auto region = build_region(lat, {-n, (rho + 1) * n, -n, 2 * n});
      const auto bc = BoundaryCondition::named(bcname, region);
      Schedule s = schedule;
      s.seed = mix64(schedule.seed ^ mix64(++k));
      const auto e = estimate_event(region, bc, params, horizontal_crossing({0, rho * n, 0, n}), s);
      rep.rows.push_back({bcname, n, e});
      if (e.mean < rep.min_value || rep.rows.size() == 1) {
        rep.min_value = e.mean;
        rep.min_err = e.std_error;
      }
      if (e.mean > rep.max_value || rep.rows.size() == 1) {
        rep.max_value = e.mean;
        rep.max_err = e.std_error;
      }
    }
  }
  rep.pass = rep.min_value >= delta && rep.max_value <= 1 - delta;
  return rep;
}

OneArmReport one_arm_scan(const ModelParams& params, const std::vector<int>& n_grid, const Schedule& schedule,
                          const RareOptions& rare, double min_hits) {
  if (n_grid.size() < 2) throw ScheduleError("one-arm scan: need at least two values of n");
  OneArmReport rep;
  rep.params = params;
  rep.n_grid = n_grid;
  const int nmax = *std::max_element(n_grid.begin(), n_grid.end());
  rep.host_half_width = 4 * nmax;
  const auto host = build_region(Lattice::square(), box(rep.host_half_width));
  const auto bc = BoundaryCondition::wired(host.graph);
  const CompiledEvent ce(one_arm(nmax), host);
  const auto conn = *ce.positive_connection();

  ObservableSpec obs;
  obs.count = n_grid.size();
  obs.make = [&conn, n_grid]() {
    auto search = std::make_shared<ConnectionSearch>();
    return std::function<void(const Configuration&, double*)>([search, &conn, n_grid](const Configuration& c,
                                                                                     double* out) {
      const auto r = search->reach(conn, c);
      for (std::size_t i = 0; i < n_grid.size(); ++i) out[i] = r >= n_grid[i] ? 1.0 : 0.0;
    });
  };
  RunOptions ro = default_options(params, bc);
  ro.start_open = true;
  const auto est = estimate_observables(host.graph, bc, params, obs, schedule, ro);
  bool rare_needed = false;
  for (const auto& e : est) {
    rep.unreliable = rep.unreliable || e.unreliable;
    if (e.mean * static_cast<double>(e.n) / (2 * e.tau_int) < min_hits) rare_needed = true;
  }
  if (rare_needed && !params.degenerate()) {
    const auto r = estimate_rare(host.graph, bc, params, conn, schedule, rare);
    rep.multilevel = true;
    rep.unreliable = r.unreliable;
    for (int n : n_grid) {
      rep.log_prob.push_back(r.log_tail[n]);
      rep.log_err.push_back(r.log_tail_stderr[n]);
    }
  } else {
    for (const auto& e : est) {
      rep.log_prob.push_back(safe_log(e.mean));
      rep.log_err.push_back(e.mean > 0 ? e.std_error / e.mean : 0);
    }
  }
  bool finite = true;
  for (double x : rep.log_prob) finite = finite && std::isfinite(x);
  if (!finite) {
    rep.unreliable = true;
    rep.preferred = "none";
    return rep;
  }
  std::vector<double> xn, xl;
  for (int n : n_grid) {
    xn.push_back(n);
    xl.push_back(std::log(static_cast<double>(n)));
  }
  rep.power_fit = fit_linear(xl, rep.log_prob);
  rep.exponential_fit = fit_linear(xn, rep.log_prob);
  rep.aic_power = aic(rep.power_fit.rss, n_grid.size(), 2);
  rep.aic_exponential = aic(rep.exponential_fit.rss, n_grid.size(), 2);
  rep.preferred = rep.aic_exponential < rep.aic_power ? "exponential" : "power";
  return rep;
}

PcScan pc_scan(double q, double tolerance, std::size_t budget, const std::vector<int>& n_grid,
               const ClassifyOptions& opt, double p_lo, double p_hi) {
  if (q < 1) throw ParameterError("pc scan needs q >= 1");
  if (!(tolerance > 0) || !(0 < p_lo && p_lo < p_hi && p_hi < 1)) {
    throw ScheduleError("pc scan: need 0 < p_lo < p_hi < 1 and a positive tolerance");
  }
  PcScan s;
  s.q = q;
  s.selfdual_ref = self_dual_point(q);
  s.p_lo = p_lo;
  s.p_hi = p_hi;
  std::size_t step = 0;
  while (s.p_hi - s.p_lo > tolerance && step < budget) {
    const double p = 0.5 * (s.p_lo + s.p_hi);
    ClassifyOptions o = opt;
    o.schedule.seed = mix64(opt.schedule.seed ^ mix64(0x5ca9 + step));
    const auto v = classify({p, q}, n_grid, o);
    PcScanStep st;
    st.p = p;
    st.verdict = v.verdict;
    const auto& f = v.free.back();
    const auto& w = v.wired.back();
    st.score = 0.5 * (f.mean + w.mean) - 0.5;
    st.score_err = 0.5 * std::hypot(f.std_error, w.std_error);
    if (v.verdict == Verdict::SubCrit) st.side = -1;
    else if (v.verdict == Verdict::SupCrit) st.side = 1;
    else {
      st.tiebreak = true;
      st.side = st.score < 0 ? -1 : 1;
    }
    if (st.side < 0) s.p_lo = p;
    else s.p_hi = p;
    s.history.push_back(st);
    ++step;
  }
  s.converged = s.p_hi - s.p_lo <= tolerance;
  return s;
}

namespace {

nlohmann::json cell_json(const CellEstimate& c) {
  return {{"n", c.n},
          {"mean", c.mean},
          {"stderr", c.std_error},
          {"log_value", num(c.log_value)},
          {"log_value_err", num(c.log_value_err)},
          {"log_complement", num(c.log_complement)},
          {"log_complement_err", num(c.log_complement_err)},
          {"multilevel", c.multilevel},
          {"complement_multilevel", c.complement_multilevel},
          {"unreliable", c.unreliable}};
}

nlohmann::json fit_json(const DecayFit& d) {
  if (!d.available) return {{"available", false}};
  return {{"available", true},   {"slope", d.fit.slope}, {"slope_err", d.fit.slope_stderr},
          {"intercept", d.fit.intercept}, {"r2", d.fit.r2}, {"decays", d.decays}};
}

nlohmann::json bracket_json(const std::vector<Bracket>& bs) {
  auto a = nlohmann::json::array();
  for (const auto& b : bs) {
    a.push_back({{"n", b.n}, {"low", b.low}, {"low_err", b.low_err}, {"high", b.high}, {"high_err", b.high_err}});
  }
  return a;
}

}  // namespace

nlohmann::json to_json(const PhaseVerdict& v) {
  nlohmann::json j;
  j["verdict"] = to_string(v.verdict);
  j["p"] = v.params.p;
  j["q"] = v.params.q;
  j["n_grid"] = v.n_grid;
  auto cells = [](const std::vector<CellEstimate>& cs) {
    auto a = nlohmann::json::array();
    for (const auto& c : cs) a.push_back(cell_json(c));
    return a;
  };
  j["wired"] = cells(v.wired);
  j["free"] = cells(v.free);
  j["fits"] = {{"log_wired", fit_json(v.wired_decay)},
               {"log_one_minus_free", fit_json(v.free_complement_decay)},
               {"log_free", fit_json(v.free_decay)},
               {"log_one_minus_wired", fit_json(v.wired_complement_decay)}};
  j["drift"] = {{"free", v.free_drift}, {"wired", v.wired_drift}};
  if (!v.free_brackets.empty()) {
    j["brackets"] = {{"free", bracket_json(v.free_brackets)},
                     {"wired", bracket_json(v.wired_brackets)},
                     {"separate", v.brackets_separate}};
  }
  j["thresholds"] = {{"delta", v.thresholds.delta},
                     {"min_r2", v.thresholds.min_r2},
                     {"decayed", v.thresholds.decayed},
                     {"drift_sigma", v.thresholds.drift_sigma}};
  j["note"] = v.note;
  return j;
}

nlohmann::json to_json(const BoxCrossingReport& r) {
  nlohmann::json j;
  j["p"] = r.params.p;
  j["q"] = r.params.q;
  j["rho"] = r.rho;
  j["n_grid"] = r.n_grid;
  auto rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"bc", row.bc},
                    {"n", row.n},
                    {"mean", row.estimate.mean},
                    {"stderr", row.estimate.std_error},
                    {"tau_int", row.estimate.tau_int},
                    {"unreliable", row.estimate.unreliable}});
  }
  j["rows"] = rows;
  j["min"] = {{"value", r.min_value}, {"stderr", r.min_err}};
  j["max"] = {{"value", r.max_value}, {"stderr", r.max_err}};
  j["delta"] = r.delta;
  j["pass"] = r.pass;
  return j;
}

nlohmann::json to_json(const OneArmReport& r) {
  nlohmann::json j;
  j["p"] = r.params.p;
  j["q"] = r.params.q;
  j["n_grid"] = r.n_grid;
  j["host_half_width"] = r.host_half_width;
  auto lp = nlohmann::json::array(), le = nlohmann::json::array();
  for (std::size_t i = 0; i < r.log_prob.size(); ++i) {
    lp.push_back(num(r.log_prob[i]));
    le.push_back(num(r.log_err[i]));
  }
  j["log_prob"] = lp;
  j["log_err"] = le;
  j["multilevel"] = r.multilevel;
  j["unreliable"] = r.unreliable;
  j["power_fit"] = {{"slope", r.power_fit.slope}, {"slope_err", r.power_fit.slope_stderr}, {"r2", r.power_fit.r2}};
  j["exponential_fit"] = {
      {"slope", r.exponential_fit.slope}, {"slope_err", r.exponential_fit.slope_stderr}, {"r2", r.exponential_fit.r2}};
  j["aic"] = {{"power", num(r.aic_power)}, {"exponential", num(r.aic_exponential)}};
  j["preferred"] = r.preferred;
  return j;
}

nlohmann::json to_json(const PcScan& s) {
  nlohmann::json j;
  j["q"] = s.q;
  j["p_lo"] = s.p_lo;
  j["p_hi"] = s.p_hi;
  j["selfdual_ref"] = s.selfdual_ref;
  j["converged"] = s.converged;
  auto h = nlohmann::json::array();
  for (const auto& st : s.history) {
    h.push_back({{"p", st.p},
                 {"verdict", to_string(st.verdict)},
                 {"side", st.side},
                 {"tiebreak", st.tiebreak},
                 {"score", st.score},
                 {"score_err", st.score_err}});
  }
  j["history"] = h;
  return j;
}

}  // namespace rcquad
