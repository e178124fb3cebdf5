#include "commands.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "rcquad/classify.hpp"
#include "rcquad/events.hpp"
#include "rcquad/io.hpp"
#include "rcquad/strip.hpp"
#include "rcquad/suite.hpp"

namespace rcquad::cli {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxSnapshotEdges = 100000;

void write_json(const std::filesystem::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

Region region_of(const RunConfig& c, const json& sec, const std::string& key, const Rect& dflt) {
  const Rect r = sec.contains(key) ? rect_from_json(sec.at(key)) : dflt;
  return build_region(Lattice::by_name(c.lattice), r);
}

BoundaryCondition bc_of(const json& sec, const Region& region, std::string& label) {
  const json j = sec.contains("bc") ? sec.at("bc") : json("free");
  label = j.is_string() ? j.get<std::string>() : "custom";
  return bc_from_json(j, region);
}

std::vector<CrossingEvent> events_of(const json& sec) {
  std::vector<CrossingEvent> out;
  if (!sec.contains("events")) return out;
  const auto& arr = sec.at("events");
  if (!arr.is_array()) throw ConfigError("'events' must be an array of tables");
  for (const auto& e : arr) {
    if (!e.is_object()) throw ConfigError("'events' must be an array of tables");
    out.push_back(event_from_json(e));
  }
  return out;
}

// Either `alphas`, or integer `widths` read as alpha = width / n.
std::vector<double> alphas_of(const json& sec, int n, std::vector<double> dflt) {
  if (sec.contains("alphas") && sec.contains("widths")) throw ConfigError("give either 'alphas' or 'widths'");
  if (sec.contains("widths")) {
    std::vector<double> a;
    for (int w : get_ints(sec, "widths", {})) a.push_back(static_cast<double>(w) / n);
    return a;
  }
  return get_doubles(sec, "alphas", std::move(dflt));
}

ClassifyOptions classify_options(const RunConfig& c) {
  const auto& sec = c.section("classify");
  ClassifyOptions o;
  o.lattice = c.lattice;
  o.schedule = c.schedule;
  o.rare = c.rare;
  o.min_hits = c.min_hits;
  o.thresholds.delta = get_double(sec, "delta", o.thresholds.delta);
  o.thresholds.min_r2 = get_double(sec, "min_r2", o.thresholds.min_r2);
  o.thresholds.decayed = get_double(sec, "decayed", o.thresholds.decayed);
  o.thresholds.drift_sigma = get_double(sec, "drift_sigma", o.thresholds.drift_sigma);
  const auto mode = get_string(sec, "brackets", "auto");
  if (mode == "auto") o.brackets = BracketMode::Auto;
  else if (mode == "on") o.brackets = BracketMode::On;
  else if (mode == "off") o.brackets = BracketMode::Off;
  else throw ConfigError("'classify.brackets' must be auto, on or off");
  auto& b = o.bracket_schedule;
  b.burn_in = static_cast<std::uint64_t>(get_int(sec, "bracket_burn_in", static_cast<std::int64_t>(b.burn_in)));
  b.sweeps = static_cast<std::uint64_t>(get_int(sec, "bracket_sweeps", static_cast<std::int64_t>(b.sweeps)));
  b.chains = static_cast<std::uint64_t>(get_int(sec, "bracket_chains", static_cast<std::int64_t>(b.chains)));
  b.seed = c.seed;
  try {
    b.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("classify bracket schedule: ") + e.what());
  }
  return o;
}

std::string yes_no(bool b) { return b ? "1" : "0"; }

std::vector<std::string> estimate_row(const std::string& region, const std::string& bc, const ModelParams& params,
                                      const std::string& event, const Estimate& e, std::uint64_t seed,
                                      bool unreliable) {
  return {region,
          bc,
          format_number(params.p),
          format_number(params.q),
          event,
          format_number(e.mean),
          format_number(e.std_error),
          format_number(e.tau_int),
          std::to_string(e.n),
          std::to_string(seed),
          yes_no(unreliable)};
}

const std::vector<std::string> kEstimateColumns{"region", "bc",  "p",    "q",    "event",     "mean",
                                                "stderr", "tau_int", "n", "seed", "unreliable"};

}  // namespace

int cmd_exact_check(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& sec = c.section("exact_check");
  SuiteOptions opt;
  const auto max_edges = get_int(sec, "max_edges", 16);
  if (max_edges < 1 || max_edges > static_cast<std::int64_t>(kMaxExactEdges)) {
    throw ConfigError("'exact_check.max_edges' must lie in [1, " + std::to_string(kMaxExactEdges) + "]");
  }
  if (sec.contains("rects")) {
    if (!sec.at("rects").is_array()) throw ConfigError("'exact_check.rects' must be an array");
    opt.rects.clear();
    for (const auto& r : sec.at("rects")) opt.rects.push_back(rect_from_json(r));
  } else {
    opt.rects = default_corpus(static_cast<std::size_t>(max_edges));
  }
  if (sec.contains("bcs")) {
    if (!sec.at("bcs").is_array()) throw ConfigError("'exact_check.bcs' must be an array of names");
    opt.bcs.clear();
    for (const auto& b : sec.at("bcs")) {
      if (!b.is_string()) throw ConfigError("'exact_check.bcs' must be an array of names");
      opt.bcs.push_back(b.get<std::string>());
    }
  }
  opt.ps = get_doubles(sec, "p", opt.ps);
  opt.qs = get_doubles(sec, "q", opt.qs);
  const auto outer = get_int(sec, "smp_outer_samples", static_cast<std::int64_t>(opt.smp_outer_samples));
  if (outer < 0) throw ConfigError("'exact_check.smp_outer_samples' must be non-negative");
  opt.smp_outer_samples = static_cast<std::size_t>(outer);
  opt.seed = c.seed;
  opt.faults.flip_fkg = get_bool(sec, "inject_fkg_fault", false);

  const auto rep = run_identity_suite(opt);
  write_json(ctx.out / "exact_check.json", to_json(rep));
  auto& log = *ctx.log;
  if (rep.checks.empty()) {
    log << "warning: 0 checks (empty corpus)\n";
    return kOk;
  }
  log << "exact-check: " << rep.passed << " passed, " << rep.failed << " failed, worst margin "
      << format_number(rep.worst_margin) << "\n";
  if (!rep.ok()) {
    const auto& f = *rep.first_failure;
    log << "first failure: " << f.identity << " on " << rect_label(f.rect) << (f.bc.empty() ? "" : " " + f.bc)
        << " p=" << format_number(f.params.p) << " q=" << format_number(f.params.q) << " margin "
        << format_number(f.result.margin) << "\n";
    return kVerificationFailure;
  }
  return kOk;
}

int cmd_estimate(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& sec = c.section("estimate");
  auto events = events_of(sec);
  std::ostringstream csv;
  CsvWriter w(csv, kEstimateColumns);
  bool unreliable = false;

  if (sec.contains("strip")) {
    if (sec.contains("region") || sec.contains("bc")) {
      throw ConfigError("'estimate.strip' replaces 'estimate.region' and 'estimate.bc'");
    }
    if (events.empty()) throw ConfigError("'estimate.strip' needs 'estimate.events'");
    const auto& st = sec.at("strip");
    StripSpec spec;
    spec.n = static_cast<int>(get_int(st, "n", spec.n));
    spec.bc = strip_bc_from_string(get_string(st, "bc", "free"));
    spec.m = static_cast<int>(get_int(st, "m", 0));
    const auto doublings = get_int(st, "max_doublings", 1);
    if (doublings < 0) throw ConfigError("'estimate.strip.max_doublings' must be non-negative");
    json runs = json::array();
    for (const auto& ev : events) {
      const auto s = strip_estimate(spec, c.params, ev, c.schedule, static_cast<std::size_t>(doublings));
      StripSpec at = spec;
      at.m = s.m;
      const bool bad = s.estimate.unreliable || !s.converged;
      unreliable = unreliable || bad;
      w.row(estimate_row(rect_label(at.rect()), to_string(spec.bc), c.params, ev.label(), s.estimate, c.seed, bad));
      runs.push_back({{"event", to_json(ev)}, {"strip", to_json(s)}});
    }
    write_json(ctx.out / "estimate_strip.json", runs);
  } else {
    const auto region = region_of(c, sec, "region", {0, 4, 0, 3});
    std::string bc_label;
    const auto bc = bc_of(sec, region, bc_label);
    if (events.empty()) events.push_back(horizontal_crossing(region.rect));
    const bool multilevel = get_bool(sec, "multilevel", false);
    const auto opt = c.run_options(bc);
    for (const auto& ev : events) {
      Estimate e;
      if (multilevel) e = estimate_event_adaptive(region, bc, c.params, ev, c.schedule, c.rare, c.min_hits).first;
      else e = estimate_event(region, bc, c.params, ev, c.schedule, opt);
      unreliable = unreliable || e.unreliable;
      w.row(estimate_row(rect_label(region.rect), bc_label, c.params, ev.label(), e, c.seed, e.unreliable));
    }
  }
  write_file(ctx.out / "estimate.csv", csv.str());
  *ctx.log << "estimate: " << events.size() << " rows" << (unreliable ? ", some unreliable" : "") << "\n";
  return unreliable ? kUnreliable : kOk;
}

int cmd_snapshot(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& sec = c.section("snapshot");
  const auto region = region_of(c, sec, "region", {-4, 4, -4, 4});
  if (region.num_edges() > kMaxSnapshotEdges) {
    throw ConfigError("snapshot region has " + std::to_string(region.num_edges()) + " edges; the limit is " +
                      std::to_string(kMaxSnapshotEdges));
  }
  std::string bc_label;
  const auto bc = bc_of(sec, region, bc_label);
  const CrossingEvent ev =
      sec.contains("event") ? event_from_json(sec.at("event")) : horizontal_crossing(region.rect);
  SvgStyle style;
  style.scale = get_double(sec, "scale", style.scale);
  if (!(style.scale > 0)) throw ConfigError("'snapshot.scale' must be positive");

  auto opt = c.run_options(bc);
  opt.start_open = get_bool(sec, "start_open", false);
  Sampler sampler(region.graph, bc, c.params, c.seed);
  auto state = sampler.start(0, opt.start_open);
  const auto steps = c.schedule.burn_in + c.schedule.sweeps;
  for (std::uint64_t t = 0; t < steps; ++t) sampler.step(state, opt.dynamics);

  const CompiledEvent compiled(ev, region);
  const bool crossed = compiled(state.cfg);
  std::optional<CrossingPath> witness;
  if (crossed && !compiled.negated()) {
    if (const auto conn = compiled.positive_connection()) witness = connection_witness(*conn, state.cfg);
  }
  write_file(ctx.out / "snapshot.svg", render_svg(region, state.cfg, witness, style));
  std::size_t open = 0;
  for (EdgeId e = 0; e < region.num_edges(); ++e) open += state.cfg[e];
  write_json(ctx.out / "snapshot.json", {{"region", region_to_json(region)},
                                          {"bc", bc_label},
                                          {"p", c.params.p},
                                          {"q", c.params.q},
                                          {"seed", c.seed},
                                          {"dynamics", to_string(opt.dynamics)},
                                          {"steps", steps},
                                          {"event", to_json(ev)},
                                          {"crossed", crossed},
                                          {"open_edges", open},
                                          {"edges", region.num_edges()},
                                          {"witness_edges", witness ? json(witness->edges) : json(nullptr)}});
  *ctx.log << "snapshot: " << open << "/" << region.num_edges() << " open, " << ev.label()
           << (crossed ? " crossed" : " not crossed") << "\n";
  return kOk;
}

int cmd_classify(const Context& ctx) {
  const auto& c = ctx.config;
  const auto grid = get_ints(c.section("classify"), "n_grid", {4, 8, 16, 32});
  const auto v = classify(c.params, grid, classify_options(c));
  write_json(ctx.out / "classify.json", to_json(v));
  bool unreliable = false;
  for (const auto* cells : {&v.wired, &v.free}) {
    for (const auto& cell : *cells) unreliable = unreliable || cell.unreliable;
  }
  *ctx.log << "classify: p=" << format_number(c.params.p) << " q=" << format_number(c.params.q) << " -> "
           << to_string(v.verdict) << "\n";
  return unreliable ? kUnreliable : kOk;
}

int cmd_pc_scan(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& sec = c.section("pc_scan");
  const auto qs = get_doubles(sec, "q", {c.params.q});
  const double tol = get_double(sec, "tolerance", 0.02);
  const auto budget = get_int(sec, "budget", 12);
  if (!(tol > 0) || budget < 1) throw ConfigError("'pc_scan' needs a positive tolerance and budget");
  const auto grid = get_ints(sec, "n_grid", {2, 4, 8, 16});
  const double lo = get_double(sec, "p_lo", 0.05), hi = get_double(sec, "p_hi", 0.95);
  const auto opt = classify_options(c);

  std::ostringstream csv;
  CsvWriter w(csv, {"q", "p_lo", "p_hi", "selfdual_ref"});
  json scans = json::array();
  bool all_converged = true;
  for (double q : qs) {
    const auto s = pc_scan(q, tol, static_cast<std::size_t>(budget), grid, opt, lo, hi);
    w.row({format_number(s.q), format_number(s.p_lo), format_number(s.p_hi), format_number(s.selfdual_ref)});
    scans.push_back(to_json(s));
    all_converged = all_converged && s.converged;
    *ctx.log << "pc-scan: q=" << format_number(q) << " [" << format_number(s.p_lo) << ", " << format_number(s.p_hi)
             << "]" << (s.converged ? "" : " not converged") << "\n";
  }
  write_file(ctx.out / "phase.csv", csv.str());
  write_json(ctx.out / "pc_scan.json", scans);
  return all_converged ? kOk : kUnreliable;
}

int cmd_densities(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& sec = c.section("densities");
  const auto ns = get_ints(sec, "n", {3, 6});
  const auto which = get_string(sec, "which", "p");
  if (which != "p" && which != "q" && which != "both") throw ConfigError("'densities.which' must be p, q or both");
  const double lambda = get_double(sec, "lambda", 2.0);
  if (!(lambda > 0)) throw ConfigError("'densities.lambda' must be positive");

  std::vector<Density> kinds;
  if (which != "q") kinds.push_back(Density::P);
  if (which != "p") kinds.push_back(Density::Q);
  json fits = json::array();
  std::vector<DensityEstimate> p_est, q_est;
  bool unreliable = false;
  for (const auto kind : kinds) {
    std::ostringstream csv;
    CsvWriter w(csv, {"n", "alpha", "logp_hat", "stderr"});
    auto& store = kind == Density::P ? p_est : q_est;
    for (int n : ns) {
      std::vector<double> dflt;
      for (int k = 0; k <= 4; ++k) dflt.push_back(static_cast<double>(n + k) / n);
      const auto d = estimate_density(kind, n, c.params, alphas_of(sec, n, dflt), c.schedule, c.min_hits);
      for (std::size_t i = 0; i < d.alphas.size(); ++i) {
        w.row({std::to_string(n), format_number(d.alphas[i]), format_number(d.log_phi[i]),
               format_number(d.log_err[i])});
      }
      unreliable = unreliable || d.unreliable;
      fits.push_back(to_json(d));
      store.push_back(d);
    }
    write_file(ctx.out / (kind == Density::P ? "densities_p.csv" : "densities_q.csv"), csv.str());
  }

  auto index_of = [&](double target) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (std::abs(ns[i] - target) < 1e-9) return i;
    }
    return std::nullopt;
  };
  json power = json::array();
  bool verified = true;
  for (std::size_t i = 0; i < p_est.size(); ++i) {
    const auto j = index_of(lambda * ns[i]);
    if (!j) continue;
    const auto pc = check_power_monotonicity(lambda, p_est[i], p_est[*j]);
    verified = verified && pc.pass;
    power.push_back({{"n", ns[i]},
                     {"lambda_n", ns[*j]},
                     {"lhs", pc.lhs},
                     {"rhs", pc.rhs},
                     {"sigma", pc.sigma},
                     {"pass", pc.pass}});
  }
  json relation = nullptr;
  if (!p_est.empty() && !q_est.empty()) {
    std::vector<int> rel_n;
    std::vector<double> p_n, q_n, p_3n;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const auto j = index_of(3.0 * ns[i]);
      if (!j) continue;
      rel_n.push_back(ns[i]);
      p_n.push_back(p_est[i].density);
      q_n.push_back(q_est[i].density);
      p_3n.push_back(p_est[*j].density);
    }
    if (!rel_n.empty()) {
      const auto r = check_density_relation(lambda, rel_n, p_n, q_n, p_3n);
      relation = {{"lambda", r.lambda},
                  {"k", r.k},
                  {"n", r.ns},
                  {"lower_residual", r.lower_residual},
                  {"upper_residual", r.upper_residual}};
    }
  }
  write_json(ctx.out / "densities.json", {{"p", c.params.p},
                                           {"q", c.params.q},
                                           {"seed", c.seed},
                                           {"fits", fits},
                                           {"power_monotonicity", power},
                                           {"relation", relation}});
  *ctx.log << "densities: " << fits.size() << " fits" << (verified ? "" : ", power monotonicity violated")
           << (unreliable ? ", some unreliable" : "") << "\n";
  if (!verified) return kVerificationFailure;
  return unreliable ? kUnreliable : kOk;
}

int cmd_box_crossing(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& sec = c.section("box_crossing");
  const auto rhos = get_ints(sec, "rho", {1, 2});
  const auto grid = get_ints(sec, "n_grid", {8, 16, 32});
  const double delta = get_double(sec, "delta", 0.02);
  std::ostringstream csv;
  CsvWriter w(csv, {"rho", "bc", "n", "mean", "stderr", "tau_int", "samples", "unreliable"});
  json reports = json::array();
  bool pass = true, unreliable = false;
  for (int rho : rhos) {
    const auto r = box_crossing_check(c.params, rho, grid, c.schedule, delta, c.lattice);
    for (const auto& row : r.rows) {
      const auto& e = row.estimate;
      w.row({std::to_string(rho), row.bc, std::to_string(row.n), format_number(e.mean), format_number(e.std_error),
             format_number(e.tau_int), std::to_string(e.n), yes_no(e.unreliable)});
      unreliable = unreliable || e.unreliable;
    }
    pass = pass && r.pass;
    reports.push_back(to_json(r));
  }
  write_file(ctx.out / "box_crossing.csv", csv.str());
  write_json(ctx.out / "box_crossing.json", reports);
  *ctx.log << "box-crossing: " << (pass ? "all estimates inside the band" : "estimate outside the band") << "\n";
  if (!pass) return kVerificationFailure;
  return unreliable ? kUnreliable : kOk;
}

int cmd_one_arm(const Context& ctx) {
  const auto& c = ctx.config;
  const auto grid = get_ints(c.section("one_arm"), "n_grid", {4, 8, 16, 32, 64});
  const auto r = one_arm_scan(c.params, grid, c.schedule, c.rare, c.min_hits);
  std::ostringstream csv;
  CsvWriter w(csv, {"n", "log_prob", "log_stderr"});
  for (std::size_t i = 0; i < r.n_grid.size(); ++i) {
    w.row({std::to_string(r.n_grid[i]), format_number(r.log_prob[i]), format_number(r.log_err[i])});
  }
  write_file(ctx.out / "one_arm.csv", csv.str());
  write_json(ctx.out / "one_arm.json", to_json(r));
  *ctx.log << "one-arm: slope " << format_number(r.power_fit.slope) << ", preferred " << r.preferred << "\n";
  return r.unreliable ? kUnreliable : kOk;
}

int cmd_pushing_probe(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& sec = c.section("pushing_probe");
  const int n = static_cast<int>(get_int(sec, "n", 6));
  const double floor = get_double(sec, "floor", 0.02);
  const auto r = pushing_probe(n, alphas_of(sec, n, {1, 2, 3, 4}), c.params, c.schedule, floor, c.min_hits);
  write_json(ctx.out / "pushing_probe.json", to_json(r));
  *ctx.log << "pushing-probe: branch " << r.branch << (r.anomaly ? " (anomaly)" : "") << "\n";
  return r.anomaly ? kVerificationFailure : kOk;
}

}  // namespace rcquad::cli
