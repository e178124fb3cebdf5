#include "rcquad/suite.hpp"

#include <map>

#include "rcquad/events.hpp"
#include "rcquad/rng.hpp"

namespace rcquad {

std::vector<Rect> default_corpus(std::size_t max_edges) {
  std::vector<Rect> out;
  for (int w = 0; w <= 2 * static_cast<int>(max_edges); ++w) {
    for (int h = 0; h <= 2 * static_cast<int>(max_edges); ++h) {
      // inner edges plus one pendant per boundary vertex side
      const auto edges = static_cast<std::size_t>(w * (h + 1) + h * (w + 1) + 2 * (w + 1) + 2 * (h + 1));
      if (edges <= max_edges) out.push_back({0, w, 0, h});
    }
  }
  return out;
}

namespace {

struct Recorder {
  SuiteReport& rep;
  void add(std::string identity, const Rect& r, std::string bc, const ModelParams& mp, std::string detail,
           const Verification& v) {
    SuiteCheck c{std::move(identity), r, std::move(bc), mp, std::move(detail), v};
    if (v.pass) ++rep.passed;
    else {
      ++rep.failed;
      if (!rep.first_failure) rep.first_failure = c;
    }
    rep.worst_margin = std::min(rep.worst_margin, v.margin);
    rep.checks.push_back(std::move(c));
  }
};

}  // namespace

SuiteReport run_identity_suite(const SuiteOptions& opt) {
  SuiteReport rep;
  Recorder rec{rep};
  const auto lat = Lattice::square();
  StreamRng rng(opt.seed, 0, 0);
  for (const Rect& rect : opt.rects) {
    const auto region = build_region(lat, rect);
    if (region.num_edges() > kMaxExactEdges) {
      throw OracleError("corpus region " + rect_label(rect) + " has more than 24 edges");
    }
    const auto h = CompiledEvent(horizontal_crossing(rect), region).predicate();
    const auto v = CompiledEvent(vertical_crossing(rect), region).predicate();
    const auto e0 = edge_open_event(0);
    const auto e1 = edge_open_event(static_cast<EdgeId>(region.num_edges() - 1));

    std::map<std::string, BoundaryCondition> bcs;
    std::map<std::string, ExactDistribution> base;
    for (const auto& name : opt.bcs) {
      bcs.emplace(name, BoundaryCondition::named(name, region));
      base.emplace(name, enumerate(region, bcs.at(name), {0.5, 1.0}));
    }

    // SMP: drop the first column (or row) of the rectangle.
    std::optional<Region> sub;
    if (rect.width() > 0) sub = build_region(lat, {rect.a + 1, rect.b, rect.c, rect.d});
    else if (rect.height() > 0) sub = build_region(lat, {rect.a, rect.b, rect.c + 1, rect.d});
    std::vector<Configuration> outers;
    outers.emplace_back(region.num_edges(), false);
    outers.emplace_back(region.num_edges(), true);
    for (std::size_t k = 0; k < opt.smp_outer_samples; ++k) {
      Configuration c(region.num_edges());
      for (EdgeId e = 0; e < region.num_edges(); ++e) c.set(e, rng.uniform() < 0.5);
      outers.push_back(c);
    }
    const auto dm = dual_of(region);

    for (double p : opt.ps) {
      for (double q : opt.qs) {
        const ModelParams mp{p, q};
        std::map<std::string, ExactDistribution> dist;
        for (const auto& [name, d] : base) dist.emplace(name, d.with_params(mp));

        for (const auto& [name, d] : dist) {
          rec.add("FKG", rect, name, mp, "H,V", verify_fkg(d, h, v, opt.faults));
          rec.add("FKG", rect, name, mp, "e0,elast", verify_fkg(d, e0, e1, opt.faults));
          if (sub) {
            for (std::size_t k = 0; k < outers.size(); ++k) {
              rec.add("SMP", rect, name, mp, "outer#" + std::to_string(k), verify_smp(d, region, *sub, outers[k]));
            }
          }
        }
        for (const auto& [xi, dx] : dist) {
          for (const auto& [zeta, dz] : dist) {
            if (xi == zeta || !bc_dominates(bcs.at(xi), bcs.at(zeta))) continue;
            rec.add("CBC", rect, xi + "<=" + zeta, mp, "H", verify_cbc(dx, dz, h));
            rec.add("CBC", rect, xi + "<=" + zeta, mp, "V", verify_cbc(dx, dz, v));
          }
        }
        if (dist.count("mix") && dist.count("star-mix")) {
          rec.add("FI", rect, "mix/star-mix", mp, "H", verify_fi(dist.at("mix"), dist.at("star-mix"), h));
          rec.add("FI", rect, "mix/star-mix", mp, "e0", verify_fi(dist.at("mix"), dist.at("star-mix"), e0));
        }
        rec.add("DUAL", rect, "wired", mp, "H", verify_duality(region.graph, dm, mp, h, DualPairing::WiredPrimal));
        rec.add("DUAL", rect, "free", mp, "H", verify_duality(region.graph, dm, mp, h, DualPairing::FreePrimal));
      }
    }
  }
  return rep;
}

nlohmann::json to_json(const SuiteCheck& c) {
  return {{"identity", c.identity},
          {"region", rect_label(c.rect)},
          {"bc", c.bc},
          {"p", c.params.p},
          {"q", c.params.q},
          {"detail", c.detail},
          {"lhs", c.result.lhs},
          {"rhs", c.result.rhs},
          {"margin", c.result.margin},
          {"pass", c.result.pass}};
}

nlohmann::json to_json(const SuiteReport& r, bool include_checks) {
  nlohmann::json j{{"checks_run", r.checks.size()},
                   {"passed", r.passed},
                   {"failed", r.failed},
                   {"worst_margin", r.worst_margin},
                   {"first_failure", r.first_failure ? to_json(*r.first_failure) : nlohmann::json(nullptr)}};
  if (include_checks) {
    auto arr = nlohmann::json::array();
    for (const auto& c : r.checks) arr.push_back(to_json(c));
    j["checks"] = arr;
  }
  return j;
}

}  // namespace rcquad
