// Parallel kernels against their serial references: timings plus an equality
// check of the results, which must agree bit for bit.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include <CLI11.hpp>

#include "rcquad/events.hpp"
#include "rcquad/exact.hpp"
#include "rcquad/sampler.hpp"

using namespace rcquad;

namespace {

double seconds(const std::function<void()>& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

bool same(const std::vector<Estimate>& a, const std::vector<Estimate>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].mean != b[i].mean || a[i].std_error != b[i].std_error || a[i].chain_means != b[i].chain_means) {
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rcquad kernel benchmark"};
  int w = 2, h = 2, grid = 16, reps = 3;
  std::uint64_t sweeps = 4000, chains = 8;
  app.add_option("--enum-width", w, "width of the enumerated rectangle");
  app.add_option("--enum-height", h, "height of the enumerated rectangle");
  app.add_option("--grid", grid, "half-width of the sampled box");
  app.add_option("--sweeps", sweeps, "sweeps per chain");
  app.add_option("--chains", chains, "chains");
  app.add_option("--reps", reps, "repetitions (best time kept)");
  CLI11_PARSE(app, argc, argv);

  std::printf("threads %d\n", omp_get_max_threads());
  bool ok = true;

  {
    const auto r = build_region(Lattice::square(), {0, w, 0, h});
    const auto bc = BoundaryCondition::wired(r.graph);
    const ModelParams params{0.5, 2.0};
    std::optional<ExactDistribution> par, ser;
    const double tp = seconds([&] { par.emplace(enumerate(r, bc, params)); }, reps);
    const double ts = seconds([&] { ser.emplace(enumerate_serial(r.graph, bc, params)); }, reps);
    const bool eq = par->clusters() == ser->clusters();
    ok = ok && eq;
    std::printf("enumerate %zu edges: parallel %.4fs serial %.4fs speedup %.2f %s\n", r.num_edges(), tp, ts, ts / tp,
                eq ? "equal" : "MISMATCH");
  }

  {
    const auto r = build_region(Lattice::square(), {-grid, grid, -grid, grid});
    const auto bc = BoundaryCondition::free(r.graph);
    const ModelParams params{self_dual_point(2.0), 2.0};
    const auto obs = event_observable(horizontal_crossing({-grid / 2, grid / 2, -grid / 2, grid / 2}), r);
    Schedule s;
    s.burn_in = 100;
    s.sweeps = sweeps;
    s.chains = chains;
    for (const auto dyn : {Dynamics::Glauber, Dynamics::ChayesMachta}) {
      const RunOptions opt{dyn, false};
      std::vector<Estimate> par, ser;
      const double tp = seconds([&] { par = estimate_observables(r.graph, bc, params, obs, s, opt); }, reps);
      const double ts = seconds([&] { ser = estimate_observables_serial(r.graph, bc, params, obs, s, opt); }, reps);
      const bool eq = same(par, ser);
      ok = ok && eq;
      std::printf("estimate %s %zu edges x %llu chains: parallel %.4fs serial %.4fs speedup %.2f %s\n",
                  to_string(dyn).c_str(), r.num_edges(), static_cast<unsigned long long>(chains), tp, ts, ts / tp,
                  eq ? "equal" : "MISMATCH");
    }
  }
  return ok ? 0 : 1;
}
