#include <doctest.h>

#include <cmath>

#include "rcquad/strip.hpp"

using namespace rcquad;

namespace {

Schedule sched(std::uint64_t sweeps, std::uint64_t chains = 4, std::uint64_t seed = 11, std::uint64_t burn = 100) {
  Schedule s;
  s.sweeps = sweeps;
  s.chains = chains;
  s.seed = seed;
  s.burn_in = burn;
  return s;
}

const std::vector<double> kAlphas{1, 2, 3, 4};

}  // namespace

TEST_CASE("strip bc names round-trip") {
  for (auto b : {StripBc::Free, StripBc::Wired, StripBc::Dobrushin}) CHECK(strip_bc_from_string(to_string(b)) == b);
  CHECK_THROWS_AS(strip_bc_from_string("mix"), BoundaryError);
}

TEST_CASE("strip estimate") {
  const CrossingEvent h = horizontal_crossing({0, 2, 0, 1});

  SUBCASE("q=1 truncation irrelevant") {
    const auto s = strip_estimate({1, StripBc::Wired, 4}, {0.5, 1.0}, h, sched(4000));
    CHECK(s.converged);
    CHECK(s.m == 8);
    CHECK(std::abs(s.estimate.mean - s.coarse.mean) <= 3 * std::hypot(s.estimate.std_error, s.coarse.std_error));
  }
  SUBCASE("p=0 all-closed values") {
    for (auto b : {StripBc::Free, StripBc::Wired, StripBc::Dobrushin}) {
      const auto s = strip_estimate({1, b, 4}, {0.0, 2.0}, h, sched(200));
      CHECK(s.estimate.mean == 0.0);
      CHECK(s.converged);
    }
    CrossingEvent hc = h;
    hc.kind = EventKind::Hc;
    CHECK(strip_estimate({1, StripBc::Free, 4}, {0.0, 2.0}, hc, sched(200)).estimate.mean == 1.0);
  }
  SUBCASE("default truncation and geometry checks") {
    const auto s = strip_estimate({1, StripBc::Free, 0}, {0.0, 2.0}, h, sched(50), 0);
    CHECK(s.m == 32);
    CHECK_THROWS_AS(strip_estimate({1, StripBc::Free, 3}, {0.5, 2.0}, h, sched(50)), GeometryError);
    CHECK_THROWS_AS(strip_estimate({1, StripBc::Free, 8}, {0.5, 2.0}, horizontal_crossing({0, 2, 0, 3}), sched(50)),
                    GeometryError);
  }
  SUBCASE("bc ordering for an increasing event") {
    const ModelParams par{0.55, 2.0};
    const auto f = strip_estimate({2, StripBc::Free, 8}, par, horizontal_crossing({0, 4, 0, 2}), sched(6000), 0);
    const auto d = strip_estimate({2, StripBc::Dobrushin, 8}, par, horizontal_crossing({0, 4, 0, 2}), sched(6000), 0);
    const auto w = strip_estimate({2, StripBc::Wired, 8}, par, horizontal_crossing({0, 4, 0, 2}), sched(6000), 0);
    CHECK(w.estimate.mean + 3 * std::hypot(w.estimate.std_error, d.estimate.std_error) >= d.estimate.mean);
    CHECK(d.estimate.mean + 3 * std::hypot(d.estimate.std_error, f.estimate.std_error) >= f.estimate.mean);
    CHECK(w.estimate.mean > f.estimate.mean);
  }
}

TEST_CASE("density grid validation") {
  CHECK_THROWS_AS(estimate_density_p(2, {0.5, 1.0}, {1, 2, 3}, sched(10)), ScheduleError);
  CHECK_THROWS_AS(estimate_density_p(2, {0.5, 1.0}, {1, 3, 2, 4}, sched(10)), ScheduleError);
  CHECK_THROWS_AS(estimate_density_p(2, {0.5, 1.0}, {1, 1.25, 2, 3}, sched(10)), ScheduleError);
}

TEST_CASE("densities at degenerate p") {
  SUBCASE("p=1") {
    const auto p = estimate_density_p(2, {1.0, 2.0}, kAlphas, sched(20));
    CHECK_FALSE(p.upper_bound);
    CHECK(p.density == doctest::Approx(1.0));
    CHECK(p.slope == doctest::Approx(0.0));
    const auto q = estimate_density_q(2, {1.0, 2.0}, kAlphas, sched(20));
    CHECK(q.upper_bound);
    CHECK(q.density == 0.0);
  }
  SUBCASE("p=0") {
    const auto p = estimate_density_p(2, {0.0, 2.0}, kAlphas, sched(20));
    CHECK(p.upper_bound);
    CHECK(p.density == 0.0);
    const auto q = estimate_density_q(2, {0.0, 2.0}, kAlphas, sched(20));
    CHECK_FALSE(q.upper_bound);
    CHECK(q.density == doctest::Approx(1.0));
  }
}

TEST_CASE("q=1 subcritical density decays") {
  const auto d = estimate_density_p(2, {0.25, 1.0}, {1, 1.5, 2, 2.5}, sched(20000, 4, 3, 10));
  CHECK_FALSE(d.upper_bound);
  CHECK(d.slope < 0);
  CHECK(d.r2 >= 0.9);
  CHECK(d.density > 0);
  CHECK(d.density < 1);
  for (auto k : d.kept) CHECK(k);
}

TEST_CASE("power monotonicity") {
  DensityEstimate a, b;
  a.density = b.density = 1.0;
  CHECK(check_power_monotonicity(2.0, a, b).pass);
  a.density = 0.3;
  a.density_err = 0.01;
  const auto eq = check_power_monotonicity(1.0, a, a);
  CHECK(eq.lhs == eq.rhs);
  CHECK(eq.pass);
  b.density = 0.05;
  b.density_err = 0.001;
  CHECK_FALSE(check_power_monotonicity(2.0, a, b).pass);  // 0.05 < 0.09 - 3 sigma
  b.density = 0.085;
  CHECK(check_power_monotonicity(2.0, a, b).pass);
}

TEST_CASE("density relation") {
  const auto ones = check_density_relation(3.0, {3, 6}, {1, 1}, {1, 1}, {1, 1});
  CHECK(ones.k == 0.0);
  for (double r : ones.lower_residual) CHECK(r == 0.0);
  const auto r = check_density_relation(3.0, {3}, {0.5}, {0.5}, {0.01});
  // lower: log .01 - 4 log .5 < 0, upper: 0 * log .5 - log .01 > 0
  CHECK(r.k == doctest::Approx(-(std::log(0.01) - 4 * std::log(0.5))));
  CHECK(r.upper_residual[0] == doctest::Approx(-std::log(0.01)));
  CHECK_THROWS_AS(check_density_relation(3.0, {3, 6}, {1}, {1, 1}, {1, 1}), ScheduleError);
}

TEST_CASE("pushing probe at degenerate p") {
  const auto one = pushing_probe(1, kAlphas, {1.0, 2.0}, sched(10));
  CHECK(one.branch == "PushPrimal");
  CHECK(one.primal.c == doctest::Approx(1.0));
  CHECK_FALSE(one.dual.fitted);
  CHECK_FALSE(one.anomaly);
  const auto zero = pushing_probe(1, kAlphas, {0.0, 2.0}, sched(10));
  CHECK(zero.branch == "PushDual");
  CHECK(zero.dual.c == doctest::Approx(1.0));
  CHECK_FALSE(zero.primal.fitted);
  const auto j = to_json(zero);
  CHECK(j["branch"] == "PushDual");
  CHECK(j["PushDual"]["points"].size() == 4);
}

TEST_CASE("density json") {
  const auto p = estimate_density_p(1, {0.0, 2.0}, kAlphas, sched(10));
  const auto j = to_json(p);
  CHECK(j["upper_bound"] == true);
  CHECK(j["points"][0]["logp_hat"].is_null());
  CHECK(j["density"] == "p_n");
}
