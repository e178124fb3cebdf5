#include <doctest.h>

#include <sstream>

#include "rcquad/config.hpp"
#include "rcquad/io.hpp"

using namespace rcquad;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

std::string group(const std::string& svg, const std::string& id) {
  const auto start = svg.find("<g id=\"" + id + "\"");
  if (start == std::string::npos) return {};
  return svg.substr(start, svg.find("</g>", start) - start);
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const auto c = parse_config(R"(
seed = 9
out = "res"
[params]
p = 0.3
q = 2.5
[schedule]
sweeps = 100
chains = 2
dynamics = "glauber"
[classify]
n_grid = [2, 4, 8, 16]
)");
  CHECK(c.seed == 9);
  CHECK(c.schedule.seed == 9);
  CHECK(c.out == "res");
  CHECK(c.params.p == 0.3);
  CHECK(c.params.q == 2.5);
  CHECK(c.schedule.sweeps == 100);
  CHECK(c.schedule.burn_in == 200);
  CHECK(c.dynamics == Dynamics::Glauber);
  CHECK(get_ints(c.section("classify"), "n_grid", {}) == std::vector<int>{2, 4, 8, 16});
  CHECK(c.section("densities").empty());
  const auto d = parse_config("");
  CHECK(d.params.p == 0.5);
  CHECK_FALSE(d.dynamics);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("colour = 3"), ConfigError);
  CHECK_THROWS_AS(parse_config("[params]\nr = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("[estimate.strip]\nwidth = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("[params]\np = \"half\""), ConfigError);
  CHECK_THROWS_AS(parse_config("[params]\np = 1.5"), ConfigError);
  CHECK_THROWS_AS(parse_config("[schedule]\nsweeps = -1"), ConfigError);
  CHECK_THROWS_AS(parse_config("[schedule]\ndynamics = \"metropolis\""), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = "), ConfigError);
  CHECK_THROWS_AS(parse_config("params = 3"), ConfigError);
  CHECK_THROWS_AS(get_ints(parse_config("[classify]\nn_grid = [1.5]").section("classify"), "n_grid", {}),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/rcquad.toml"), ConfigError);
}

TEST_CASE("region and bc json") {
  const auto r = region_from_json(nlohmann::json{{"lattice", "square"}, {"a", 0}, {"b", 2}, {"c", 0}, {"d", 1}});
  CHECK(r.rect == Rect{0, 2, 0, 1});
  const auto back = region_from_json(region_to_json(r));
  CHECK(back.num_edges() == r.num_edges());
  CHECK_THROWS_AS(region_from_json(nlohmann::json{{"a", 0}, {"b", 1}, {"c", 0}, {"d", 1}, {"e", 2}}), GeometryError);
  CHECK_THROWS_AS(region_from_json(nlohmann::json{{"a", 0}}), GeometryError);

  for (const char* name : {"free", "wired", "dobrushin", "mix", "star-mix"}) {
    const auto bc = BoundaryCondition::named(name, r);
    CHECK(bc_from_json(bc_to_json(bc), r) == bc);
    CHECK(bc_from_json(nlohmann::json(name), r) == bc);
  }
  CHECK(bc_to_json(BoundaryCondition::free(r.graph)).empty());
  CHECK_THROWS_AS(bc_from_json(nlohmann::json(3), r), BoundaryError);
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1.0 / 3) == "0.3333333333333333");
  CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK(format_number(0) == "0");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv writer") {
  std::ostringstream os;
  CsvWriter w(os, {"a", "b"});
  w.row({"1", "x,y"});
  CHECK(os.str() == "#rcquad-v1\na,b\n1,\"x,y\"\n");
  CHECK_THROWS(w.row({"1"}));
}

TEST_CASE("svg snapshot conventions") {
  const auto r = build_region(Lattice::square(), {-4, 4, -4, 4});
  const auto n = r.num_edges();
  const auto open = render_svg(r, Configuration(n, true), std::nullopt);
  CHECK(count(group(open, "open"), "<line") == n);
  CHECK(count(group(open, "dual-open"), "<line") == 0);
  CHECK(open.find("witness") == std::string::npos);
  const auto closed = render_svg(r, Configuration(n, false), std::nullopt);
  CHECK(count(group(closed, "open"), "<line") == 0);
  CHECK(count(group(closed, "dual-open"), "<line") == n);
  CHECK(closed.find("stroke-dasharray") != std::string::npos);

  const auto row = build_region(Lattice::square(), {0, 3, 0, 0});
  Configuration cfg(row.num_edges(), true);
  const auto path = leftmost_vertical_crossing(cfg, row, {0, 3, 0, 0}, 0, 3);
  REQUIRE(path);
  const auto svg = render_svg(row, cfg, path);
  CHECK(count(group(svg, "witness"), "<line") == path->edges.size());
  CHECK(svg == render_svg(row, cfg, path));
}
