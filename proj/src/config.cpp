#include "rcquad/config.hpp"

#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

namespace rcquad {

namespace {

using nlohmann::json;

// Allowed keys per table. A string leaf means "any value"; the consumer checks it.
const json& schema() {
  static const json s = json::parse(R"({
    "lattice": "", "seed": "", "out": "", "threads": "",
    "params": {"p": "", "q": ""},
    "schedule": {"burn_in": "", "sweeps": "", "thin": "", "chains": "", "adaptive_burn_in": "", "dynamics": ""},
    "rare": {"samples_per_stage": "", "stage_burn_in": "", "stage_fraction": "", "max_stages": "",
             "max_retries": "", "min_hits": ""},
    "exact_check": {"max_edges": "", "rects": "", "bcs": "", "p": "", "q": "", "smp_outer_samples": "",
                    "inject_fkg_fault": ""},
    "estimate": {"region": "", "bc": "", "events": "", "strip": {"n": "", "bc": "", "m": "", "max_doublings": ""},
                 "multilevel": ""},
    "snapshot": {"region": "", "bc": "", "event": "", "scale": "", "start_open": ""},
    "classify": {"n_grid": "", "brackets": "", "delta": "", "min_r2": "", "decayed": "", "drift_sigma": "",
                 "bracket_burn_in": "", "bracket_sweeps": "", "bracket_chains": ""},
    "pc_scan": {"q": "", "tolerance": "", "budget": "", "n_grid": "", "p_lo": "", "p_hi": ""},
    "densities": {"n": "", "alphas": "", "widths": "", "which": "", "lambda": ""},
    "box_crossing": {"rho": "", "n_grid": "", "delta": ""},
    "one_arm": {"n_grid": ""},
    "pushing_probe": {"n": "", "alphas": "", "widths": "", "floor": ""}
  })");
  return s;
}

void check_keys(const json& doc, const json& sch, const std::string& path) {
  for (const auto& [k, v] : doc.items()) {
    const std::string where = path.empty() ? k : path + "." + k;
    if (!sch.contains(k)) throw ConfigError("unknown key '" + where + "'");
    const auto& sub = sch.at(k);
    if (sub.is_object()) {
      if (!v.is_object()) throw ConfigError("'" + where + "' must be a table");
      check_keys(v, sub, where);
    }
  }
}

json to_json_node(const toml::node& n, const std::string& where) {
  if (const auto* t = n.as_table()) {
    json o = json::object();
    for (const auto& [k, v] : *t) o[std::string(k.str())] = to_json_node(v, where + "." + std::string(k.str()));
    return o;
  }
  if (const auto* a = n.as_array()) {
    json arr = json::array();
    for (const auto& v : *a) arr.push_back(to_json_node(v, where));
    return arr;
  }
  if (const auto* v = n.as_integer()) return v->get();
  if (const auto* v = n.as_floating_point()) return v->get();
  if (const auto* v = n.as_boolean()) return v->get();
  if (const auto* v = n.as_string()) return v->get();
  throw ConfigError("unsupported value type at '" + where + "'");
}

std::string type_error(const std::string& key, const char* want) { return "'" + key + "' must be " + want; }

}  // namespace

double get_double(const json& sec, const std::string& key, double dflt) {
  if (!sec.contains(key)) return dflt;
  const auto& v = sec.at(key);
  if (!v.is_number()) throw ConfigError(type_error(key, "a number"));
  return v.get<double>();
}

std::int64_t get_int(const json& sec, const std::string& key, std::int64_t dflt) {
  if (!sec.contains(key)) return dflt;
  const auto& v = sec.at(key);
  if (!v.is_number_integer()) throw ConfigError(type_error(key, "an integer"));
  return v.get<std::int64_t>();
}

bool get_bool(const json& sec, const std::string& key, bool dflt) {
  if (!sec.contains(key)) return dflt;
  const auto& v = sec.at(key);
  if (!v.is_boolean()) throw ConfigError(type_error(key, "a boolean"));
  return v.get<bool>();
}

std::string get_string(const json& sec, const std::string& key, const std::string& dflt) {
  if (!sec.contains(key)) return dflt;
  const auto& v = sec.at(key);
  if (!v.is_string()) throw ConfigError(type_error(key, "a string"));
  return v.get<std::string>();
}

std::vector<double> get_doubles(const json& sec, const std::string& key, std::vector<double> dflt) {
  if (!sec.contains(key)) return dflt;
  const auto& v = sec.at(key);
  if (!v.is_array()) throw ConfigError(type_error(key, "an array of numbers"));
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(type_error(key, "an array of numbers"));
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<int> get_ints(const json& sec, const std::string& key, std::vector<int> dflt) {
  if (!sec.contains(key)) return dflt;
  const auto& v = sec.at(key);
  if (!v.is_array()) throw ConfigError(type_error(key, "an array of integers"));
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) throw ConfigError(type_error(key, "an array of integers"));
    out.push_back(x.get<int>());
  }
  return out;
}

const json& RunConfig::section(const std::string& name) const {
  static const json empty = json::object();
  return tree.contains(name) ? tree.at(name) : empty;
}

RunOptions RunConfig::run_options(const BoundaryCondition& bc) const {
  RunOptions o = default_options(params, bc);
  if (dynamics) o.dynamics = *dynamics;
  return o;
}

RunConfig parse_config(std::string_view toml_text, const std::string& source) {
  json doc;
  try {
    const auto tbl = toml::parse(toml_text, source);
    doc = to_json_node(tbl, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(msg.str());
  }
  check_keys(doc, schema(), "");

  RunConfig c;
  c.tree = doc;
  c.lattice = get_string(doc, "lattice", c.lattice);
  const auto seed = get_int(doc, "seed", 1);
  if (seed < 0) throw ConfigError("'seed' must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.out = get_string(doc, "out", c.out);
  c.threads = static_cast<int>(get_int(doc, "threads", 0));
  if (c.threads < 0) throw ConfigError("'threads' must be non-negative");

  const auto& par = c.section("params");
  c.params.p = get_double(par, "p", c.params.p);
  c.params.q = get_double(par, "q", c.params.q);
  try {
    c.params.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  const auto& sch = c.section("schedule");
  auto nonneg = [](const json& sec, const std::string& k, std::uint64_t d) {
    const auto v = get_int(sec, k, static_cast<std::int64_t>(d));
    if (v < 0) throw ConfigError("'" + k + "' must be non-negative");
    return static_cast<std::uint64_t>(v);
  };
  c.schedule.burn_in = nonneg(sch, "burn_in", c.schedule.burn_in);
  c.schedule.sweeps = nonneg(sch, "sweeps", c.schedule.sweeps);
  c.schedule.thin = nonneg(sch, "thin", c.schedule.thin);
  c.schedule.chains = nonneg(sch, "chains", c.schedule.chains);
  c.schedule.adaptive_burn_in = get_bool(sch, "adaptive_burn_in", false);
  c.schedule.seed = c.seed;
  try {
    c.schedule.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const auto dyn = get_string(sch, "dynamics", "auto");
  if (dyn == "glauber") c.dynamics = Dynamics::Glauber;
  else if (dyn == "chayes-machta") c.dynamics = Dynamics::ChayesMachta;
  else if (dyn != "auto") throw ConfigError("'schedule.dynamics' must be auto, glauber or chayes-machta");
  if (c.dynamics == Dynamics::ChayesMachta && c.params.q < 1) {
    throw ConfigError("chayes-machta dynamics needs q >= 1");
  }

  const auto& rare = c.section("rare");
  c.rare.samples_per_stage = nonneg(rare, "samples_per_stage", c.rare.samples_per_stage);
  c.rare.stage_burn_in = nonneg(rare, "stage_burn_in", c.rare.stage_burn_in);
  c.rare.stage_fraction = get_double(rare, "stage_fraction", c.rare.stage_fraction);
  c.rare.max_stages = nonneg(rare, "max_stages", c.rare.max_stages);
  c.rare.max_retries = nonneg(rare, "max_retries", c.rare.max_retries);
  c.min_hits = get_double(rare, "min_hits", c.min_hits);
  if (!(c.rare.stage_fraction > 0 && c.rare.stage_fraction < 1)) {
    throw ConfigError("'rare.stage_fraction' must lie in (0,1)");
  }
  if (c.rare.samples_per_stage < 2) throw ConfigError("'rare.samples_per_stage' must be at least 2");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace rcquad
