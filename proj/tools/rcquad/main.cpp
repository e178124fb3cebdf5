#include <omp.h>

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace rcquad;
using namespace rcquad::cli;

namespace {

int thread_count(int flag, int from_config) {
  if (flag > 0) return flag;
  if (from_config > 0) return from_config;
  if (const char* env = std::getenv("RCQUAD_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("RCQUAD_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rcquad: random-cluster crossing experiments on planar lattices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rcquad 1.0");

  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  const std::map<std::string, std::pair<std::string, std::function<int(const Context&)>>> commands{
      {"exact-check", {"exact identity suite on small regions", cmd_exact_check}},
      {"estimate", {"Monte Carlo event estimates (CSV)", cmd_estimate}},
      {"snapshot", {"SVG picture of one sampled configuration", cmd_snapshot}},
      {"classify", {"phase verdict at (p, q)", cmd_classify}},
      {"pc-scan", {"bisection for the critical point", cmd_pc_scan}},
      {"densities", {"crossing densities p_n and q_n", cmd_densities}},
      {"box-crossing", {"box-crossing estimates", cmd_box_crossing}},
      {"one-arm", {"one-arm probabilities and decay fits", cmd_one_arm}},
      {"pushing-probe", {"fitted constants of the two pushing branches", cmd_pushing_probe}},
  };
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "TOML run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--threads", threads, "OpenMP threads (fallback: RCQUAD_THREADS)")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output directory (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  Context ctx;
  ctx.log = &std::cerr;
  const auto* sub = app.get_subcommands().front();
  try {
    ctx.config = config_path.empty() ? parse_config("") : load_config(config_path);
    if (sub->count("--seed")) {
      ctx.config.seed = seed;
      ctx.config.schedule.seed = seed;
    }
    if (!out.empty()) ctx.config.out = out;
    ctx.out = ctx.config.out;
    if (const int t = thread_count(threads, ctx.config.threads); t > 0) omp_set_num_threads(t);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    return commands.at(sub->get_name()).second(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
