#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "rcquad/config.hpp"

namespace rcquad::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kVerificationFailure = 3, kUnreliable = 4 };

struct Context {
  RunConfig config;
  std::filesystem::path out;
  std::ostream* log = nullptr;  // human-readable summary
};

int cmd_exact_check(const Context& ctx);
int cmd_estimate(const Context& ctx);
int cmd_snapshot(const Context& ctx);
int cmd_classify(const Context& ctx);
int cmd_pc_scan(const Context& ctx);
int cmd_densities(const Context& ctx);
int cmd_box_crossing(const Context& ctx);
int cmd_one_arm(const Context& ctx);
int cmd_pushing_probe(const Context& ctx);

}  // namespace rcquad::cli
