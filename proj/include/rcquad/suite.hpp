#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcquad/exact.hpp"

namespace rcquad {

// Every rectangle region [0,w]x[0,h] of the square lattice with at most `max_edges` edges.
std::vector<Rect> default_corpus(std::size_t max_edges = 16);

struct SuiteOptions {
  std::vector<Rect> rects = default_corpus();
  std::vector<std::string> bcs{"free", "wired", "dobrushin", "mix", "star-mix"};
  std::vector<double> ps{0.2, 0.5, 0.8};
  std::vector<double> qs{1, 1.5, 2, 4, 10};
  std::size_t smp_outer_samples = 3;  // random outer configurations besides all-open and all-closed
  std::uint64_t seed = 1;
  OracleFaults faults;
};

struct SuiteCheck {
  std::string identity;
  Rect rect;
  std::string bc;  // empty when the identity involves several
  ModelParams params;
  std::string detail;
  Verification result;
};

struct SuiteReport {
  std::vector<SuiteCheck> checks;
  std::size_t passed = 0;
  std::size_t failed = 0;
  double worst_margin = 0;  // most negative margin seen
  std::optional<SuiteCheck> first_failure;
  bool ok() const { return failed == 0; }
};

// FKG (H with V, and two edges), CBC over all dominating bc pairs, SMP on a
// sub-rectangle, FI between mix and *-mix, and duality in both pairings.
SuiteReport run_identity_suite(const SuiteOptions& opt);

nlohmann::json to_json(const SuiteCheck& c);
nlohmann::json to_json(const SuiteReport& r, bool include_checks = true);

}  // namespace rcquad
