#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rcquad/rare.hpp"
#include "rcquad/sampler.hpp"
#include "rcquad/stats.hpp"

namespace rcquad {

enum class Verdict { SubCrit, SupCrit, ContCrit, DiscontCrit, Undecided };
std::string to_string(Verdict v);

// Artifact constants of the decision rules.
struct Thresholds {
  double delta = 0.02;       // crossing estimates must stay in [delta, 1 - delta]
  double min_r2 = 0.9;       // decay fits
  double decayed = 0.05;     // value at the largest n counted as decayed
  double drift_sigma = 3.0;  // drift significance
};

enum class BracketMode { Auto, On, Off };  // Auto: on for q > 4

struct ClassifyOptions {
  std::string lattice = "square";
  Schedule schedule;
  RareOptions rare;
  Thresholds thresholds;
  BracketMode brackets = BracketMode::Auto;
  Schedule bracket_schedule{4000, 2000, 1, 2, 1, false};
  double min_hits = 10.0;  // fewer effective successes switch to the multilevel estimator
};

// Crossing estimate of H for one n and one boundary condition; the log of the
// event and of its complement are kept separately so both tails stay resolved.
struct CellEstimate {
  int n = 0;
  double mean = 0;
  double std_error = 0;
  double log_value = 0;
  double log_value_err = 0;
  double log_complement = 0;
  double log_complement_err = 0;
  double n_eff = 0;  // samples / (2 tau_int) of the direct run
  bool multilevel = false;
  bool complement_multilevel = false;
  bool unreliable = false;
};

struct Bracket {
  int n = 0;
  double low = 0, low_err = 0;    // chain started all closed
  double high = 0, high_err = 0;  // chain started all open
};

struct DecayFit {
  bool available = false;
  LinearFit fit;
  bool decays = false;
};

struct PhaseVerdict {
  Verdict verdict = Verdict::Undecided;
  ModelParams params;
  std::vector<int> n_grid;
  std::vector<CellEstimate> wired;  // phi^1_{Lambda_2n}[H_{Lambda_n}]
  std::vector<CellEstimate> free;   // phi^0_{Lambda_2n}[H_{Lambda_n}]
  DecayFit wired_decay;             // log phi^1 vs n
  DecayFit free_complement_decay;   // log (1 - phi^0) vs n
  DecayFit free_decay;              // log phi^0 vs n
  DecayFit wired_complement_decay;  // log (1 - phi^1) vs n
  bool free_drift = false;
  bool wired_drift = false;
  std::vector<Bracket> free_brackets, wired_brackets;
  bool brackets_separate = false;
  Thresholds thresholds;
  std::string note;
};

PhaseVerdict classify(const ModelParams& params, const std::vector<int>& n_grid, const ClassifyOptions& opt);

// Significant monotone change over the grid that does not settle at the last step.
bool has_drift(const std::vector<double>& mean, const std::vector<double>& err, double sigma);

struct BoxCrossingReport {
  ModelParams params;
  int rho = 1;
  std::vector<int> n_grid;
  struct Row {
    std::string bc;
    int n = 0;
    Estimate estimate;
  };
  std::vector<Row> rows;
  double min_value = 1, min_err = 0, max_value = 0, max_err = 0;
  bool pass = false;
  double delta = 0.02;
};

// phi^xi_{[-n,(rho+1)n] x [-n,2n]}[H_{[0,rho n] x [0,n]}] for xi in {free, wired}.
BoxCrossingReport box_crossing_check(const ModelParams& params, int rho, const std::vector<int>& n_grid,
                                     const Schedule& schedule, double delta = 0.02,
                                     const std::string& lattice = "square");

struct OneArmReport {
  ModelParams params;
  std::vector<int> n_grid;
  int host_half_width = 0;
  std::vector<double> log_prob, log_err;
  bool multilevel = false;
  bool unreliable = false;
  LinearFit power_fit;        // log phi vs log n
  LinearFit exponential_fit;  // log phi vs n
  double aic_power = 0, aic_exponential = 0;
  std::string preferred;      // "power" or "exponential"
};

// One-arm probabilities phi^1_{Lambda_{4 max n}}[0 <-> boundary of Lambda_n].
OneArmReport one_arm_scan(const ModelParams& params, const std::vector<int>& n_grid, const Schedule& schedule,
                          const RareOptions& rare = {}, double min_hits = 10.0);

struct PcScanStep {
  double p = 0;
  Verdict verdict = Verdict::Undecided;
  int side = 0;            // -1 subcritical side, +1 supercritical side
  bool tiebreak = false;   // side taken from the mean crossing at the largest n
  double score = 0;        // (phi^0 + phi^1)/2 - 1/2 at the largest n
  double score_err = 0;
};

struct PcScan {
  double q = 1;
  std::vector<PcScanStep> history;
  double p_lo = 0, p_hi = 1;
  double selfdual_ref = 0.5;
  bool converged = false;
};

PcScan pc_scan(double q, double tolerance, std::size_t budget, const std::vector<int>& n_grid,
               const ClassifyOptions& opt, double p_lo = 0.05, double p_hi = 0.95);

nlohmann::json to_json(const PhaseVerdict& v);
nlohmann::json to_json(const BoxCrossingReport& r);
nlohmann::json to_json(const OneArmReport& r);
nlohmann::json to_json(const PcScan& s);

}  // namespace rcquad
