#pragma once

#include <cstddef>
#include <vector>

namespace rcquad {

// Summary of one stationary time series.
struct SeriesStats {
  double mean = 0;
  double variance = 0;  // population variance
  double tau_int = 0.5;
  std::size_t window = 0;
  std::size_t n = 0;
  bool window_found = true;  // false when the self-consistent window exceeds n/2

  // Naive error inflated by sqrt(2 tau_int).
  double std_error() const;
};

// Integrated autocorrelation time with Sokal's self-consistent window M >= c tau(M).
SeriesStats analyze_series(const std::vector<double>& x, double c = 6.0);

// Standard error by non-overlapping batch means (batches of size n / num_batches).
double batch_means_stderr(const std::vector<double>& x, std::size_t num_batches = 32);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
  double intercept_stderr = 0;
  double r2 = 0;
  double rss = 0;  // weighted residual sum of squares
  std::size_t n = 0;
};

// Least squares y = intercept + slope x. With `sigma` the points are weighted by
// 1/sigma^2 and the parameter errors use those variances; without it the
// residual variance is used.
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& sigma = {});

// Gaussian AIC from an unweighted residual sum of squares with k fitted parameters.
double aic(double rss, std::size_t n, std::size_t k);

struct Merged {
  double mean = 0;
  double std_error = 0;
  double tau_int = 0.5;
  std::size_t n = 0;
  bool unreliable = false;
};

// Combines per-chain series: chain means weighted by their effective sample
// sizes N/(2 tau), with a variance pooled across chains.
Merged merge_chains(const std::vector<SeriesStats>& chains, double reliability_ratio = 10.0);

}  // namespace rcquad
