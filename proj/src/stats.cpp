#include "rcquad/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rcquad {

double SeriesStats::std_error() const {
  if (n == 0) return 0;
  return std::sqrt(variance / static_cast<double>(n) * 2.0 * tau_int);
}

SeriesStats analyze_series(const std::vector<double>& x, double c) {
  SeriesStats s;
  s.n = x.size();
  if (x.empty()) return s;
  double sum = 0;
  for (double v : x) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double var = 0;
  for (double v : x) var += (v - s.mean) * (v - s.mean);
  var /= static_cast<double>(s.n);
  s.variance = var;
  // Constant series carry no autocorrelation information.
  if (var <= 1e-300 * (1 + s.mean * s.mean)) {
    s.variance = 0;
    return s;
  }
  const std::size_t n = s.n;
  double tau = 0.5;
  std::size_t m = 1;
  for (; m < n / 2; ++m) {
    double acc = 0;
    for (std::size_t i = 0; i + m < n; ++i) acc += (x[i] - s.mean) * (x[i + m] - s.mean);
    tau += acc / (static_cast<double>(n - m) * var);
    if (static_cast<double>(m) >= c * tau) break;
  }
  s.window = m;
  s.window_found = m < n / 2;
  s.tau_int = std::max(tau, 0.5);
  return s;
}

double batch_means_stderr(const std::vector<double>& x, std::size_t num_batches) {
  const std::size_t size = x.size() / num_batches;
  if (size == 0 || num_batches < 2) return 0;
  std::vector<double> means(num_batches, 0);
  for (std::size_t b = 0; b < num_batches; ++b) {
    for (std::size_t i = 0; i < size; ++i) means[b] += x[b * size + i];
    means[b] /= static_cast<double>(size);
  }
  double mu = 0;
  for (double m : means) mu += m;
  mu /= static_cast<double>(num_batches);
  double v = 0;
  for (double m : means) v += (m - mu) * (m - mu);
  v /= static_cast<double>(num_batches - 1);
  return std::sqrt(v / static_cast<double>(num_batches));
}

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& sigma) {
  if (x.size() != y.size() || (!sigma.empty() && sigma.size() != x.size())) {
    throw std::invalid_argument("fit_linear: size mismatch");
  }
  LinearFit f;
  f.n = x.size();
  if (f.n < 2) throw std::invalid_argument("fit_linear: need at least two points");
  std::vector<double> w(f.n, 1.0);
  if (!sigma.empty()) {
    for (std::size_t i = 0; i < f.n; ++i) {
      // Zero errors are floored so exact points dominate without dividing by zero.
      const double s = std::max(sigma[i], 1e-12);
      w[i] = 1.0 / (s * s);
    }
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0) throw std::invalid_argument("fit_linear: x values are all equal");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < f.n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.rss += w[i] * r * r;
  }
  f.r2 = syy > 0 ? 1.0 - f.rss / syy : 1.0;
  double scale = 1.0;
  if (sigma.empty()) scale = f.n > 2 ? f.rss / static_cast<double>(f.n - 2) : 0.0;
  f.slope_stderr = std::sqrt(scale / sxx);
  f.intercept_stderr = std::sqrt(scale * (1.0 / sw + mx * mx / sxx));
  return f;
}

double aic(double rss, std::size_t n, std::size_t k) {
  const double nn = static_cast<double>(n);
  const double r = std::max(rss, std::numeric_limits<double>::min());
  return nn * std::log(r / nn) + 2.0 * static_cast<double>(k);
}

Merged merge_chains(const std::vector<SeriesStats>& chains, double reliability_ratio) {
  Merged m;
  double wsum = 0, wmean = 0, pooled = 0, tau_acc = 0;
  for (const auto& c : chains) {
    if (c.n == 0) continue;
    const double nn = static_cast<double>(c.n);
    const double w = nn / (2.0 * c.tau_int);
    wsum += w;
    wmean += w * c.mean;
    pooled += nn * c.variance;
    tau_acc += nn * c.tau_int;
    m.n += c.n;
    if (!c.window_found || c.tau_int > nn / reliability_ratio) m.unreliable = true;
  }
  if (m.n == 0) return m;
  m.mean = wmean / wsum;
  pooled /= static_cast<double>(m.n);
  m.tau_int = tau_acc / static_cast<double>(m.n);
  m.std_error = std::sqrt(pooled / wsum);
  return m;
}

}  // namespace rcquad
