#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spdcsim/coincidence.hpp"
#include "spdcsim/detection.hpp"
#include "spdcsim/pair_source.hpp"

// Shared oracles for the test suites. These deliberately re-derive results
// by the dumbest route available (quadratic pairing, direct formulas, long
// double arithmetic) and stay independent of the streaming implementations
// they check.

namespace testsupport {

// O(n^2) cross-correlation with the same binning convention as the streaming
// correlator: |delta| <= span, bin k covers [k*bw - bw/2, k*bw + bw/2).
inline std::vector<int64_t> brute_force_histogram(const std::vector<spdcsim::TimeTag>& tags,
                                                  const spdcsim::HistogramConfig& cfg) {
  const int64_t bw = cfg.bin_width_fs;
  const int64_t k_max = cfg.max_bin_index();
  std::vector<int64_t> counts(static_cast<size_t>(cfg.n_bins()), 0);
  for (const auto& a : tags) {
    if (a.channel != 1) continue;
    for (const auto& b : tags) {
      if (b.channel != 2) continue;
      const int64_t delta = b.time_fs - a.time_fs;
      if (std::llabs(delta) > cfg.span_fs) continue;
      const int64_t shifted = 2 * delta + bw;
      const int64_t two_bw = 2 * bw;
      const int64_t bin =
          shifted >= 0 ? shifted / two_bw : -((-shifted + two_bw - 1) / two_bw);
      counts[static_cast<size_t>(bin + k_max)]++;
    }
  }
  return counts;
}

// Kolmogorov-Smirnov statistic of `samples` against the exponential CDF with
// the given mean.
inline double ks_statistic_exponential(std::vector<double> samples, double mean) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double cdf = 1.0 - std::exp(-samples[i] / mean);
    const double hi = (static_cast<double>(i) + 1.0) / n - cdf;
    const double lo = cdf - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

// Wald-Wolfowitz runs test z-statistic on the signs of `values`.
inline double runs_test_z(const std::vector<double>& values) {
  int64_t n_pos = 0, n_neg = 0, runs = 0;
  int prev = 0;
  for (const double v : values) {
    const int sign = v >= 0.0 ? 1 : -1;
    (sign > 0 ? n_pos : n_neg)++;
    if (sign != prev) ++runs;
    prev = sign;
  }
  const double n1 = static_cast<double>(n_pos), n2 = static_cast<double>(n_neg);
  if (n1 == 0.0 || n2 == 0.0) return 0.0;
  const double mean = 2.0 * n1 * n2 / (n1 + n2) + 1.0;
  const double var =
      2.0 * n1 * n2 * (2.0 * n1 * n2 - n1 - n2) / ((n1 + n2) * (n1 + n2) * (n1 + n2 - 1.0));
  return var > 0.0 ? (static_cast<double>(runs) - mean) / std::sqrt(var) : 0.0;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double stddev_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(v.size()) - 1.0));
}

// Unweighted least-squares line fit, returns (intercept, slope, slope_stderr).
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  const double s2 = ss_res / (n - 2.0);
  f.slope_stderr = std::sqrt(s2 / sxx);
  f.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return f;
}

}  // namespace testsupport
