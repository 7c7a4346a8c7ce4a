#pragma once

// Forecast-quality and distribution-comparison statistics:
//   - MAPE in percent against a positive actual series,
//   - Pearson correlation (zero-variance inputs are an explicit error:
//     stretches of repeated closes produce exactly that, and callers must
//     see it rather than read a silent 0 or NaN),
//   - rolling-window correlation with zero-variance windows marked
//     undefined instead of failing the whole run,
//   - the two-sample Kolmogorov-Smirnov test with the asymptotic
//     Kolmogorov p-value, plus an exact enumeration for tiny samples,
//   - histogram-vs-fitted-normal density tables for plotting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "illiq/error.hpp"

namespace illiq {

// Mean absolute percentage error, in percent: actual values must be
// positive (they are prices); the forecast is unrestricted.
inline double mape(std::span<const double> actual, std::span<const double> forecast) {
  require(actual.size() == forecast.size(), errc::domain,
          "actual and forecast lengths differ (" + std::to_string(actual.size()) + " vs " +
              std::to_string(forecast.size()) + ")");
  require(!actual.empty(), errc::domain, "cannot score empty series");
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    require(std::isfinite(actual[i]) && actual[i] > 0.0, errc::domain,
            "actual value " + std::to_string(i) + " is not a positive price");
    sum += std::fabs(actual[i] - forecast[i]) / actual[i];
  }
  return 100.0 * sum / static_cast<double>(actual.size());
}

// Pearson correlation coefficient; errors on length mismatch, fewer than
// two points, or a zero-variance input.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), errc::domain, "series lengths differ");
  const std::size_t n = x.size();
  require(n >= 2, errc::domain, "need at least two points for a correlation");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  require(sxx > 0.0, errc::degenerate, "first series has zero variance");
  require(syy > 0.0, errc::degenerate, "second series has zero variance");
  return sxy / std::sqrt(sxx * syy);
}

// Correlations over every length-k window [i, i+k-1], i = 0..n-k.
// A window where either side has zero variance yields an empty value.
struct RollingCorrelation {
  std::size_t window = 0;
  std::vector<std::optional<double>> values;  // n - k + 1 entries
};

inline RollingCorrelation rolling_correlation(std::span<const double> x,
                                              std::span<const double> y, std::size_t k) {
  require(x.size() == y.size(), errc::domain, "series lengths differ");
  require(k >= 2, errc::domain, "window must cover at least two points");
  require(k <= x.size(), errc::domain,
          "window " + std::to_string(k) + " exceeds series length " + std::to_string(x.size()));
  RollingCorrelation out;
  out.window = k;
  out.values.reserve(x.size() - k + 1);
  // Each window is evaluated directly with the same two-pass arithmetic
  // as pearson(), so a full-length window reproduces it bit for bit.
  for (std::size_t i = 0; i + k <= x.size(); ++i) {
    try {
      out.values.emplace_back(pearson(x.subspan(i, k), y.subspan(i, k)));
    } catch (const Error& e) {
      if (e.code() != errc::degenerate) throw;
      out.values.emplace_back(std::nullopt);
    }
  }
  return out;
}

// Two-sample Kolmogorov-Smirnov distance: the supremum over the pooled
// sample points of the absolute difference of the two right-continuous
// empirical CDFs (ties advanced through both samples together).
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), errc::domain, "both samples must be non-empty");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() || j < sb.size()) {
    const double v = j >= sb.size() || (i < sa.size() && sa[i] <= sb[j]) ? sa[i] : sb[j];
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Survival function of the Kolmogorov distribution,
//   Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2),
// truncated once a term drops below 1e-12; Q(0) = 1 by continuity.
inline double kolmogorov_q(double lambda) {
  require(std::isfinite(lambda) && lambda >= 0.0, errc::domain,
          "lambda must be finite and non-negative");
  if (lambda == 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (std::size_t k = 1;; ++k) {
    const double term = std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) *
                                 lambda * lambda);
    if (term < 1e-12) break;
    sum += sign * term;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.01;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  bool different = false;  // p < alpha
};

// Asymptotic two-sided test: p = Q(D sqrt(n1 n2 / (n1 + n2))); the two
// samples are judged to come from different distributions iff p < alpha.
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                              double alpha = 0.01) {
  require(alpha > 0.0 && alpha < 1.0, errc::domain, "alpha must lie in (0,1)");
  KsResult r;
  r.statistic = ks_statistic(a, b);
  r.n1 = a.size();
  r.n2 = b.size();
  r.alpha = alpha;
  const double n1 = static_cast<double>(r.n1);
  const double n2 = static_cast<double>(r.n2);
  r.p_value = kolmogorov_q(r.statistic * std::sqrt(n1 * n2 / (n1 + n2)));
  r.different = r.p_value < alpha;
  return r;
}

// Exact permutation p-value P(D >= observed) over all C(n1+n2, n1)
// assignments of the pooled values. Exponential in nature, so capped at
// n1+n2 <= 20; intended as a slow ground truth for small samples.
inline double ks_exact_p(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), errc::domain, "both samples must be non-empty");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  require(n <= 20, errc::domain, "exact enumeration is limited to n1+n2 <= 20");
  const double observed = ks_statistic(a, b);

  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());

  // mask[i] = true: pooled[i] assigned to the first sample. Starting from
  // the descending arrangement, prev_permutation visits every distinct
  // mask exactly once.
  std::vector<bool> mask(n, false);
  for (std::size_t i = 0; i < n1; ++i) mask[i] = true;
  std::size_t total = 0, at_least = 0;
  do {
    ++total;
    std::size_t i = 0, ca = 0, cb = 0;
    double d = 0.0;
    while (i < n) {
      const double v = pooled[i];
      while (i < n && pooled[i] == v) {
        if (mask[i]) ++ca;
        else ++cb;
        ++i;
      }
      d = std::max(d, std::fabs(static_cast<double>(ca) / static_cast<double>(n1) -
                                static_cast<double>(cb) / static_cast<double>(n2)));
    }
    if (d >= observed - 1e-12) ++at_least;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return static_cast<double>(at_least) / static_cast<double>(total);
}

inline double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Equal-width histogram of a return sample against the normal density
// fitted by sample mean and (m-1)-denominator standard deviation; rows
// are plot-ready (bin edges, centers, both densities). The empirical
// column integrates to one by construction.
struct PdfComparison {
  double bin_width = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
  std::vector<double> bin_left;
  std::vector<double> bin_center;
  std::vector<double> empirical;  // density: count / (n * width)
  std::vector<double> normal;     // fitted normal density at the center
};

inline PdfComparison pdf_comparison(std::span<const double> sample, std::size_t bins) {
  require(bins >= 2, errc::domain, "need at least two bins");
  require(sample.size() >= 2, errc::domain, "need at least two values");
  const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
  const double lo = *lo_it, hi = *hi_it;
  require(hi > lo, errc::degenerate, "all values identical: histogram has zero width");

  PdfComparison out;
  out.n = sample.size();
  double mean = 0.0;
  for (double v : sample) mean += v;
  mean /= static_cast<double>(out.n);
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  out.mu = mean;
  out.sigma = std::sqrt(ss / static_cast<double>(out.n - 1));
  require(out.sigma > 0.0, errc::degenerate, "zero sample standard deviation");

  out.bin_width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : sample) {
    auto idx = static_cast<std::size_t>((v - lo) / out.bin_width);
    if (idx >= bins) idx = bins - 1;  // the maximum lands in the last bin
    ++counts[idx];
  }
  for (std::size_t i = 0; i < bins; ++i) {
    const double left = lo + static_cast<double>(i) * out.bin_width;
    const double center = left + 0.5 * out.bin_width;
    out.bin_left.push_back(left);
    out.bin_center.push_back(center);
    out.empirical.push_back(static_cast<double>(counts[i]) /
                            (static_cast<double>(out.n) * out.bin_width));
    out.normal.push_back(normal_pdf(center, out.mu, out.sigma));
  }
  return out;
}

}  // namespace illiq
