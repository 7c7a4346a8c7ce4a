#pragma once

// Test-only ground truth, kept deliberately independent of the library
// code it checks: naive recomputations of the metrics, a counting-based
// KS distance, a long-double Kolmogorov sum, and a self-contained
// Nelder-Mead minimizer used to cross-check the closed-form calibrator
// against direct numerical maximum likelihood.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double mape_percent(std::span<const double> actual, std::span<const double> forecast) {
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i)
    acc += std::fabs(actual[i] - forecast[i]) / actual[i];
  return acc / static_cast<double>(actual.size()) * 100.0;
}

// Raw-moment arrangement (n Sxy - Sx Sy) / sqrt((n Sxx - Sx^2)(n Syy - Sy^2)):
// algebraically the same coefficient, numerically a different path.
inline double pearson_raw_moments(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Both empirical CDFs evaluated at every pooled point by counting <=.
inline double ks_distance_counting(std::vector<double> a, std::vector<double> b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  double d = 0.0;
  for (double v : pooled) {
    const double fa = static_cast<double>(std::count_if(a.begin(), a.end(),
                                                        [&](double t) { return t <= v; })) /
                      static_cast<double>(a.size());
    const double fb = static_cast<double>(std::count_if(b.begin(), b.end(),
                                                        [&](double t) { return t <= v; })) /
                      static_cast<double>(b.size());
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

// Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2), long double, cut at 1e-30.
inline double kolmogorov_sum(double lambda) {
  if (lambda <= 0.0) return 1.0;
  long double sum = 0.0L;
  long double sign = 1.0L;
  for (int k = 1; k < 1000000; ++k) {
    const long double term =
        std::exp(-2.0L * static_cast<long double>(k) * k * lambda * lambda);
    if (term < 1e-30L) break;
    sum += sign * term;
    sign = -sign;
  }
  long double q = 2.0L * sum;
  if (q < 0.0L) q = 0.0L;
  if (q > 1.0L) q = 1.0L;
  return static_cast<double>(q);
}

// Plain Nelder-Mead (reflect 1, expand 2, contract 0.5, shrink 0.5).
inline std::vector<double> nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
    std::vector<double> step, double ftol = 1e-13, std::size_t max_iter = 20000) {
  const std::size_t d = start.size();
  if (step.size() != d) throw std::invalid_argument("step size mismatch");
  std::vector<std::vector<double>> xs(d + 1, start);
  for (std::size_t i = 0; i < d; ++i) xs[i + 1][i] += step[i];
  std::vector<double> fs(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fs[i] = f(xs[i]);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Order: best first, worst last.
    std::vector<std::size_t> order(d + 1);
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order[0], worst = order[d], second = order[d - 1];
    if (fs[worst] - fs[best] < ftol * (std::fabs(fs[best]) + 1.0)) break;

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < d; ++k) centroid[k] += xs[i][k];
    }
    for (std::size_t k = 0; k < d; ++k) centroid[k] /= static_cast<double>(d);

    auto blend = [&](double t) {
      std::vector<double> p(d);
      for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + t * (xs[worst][k] - centroid[k]);
      return p;
    };
    const std::vector<double> xr = blend(-1.0);
    const double fr = f(xr);
    if (fr < fs[best]) {
      const std::vector<double> xe = blend(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const std::vector<double> xc = blend(fr < fs[worst] ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < d; ++k) xs[i][k] = xs[best][k] + 0.5 * (xs[i][k] - xs[best][k]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (fs[i] < fs[best]) best = i;
  return xs[best];
}

// Two shrinking restarts around the previous optimum.
inline std::vector<double> nelder_mead_restarted(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
    std::vector<double> step) {
  std::vector<double> x = start;
  for (int round = 0; round < 3; ++round) {
    x = nelder_mead_minimize(f, x, step);
    for (double& s : step) s *= 0.1;
  }
  return x;
}

}  // namespace oracle
