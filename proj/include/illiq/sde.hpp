#pragma once

// The two price dynamics and their closed-form calibrators.
//
// gBm      dS = mu S dt + sigma S dW, handled through daily log returns:
//          the calibrated (mu, sigma) are the sample mean and standard
//          deviation of one-step log returns, and a step multiplies the
//          price by exp(mu + sigma z). The Ito drift correction is folded
//          into mu by construction (mu is the log-return mean itself),
//          which is exactly how the estimates are quoted and consumed.
//
// XOU      dS = gamma (phi - ln S) S dt + sigma S dW. In log space the
//          process is Ornstein-Uhlenbeck with reversion speed gamma and
//          level phi_hh = phi - sigma^2 / (2 gamma); over a step dt,
//          ln S' | ln S is Gaussian with
//            mean     ln S e^{-gamma dt} + phi_hh (1 - e^{-gamma dt})
//            variance sigma_hh^2 = sigma^2 (1 - e^{-2 gamma dt}) / (2 gamma).
//          Calibration is the exact maximizer of the product of these
//          transition densities, computed in closed form from the five
//          sufficient statistics of the log-price pairs.
//
// gamma <= 0 is reported, never clamped: the fitted dynamics are then not
// mean-reverting and simulated paths can diverge, which downstream code
// detects and scores rather than hides.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "illiq/error.hpp"
#include "illiq/rng.hpp"

namespace illiq {

struct GbmParams {
  double mu = 0.0;     // mean one-step log return
  double sigma = 0.0;  // standard deviation of one-step log returns
  std::size_t n_obs = 0;
};

// Sample mean and (m-1)-denominator standard deviation of log returns.
inline GbmParams calibrate_gbm(std::span<const double> log_returns) {
  const std::size_t m = log_returns.size();
  require(m >= 2, errc::estimation, "need at least two returns to calibrate");
  double mean = 0.0;
  for (double r : log_returns) mean += r;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double r : log_returns) ss += (r - mean) * (r - mean);
  GbmParams out;
  out.mu = mean;
  out.sigma = std::sqrt(ss / static_cast<double>(m - 1));
  out.n_obs = m;
  return out;
}

inline double gbm_step(double price, const GbmParams& params, double z) {
  return price * std::exp(params.mu + params.sigma * z);
}

struct XouParams {
  double gamma = 0.0;  // mean-reversion speed
  double phi = 0.0;    // long-run level parameter of the SDE drift
  double sigma = 0.0;  // diffusion coefficient
  double dt = 1.0;     // observation spacing the parameters refer to
  bool mean_reverting = true;  // gamma > 0
};

// Per-step quantities of the exact log-space transition, computed in
// forms that stay finite as gamma -> 0 (where the process degenerates to
// driftless gBm: identity decay, drift -sigma^2 dt / 2, variance
// sigma^2 dt). The crossover guards |gamma dt| < 1e-8.
struct XouStep {
  double decay = 0.0;        // e^{-gamma dt}
  double drift = 0.0;        // phi_hh (1 - e^{-gamma dt})
  double sigma_hh_sq = 0.0;  // conditional variance over one step
};

inline XouStep xou_step_terms(const XouParams& p) {
  require(p.dt > 0.0, errc::domain, "dt must be positive");
  const double x = p.gamma * p.dt;
  const double one_minus = -std::expm1(-x);  // 1 - e^{-gamma dt}
  const bool tiny = std::fabs(x) < 1e-8;
  XouStep s;
  s.decay = std::exp(-x);
  // phi_hh (1-e^{-x}) = phi (1-e^{-x}) - sigma^2 dt / 2 * (1-e^{-x})/x,
  // with (1-e^{-x})/x -> 1 as x -> 0.
  const double ratio = tiny ? 1.0 : one_minus / x;
  s.drift = p.phi * one_minus - 0.5 * p.sigma * p.sigma * p.dt * ratio;
  s.sigma_hh_sq = tiny ? p.sigma * p.sigma * p.dt
                       : p.sigma * p.sigma * (-std::expm1(-2.0 * x)) / (2.0 * p.gamma);
  return s;
}

inline double xou_step(double price, const XouParams& params, double z) {
  const XouStep s = xou_step_terms(params);
  const double y = std::log(price) * s.decay + s.drift + std::sqrt(s.sigma_hh_sq) * z;
  return std::exp(y);
}

// The five sufficient statistics of n = size-1 log-price transitions:
// sums over i = 1..n of Y(i-1), Y(i), Y(i-1)^2, Y(i-1)Y(i), Y(i)^2.
struct XouSuffStats {
  double y1 = 0.0;   // sum of predecessors
  double y2 = 0.0;   // sum of successors
  double y11 = 0.0;  // sum of squared predecessors
  double y12 = 0.0;  // sum of cross products
  double y22 = 0.0;  // sum of squared successors
  std::size_t n = 0;
};

inline XouSuffStats xou_suff_stats(std::span<const double> log_price) {
  require(log_price.size() >= 2, errc::estimation,
          "need at least two log prices for sufficient statistics");
  XouSuffStats s;
  s.n = log_price.size() - 1;
  for (std::size_t i = 1; i < log_price.size(); ++i) {
    const double a = log_price[i - 1];
    const double b = log_price[i];
    s.y1 += a;
    s.y2 += b;
    s.y11 += a * a;
    s.y12 += a * b;
    s.y22 += b * b;
  }
  return s;
}

// Closed-form maximum-likelihood calibration on equally spaced log
// prices. Level first, then speed from the log of a ratio of
// phi_hh-centered moments, then the conditional variance and its
// continuous-time equivalents. Errors name the offending quantity so a
// failure on a short or degenerate window is diagnosable.
inline XouParams calibrate_xou(std::span<const double> log_price, double dt) {
  require(dt > 0.0, errc::domain, "dt must be positive");
  require(log_price.size() >= 3, errc::estimation,
          "need at least three log prices to calibrate");
  const XouSuffStats s = xou_suff_stats(log_price);
  const double n = static_cast<double>(s.n);

  const double level_den = n * (s.y11 - s.y12) - (s.y1 * s.y1 - s.y2 * s.y1);
  require(std::isfinite(level_den) && level_den != 0.0, errc::estimation,
          "level estimate denominator is zero");
  const double phi_hh = (s.y2 * s.y11 - s.y1 * s.y12) / level_den;

  // The decay factor e^{-gamma dt} as a ratio of phi_hh-centered moments.
  const double speed_num = s.y12 - phi_hh * (s.y1 + s.y2) + n * phi_hh * phi_hh;
  const double speed_den = s.y11 - 2.0 * phi_hh * s.y1 + n * phi_hh * phi_hh;
  require(std::isfinite(speed_den) && speed_den != 0.0, errc::estimation,
          "speed estimate denominator is zero");
  const double decay = speed_num / speed_den;
  require(std::isfinite(decay) && decay > 0.0, errc::estimation,
          "speed estimate log argument is non-positive (" + std::to_string(decay) + ")");

  XouParams p;
  p.dt = dt;
  p.gamma = -std::log(decay) / dt;

  // Conditional variance of one step, using the fitted decay directly.
  const double sigma_hh_sq =
      (s.y22 - 2.0 * decay * s.y12 + decay * decay * s.y11 -
       2.0 * phi_hh * (1.0 - decay) * (s.y2 - decay * s.y1) +
       n * phi_hh * phi_hh * (1.0 - decay) * (1.0 - decay)) /
      n;
  require(std::isfinite(sigma_hh_sq) && sigma_hh_sq > 0.0, errc::degenerate,
          "zero conditional variance: the window carries no usable noise");

  // Back to the SDE coefficients. As gamma -> 0 the variance map
  // sigma^2 = sigma_hh^2 * 2 gamma / (1 - e^{-2 gamma dt}) tends to
  // sigma_hh^2 / dt, which is used below the crossover; phi keeps its
  // printed form phi_hh + sigma^2/(2 gamma) and is legitimately huge for
  // tiny speeds (no finite level exists in the limit).
  const double x = p.gamma * dt;
  const double sigma_sq = std::fabs(x) < 1e-8
                              ? sigma_hh_sq / dt
                              : sigma_hh_sq * 2.0 * p.gamma / (1.0 - decay * decay);
  p.sigma = std::sqrt(sigma_sq);
  p.phi = phi_hh + sigma_sq / (2.0 * p.gamma);
  p.mean_reverting = p.gamma > 0.0;
  return p;
}

// Derived per-step level/variance of a parameter set (phi_hh recovered
// from the same stable forms the stepper uses).
struct XouDerived {
  double phi_hh = 0.0;
  double sigma_hh_sq = 0.0;
};

inline XouDerived xou_derived(const XouParams& p) {
  const XouStep s = xou_step_terms(p);
  XouDerived d;
  d.sigma_hh_sq = s.sigma_hh_sq;
  const double one_minus = 1.0 - s.decay;
  // drift = phi_hh (1 - decay); recover phi_hh where that is invertible.
  d.phi_hh = one_minus != 0.0 ? s.drift / one_minus
                              : std::numeric_limits<double>::quiet_NaN();
  return d;
}

// Log density of one observed transition y_prev -> y_next.
inline double xou_transition_logpdf(double y_prev, double y_next, const XouStep& s) {
  const double mean = y_prev * s.decay + s.drift;
  const double d = y_next - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * s.sigma_hh_sq) -
         0.5 * d * d / s.sigma_hh_sq;
}

// Sum of transition log densities over an equally spaced log-price path:
// the exact conditional log-likelihood the closed-form calibrator
// maximizes (kept separate so an independent numerical maximizer can be
// pointed at it).
inline double xou_loglik(std::span<const double> log_price, const XouParams& params) {
  require(log_price.size() >= 2, errc::estimation, "need at least one transition");
  const XouStep s = xou_step_terms(params);
  require(s.sigma_hh_sq > 0.0, errc::degenerate, "zero conditional variance");
  double sum = 0.0;
  for (std::size_t i = 1; i < log_price.size(); ++i)
    sum += xou_transition_logpdf(log_price[i - 1], log_price[i], s);
  return sum;
}

// Simulated price paths; element 0 is s0, so `steps` transitions yield
// steps+1 prices.
inline std::vector<double> simulate_gbm_prices(double s0, const GbmParams& p, std::size_t steps,
                                               RngStream& rng) {
  require(s0 > 0.0, errc::domain, "initial price must be positive");
  std::vector<double> out;
  out.reserve(steps + 1);
  out.push_back(s0);
  for (std::size_t i = 0; i < steps; ++i) out.push_back(gbm_step(out.back(), p, rng.normal()));
  return out;
}

inline std::vector<double> simulate_xou_prices(double s0, const XouParams& p, std::size_t steps,
                                               RngStream& rng) {
  require(s0 > 0.0, errc::domain, "initial price must be positive");
  const XouStep s = xou_step_terms(p);
  const double vol = std::sqrt(s.sigma_hh_sq);
  std::vector<double> out;
  out.reserve(steps + 1);
  out.push_back(s0);
  double y = std::log(s0);
  for (std::size_t i = 0; i < steps; ++i) {
    y = y * s.decay + s.drift + vol * rng.normal();
    out.push_back(std::exp(y));
  }
  return out;
}

}  // namespace illiq
