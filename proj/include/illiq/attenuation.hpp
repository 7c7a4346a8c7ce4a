#pragma once

// Correlation attenuation study: two gBm legs driven by correlated
// shocks (z2 = rho z1 + sqrt(1-rho^2) w), each then modulated by its own
// independent two-state chain. Measured on daily log returns (zero
// returns from no-move days included), the correlation of the modulated
// pair drops below rho; the closed-form prediction for the attenuated
// value is
//
//   rho_xy = (1-pi0x)(1-pi0y) rho sx sy /
//            sqrt( ((1-pi0x) sx^2 + (1-pi0x) pi0x mx^2) *
//                  ((1-pi0y) sy^2 + (1-pi0y) pi0y my^2) )
//
// which reduces to rho (1 - pi0) for equal legs with zero drift.
//
// Two shock policies are implemented. `discard` pairs the legs by
// calendar day: a no-move day throws that day's shock away, so the
// shocks the two legs do use on a common move day are correlated — the
// regime the prediction above describes. `pause` queues the shocks
// instead (a no-move day consumes nothing), preserving each leg's shock
// multiset but letting the two legs' queues drift apart, which erodes
// the measured cross-correlation toward zero over long horizons.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "illiq/error.hpp"
#include "illiq/markov.hpp"
#include "illiq/parallel.hpp"
#include "illiq/rng.hpp"
#include "illiq/sde.hpp"
#include "illiq/stats.hpp"

namespace illiq {

struct PricePair {
  std::vector<double> x;  // steps+1 prices, element 0 = s0
  std::vector<double> y;
};

struct CorrelatedPairSpec {
  GbmParams leg_x;
  GbmParams leg_y;
  double rho = 0.0;
  double s0_x = 100.0;
  double s0_y = 100.0;
  std::size_t steps = 0;
};

// One draw pair per step from a single stream: z1, then w, combined into
// z2, so the whole pair is reproducible from one seed.
inline PricePair simulate_correlated_gbm_pair(const CorrelatedPairSpec& spec, RngStream& rng) {
  require(spec.rho >= -1.0 && spec.rho <= 1.0, errc::domain, "rho must lie in [-1,1]");
  require(spec.s0_x > 0.0 && spec.s0_y > 0.0, errc::domain, "initial prices must be positive");
  require(spec.steps >= 1, errc::domain, "need at least one step");
  const double mix = std::sqrt(1.0 - spec.rho * spec.rho);
  PricePair out;
  out.x.reserve(spec.steps + 1);
  out.y.reserve(spec.steps + 1);
  out.x.push_back(spec.s0_x);
  out.y.push_back(spec.s0_y);
  for (std::size_t i = 0; i < spec.steps; ++i) {
    const double z1 = rng.normal();
    const double w = rng.normal();
    const double z2 = spec.rho * z1 + mix * w;
    out.x.push_back(out.x.back() * std::exp(spec.leg_x.mu + spec.leg_x.sigma * z1));
    out.y.push_back(out.y.back() * std::exp(spec.leg_y.mu + spec.leg_y.sigma * z2));
  }
  return out;
}

enum class ShockPolicy { pause, discard };

inline const char* shock_policy_name(ShockPolicy p) {
  return p == ShockPolicy::pause ? "pause" : "discard";
}

inline ShockPolicy parse_shock_policy(std::string_view name) {
  if (name == "pause") return ShockPolicy::pause;
  if (name == "discard") return ShockPolicy::discard;
  fail(errc::config, "unknown shock policy '" + std::string(name) + "'");
}

struct ModulatedPair {
  std::vector<double> x;  // modulated prices, steps+1 each
  std::vector<double> y;
  std::vector<int> states_x;  // per-day states, steps each
  std::vector<int> states_y;
};

// Modulates each leg with its own chain. Initial states are drawn from
// each chain's stationary distribution (one uniform per chain stream),
// then advanced day by day. On a move day the leg applies one underlying
// log return — the day's own under `discard`, the next queued one under
// `pause`; on a no-move day the price repeats bit-exactly.
inline ModulatedPair modulate_pair(const PricePair& pair, const TransitionMatrix& chain_x,
                                   const TransitionMatrix& chain_y, RngStream& rng_x,
                                   RngStream& rng_y, ShockPolicy policy = ShockPolicy::pause) {
  require(pair.x.size() == pair.y.size(), errc::domain, "legs have different lengths");
  require(pair.x.size() >= 2, errc::domain, "need at least one underlying step");
  const std::size_t steps = pair.x.size() - 1;

  ModulatedPair out;
  out.x.reserve(steps + 1);
  out.y.reserve(steps + 1);
  out.x.push_back(pair.x.front());
  out.y.push_back(pair.y.front());
  out.states_x.reserve(steps);
  out.states_y.reserve(steps);

  const SteadyState ssx = steady_state(chain_x);
  const SteadyState ssy = steady_state(chain_y);
  int sx = rng_x.uniform() < ssx.pi0 ? 0 : 1;
  int sy = rng_y.uniform() < ssy.pi0 ? 0 : 1;

  std::size_t next_x = 0, next_y = 0;  // queue positions under `pause`
  for (std::size_t t = 0; t < steps; ++t) {
    const double ux = rng_x.uniform();
    sx = sx == 0 ? (ux < chain_x.p ? 0 : 1) : (ux < chain_x.q ? 1 : 0);
    const double uy = rng_y.uniform();
    sy = sy == 0 ? (uy < chain_y.p ? 0 : 1) : (uy < chain_y.q ? 1 : 0);
    out.states_x.push_back(sx);
    out.states_y.push_back(sy);

    if (sx == 1) {
      const std::size_t k = policy == ShockPolicy::pause ? next_x++ : t;
      out.x.push_back(out.x.back() * (pair.x[k + 1] / pair.x[k]));
    } else {
      out.x.push_back(out.x.back());
    }
    if (sy == 1) {
      const std::size_t k = policy == ShockPolicy::pause ? next_y++ : t;
      out.y.push_back(out.y.back() * (pair.y[k + 1] / pair.y[k]));
    } else {
      out.y.push_back(out.y.back());
    }
  }
  return out;
}

// The closed-form attenuated correlation quoted above.
inline double predicted_attenuation(const GbmParams& leg_x, const GbmParams& leg_y, double pi0x,
                                    double pi0y, double rho) {
  require(pi0x >= 0.0 && pi0x < 1.0 && pi0y >= 0.0 && pi0y < 1.0, errc::domain,
          "pi0 must lie in [0,1)");
  require(rho >= -1.0 && rho <= 1.0, errc::domain, "rho must lie in [-1,1]");
  const double vx = (1.0 - pi0x) * leg_x.sigma * leg_x.sigma +
                    (1.0 - pi0x) * pi0x * leg_x.mu * leg_x.mu;
  const double vy = (1.0 - pi0y) * leg_y.sigma * leg_y.sigma +
                    (1.0 - pi0y) * pi0y * leg_y.mu * leg_y.mu;
  require(vx > 0.0 && vy > 0.0, errc::degenerate, "a leg has zero modulated variance");
  return (1.0 - pi0x) * (1.0 - pi0y) * rho * leg_x.sigma * leg_y.sigma / std::sqrt(vx * vy);
}

struct AttenuationCell {
  double p = 0.0;
  double q = 0.0;
  double pi0 = 0.0;
  double rho_measured = std::numeric_limits<double>::quiet_NaN();
  double rho_unmodulated = std::numeric_limits<double>::quiet_NaN();
  double rho_predicted = std::numeric_limits<double>::quiet_NaN();  // closed form above
  double rho_limit = std::numeric_limits<double>::quiet_NaN();      // zero-drift limit rho(1-pi0)
  std::size_t samples = 0;  // return observations behind rho_measured
  bool defined = false;     // false when every replication was degenerate
};

struct AttenuationStudySpec {
  std::vector<std::pair<double, double>> grid;  // (p, q) per cell, both legs
  GbmParams leg;                                // shared by both legs
  double rho = 0.8;
  double s0 = 100.0;
  std::size_t horizon = 50000;
  std::size_t replications = 10;
  std::uint64_t master_seed = 0;
  ShockPolicy policy = ShockPolicy::discard;
  bool price_levels = false;  // measure on price levels instead of log returns
  unsigned threads = 1;
};

namespace detail {

inline std::vector<double> pair_leg_returns(const std::vector<double>& prices) {
  std::vector<double> r;
  r.reserve(prices.size() - 1);
  for (std::size_t i = 1; i < prices.size(); ++i) r.push_back(std::log(prices[i] / prices[i - 1]));
  return r;
}

}  // namespace detail

// Per cell: `replications` independent simulations, each measured with
// the Pearson coefficient on daily log returns (zeros included) — or on
// price levels when requested — then averaged. Replication (c, r) uses
// three derived streams (pair, chain x, chain y) with indices
// 3(c*replications + r) + {0,1,2} of the master seed, so any single
// replication can be reproduced in isolation.
inline std::vector<AttenuationCell> attenuation_study(const AttenuationStudySpec& spec) {
  require(!spec.grid.empty(), errc::config, "empty study grid");
  require(spec.horizon >= 2, errc::domain, "horizon too short to correlate");
  require(spec.replications >= 1, errc::domain, "need at least one replication");

  struct RepResult {
    double modulated = std::numeric_limits<double>::quiet_NaN();
    double unmodulated = std::numeric_limits<double>::quiet_NaN();
    bool defined = false;
  };
  const std::size_t cells = spec.grid.size();
  const std::size_t reps = spec.replications;
  std::vector<RepResult> results(cells * reps);

  parallel_for(cells * reps, spec.threads, [&](std::size_t job) {
    const std::size_t c = job / reps;
    auto [p, q] = spec.grid[c];
    const TransitionMatrix chain = from_probabilities(p, q);

    CorrelatedPairSpec pair_spec;
    pair_spec.leg_x = spec.leg;
    pair_spec.leg_y = spec.leg;
    pair_spec.rho = spec.rho;
    pair_spec.s0_x = spec.s0;
    pair_spec.s0_y = spec.s0;
    pair_spec.steps = spec.horizon;

    RngStream pair_rng(derive_stream_seed(spec.master_seed, 3 * job));
    RngStream chain_x_rng(derive_stream_seed(spec.master_seed, 3 * job + 1));
    RngStream chain_y_rng(derive_stream_seed(spec.master_seed, 3 * job + 2));

    const PricePair pair = simulate_correlated_gbm_pair(pair_spec, pair_rng);
    const ModulatedPair mod =
        modulate_pair(pair, chain, chain, chain_x_rng, chain_y_rng, spec.policy);

    RepResult& out = results[job];
    try {
      if (spec.price_levels) {
        std::vector<double> px(pair.x.begin() + 1, pair.x.end());
        std::vector<double> py(pair.y.begin() + 1, pair.y.end());
        std::vector<double> mx(mod.x.begin() + 1, mod.x.end());
        std::vector<double> my(mod.y.begin() + 1, mod.y.end());
        out.unmodulated = pearson(px, py);
        out.modulated = pearson(mx, my);
      } else {
        out.unmodulated =
            pearson(detail::pair_leg_returns(pair.x), detail::pair_leg_returns(pair.y));
        out.modulated =
            pearson(detail::pair_leg_returns(mod.x), detail::pair_leg_returns(mod.y));
      }
      out.defined = true;
    } catch (const Error& e) {
      if (e.code() != errc::degenerate) throw;  // all-no-move chains stay undefined
    }
  });

  std::vector<AttenuationCell> table;
  table.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    auto [p, q] = spec.grid[c];
    AttenuationCell cell;
    cell.p = p;
    cell.q = q;
    cell.pi0 = steady_state(from_probabilities(p, q)).pi0;
    cell.rho_limit = spec.rho * (1.0 - cell.pi0);
    try {
      cell.rho_predicted = predicted_attenuation(spec.leg, spec.leg, cell.pi0, cell.pi0, spec.rho);
    } catch (const Error&) {
      // pi0 = 1 (never trades): the prediction is undefined; stays NaN.
    }
    double sum_mod = 0.0, sum_unmod = 0.0;
    std::size_t defined = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const RepResult& rr = results[c * reps + r];
      if (!rr.defined) continue;
      sum_mod += rr.modulated;
      sum_unmod += rr.unmodulated;
      ++defined;
    }
    if (defined > 0) {
      cell.defined = true;
      cell.rho_measured = sum_mod / static_cast<double>(defined);
      cell.rho_unmodulated = sum_unmod / static_cast<double>(defined);
      cell.samples = defined * spec.horizon;
    }
    table.push_back(cell);
  }
  return table;
}

}  // namespace illiq
