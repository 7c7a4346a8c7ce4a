#pragma once

// The four forecasting models and the calibrate -> simulate -> score
// pipeline. "Plain" gBm/XOU are calibrated on the raw window. The
// Markov-modulated variants (mm-gbm, mm-xou) split the job: SDE
// parameters come from the window with repeated closes removed, the
// stay probabilities (p, q) from the raw window's move/no-move encoding.
// Simulated forecasts are free-running: paths start at the last
// calibration close and are never re-anchored to realized data. On a
// no-move day the path repeats its last price bit-exactly; on a move day
// it applies one SDE step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "illiq/error.hpp"
#include "illiq/markov.hpp"
#include "illiq/parallel.hpp"
#include "illiq/rng.hpp"
#include "illiq/sde.hpp"
#include "illiq/stats.hpp"
#include "illiq/timeseries.hpp"

namespace illiq {

enum class Model { gbm, xou, mm_gbm, mm_xou };

inline const char* model_name(Model m) {
  switch (m) {
    case Model::gbm: return "gbm";
    case Model::xou: return "xou";
    case Model::mm_gbm: return "mm-gbm";
    case Model::mm_xou: return "mm-xou";
  }
  return "?";
}

inline Model parse_model(std::string_view name) {
  if (name == "gbm") return Model::gbm;
  if (name == "xou") return Model::xou;
  if (name == "mm-gbm") return Model::mm_gbm;
  if (name == "mm-xou") return Model::mm_xou;
  fail(errc::config, "unknown model '" + std::string(name) +
                         "' (expected gbm, xou, mm-gbm, or mm-xou)");
}

inline bool is_markov_model(Model m) { return m == Model::mm_gbm || m == Model::mm_xou; }
inline bool is_xou_model(Model m) { return m == Model::xou || m == Model::mm_xou; }

// Everything a forecast needs: the fitted SDE, the fitted chain (for the
// mm variants), the anchor (last close and date), the state the window
// ended in, and window bookkeeping for reports.
struct CombinedParams {
  Model model = Model::gbm;
  GbmParams gbm;           // meaningful when !is_xou_model(model)
  XouParams xou;           // meaningful when is_xou_model(model)
  TransitionMatrix chain;  // meaningful when is_markov_model(model)
  int initial_state = 1;   // last observed state of the calibration window
  double s0 = 0.0;         // last calibration close
  Date last_date{};        // its date
  Date window_start{};
  Date window_end{};
  std::size_t n_raw = 0;      // observations in the window
  std::size_t n_cleaned = 0;  // after repetition removal
};

inline CombinedParams calibrate_combined(const PriceSeries& window, Model model,
                                         double dt = 1.0) {
  require(window.size() >= 3, errc::estimation,
          "calibration window must hold at least three closes");
  CombinedParams cp;
  cp.model = model;
  cp.window_start = window.front().date;
  cp.window_end = window.back().date;
  cp.n_raw = window.size();
  cp.s0 = window.back().close;
  cp.last_date = window.back().date;

  const CleanedSeries cleaned = remove_repetitions(window);
  cp.n_cleaned = cleaned.series.size();

  const bool markov = is_markov_model(model);
  const PriceSeries& sde_input = markov ? cleaned.series : window;
  if (markov) {
    require(cleaned.series.size() >= 3, errc::estimation,
            "fewer than three distinct closes in the window after cleaning");
    cp.chain = estimate_transitions(encode_states(window));
    cp.initial_state =
        window[window.size() - 1].close == window[window.size() - 2].close ? 0 : 1;
  } else {
    cp.initial_state = 1;
  }

  if (is_xou_model(model)) {
    cp.xou = calibrate_xou(log_prices(sde_input).values, dt);
  } else {
    cp.gbm = calibrate_gbm(log_returns(sde_input).values);
  }
  return cp;
}

struct SimulationSpec {
  std::size_t horizon = 0;
  std::size_t n_sims = 1;
  std::uint64_t master_seed = 0;
  double divergence_ceiling = 1e12;  // ratio to s0 at which a path is flagged
  unsigned threads = 1;              // 0 = hardware concurrency
};

// One free-running path of `horizon` prices (the first element is the
// price one step after s0). The path is simulated in log space; once the
// log distance from s0 exceeds ln(divergence_ceiling) the path is flagged
// divergent, clamped at the ceiling, and held there — the batch never
// aborts on a runaway parameter set.
inline std::vector<double> simulate_model_path(const CombinedParams& cp, std::size_t horizon,
                                               RngStream& rng, double divergence_ceiling,
                                               bool& diverged) {
  require(horizon >= 1, errc::domain, "horizon must be at least one step");
  require(cp.s0 > 0.0, errc::domain, "anchor price must be positive");
  require(divergence_ceiling > 1.0, errc::domain, "divergence ceiling must exceed one");
  diverged = false;
  const bool markov = is_markov_model(cp.model);
  const bool use_xou = is_xou_model(cp.model);
  XouStep xs;
  double xou_vol = 0.0;
  if (use_xou) {
    xs = xou_step_terms(cp.xou);
    xou_vol = std::sqrt(xs.sigma_hh_sq);
  }
  const double y0 = std::log(cp.s0);
  const double bound = std::log(divergence_ceiling);

  std::vector<double> out;
  out.reserve(horizon);
  double y = y0;
  double price = cp.s0;
  int state = markov ? cp.initial_state : 1;
  for (std::size_t h = 0; h < horizon; ++h) {
    if (!diverged) {
      bool move = true;
      if (markov) {
        const double u = rng.uniform();
        state = state == 0 ? (u < cp.chain.p ? 0 : 1) : (u < cp.chain.q ? 1 : 0);
        move = state == 1;
      }
      if (move) {
        y = use_xou ? y * xs.decay + xs.drift + xou_vol * rng.normal()
                    : y + cp.gbm.mu + cp.gbm.sigma * rng.normal();
        if (std::fabs(y - y0) > bound) {
          diverged = true;
          y = y0 + std::clamp(y - y0, -bound, bound);
        }
        price = std::exp(y);
      }
      // No move: price (and y) stay exactly as they were.
    }
    out.push_back(price);
  }
  return out;
}

struct ForecastResult {
  Model model = Model::gbm;
  std::size_t horizon = 0;
  std::uint64_t master_seed = 0;
  std::vector<Date> dates;                // one per horizon step
  std::vector<double> actual;             // aligned actuals; empty if none given
  std::vector<std::vector<double>> paths;  // n_sims x horizon
  std::vector<std::uint64_t> seeds;       // per-path stream seeds
  std::vector<char> diverged;             // per-path divergence flags
  std::vector<double> mape_per_path;      // percent; +inf for diverged paths
  double mean_mape = std::numeric_limits<double>::quiet_NaN();
  double median_mape = std::numeric_limits<double>::quiet_NaN();
  std::size_t diverged_count = 0;
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Simulates n_sims free-running paths. Path i draws from an independent
// stream seeded with derive_stream_seed(master_seed, i), so results are
// identical whatever the thread count. When aligned actuals are supplied
// each path is scored by MAPE; divergent paths score +infinity.
inline ForecastResult run_forecast(const CombinedParams& cp, const std::vector<Date>& dates,
                                   const std::vector<double>& actual,
                                   const SimulationSpec& spec) {
  require(spec.horizon >= 1, errc::domain, "horizon must be at least one step");
  require(spec.n_sims >= 1, errc::domain, "need at least one path");
  require(dates.size() == spec.horizon, errc::domain, "dates must cover the horizon");
  require(actual.empty() || actual.size() == spec.horizon, errc::domain,
          "actuals must cover the horizon exactly");

  ForecastResult r;
  r.model = cp.model;
  r.horizon = spec.horizon;
  r.master_seed = spec.master_seed;
  r.dates = dates;
  r.actual = actual;
  r.paths.assign(spec.n_sims, {});
  r.seeds.assign(spec.n_sims, 0);
  r.diverged.assign(spec.n_sims, 0);
  if (!actual.empty()) r.mape_per_path.assign(spec.n_sims, 0.0);

  parallel_for(spec.n_sims, spec.threads, [&](std::size_t i) {
    const std::uint64_t seed = derive_stream_seed(spec.master_seed, i);
    RngStream rng(seed);
    bool div = false;
    r.seeds[i] = seed;
    r.paths[i] = simulate_model_path(cp, spec.horizon, rng, spec.divergence_ceiling, div);
    r.diverged[i] = div ? 1 : 0;
    if (!actual.empty())
      r.mape_per_path[i] =
          div ? std::numeric_limits<double>::infinity() : mape(actual, r.paths[i]);
  });

  for (char d : r.diverged) r.diverged_count += d != 0;
  if (!r.mape_per_path.empty()) {
    r.mean_mape = detail::mean_of(r.mape_per_path);
    r.median_mape = detail::median_of(r.mape_per_path);
  }
  return r;
}

// Forecast scored against a realized continuation: rows of `actuals`
// dated after the calibration window end are the comparison series (the
// same file that fed calibration can be passed straight back in).
inline ForecastResult forecast(const CombinedParams& cp, const PriceSeries& actuals,
                               const SimulationSpec& spec) {
  std::vector<Date> dates;
  std::vector<double> values;
  for (const auto& o : actuals)
    if (cp.window_end < o.date) {
      dates.push_back(o.date);
      values.push_back(o.close);
    }
  require(dates.size() >= spec.horizon, errc::window,
          "only " + std::to_string(dates.size()) + " actual observations after " +
              format_date(cp.window_end) + ", horizon needs " + std::to_string(spec.horizon));
  dates.resize(spec.horizon);
  values.resize(spec.horizon);
  return run_forecast(cp, dates, values, spec);
}

// Forecast without actuals: paths are dated on the weekdays following the
// calibration window and no MAPE is computed.
inline ForecastResult forecast(const CombinedParams& cp, const SimulationSpec& spec) {
  std::vector<Date> dates;
  Date d = cp.last_date;
  while (dates.size() < spec.horizon) {
    d = add_days(d, 1);
    if (!is_weekend(d)) dates.push_back(d);
  }
  return run_forecast(cp, dates, {}, spec);
}

}  // namespace illiq
