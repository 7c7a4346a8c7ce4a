#pragma once

// JSON views of the library types (nlohmann/json). Object keys are
// sorted by the library's ordered map, so serialization is deterministic.
// Non-finite MAPE values (divergent paths) are represented as JSON null
// next to an explicit boolean divergence flag, since JSON has no
// infinity literal; CSV output spells them "inf".

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "illiq/attenuation.hpp"
#include "illiq/csv_io.hpp"
#include "illiq/markov.hpp"
#include "illiq/regime.hpp"
#include "illiq/sde.hpp"
#include "illiq/stats.hpp"
#include "illiq/timeseries.hpp"

namespace illiq {

using json = nlohmann::json;

inline json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline json to_json(const PriceSeries& series) {
  json rows = json::array();
  for (const auto& o : series) rows.push_back({{"date", format_date(o.date)}, {"close", o.close}});
  return rows;
}

inline PriceSeries price_series_from_json(const json& rows) {
  require(rows.is_array(), errc::parse, "series JSON must be an array");
  std::vector<Observation> obs;
  obs.reserve(rows.size());
  for (const auto& row : rows) {
    require(row.is_object() && row.contains("date") && row.contains("close"), errc::parse,
            "series JSON rows need 'date' and 'close'");
    obs.push_back({parse_date(row["date"].get<std::string>(), DateFormat::iso),
                   row["close"].get<double>()});
  }
  return PriceSeries(std::move(obs));
}

inline json to_json(const GbmParams& p) {
  return {{"mu", p.mu}, {"sigma", p.sigma}, {"n_obs", p.n_obs}};
}

inline json to_json(const XouParams& p) {
  return {{"gamma", p.gamma},
          {"phi", finite_or_null(p.phi)},
          {"sigma", p.sigma},
          {"dt", p.dt},
          {"mean_reverting", p.mean_reverting}};
}

inline json to_json(const TransitionMatrix& m) {
  return {{"p", m.p},
          {"q", m.q},
          {"counts",
           {{"0->0", m.counts[0]},
            {"0->1", m.counts[1]},
            {"1->0", m.counts[2]},
            {"1->1", m.counts[3]}}}};
}

inline json to_json(const CombinedParams& cp) {
  json j{{"model", model_name(cp.model)},
         {"s0", cp.s0},
         {"last_date", format_date(cp.last_date)},
         {"initial_state", cp.initial_state},
         {"window",
          {{"start", format_date(cp.window_start)},
           {"end", format_date(cp.window_end)},
           {"n_raw", cp.n_raw},
           {"n_cleaned", cp.n_cleaned},
           {"sde_input", is_markov_model(cp.model) ? "cleaned" : "raw"}}}};
  if (is_xou_model(cp.model)) j["xou"] = to_json(cp.xou);
  else j["gbm"] = to_json(cp.gbm);
  if (is_markov_model(cp.model)) j["chain"] = to_json(cp.chain);
  return j;
}

inline CombinedParams combined_params_from_json(const json& j) {
  CombinedParams cp;
  cp.model = parse_model(j.at("model").get<std::string>());
  cp.s0 = j.at("s0").get<double>();
  cp.last_date = parse_date(j.at("last_date").get<std::string>(), DateFormat::iso);
  cp.initial_state = j.at("initial_state").get<int>();
  const json& w = j.at("window");
  cp.window_start = parse_date(w.at("start").get<std::string>(), DateFormat::iso);
  cp.window_end = parse_date(w.at("end").get<std::string>(), DateFormat::iso);
  cp.n_raw = w.at("n_raw").get<std::size_t>();
  cp.n_cleaned = w.at("n_cleaned").get<std::size_t>();
  if (is_xou_model(cp.model)) {
    const json& x = j.at("xou");
    cp.xou.gamma = x.at("gamma").get<double>();
    cp.xou.phi = x.at("phi").is_null() ? std::numeric_limits<double>::infinity()
                                       : x.at("phi").get<double>();
    cp.xou.sigma = x.at("sigma").get<double>();
    cp.xou.dt = x.at("dt").get<double>();
    cp.xou.mean_reverting = x.at("mean_reverting").get<bool>();
  } else {
    const json& g = j.at("gbm");
    cp.gbm.mu = g.at("mu").get<double>();
    cp.gbm.sigma = g.at("sigma").get<double>();
    cp.gbm.n_obs = g.at("n_obs").get<std::size_t>();
  }
  if (is_markov_model(cp.model)) {
    const json& c = j.at("chain");
    cp.chain.p = c.at("p").get<double>();
    cp.chain.q = c.at("q").get<double>();
    const json& counts = c.at("counts");
    cp.chain.counts = {counts.at("0->0").get<std::int64_t>(),
                       counts.at("0->1").get<std::int64_t>(),
                       counts.at("1->0").get<std::int64_t>(),
                       counts.at("1->1").get<std::int64_t>()};
  }
  return cp;
}

// Summary without the path matrix (which lives in the CSV/JSON payload).
inline json to_json_summary(const ForecastResult& r) {
  json mape_rows = json::array();
  for (double m : r.mape_per_path) mape_rows.push_back(finite_or_null(m));
  json diverged = json::array();
  for (char d : r.diverged) diverged.push_back(d != 0);
  json seeds = json::array();
  for (auto s : r.seeds) seeds.push_back(s);
  return {{"model", model_name(r.model)},
          {"horizon", r.horizon},
          {"n_sims", r.paths.size()},
          {"master_seed", r.master_seed},
          {"seeds", seeds},
          {"diverged", diverged},
          {"diverged_count", r.diverged_count},
          {"mape_per_path", mape_rows},
          {"mean_mape", finite_or_null(r.mean_mape)},
          {"median_mape", finite_or_null(r.median_mape)},
          {"scored", !r.actual.empty()}};
}

inline json to_json(const KsResult& k) {
  return {{"statistic", k.statistic}, {"p_value", k.p_value},   {"alpha", k.alpha},
          {"n1", k.n1},               {"n2", k.n2},             {"decision", k.different ? "different" : "similar"}};
}

inline json to_json(const AttenuationCell& c) {
  return {{"p", c.p},
          {"q", c.q},
          {"pi0", c.pi0},
          {"rho_measured", finite_or_null(c.rho_measured)},
          {"rho_unmodulated", finite_or_null(c.rho_unmodulated)},
          {"rho_predicted", finite_or_null(c.rho_predicted)},
          {"rho_limit", finite_or_null(c.rho_limit)},
          {"samples", c.samples},
          {"defined", c.defined}};
}

}  // namespace illiq
