// illiq — command-line front end of the illiquid-price toolkit.
//
// Every command is deterministic: the same inputs, flags, and seed produce
// byte-identical output files whatever the thread count, so runs can be
// diffed. Each command writes its data file(s) plus a <out>_meta.json
// sidecar recording the effective invocation; the sidecar deliberately
// omits the thread count and the config path, which must not influence
// output bytes.
//
// Option precedence, lowest to highest: built-in defaults, the ILLIQ_SEED
// environment variable (seed only), the --config JSON file, explicit
// command-line flags.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "illiq/attenuation.hpp"
#include "illiq/csv_io.hpp"
#include "illiq/dates.hpp"
#include "illiq/error.hpp"
#include "illiq/json_io.hpp"
#include "illiq/markov.hpp"
#include "illiq/regime.hpp"
#include "illiq/sde.hpp"
#include "illiq/stats.hpp"
#include "illiq/timeseries.hpp"

namespace {

using json = nlohmann::json;
using illiq::errc;
using illiq::Error;
using illiq::fail;
using illiq::format_date;
using illiq::format_double;
using illiq::require;

struct Common {
  std::uint64_t seed = 0x5EED;
  std::string output_dir = ".";
  std::string format = "csv";
  unsigned threads = 1;
};

// ---------------------------------------------------------------- files

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return (std::filesystem::path(dir) / name).string();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), errc::io, "cannot open output file '" + path + "'");
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::io, "cannot open input file '" + path + "'");
  return in;
}

json parse_json_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(errc::parse, "'" + path + "' is not valid JSON: " + std::string(e.what()));
  }
}

// A series file is canonical CSV unless its name ends in .json, in which
// case it is the array-of-rows form the json output format writes.
illiq::PriceSeries read_series(const std::string& path) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return illiq::price_series_from_json(parse_json_file(path));
  auto in = open_input(path);
  return illiq::parse_price_csv(in, illiq::canonical_schema());
}

void write_series(const Common& c, const std::string& path, const illiq::PriceSeries& s) {
  auto out = open_output(path);
  if (c.format == "json")
    out << illiq::to_json(s).dump(2) << '\n';
  else
    illiq::write_series_csv(out, s);
}

// ----------------------------------------------------------------- meta

struct MetaSpec {
  std::string command;
  json inputs = json::array();
  json parameters = json::object();
  json outputs = json::array();
  json summary;  // optional block of result headlines
};

void write_meta(const Common& c, const std::string& out_base, const MetaSpec& m) {
  json j{{"command", m.command},  {"seed", c.seed},          {"output_dir", c.output_dir},
         {"format", c.format},    {"inputs", m.inputs},      {"parameters", m.parameters},
         {"outputs", m.outputs}};
  if (!m.summary.is_null()) j["summary"] = m.summary;
  auto out = open_output(join_path(c.output_dir, out_base + "_meta.json"));
  out << j.dump(2) << '\n';
}

void note_written(const Common& c, std::initializer_list<std::string> names) {
  std::cout << "wrote";
  const char* sep = " ";
  for (const auto& n : names) {
    std::cout << sep << join_path(c.output_dir, n);
    sep = ", ";
  }
  std::cout << '\n';
}

// --------------------------------------------------------------- config

json load_config(const std::string& path) {
  const json j = parse_json_file(path);
  require(j.is_object(), errc::config, "config root must be a JSON object");
  return j;
}

// Config sections mirror the command line exactly: top-level keys are the
// global flags or a command name, and a command section may only set that
// command's own flags.
void validate_config(const json& cfg, const CLI::App& app) {
  static const std::set<std::string> globals{"seed", "output-dir", "format", "threads"};
  for (const auto& item : cfg.items()) {
    const std::string& key = item.key();
    if (globals.count(key)) continue;
    const CLI::App* sub = nullptr;
    try {
      sub = app.get_subcommand(key);
    } catch (const CLI::OptionNotFound&) {
      fail(errc::config, "unknown config key '" + key + "'");
    }
    require(item.value().is_object(), errc::config,
            "config section '" + key + "' must be an object");
    std::set<std::string> allowed;
    for (const CLI::Option* opt : sub->get_options())
      for (const std::string& lname : opt->get_lnames()) allowed.insert(lname);
    for (const auto& entry : item.value().items())
      require(allowed.count(entry.key()) > 0, errc::config,
              "unknown key '" + entry.key() + "' in config section '" + key + "'");
  }
}

template <class T>
T config_get(const json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    fail(errc::config, "config key '" + key + "' has the wrong type");
  }
}

// Applies a config-section value unless the flag was given explicitly.
template <class T>
void take(const CLI::App* cmd, const json& section, const std::string& key, T& value) {
  if (cmd->count("--" + key) > 0 || !section.contains(key)) return;
  try {
    value = section.at(key).get<T>();
  } catch (const json::exception&) {
    fail(errc::config,
         "config key '" + cmd->get_name() + "." + key + "' has the wrong type");
  }
}

std::uint64_t parse_env_seed(const char* text) {
  const std::string_view sv(text);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  require(!sv.empty() && ec == std::errc() && p == sv.data() + sv.size(), errc::config,
          "ILLIQ_SEED must be an unsigned integer, got '" + std::string(sv) + "'");
  return v;
}

// --------------------------------------------------------------- ingest

struct IngestOpts {
  std::string input;
  std::string date_col = "date";
  std::string price_col = "close";
  std::string date_format = "iso";
  std::string order = "asc";
  std::string delimiter = ",";
  std::string out = "series";
};

void run_ingest(const CLI::App* cmd, const json& sec, IngestOpts o, const Common& c) {
  take(cmd, sec, "input", o.input);
  take(cmd, sec, "date-col", o.date_col);
  take(cmd, sec, "price-col", o.price_col);
  take(cmd, sec, "date-format", o.date_format);
  take(cmd, sec, "order", o.order);
  take(cmd, sec, "delimiter", o.delimiter);
  take(cmd, sec, "out", o.out);
  require(!o.input.empty(), errc::config, "missing required option '--input' for ingest");
  require(o.date_format == "iso" || o.date_format == "mdy", errc::config,
          "date-format must be iso or mdy");
  require(o.order == "asc" || o.order == "desc", errc::config, "order must be asc or desc");
  require(o.delimiter.size() == 1, errc::config, "delimiter must be a single character");

  illiq::CsvSchema schema;
  schema.date_column = o.date_col;
  schema.price_column = o.price_col;
  schema.date_format = o.date_format == "iso" ? illiq::DateFormat::iso : illiq::DateFormat::mdy;
  schema.descending = o.order == "desc";
  schema.delimiter = o.delimiter[0];

  auto in = open_input(o.input);
  const auto series = illiq::parse_price_csv(in, schema);

  const std::string out_name = o.out + (c.format == "json" ? ".json" : ".csv");
  write_series(c, join_path(c.output_dir, out_name), series);

  MetaSpec m;
  m.command = "ingest";
  m.inputs = json::array({o.input});
  m.parameters = {{"date-col", o.date_col},         {"price-col", o.price_col},
                  {"date-format", o.date_format},   {"order", o.order},
                  {"delimiter", o.delimiter},       {"out", o.out}};
  m.outputs = json::array({out_name});
  m.summary = {{"rows", series.size()},
               {"first_date", format_date(series.front().date)},
               {"last_date", format_date(series.back().date)}};
  write_meta(c, o.out, m);

  std::cout << "ingest: " << series.size() << " closes " << format_date(series.front().date)
            << " .. " << format_date(series.back().date) << '\n';
  note_written(c, {out_name, o.out + "_meta.json"});
}

// ---------------------------------------------------------------- clean

struct CleanOpts {
  std::string input;
  std::string out = "cleaned";
};

void run_clean(const CLI::App* cmd, const json& sec, CleanOpts o, const Common& c) {
  take(cmd, sec, "input", o.input);
  take(cmd, sec, "out", o.out);
  require(!o.input.empty(), errc::config, "missing required option '--input' for clean");

  const auto series = read_series(o.input);
  const auto cleaned = illiq::remove_repetitions(series);

  const std::string out_name = o.out + (c.format == "json" ? ".json" : ".csv");
  write_series(c, join_path(c.output_dir, out_name), cleaned.series);

  MetaSpec m;
  m.command = "clean";
  m.inputs = json::array({o.input});
  m.parameters = {{"out", o.out}};
  m.outputs = json::array({out_name});
  m.summary = {{"rows_in", series.size()},
               {"rows_out", cleaned.series.size()},
               {"removed", cleaned.removed}};
  write_meta(c, o.out, m);

  std::cout << "clean: kept " << cleaned.series.size() << " of " << series.size()
            << " closes (" << cleaned.removed << " repeats removed)\n";
  note_written(c, {out_name, o.out + "_meta.json"});
}

// ------------------------------------------------------------- resample

struct ResampleOpts {
  std::string input;
  std::string weekday = "Friday";
  bool no_fill = false;
  std::string out = "weekly";
};

void run_resample(const CLI::App* cmd, const json& sec, ResampleOpts o, const Common& c) {
  take(cmd, sec, "input", o.input);
  take(cmd, sec, "weekday", o.weekday);
  take(cmd, sec, "no-fill", o.no_fill);
  take(cmd, sec, "out", o.out);
  require(!o.input.empty(), errc::config, "missing required option '--input' for resample");

  const auto series = read_series(o.input);
  const auto target = illiq::parse_weekday(o.weekday);
  const auto filled =
      o.no_fill ? series
                : illiq::forward_fill(series, illiq::weekday_calendar(series.front().date,
                                                                      series.back().date));
  const auto weekly = illiq::weekly_resample(filled, target);

  const std::string out_name = o.out + (c.format == "json" ? ".json" : ".csv");
  write_series(c, join_path(c.output_dir, out_name), weekly);

  MetaSpec m;
  m.command = "resample";
  m.inputs = json::array({o.input});
  m.parameters = {{"weekday", o.weekday}, {"no-fill", o.no_fill}, {"out", o.out}};
  m.outputs = json::array({out_name});
  m.summary = {{"rows_in", series.size()}, {"rows_out", weekly.size()}};
  write_meta(c, o.out, m);

  std::cout << "resample: " << series.size() << " daily closes -> " << weekly.size()
            << " weekly (" << o.weekday << ")\n";
  note_written(c, {out_name, o.out + "_meta.json"});
}

// ------------------------------------------------------------ calibrate

struct CalibrateOpts {
  std::string input;
  std::string model;
  std::string start;
  std::string end;
  double dt = 1.0;
  std::string out = "params";
};

void run_calibrate(const CLI::App* cmd, const json& sec, CalibrateOpts o, const Common& c) {
  take(cmd, sec, "input", o.input);
  take(cmd, sec, "model", o.model);
  take(cmd, sec, "start", o.start);
  take(cmd, sec, "end", o.end);
  take(cmd, sec, "dt", o.dt);
  take(cmd, sec, "out", o.out);
  require(!o.input.empty(), errc::config, "missing required option '--input' for calibrate");
  require(!o.model.empty(), errc::config, "missing required option '--model' for calibrate");

  const illiq::Model model = illiq::parse_model(o.model);
  const auto series = read_series(o.input);
  const illiq::Date start =
      o.start.empty() ? series.front().date : illiq::parse_date(o.start, illiq::DateFormat::iso);
  const illiq::Date end =
      o.end.empty() ? series.back().date : illiq::parse_date(o.end, illiq::DateFormat::iso);
  const auto cp = illiq::calibrate_combined(series.window(start, end), model, o.dt);

  const std::string out_name = o.out + ".json";  // parameters are always JSON
  {
    auto out = open_output(join_path(c.output_dir, out_name));
    out << illiq::to_json(cp).dump(2) << '\n';
  }

  MetaSpec m;
  m.command = "calibrate";
  m.inputs = json::array({o.input});
  m.parameters = {{"model", o.model},
                  {"start", format_date(cp.window_start)},
                  {"end", format_date(cp.window_end)},
                  {"dt", o.dt},
                  {"out", o.out}};
  m.outputs = json::array({out_name});
  write_meta(c, o.out, m);

  std::cout << "model: " << illiq::model_name(cp.model) << '\n'
            << "window: " << format_date(cp.window_start) << " .. " << format_date(cp.window_end)
            << " (" << cp.n_raw << " closes, " << cp.n_cleaned << " after repeat removal)\n"
            << "anchor: " << format_double(cp.s0) << " at " << format_date(cp.last_date) << '\n';
  if (illiq::is_xou_model(cp.model)) {
    std::cout << "gamma: " << format_double(cp.xou.gamma) << " (reversion speed per day)\n"
              << "phi: " << format_double(cp.xou.phi) << " (long-run log-price level)\n"
              << "sigma: " << format_double(cp.xou.sigma) << " (diffusion coefficient)\n"
              << "mean-reverting: " << (cp.xou.mean_reverting ? "yes" : "no") << '\n';
  } else {
    std::cout << "mu: " << format_double(cp.gbm.mu) << " (mean daily log return)\n"
              << "sigma: " << format_double(cp.gbm.sigma) << " (daily log-return volatility)\n";
  }
  if (illiq::is_markov_model(cp.model)) {
    std::cout << "p: " << format_double(cp.chain.p) << " (stay-quiet)\n"
              << "q: " << format_double(cp.chain.q) << " (stay-moving)\n"
              << "pi0: " << format_double(illiq::steady_state(cp.chain).pi0)
              << " (long-run no-trade share)\n"
              << "initial state: " << (cp.initial_state == 0 ? "quiet" : "moving") << '\n';
  }
  note_written(c, {out_name, o.out + "_meta.json"});
}

// ------------------------------------------------------------- forecast

struct ForecastOpts {
  std::string params;
  std::string actuals;
  std::size_t horizon = 0;
  std::size_t sims = 1000;
  double ceiling = 1e12;
  std::string out = "forecast";
};

illiq::ForecastResult run_simulation(const ForecastOpts& o, const Common& c,
                                     const illiq::CombinedParams& cp) {
  illiq::SimulationSpec spec;
  spec.horizon = o.horizon;
  spec.n_sims = o.sims;
  spec.master_seed = c.seed;
  spec.divergence_ceiling = o.ceiling;
  spec.threads = c.threads;
  if (o.actuals.empty()) return illiq::forecast(cp, spec);
  return illiq::forecast(cp, read_series(o.actuals), spec);
}

void print_forecast_headline(const char* command, const illiq::ForecastResult& r) {
  std::cout << command << ": " << illiq::model_name(r.model) << ", horizon " << r.horizon << ", "
            << r.paths.size() << " paths, master seed " << r.master_seed << '\n';
  if (!r.actual.empty())
    std::cout << "mean MAPE " << format_double(r.mean_mape) << "%, median "
              << format_double(r.median_mape) << "%, diverged " << r.diverged_count << "/"
              << r.paths.size() << '\n';
}

void write_forecast_outputs(const Common& c, const std::string& out_base,
                            const illiq::ForecastResult& r, std::vector<std::string>& names) {
  if (c.format == "json") {
    json j = illiq::to_json_summary(r);
    json dates = json::array();
    for (const auto& d : r.dates) dates.push_back(format_date(d));
    j["dates"] = std::move(dates);
    if (!r.actual.empty()) j["actual"] = r.actual;
    j["paths"] = r.paths;
    auto out = open_output(join_path(c.output_dir, out_base + ".json"));
    out << j.dump(2) << '\n';
    names.push_back(out_base + ".json");
    return;
  }
  {
    auto out = open_output(join_path(c.output_dir, out_base + ".csv"));
    illiq::write_forecast_csv(out, r);
  }
  {
    auto out = open_output(join_path(c.output_dir, out_base + "_summary.csv"));
    out << "path,seed,diverged";
    if (!r.actual.empty()) out << ",mape_percent";
    out << '\n';
    for (std::size_t i = 0; i < r.paths.size(); ++i) {
      out << i << ',' << r.seeds[i] << ',' << int(r.diverged[i]);
      if (!r.actual.empty()) out << ',' << format_double(r.mape_per_path[i]);
      out << '\n';
    }
  }
  names.push_back(out_base + ".csv");
  names.push_back(out_base + "_summary.csv");
}

void run_forecast_cmd(const CLI::App* cmd, const json& sec, ForecastOpts o, const Common& c) {
  take(cmd, sec, "params", o.params);
  take(cmd, sec, "actuals", o.actuals);
  take(cmd, sec, "horizon", o.horizon);
  take(cmd, sec, "sims", o.sims);
  take(cmd, sec, "ceiling", o.ceiling);
  take(cmd, sec, "out", o.out);
  require(!o.params.empty(), errc::config, "missing required option '--params' for forecast");
  require(o.horizon >= 1, errc::config, "'--horizon' must be a positive step count");

  const auto cp = illiq::combined_params_from_json(parse_json_file(o.params));
  const auto r = run_simulation(o, c, cp);

  std::vector<std::string> names;
  write_forecast_outputs(c, o.out, r, names);

  MetaSpec m;
  m.command = "forecast";
  m.inputs = json::array({o.params});
  if (!o.actuals.empty()) m.inputs.push_back(o.actuals);
  m.parameters = {{"horizon", o.horizon}, {"sims", o.sims},
                  {"ceiling", o.ceiling}, {"model", illiq::model_name(cp.model)},
                  {"out", o.out},         {"scored", !r.actual.empty()}};
  for (const auto& n : names) m.outputs.push_back(n);
  m.summary = {{"mean_mape", illiq::finite_or_null(r.mean_mape)},
               {"median_mape", illiq::finite_or_null(r.median_mape)},
               {"diverged_count", r.diverged_count}};
  write_meta(c, o.out, m);

  print_forecast_headline("forecast", r);
  names.push_back(o.out + "_meta.json");
  std::cout << "wrote";
  const char* sep = " ";
  for (const auto& n : names) {
    std::cout << sep << join_path(c.output_dir, n);
    sep = ", ";
  }
  std::cout << '\n';
}

// ------------------------------------------------------------- evaluate

struct EvaluateOpts {
  ForecastOpts fc;
  double alpha = 0.01;
};

// Log returns of a forecast or realized continuation, both anchored at
// the calibration price so the two sides have equal length.
std::vector<double> anchored_log_returns(double s0, const std::vector<double>& prices) {
  std::vector<double> out;
  out.reserve(prices.size());
  double prev = s0;
  for (double v : prices) {
    out.push_back(std::log(v / prev));
    prev = v;
  }
  return out;
}

void run_evaluate(const CLI::App* cmd, const json& sec, EvaluateOpts o, const Common& c) {
  take(cmd, sec, "params", o.fc.params);
  take(cmd, sec, "actuals", o.fc.actuals);
  take(cmd, sec, "horizon", o.fc.horizon);
  take(cmd, sec, "sims", o.fc.sims);
  take(cmd, sec, "ceiling", o.fc.ceiling);
  take(cmd, sec, "alpha", o.alpha);
  take(cmd, sec, "out", o.fc.out);
  require(!o.fc.params.empty(), errc::config, "missing required option '--params' for evaluate");
  require(!o.fc.actuals.empty(), errc::config,
          "missing required option '--actuals' for evaluate");
  require(o.fc.horizon >= 1, errc::config, "'--horizon' must be a positive step count");

  const auto cp = illiq::combined_params_from_json(parse_json_file(o.fc.params));
  const auto r = run_simulation(o.fc, c, cp);

  const auto actual_rets = anchored_log_returns(cp.s0, r.actual);
  std::vector<illiq::KsResult> ks;
  ks.reserve(r.paths.size());
  for (const auto& path : r.paths)
    ks.push_back(illiq::ks_two_sample(anchored_log_returns(cp.s0, path), actual_rets, o.alpha));

  const std::string out_name = o.fc.out + (c.format == "json" ? ".json" : ".csv");
  {
    auto out = open_output(join_path(c.output_dir, out_name));
    if (c.format == "json") {
      json per_path = json::array();
      for (const auto& k : ks) per_path.push_back(illiq::to_json(k));
      json j{{"summary", illiq::to_json_summary(r)},
             {"alpha", o.alpha},
             {"ks_per_path", std::move(per_path)},
             {"headline", illiq::to_json(ks.front())}};
      out << j.dump(2) << '\n';
    } else {
      out << "path,seed,diverged,mape_percent,ks_d,ks_p,decision\n";
      for (std::size_t i = 0; i < r.paths.size(); ++i) {
        out << i << ',' << r.seeds[i] << ',' << int(r.diverged[i]) << ','
            << format_double(r.mape_per_path[i]) << ',' << format_double(ks[i].statistic) << ','
            << format_double(ks[i].p_value) << ','
            << (ks[i].different ? "different" : "similar") << '\n';
      }
    }
  }

  MetaSpec m;
  m.command = "evaluate";
  m.inputs = json::array({o.fc.params, o.fc.actuals});
  m.parameters = {{"horizon", o.fc.horizon}, {"sims", o.fc.sims},
                  {"ceiling", o.fc.ceiling}, {"alpha", o.alpha},
                  {"model", illiq::model_name(cp.model)}, {"out", o.fc.out}};
  m.outputs = json::array({out_name});
  m.summary = {{"mean_mape", illiq::finite_or_null(r.mean_mape)},
               {"median_mape", illiq::finite_or_null(r.median_mape)},
               {"diverged_count", r.diverged_count},
               {"headline_decision", ks.front().different ? "different" : "similar"}};
  write_meta(c, o.fc.out, m);

  print_forecast_headline("evaluate", r);
  std::cout << "path 0: KS D=" << format_double(ks.front().statistic)
            << " p=" << format_double(ks.front().p_value) << " -> "
            << (ks.front().different ? "different" : "similar") << " (alpha "
            << format_double(o.alpha) << ")\n";
  note_written(c, {out_name, o.fc.out + "_meta.json"});
}

// ------------------------------------------------------------ correlate

struct CorrelateOpts {
  std::vector<std::string> inputs;
  std::string weekday = "Friday";
  std::vector<std::size_t> windows{30, 60, 100, 200};
  std::string out = "correlation";
};

void run_correlate(const CLI::App* cmd, const json& sec, CorrelateOpts o, const Common& c) {
  take(cmd, sec, "inputs", o.inputs);
  take(cmd, sec, "weekday", o.weekday);
  take(cmd, sec, "windows", o.windows);
  take(cmd, sec, "out", o.out);
  require(o.inputs.size() == 2, errc::config, "correlate needs exactly two --inputs");
  for (std::size_t k : o.windows)
    require(k >= 2, errc::config, "correlation windows must be at least 2");

  const auto target = illiq::parse_weekday(o.weekday);
  const auto a = read_series(o.inputs[0]);
  const auto b = read_series(o.inputs[1]);
  const illiq::Date start = std::max(a.front().date, b.front().date);
  const illiq::Date end = std::min(a.back().date, b.back().date);
  require(start <= end, errc::window, "the two series do not overlap in time");

  // Same recipe per leg: common span, weekday forward-fill, weekly close,
  // log returns.
  const auto weekly_returns = [&](const illiq::PriceSeries& s) {
    const auto sliced = s.window(start, end);
    const auto filled = illiq::forward_fill(
        sliced, illiq::weekday_calendar(sliced.front().date, sliced.back().date));
    return illiq::log_returns(illiq::weekly_resample(filled, target));
  };
  const auto ra = weekly_returns(a);
  const auto rb = weekly_returns(b);

  std::vector<illiq::Date> dates;
  std::vector<double> xa, xb;
  for (std::size_t i = 0, j = 0; i < ra.dates.size() && j < rb.dates.size();) {
    if (ra.dates[i] == rb.dates[j]) {
      dates.push_back(ra.dates[i]);
      xa.push_back(ra.values[i]);
      xb.push_back(rb.values[j]);
      ++i, ++j;
    } else if (ra.dates[i] < rb.dates[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t n = dates.size();
  require(n >= 2, errc::window, "fewer than two aligned weekly returns");

  double full = std::numeric_limits<double>::quiet_NaN();
  try {
    full = illiq::pearson(xa, xb);
  } catch (const Error& e) {
    if (e.code() != errc::degenerate) throw;
    std::cerr << "warning: full-sample correlation undefined: " << e.what() << '\n';
  }

  std::vector<std::string> names;
  json window_blocks = json::object();
  for (std::size_t k : o.windows) {
    json rows = json::array();
    std::vector<illiq::Date> starts;
    illiq::RollingCorrelation rc;
    if (k > n) {
      std::cerr << "warning: window " << k << " exceeds the " << n
                << " aligned returns; no rows\n";
    } else {
      rc = illiq::rolling_correlation(xa, xb, k);
      starts.assign(dates.begin(), dates.begin() + static_cast<std::ptrdiff_t>(n - k + 1));
      for (std::size_t i = 0; i < rc.values.size(); ++i)
        rows.push_back({{"start_index", i},
                        {"start_date", format_date(starts[i])},
                        {"correlation", rc.values[i] ? json(*rc.values[i]) : json(nullptr)}});
    }
    if (c.format == "csv") {
      const std::string name = o.out + "_w" + std::to_string(k) + ".csv";
      auto out = open_output(join_path(c.output_dir, name));
      illiq::write_rolling_csv(out, starts, rc);
      names.push_back(name);
    } else {
      window_blocks[std::to_string(k)] = std::move(rows);
    }
  }

  const std::string head_name = o.out + (c.format == "json" ? ".json" : ".csv");
  {
    auto out = open_output(join_path(c.output_dir, head_name));
    if (c.format == "json") {
      json j{{"n", n},
             {"first_date", format_date(dates.front())},
             {"last_date", format_date(dates.back())},
             {"weekday", o.weekday},
             {"correlation", illiq::finite_or_null(full)},
             {"windows", std::move(window_blocks)}};
      out << j.dump(2) << '\n';
    } else {
      out << "n,first_date,last_date,correlation\n"
          << n << ',' << format_date(dates.front()) << ',' << format_date(dates.back()) << ','
          << format_double(full) << '\n';
    }
  }
  names.insert(names.begin(), head_name);

  MetaSpec m;
  m.command = "correlate";
  m.inputs = json::array({o.inputs[0], o.inputs[1]});
  m.parameters = {{"weekday", o.weekday}, {"windows", o.windows}, {"out", o.out}};
  for (const auto& nm : names) m.outputs.push_back(nm);
  m.summary = {{"aligned_returns", n}, {"correlation", illiq::finite_or_null(full)}};
  write_meta(c, o.out, m);

  std::cout << "correlate: " << n << " aligned weekly returns " << format_date(dates.front())
            << " .. " << format_date(dates.back()) << '\n'
            << "full-sample correlation: "
            << (std::isfinite(full) ? format_double(full) : "undefined") << '\n';
  names.push_back(o.out + "_meta.json");
  std::cout << "wrote";
  const char* sep = " ";
  for (const auto& nm : names) {
    std::cout << sep << join_path(c.output_dir, nm);
    sep = ", ";
  }
  std::cout << '\n';
}

// ---------------------------------------------------- attenuation-study

struct AttenuationOpts {
  std::vector<double> pi0;
  std::vector<std::string> grid;
  double rho = 0.8;
  double mu = 0.0;
  double sigma = 0.02;
  double s0 = 100.0;
  std::size_t horizon = 50000;
  std::size_t reps = 10;
  std::string policy = "discard";
  bool price_levels = false;
  std::string out = "attenuation";
};

std::pair<double, double> parse_grid_cell(const std::string& text) {
  const auto colon = text.find(':');
  double p = 0.0, q = 0.0;
  if (colon != std::string::npos && colon > 0 && colon + 1 < text.size() &&
      illiq::detail::parse_double(text.substr(0, colon), p) &&
      illiq::detail::parse_double(text.substr(colon + 1), q))
    return {p, q};
  fail(errc::config, "grid cell must look like p:q, got '" + text + "'");
}

void run_attenuation(const CLI::App* cmd, const json& sec, AttenuationOpts o, const Common& c) {
  take(cmd, sec, "pi0", o.pi0);
  take(cmd, sec, "grid", o.grid);
  take(cmd, sec, "rho", o.rho);
  take(cmd, sec, "mu", o.mu);
  take(cmd, sec, "sigma", o.sigma);
  take(cmd, sec, "s0", o.s0);
  take(cmd, sec, "horizon", o.horizon);
  take(cmd, sec, "reps", o.reps);
  take(cmd, sec, "policy", o.policy);
  take(cmd, sec, "price-levels", o.price_levels);
  take(cmd, sec, "out", o.out);
  require(o.pi0.empty() || o.grid.empty(), errc::config,
          "--pi0 and --grid are mutually exclusive");

  illiq::AttenuationStudySpec spec;
  if (!o.grid.empty()) {
    for (const auto& cell : o.grid) spec.grid.push_back(parse_grid_cell(cell));
  } else {
    // A no-trade share pi maps to the independent-moves chain (p, q) =
    // (pi, 1 - pi), whose stationary no-trade probability is exactly pi.
    const std::vector<double> levels = o.pi0.empty() ? std::vector<double>{0.2, 0.5, 0.8} : o.pi0;
    for (double pi : levels) spec.grid.emplace_back(pi, 1.0 - pi);
  }
  spec.leg = illiq::GbmParams{o.mu, o.sigma, 0};
  spec.rho = o.rho;
  spec.s0 = o.s0;
  spec.horizon = o.horizon;
  spec.replications = o.reps;
  spec.master_seed = c.seed;
  spec.policy = illiq::parse_shock_policy(o.policy);
  spec.price_levels = o.price_levels;
  spec.threads = c.threads;

  const auto cells = illiq::attenuation_study(spec);

  const std::string out_name = o.out + (c.format == "json" ? ".json" : ".csv");
  {
    auto out = open_output(join_path(c.output_dir, out_name));
    if (c.format == "json") {
      json rows = json::array();
      for (const auto& cell : cells) rows.push_back(illiq::to_json(cell));
      out << rows.dump(2) << '\n';
    } else {
      illiq::write_attenuation_csv(out, cells);
    }
  }

  json grid_param = json::array();
  for (const auto& [p, q] : spec.grid) grid_param.push_back({p, q});
  MetaSpec m;
  m.command = "attenuation-study";
  m.parameters = {{"grid", std::move(grid_param)},
                  {"rho", o.rho},
                  {"mu", o.mu},
                  {"sigma", o.sigma},
                  {"s0", o.s0},
                  {"horizon", o.horizon},
                  {"reps", o.reps},
                  {"policy", o.policy},
                  {"price-levels", o.price_levels},
                  {"out", o.out}};
  m.outputs = json::array({out_name});
  write_meta(c, o.out, m);

  for (const auto& cell : cells) {
    std::cout << "pi0 " << format_double(cell.pi0) << ": ";
    if (cell.defined)
      std::cout << "measured " << format_double(cell.rho_measured) << ", predicted "
                << format_double(cell.rho_predicted) << ", limit "
                << format_double(cell.rho_limit) << '\n';
    else
      std::cout << "undefined (every replication degenerate)\n";
  }
  note_written(c, {out_name, o.out + "_meta.json"});
}

// ------------------------------------------------------------ pdf-compare

struct PdfOpts {
  std::string input;
  std::size_t bins = 50;
  std::string out = "pdf";
};

void run_pdf_compare(const CLI::App* cmd, const json& sec, PdfOpts o, const Common& c) {
  take(cmd, sec, "input", o.input);
  take(cmd, sec, "bins", o.bins);
  take(cmd, sec, "out", o.out);
  require(!o.input.empty(), errc::config, "missing required option '--input' for pdf-compare");

  const auto series = read_series(o.input);
  const auto returns = illiq::log_returns(series);
  const auto pc = illiq::pdf_comparison(returns.values, o.bins);

  const std::string out_name = o.out + (c.format == "json" ? ".json" : ".csv");
  {
    auto out = open_output(join_path(c.output_dir, out_name));
    if (c.format == "json") {
      json rows = json::array();
      for (std::size_t i = 0; i < pc.bin_left.size(); ++i)
        rows.push_back({{"bin_left", pc.bin_left[i]},
                        {"bin_center", pc.bin_center[i]},
                        {"empirical_density", pc.empirical[i]},
                        {"normal_density", pc.normal[i]}});
      json j{{"n", pc.n},           {"mu", pc.mu},   {"sigma", pc.sigma},
             {"bin_width", pc.bin_width}, {"bins", std::move(rows)}};
      out << j.dump(2) << '\n';
    } else {
      illiq::write_pdf_csv(out, pc);
    }
  }

  double gap = 0.0;
  for (std::size_t i = 0; i < pc.empirical.size(); ++i)
    gap = std::max(gap, std::fabs(pc.empirical[i] - pc.normal[i]));

  MetaSpec m;
  m.command = "pdf-compare";
  m.inputs = json::array({o.input});
  m.parameters = {{"bins", o.bins}, {"out", o.out}};
  m.outputs = json::array({out_name});
  m.summary = {{"n", pc.n}, {"mu", pc.mu}, {"sigma", pc.sigma}, {"max_density_gap", gap}};
  write_meta(c, o.out, m);

  std::cout << "pdf-compare: n " << pc.n << ", mu " << format_double(pc.mu) << ", sigma "
            << format_double(pc.sigma) << ", bin width " << format_double(pc.bin_width) << '\n'
            << "max |empirical - normal| density gap: " << format_double(gap) << '\n';
  note_written(c, {out_name, o.out + "_meta.json"});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration, simulation and evaluation toolkit for illiquid daily prices",
               "illiq"};
  app.require_subcommand(1);

  Common common;
  std::string config_path;
  app.add_option("--config", config_path, "JSON file supplying defaults for any flag");
  app.add_option("--seed", common.seed, "Master seed for every stochastic command");
  app.add_option("--output-dir", common.output_dir, "Directory receiving all output files");
  app.add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", common.threads, "Worker threads (0 = hardware concurrency)");

  IngestOpts ingest_o;
  auto* ingest = app.add_subcommand("ingest", "Normalize a vendor CSV into canonical form");
  ingest->fallthrough();
  ingest->add_option("--input", ingest_o.input, "Raw CSV file");
  ingest->add_option("--date-col", ingest_o.date_col, "Date column header");
  ingest->add_option("--price-col", ingest_o.price_col, "Price column header");
  ingest->add_option("--date-format", ingest_o.date_format, "Date format")
      ->check(CLI::IsMember({"iso", "mdy"}));
  ingest->add_option("--order", ingest_o.order, "Row order of the input")
      ->check(CLI::IsMember({"asc", "desc"}));
  ingest->add_option("--delimiter", ingest_o.delimiter, "Cell delimiter");
  ingest->add_option("--out", ingest_o.out, "Output base name");

  CleanOpts clean_o;
  auto* clean = app.add_subcommand("clean", "Drop repeated closes (no-trade days)");
  clean->fallthrough();
  clean->add_option("--input", clean_o.input, "Canonical series file");
  clean->add_option("--out", clean_o.out, "Output base name");

  ResampleOpts resample_o;
  auto* resample = app.add_subcommand("resample", "Forward-fill weekdays and keep one per week");
  resample->fallthrough();
  resample->add_option("--input", resample_o.input, "Canonical series file");
  resample->add_option("--weekday", resample_o.weekday, "Weekday whose close is kept");
  resample->add_flag("--no-fill", resample_o.no_fill, "Skip the forward-fill step");
  resample->add_option("--out", resample_o.out, "Output base name");

  CalibrateOpts calibrate_o;
  auto* calibrate = app.add_subcommand("calibrate", "Fit a model over a calibration window");
  calibrate->fallthrough();
  calibrate->add_option("--input", calibrate_o.input, "Canonical series file");
  calibrate->add_option("--model", calibrate_o.model, "Model to fit")
      ->check(CLI::IsMember({"gbm", "xou", "mm-gbm", "mm-xou"}));
  calibrate->add_option("--start", calibrate_o.start, "Window start (ISO date, default first)");
  calibrate->add_option("--end", calibrate_o.end, "Window end (ISO date, default last)");
  calibrate->add_option("--dt", calibrate_o.dt, "Observation spacing in days");
  calibrate->add_option("--out", calibrate_o.out, "Output base name");

  ForecastOpts forecast_o;
  auto* forecast = app.add_subcommand("forecast", "Simulate seeded price paths from parameters");
  forecast->fallthrough();
  forecast->add_option("--params", forecast_o.params, "Parameter JSON from calibrate");
  forecast->add_option("--horizon", forecast_o.horizon, "Steps to simulate");
  forecast->add_option("--sims", forecast_o.sims, "Number of paths");
  forecast->add_option("--actuals", forecast_o.actuals,
                       "Series file with the realized continuation (enables MAPE)");
  forecast->add_option("--ceiling", forecast_o.ceiling, "Divergence ceiling as a ratio to s0");
  forecast->add_option("--out", forecast_o.out, "Output base name");

  EvaluateOpts evaluate_o;
  evaluate_o.fc.out = "evaluation";
  auto* evaluate =
      app.add_subcommand("evaluate", "Score paths against actuals (MAPE and return-KS)");
  evaluate->fallthrough();
  evaluate->add_option("--params", evaluate_o.fc.params, "Parameter JSON from calibrate");
  evaluate->add_option("--actuals", evaluate_o.fc.actuals,
                       "Series file with the realized continuation");
  evaluate->add_option("--horizon", evaluate_o.fc.horizon, "Steps to simulate");
  evaluate->add_option("--sims", evaluate_o.fc.sims, "Number of paths");
  evaluate->add_option("--ceiling", evaluate_o.fc.ceiling,
                       "Divergence ceiling as a ratio to s0");
  evaluate->add_option("--alpha", evaluate_o.alpha, "KS significance level");
  evaluate->add_option("--out", evaluate_o.fc.out, "Output base name");

  CorrelateOpts correlate_o;
  auto* correlate =
      app.add_subcommand("correlate", "Weekly-return correlation of two series, full and rolling");
  correlate->fallthrough();
  correlate->add_option("--inputs", correlate_o.inputs, "Exactly two canonical series files");
  correlate->add_option("--weekday", correlate_o.weekday, "Resampling weekday");
  correlate->add_option("--windows", correlate_o.windows, "Rolling window lengths")
      ->delimiter(',');
  correlate->add_option("--out", correlate_o.out, "Output base name");

  AttenuationOpts attenuation_o;
  auto* attenuation = app.add_subcommand(
      "attenuation-study", "Measure correlation attenuation under no-trade modulation");
  attenuation->fallthrough();
  attenuation->add_option("--pi0", attenuation_o.pi0, "No-trade shares (builds (pi, 1-pi) cells)")
      ->delimiter(',');
  attenuation->add_option("--grid", attenuation_o.grid, "Explicit p:q chain cells")
      ->delimiter(',');
  attenuation->add_option("--rho", attenuation_o.rho, "Latent driver correlation");
  attenuation->add_option("--mu", attenuation_o.mu, "Daily log-return drift of both legs");
  attenuation->add_option("--sigma", attenuation_o.sigma, "Daily log-return volatility");
  attenuation->add_option("--s0", attenuation_o.s0, "Initial price of both legs");
  attenuation->add_option("--horizon", attenuation_o.horizon, "Steps per replication");
  attenuation->add_option("--reps", attenuation_o.reps, "Replications per cell");
  attenuation->add_option("--policy", attenuation_o.policy, "No-trade shock policy")
      ->check(CLI::IsMember({"pause", "discard"}));
  attenuation->add_flag("--price-levels", attenuation_o.price_levels,
                        "Correlate price levels instead of log returns");
  attenuation->add_option("--out", attenuation_o.out, "Output base name");

  PdfOpts pdf_o;
  auto* pdf =
      app.add_subcommand("pdf-compare", "Histogram of log returns against a fitted normal");
  pdf->fallthrough();
  pdf->add_option("--input", pdf_o.input, "Canonical series file");
  pdf->add_option("--bins", pdf_o.bins, "Histogram bin count");
  pdf->add_option("--out", pdf_o.out, "Output base name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    json config = json::object();
    if (!config_path.empty()) config = load_config(config_path);
    validate_config(config, app);

    if (app.count("--seed") == 0) {
      if (config.contains("seed"))
        common.seed = config_get<std::uint64_t>(config, "seed");
      else if (const char* env = std::getenv("ILLIQ_SEED"))
        common.seed = parse_env_seed(env);
    }
    if (app.count("--output-dir") == 0 && config.contains("output-dir"))
      common.output_dir = config_get<std::string>(config, "output-dir");
    if (app.count("--format") == 0 && config.contains("format"))
      common.format = config_get<std::string>(config, "format");
    if (app.count("--threads") == 0 && config.contains("threads"))
      common.threads = config_get<unsigned>(config, "threads");
    require(common.format == "csv" || common.format == "json", errc::config,
            "format must be csv or json");

    if (!common.output_dir.empty() && common.output_dir != ".") {
      std::error_code ec;
      std::filesystem::create_directories(common.output_dir, ec);
      require(!ec, errc::io, "cannot create output directory '" + common.output_dir + "'");
    }

    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    const json section = config.contains(name) ? config.at(name) : json::object();

    if (name == "ingest") run_ingest(cmd, section, ingest_o, common);
    else if (name == "clean") run_clean(cmd, section, clean_o, common);
    else if (name == "resample") run_resample(cmd, section, resample_o, common);
    else if (name == "calibrate") run_calibrate(cmd, section, calibrate_o, common);
    else if (name == "forecast") run_forecast_cmd(cmd, section, forecast_o, common);
    else if (name == "evaluate") run_evaluate(cmd, section, evaluate_o, common);
    else if (name == "correlate") run_correlate(cmd, section, correlate_o, common);
    else if (name == "attenuation-study") run_attenuation(cmd, section, attenuation_o, common);
    else if (name == "pdf-compare") run_pdf_compare(cmd, section, pdf_o, common);
    return 0;
  } catch (const Error& e) {
    std::cerr << e.tagged() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << '\n';
    return 1;
  }
}
