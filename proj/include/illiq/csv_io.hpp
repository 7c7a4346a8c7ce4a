#pragma once

// Deterministic text output. All floating-point values are printed with
// std::to_chars shortest round-trip form, so re-running a command with
// the same inputs and seed reproduces files byte for byte, and reading a
// written value back yields the identical double.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "illiq/attenuation.hpp"
#include "illiq/error.hpp"
#include "illiq/regime.hpp"
#include "illiq/stats.hpp"
#include "illiq/timeseries.hpp"

namespace illiq {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Canonical series form: header "date,close", ISO dates, ascending.
inline void write_series_csv(std::ostream& out, const PriceSeries& series) {
  out << "date,close\n";
  for (const auto& o : series) out << format_date(o.date) << ',' << format_double(o.close) << '\n';
}

inline CsvSchema canonical_schema() {
  CsvSchema s;
  s.date_column = "date";
  s.price_column = "close";
  s.date_format = DateFormat::iso;
  return s;
}

inline void write_returns_csv(std::ostream& out, const ReturnSeries& r) {
  out << "date,log_return\n";
  for (std::size_t i = 0; i < r.values.size(); ++i)
    out << format_date(r.dates[i]) << ',' << format_double(r.values[i]) << '\n';
}

// One column per path next to the aligned actuals (when present).
inline void write_forecast_csv(std::ostream& out, const ForecastResult& r) {
  out << "date";
  if (!r.actual.empty()) out << ",actual";
  for (std::size_t p = 0; p < r.paths.size(); ++p) out << ",path_" << p;
  out << '\n';
  for (std::size_t i = 0; i < r.horizon; ++i) {
    out << format_date(r.dates[i]);
    if (!r.actual.empty()) out << ',' << format_double(r.actual[i]);
    for (const auto& path : r.paths) out << ',' << format_double(path[i]);
    out << '\n';
  }
}

inline void write_rolling_csv(std::ostream& out, const std::vector<Date>& window_start_dates,
                              const RollingCorrelation& rc) {
  require(window_start_dates.size() == rc.values.size(), errc::domain,
          "start dates must match the number of windows");
  out << "start_index,start_date,correlation\n";
  for (std::size_t i = 0; i < rc.values.size(); ++i) {
    out << i << ',' << format_date(window_start_dates[i]) << ','
        << (rc.values[i] ? format_double(*rc.values[i]) : "nan") << '\n';
  }
}

inline void write_attenuation_csv(std::ostream& out, const std::vector<AttenuationCell>& cells) {
  out << "p,q,pi0,rho_measured,rho_unmodulated,rho_predicted,rho_limit,samples\n";
  for (const auto& c : cells) {
    out << format_double(c.p) << ',' << format_double(c.q) << ',' << format_double(c.pi0) << ','
        << format_double(c.rho_measured) << ',' << format_double(c.rho_unmodulated) << ','
        << format_double(c.rho_predicted) << ',' << format_double(c.rho_limit) << ','
        << c.samples << '\n';
  }
}

inline void write_pdf_csv(std::ostream& out, const PdfComparison& pc) {
  out << "bin_left,bin_center,empirical_density,normal_density\n";
  for (std::size_t i = 0; i < pc.bin_left.size(); ++i) {
    out << format_double(pc.bin_left[i]) << ',' << format_double(pc.bin_center[i]) << ','
        << format_double(pc.empirical[i]) << ',' << format_double(pc.normal[i]) << '\n';
  }
}

}  // namespace illiq
