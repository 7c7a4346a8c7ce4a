#pragma once

// Daily price series and the transforms the calibration pipeline needs:
// schema-driven CSV ingestion, forward-filling onto a trading calendar,
// removal of exactly repeated closes, weekly (fixed-weekday) resampling,
// and log-price / log-return views.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "illiq/dates.hpp"
#include "illiq/error.hpp"

namespace illiq {

struct Observation {
  Date date;
  double close = 0.0;
};

// Immutable daily close series: dates strictly increasing, closes > 0.
class PriceSeries {
 public:
  PriceSeries() = default;

  explicit PriceSeries(std::vector<Observation> obs) : obs_(std::move(obs)) {
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      require(obs_[i].date.ok(), errc::calendar,
              "observation " + std::to_string(i) + " has an invalid date");
      require(std::isfinite(obs_[i].close) && obs_[i].close > 0.0, errc::domain,
              "non-positive close at " + format_date(obs_[i].date));
      if (i > 0)
        require(obs_[i - 1].date < obs_[i].date, errc::calendar,
                "dates not strictly increasing at " + format_date(obs_[i].date));
    }
  }

  std::size_t size() const { return obs_.size(); }
  bool empty() const { return obs_.empty(); }
  const Observation& operator[](std::size_t i) const { return obs_[i]; }
  const Observation& front() const { return obs_.front(); }
  const Observation& back() const { return obs_.back(); }
  auto begin() const { return obs_.begin(); }
  auto end() const { return obs_.end(); }
  const std::vector<Observation>& observations() const { return obs_; }

  std::vector<double> closes() const {
    std::vector<double> out;
    out.reserve(obs_.size());
    for (const auto& o : obs_) out.push_back(o.close);
    return out;
  }

  std::vector<Date> dates() const {
    std::vector<Date> out;
    out.reserve(obs_.size());
    for (const auto& o : obs_) out.push_back(o.date);
    return out;
  }

  // Observations with start <= date <= end (inclusive); errors when the
  // bounds are inverted or no observation falls inside them.
  PriceSeries window(Date start, Date end) const {
    require(start <= end, errc::window,
            "window start " + format_date(start) + " is after end " + format_date(end));
    std::vector<Observation> out;
    for (const auto& o : obs_)
      if (start <= o.date && o.date <= end) out.push_back(o);
    require(!out.empty(), errc::window,
            "window " + format_date(start) + ".." + format_date(end) +
                " contains no observations");
    return PriceSeries(std::move(out));
  }

 private:
  std::vector<Observation> obs_;
};

// Declares how to read a raw CSV: which columns hold date and price, the
// date format, whether rows run newest-first, and the cell delimiter.
struct CsvSchema {
  std::string date_column = "date";
  std::string price_column = "close";
  DateFormat date_format = DateFormat::iso;
  bool descending = false;
  char delimiter = ',';
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_row(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == delim) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

inline bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size() && std::isfinite(out);
}

}  // namespace detail

// Reads a raw CSV against the declared schema. Strict by design: a row
// with an unparseable date or price, a non-positive close, or a date seen
// twice aborts the parse with the offending line number(s), so bad input
// cannot silently shift a calibration window. Extra columns are ignored;
// blank lines are skipped. The result is sorted ascending by date
// regardless of the declared row order.
inline PriceSeries parse_price_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), errc::schema, "empty input: no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Strip a UTF-8 byte-order mark if present.
  if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF')
    line.erase(0, 3);

  const auto header = detail::split_row(line, schema.delimiter);
  std::size_t date_col = header.size(), price_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == schema.date_column) date_col = i;
    if (header[i] == schema.price_column) price_col = i;
  }
  require(date_col < header.size(), errc::schema,
          "header has no column '" + schema.date_column + "'");
  require(price_col < header.size(), errc::schema,
          "header has no column '" + schema.price_column + "'");

  std::vector<Observation> rows;
  std::map<std::chrono::sys_days, std::size_t> seen;  // date -> first line number
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_row(line, schema.delimiter);
    require(date_col < cells.size() && price_col < cells.size(), errc::parse,
            "line " + std::to_string(line_no) + ": expected at least " +
                std::to_string(std::max(date_col, price_col) + 1) + " columns, got " +
                std::to_string(cells.size()));
    Date date;
    try {
      date = parse_date(cells[date_col], schema.date_format);
    } catch (const Error& e) {
      fail(errc::parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    double close = 0.0;
    require(detail::parse_double(cells[price_col], close), errc::parse,
            "line " + std::to_string(line_no) + ": unparseable price '" + cells[price_col] + "'");
    require(close > 0.0, errc::domain,
            "line " + std::to_string(line_no) + ": non-positive close " + cells[price_col]);
    auto [it, inserted] = seen.emplace(to_days(date), line_no);
    require(inserted, errc::parse,
            "duplicate date " + format_date(date) + " on lines " + std::to_string(it->second) +
                " and " + std::to_string(line_no));
    rows.push_back({date, close});
  }
  require(!rows.empty(), errc::schema, "no data rows");
  if (schema.descending) std::reverse(rows.begin(), rows.end());
  std::sort(rows.begin(), rows.end(),
            [](const Observation& a, const Observation& b) { return a.date < b.date; });
  return PriceSeries(std::move(rows));
}

// Carries the last known close forward onto every calendar date. The
// calendar must be strictly ascending, contain every observation date,
// and must not begin before the first observation (there would be nothing
// to carry into such days).
inline PriceSeries forward_fill(const PriceSeries& series, const std::vector<Date>& calendar) {
  require(!series.empty(), errc::window, "cannot forward-fill an empty series");
  require(!calendar.empty(), errc::calendar, "cannot forward-fill onto an empty calendar");
  for (std::size_t i = 1; i < calendar.size(); ++i)
    require(calendar[i - 1] < calendar[i], errc::calendar,
            "calendar not strictly increasing at " + format_date(calendar[i]));
  require(series.front().date <= calendar.front(), errc::calendar,
          "calendar begins " + format_date(calendar.front()) + ", before first observation " +
              format_date(series.front().date));

  std::vector<Observation> out;
  out.reserve(calendar.size());
  std::size_t next = 0;  // next source observation not yet consumed
  double carried = 0.0;
  bool have = false;
  for (Date day : calendar) {
    // An observation sitting strictly between calendar dates means the
    // calendar does not cover the series.
    require(next >= series.size() || day <= series[next].date, errc::calendar,
            "observation " + format_date(series[next].date) + " is missing from the calendar");
    if (next < series.size() && series[next].date == day) {
      carried = series[next].close;
      have = true;
      ++next;
    }
    require(have, errc::calendar, "no observation on or before " + format_date(day));
    out.push_back({day, carried});
  }
  require(next == series.size(), errc::calendar,
          "observation " + format_date(series[next].date) + " lies after the calendar end");
  return PriceSeries(std::move(out));
}

// A series with exactly repeated consecutive closes removed, plus the
// mapping back to the source it was cut from.
struct CleanedSeries {
  PriceSeries series;
  std::vector<std::size_t> source_indices;  // per retained observation
  std::size_t removed = 0;
};

// Drops every observation whose close exactly equals the previous kept
// close (the no-trade repeats). Comparison is exact double equality: both
// values were parsed from the same decimal text, so a repeat printed
// identically compares equal. The first observation is always kept.
inline CleanedSeries remove_repetitions(const PriceSeries& series) {
  require(!series.empty(), errc::window, "cannot clean an empty series");
  CleanedSeries out;
  std::vector<Observation> kept;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i == 0 || series[i].close != kept.back().close) {
      kept.push_back(series[i]);
      out.source_indices.push_back(i);
    } else {
      ++out.removed;
    }
  }
  out.series = PriceSeries(std::move(kept));
  return out;
}

// Keeps only observations falling on the given weekday. The series is
// expected to be forward-filled over a full trading calendar first, so
// that every target weekday in the span is present.
inline PriceSeries weekly_resample(const PriceSeries& series, std::chrono::weekday target) {
  require(!series.empty(), errc::window, "cannot resample an empty series");
  std::vector<Observation> out;
  for (const auto& o : series)
    if (weekday_of(o.date) == target) out.push_back(o);
  require(!out.empty(), errc::calendar, "requested weekday absent from the series");
  return PriceSeries(std::move(out));
}

// Log prices Y(i) = ln S(i), with their dates.
struct LogPriceSeries {
  std::vector<Date> dates;
  std::vector<double> values;
};

inline LogPriceSeries log_prices(const PriceSeries& series) {
  require(!series.empty(), errc::window, "cannot take log prices of an empty series");
  LogPriceSeries out;
  out.dates.reserve(series.size());
  out.values.reserve(series.size());
  for (const auto& o : series) {
    out.dates.push_back(o.date);
    out.values.push_back(std::log(o.close));
  }
  return out;
}

// Log returns R(i) = ln(S(i+1)/S(i)); dates mark the end of each interval.
struct ReturnSeries {
  std::vector<Date> dates;
  std::vector<double> values;
};

inline ReturnSeries log_returns(const PriceSeries& series) {
  require(series.size() >= 2, errc::window, "need at least two observations for returns");
  ReturnSeries out;
  out.dates.reserve(series.size() - 1);
  out.values.reserve(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) {
    out.dates.push_back(series[i].date);
    out.values.push_back(std::log(series[i].close / series[i - 1].close));
  }
  return out;
}

}  // namespace illiq
