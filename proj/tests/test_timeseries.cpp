#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "illiq/error.hpp"
#include "illiq/timeseries.hpp"

using namespace illiq;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinULP;

namespace {

PriceSeries series_from(std::vector<std::pair<std::string, double>> rows) {
  std::vector<Observation> obs;
  for (const auto& [d, c] : rows) obs.push_back({parse_date(d, DateFormat::iso), c});
  return PriceSeries(std::move(obs));
}

}  // namespace

TEST_CASE("price series validates ordering and positivity") {
  const auto s = series_from({{"2023-01-02", 100.0}, {"2023-01-03", 101.5}});
  CHECK(s.size() == 2);
  CHECK(s.front().close == 100.0);
  CHECK(s.back().close == 101.5);
  CHECK(s.closes() == std::vector<double>{100.0, 101.5});

  CHECK_THROWS_AS(series_from({{"2023-01-03", 100.0}, {"2023-01-02", 101.0}}), Error);
  CHECK_THROWS_AS(series_from({{"2023-01-02", 100.0}, {"2023-01-02", 101.0}}), Error);
  CHECK_THROWS_AS(series_from({{"2023-01-02", 0.0}}), Error);
  CHECK_THROWS_AS(series_from({{"2023-01-02", -4.0}}), Error);
  CHECK_THROWS_AS(series_from({{"2023-01-02", std::nan("")}}), Error);
}

TEST_CASE("window slices inclusively by date") {
  const auto s = series_from({{"2023-01-02", 100.0},
                              {"2023-01-03", 101.0},
                              {"2023-01-04", 102.0},
                              {"2023-01-05", 103.0}});
  const auto w = s.window(make_date(2023, 1, 3), make_date(2023, 1, 4));
  REQUIRE(w.size() == 2);
  CHECK(w[0].close == 101.0);
  CHECK(w[1].close == 102.0);

  // Bounds that fall between observations still work.
  const auto w2 = s.window(make_date(2023, 1, 1), make_date(2023, 1, 2));
  REQUIRE(w2.size() == 1);
  CHECK(w2[0].close == 100.0);

  CHECK_THROWS_AS(s.window(make_date(2023, 1, 4), make_date(2023, 1, 3)), Error);
  CHECK_THROWS_AS(s.window(make_date(2024, 1, 1), make_date(2024, 2, 1)), Error);
}

TEST_CASE("csv parser reads the canonical layout") {
  std::istringstream in(
      "date,close\n"
      "2023-01-02,100\n"
      "2023-01-03,100\n"
      "2023-01-04,101.25\n");
  const auto s = parse_price_csv(in, CsvSchema{});
  REQUIRE(s.size() == 3);
  CHECK(format_date(s[0].date) == "2023-01-02");
  CHECK(s[1].close == 100.0);
  CHECK(s[2].close == 101.25);
}

TEST_CASE("csv parser handles vendor-style layouts") {
  // Extra columns, month/day/year dates, newest row first, BOM, CRLF.
  std::istringstream in(
      "\xEF\xBB\xBF"
      "Date,Open,High,Low,Close,Volume\r\n"
      "1/4/2023,10,11,9,10.50,1200\r\n"
      "1/3/2023,10,11,9,10.25,800\r\n"
      "\r\n"
      "1/2/2023,10,11,9,10.00,900\r\n");
  CsvSchema schema;
  schema.date_column = "Date";
  schema.price_column = "Close";
  schema.date_format = DateFormat::mdy;
  schema.descending = true;
  const auto s = parse_price_csv(in, schema);
  REQUIRE(s.size() == 3);
  CHECK(format_date(s[0].date) == "2023-01-02");
  CHECK(s[0].close == 10.0);
  CHECK(s[2].close == 10.5);
}

TEST_CASE("csv parser reports the offending line") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_price_csv(in, CsvSchema{});
  };

  CHECK_THROWS_MATCHES(parse(""), Error, Catch::Matchers::MessageMatches(ContainsSubstring("header")));
  CHECK_THROWS_MATCHES(parse("time,close\n2023-01-02,1\n"), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("date")));
  CHECK_THROWS_MATCHES(parse("date,price\n2023-01-02,1\n"), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("close")));
  CHECK_THROWS_MATCHES(parse("date,close\n2023-13-02,1\n"), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("line 2")));
  CHECK_THROWS_MATCHES(parse("date,close\n2023-01-02,abc\n"), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("line 2")));
  CHECK_THROWS_MATCHES(parse("date,close\n2023-01-02,-5\n"), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("line 2")));
  CHECK_THROWS_MATCHES(parse("date,close\n2023-01-02,1\n2023-01-03\n"), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("line 3")));
  CHECK_THROWS_MATCHES(parse("date,close\n2023-01-02,1\n2023-01-02,2\n"), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("lines 2 and 3")));
  CHECK_THROWS_MATCHES(parse("date,close\n"), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("no data rows")));
}

TEST_CASE("forward fill repeats the last close on quiet days") {
  const auto s = series_from({{"2023-01-02", 100.0}, {"2023-01-04", 102.0}});
  const auto cal = weekday_calendar(make_date(2023, 1, 2), make_date(2023, 1, 6));
  const auto filled = forward_fill(s, cal);
  REQUIRE(filled.size() == 5);
  CHECK(filled.closes() == std::vector<double>{100.0, 100.0, 102.0, 102.0, 102.0});
  for (std::size_t i = 0; i < 5; ++i) CHECK(filled[i].date == cal[i]);
}

TEST_CASE("forward fill rejects calendars that disagree with the data") {
  const auto s = series_from({{"2023-01-03", 100.0}, {"2023-01-04", 102.0}});

  // Calendar starts before the first observation: nothing to carry.
  const auto early = weekday_calendar(make_date(2023, 1, 2), make_date(2023, 1, 5));
  CHECK_THROWS_MATCHES(forward_fill(s, early), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("2023-01-02")));

  // An observation missing from the calendar would be silently dropped.
  const std::vector<Date> sparse = {make_date(2023, 1, 3), make_date(2023, 1, 5)};
  CHECK_THROWS_MATCHES(forward_fill(s, sparse), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("2023-01-04")));

  // An observation after the calendar end is equally suspicious.
  const auto shortcal = weekday_calendar(make_date(2023, 1, 3), make_date(2023, 1, 3));
  CHECK_THROWS_MATCHES(forward_fill(s, shortcal), Error,
                       Catch::Matchers::MessageMatches(ContainsSubstring("after the calendar end")));

  const std::vector<Date> unsorted = {make_date(2023, 1, 4), make_date(2023, 1, 3)};
  CHECK_THROWS_AS(forward_fill(s, unsorted), Error);
}

TEST_CASE("repetition removal keeps first of each run") {
  const auto s = series_from({{"2023-01-02", 100.0},
                              {"2023-01-03", 100.0},
                              {"2023-01-04", 101.0},
                              {"2023-01-05", 101.0},
                              {"2023-01-06", 101.0},
                              {"2023-01-09", 102.0}});
  const auto cleaned = remove_repetitions(s);
  CHECK(cleaned.series.closes() == std::vector<double>{100.0, 101.0, 102.0});
  CHECK(cleaned.source_indices == std::vector<std::size_t>{0, 2, 5});
  CHECK(cleaned.removed == 3);
  CHECK(format_date(cleaned.series[1].date) == "2023-01-04");

  // A series with no repeats passes through untouched.
  const auto moving = series_from({{"2023-01-02", 1.0}, {"2023-01-03", 2.0}});
  CHECK(remove_repetitions(moving).removed == 0);
  CHECK(remove_repetitions(moving).series.size() == 2);

  // Non-adjacent revisits of an old price are kept: only runs collapse.
  const auto revisit = series_from({{"2023-01-02", 5.0}, {"2023-01-03", 6.0}, {"2023-01-04", 5.0}});
  CHECK(remove_repetitions(revisit).removed == 0);
}

TEST_CASE("weekly resample extracts the requested weekday") {
  // Two full weeks of business days starting Monday 2023-01-02.
  std::vector<Observation> obs;
  const auto cal = weekday_calendar(make_date(2023, 1, 2), make_date(2023, 1, 13));
  REQUIRE(cal.size() == 10);
  for (std::size_t i = 0; i < cal.size(); ++i) obs.push_back({cal[i], 100.0 + static_cast<double>(i)});
  const PriceSeries s(std::move(obs));

  const auto fridays = weekly_resample(s, std::chrono::Friday);
  REQUIRE(fridays.size() == 2);
  CHECK(format_date(fridays[0].date) == "2023-01-06");
  CHECK(format_date(fridays[1].date) == "2023-01-13");
  CHECK(fridays[0].close == 104.0);
  CHECK(fridays[1].close == 109.0);

  CHECK(weekly_resample(s, std::chrono::Monday).size() == 2);
  CHECK_THROWS_AS(weekly_resample(series_from({{"2023-01-03", 1.0}}), std::chrono::Monday), Error);
}

TEST_CASE("log prices and log returns line up with dates") {
  const auto s = series_from({{"2023-01-02", 100.0}, {"2023-01-03", 110.0}, {"2023-01-04", 99.0}});
  const auto logp = log_prices(s);
  REQUIRE(logp.values.size() == 3);
  CHECK_THAT(logp.values[0], WithinULP(std::log(100.0), 2));

  const auto rets = log_returns(s);
  REQUIRE(rets.values.size() == 2);
  CHECK_THAT(rets.values[0], WithinULP(std::log(110.0 / 100.0), 2));
  CHECK_THAT(rets.values[1], WithinULP(std::log(99.0 / 110.0), 2));
  CHECK(format_date(rets.dates[0]) == "2023-01-03");
  CHECK(format_date(rets.dates[1]) == "2023-01-04");

  CHECK_THROWS_AS(log_returns(series_from({{"2023-01-02", 1.0}})), Error);
}
