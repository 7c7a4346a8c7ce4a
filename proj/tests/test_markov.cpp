#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "illiq/error.hpp"
#include "illiq/markov.hpp"
#include "illiq/rng.hpp"
#include "illiq/timeseries.hpp"

using namespace illiq;
using Catch::Matchers::WithinAbs;

namespace {

PriceSeries series_of(std::vector<double> closes) {
  std::vector<Observation> obs;
  Date d = make_date(2023, 1, 2);
  for (double c : closes) {
    obs.push_back({d, c});
    d = add_days(d, 1);
  }
  return PriceSeries(std::move(obs));
}

}  // namespace

TEST_CASE("state encoding marks repeats as state 0") {
  const auto s = series_of({100.0, 100.0, 101.0, 101.0, 101.0, 102.0});
  const auto states = encode_states(s);
  CHECK(states.states == std::vector<int>{0, 1, 0, 0, 1});
  CHECK(states.states.size() == s.size() - 1);
  CHECK_THROWS_AS(encode_states(series_of({100.0})), Error);
}

TEST_CASE("transition counts and probabilities are exact on a toy chain") {
  StateSeries states;
  states.states = {0, 0, 1, 0, 1, 1};
  const auto counts = count_transitions(states);
  // Pairs: 00, 01, 10, 01, 11 -> c00=1, c01=2, c10=1, c11=1.
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 2);
  CHECK(counts[2] == 1);
  CHECK(counts[3] == 1);

  const auto m = estimate_transitions(states);
  CHECK(m.p == 1.0 / 3.0);
  CHECK(m.q == 1.0 / 2.0);
  CHECK(m.counts == counts);

  const auto a = m.matrix();
  CHECK(a[0][0] == m.p);
  CHECK(a[0][1] == 1.0 - m.p);
  CHECK(a[1][0] == 1.0 - m.q);
  CHECK(a[1][1] == m.q);
}

TEST_CASE("degenerate chains estimate to the boundary") {
  StateSeries alternating;
  alternating.states = {0, 1, 0, 1};
  const auto m = estimate_transitions(alternating);
  CHECK(m.p == 0.0);
  CHECK(m.q == 0.0);
}

TEST_CASE("estimation requires both states to be left at least once") {
  // An all-quiet chain pins p = 1 but never shows a row for state 1, and
  // vice versa for an always-moving chain.
  StateSeries zeros;
  zeros.states = {0, 0, 0};
  CHECK_THROWS_WITH(estimate_transitions(zeros),
                    Catch::Matchers::ContainsSubstring("state 1"));
  StateSeries ones;
  ones.states = {1, 1, 1};
  CHECK_THROWS_WITH(estimate_transitions(ones),
                    Catch::Matchers::ContainsSubstring("state 0"));
  StateSeries single;
  single.states = {1};
  CHECK_THROWS_AS(count_transitions(single), Error);
}

TEST_CASE("from_probabilities validates its inputs") {
  const auto m = from_probabilities(0.7, 0.2);
  CHECK(m.p == 0.7);
  CHECK(m.q == 0.2);
  CHECK_THROWS_AS(from_probabilities(-0.1, 0.5), Error);
  CHECK_THROWS_AS(from_probabilities(0.5, 1.1), Error);
}

TEST_CASE("steady state matches the worked example") {
  const auto m = from_probabilities(0.7143, 0.5);
  const auto pi = steady_state(m);
  // (1-q)/(2-p-q) and (1-p)/(2-p-q); the no-trade state dominates when
  // p is large, so pi0 is the larger share here.
  CHECK_THAT(pi.pi0, WithinAbs(0.6363752068219424, 1e-15));
  CHECK_THAT(pi.pi1, WithinAbs(0.3636247931780578, 1e-15));
  CHECK_THAT(pi.pi1, WithinAbs(0.36364, 5e-5));
  CHECK_THAT(pi.pi0 + pi.pi1, WithinAbs(1.0, 1e-15));
}

TEST_CASE("steady state is invariant under the transition matrix") {
  // pi A = pi across a probability grid, the defining property.
  for (double p : {0.05, 0.2, 0.5, 0.7143, 0.9, 0.99}) {
    for (double q : {0.05, 0.3, 0.5, 0.8, 0.99}) {
      const auto m = from_probabilities(p, q);
      const auto pi = steady_state(m);
      const double next0 = pi.pi0 * p + pi.pi1 * (1.0 - q);
      const double next1 = pi.pi0 * (1.0 - p) + pi.pi1 * q;
      CHECK_THAT(next0, WithinAbs(pi.pi0, 1e-15));
      CHECK_THAT(next1, WithinAbs(pi.pi1, 1e-15));
      CHECK(pi.pi0 >= 0.0);
      CHECK(pi.pi1 >= 0.0);
    }
  }
}

TEST_CASE("steady state rejects the absorbing-everywhere chain") {
  CHECK_THROWS_AS(steady_state(from_probabilities(1.0, 1.0)), Error);
  // p = 1 alone is fine: state 0 absorbs, pi0 = 1.
  const auto pi = steady_state(from_probabilities(1.0, 0.3));
  CHECK_THAT(pi.pi0, WithinAbs(1.0, 1e-15));
}

TEST_CASE("sampled state paths start at the initial state and are reproducible") {
  const auto m = from_probabilities(0.7, 0.4);
  RngStream r1(99), r2(99);
  const auto path1 = sample_states(m, 1, 50, r1);
  const auto path2 = sample_states(m, 1, 50, r2);
  REQUIRE(path1.size() == 50);
  CHECK(path1.front() == 1);
  CHECK(path1 == path2);
  CHECK_THROWS_AS(sample_states(m, 2, 10, r1), Error);
  CHECK_THROWS_AS(sample_states(m, 1, 0, r1), Error);
}

TEST_CASE("long sampled chains visit states at the stationary rate") {
  const auto m = from_probabilities(0.7143, 0.5);
  const auto pi = steady_state(m);
  RngStream rng(2024);
  const auto path = sample_states(m, 0, 100000, rng);
  double zeros = 0;
  for (int s : path) zeros += (s == 0);
  CHECK_THAT(zeros / static_cast<double>(path.size()), WithinAbs(pi.pi0, 0.01));

  // Empirical transition frequencies recover p and q as well.
  const auto est = estimate_transitions(StateSeries{path});
  CHECK_THAT(est.p, WithinAbs(m.p, 0.01));
  CHECK_THAT(est.q, WithinAbs(m.q, 0.01));
}
