#pragma once

// Two-state Markov layer describing whether a daily close moved.
// State 0: S(t+1) == S(t) (no trade / repeated close); state 1: it moved.
// p is the probability of staying in state 0, q of staying in state 1,
// estimated by transition counting; the one-step matrix is
//   A = [[p, 1-p], [1-q, q]]   (rows = from-state, columns = to-state).

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "illiq/error.hpp"
#include "illiq/rng.hpp"
#include "illiq/timeseries.hpp"

namespace illiq {

// Move/no-move encoding of a price series: element i describes the step
// from close i to close i+1, so a series of n prices yields n-1 states.
struct StateSeries {
  std::vector<int> states;
};

inline StateSeries encode_states(const PriceSeries& series) {
  require(series.size() >= 2, errc::window, "need at least two closes to encode states");
  StateSeries out;
  out.states.reserve(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i)
    out.states.push_back(series[i].close == series[i - 1].close ? 0 : 1);
  return out;
}

// Transition counts indexed {0->0: 0, 0->1: 1, 1->0: 2, 1->1: 3}.
using TransitionCounts = std::array<std::int64_t, 4>;

inline TransitionCounts count_transitions(const StateSeries& s) {
  require(s.states.size() >= 2, errc::window, "need at least two states to count transitions");
  TransitionCounts c{0, 0, 0, 0};
  for (std::size_t i = 1; i < s.states.size(); ++i) {
    const int from = s.states[i - 1];
    const int to = s.states[i];
    require((from == 0 || from == 1) && (to == 0 || to == 1), errc::domain,
            "state outside {0,1} at position " + std::to_string(i));
    ++c[static_cast<std::size_t>(from * 2 + to)];
  }
  return c;
}

struct TransitionMatrix {
  double p = 0.0;  // P(stay in 0)
  double q = 0.0;  // P(stay in 1)
  TransitionCounts counts{0, 0, 0, 0};

  std::array<std::array<double, 2>, 2> matrix() const {
    return {{{p, 1.0 - p}, {1.0 - q, q}}};
  }
};

inline TransitionMatrix from_probabilities(double p, double q) {
  require(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0, errc::domain,
          "stay probabilities must lie in [0,1]");
  TransitionMatrix m;
  m.p = p;
  m.q = q;
  return m;
}

// Maximum-likelihood stay probabilities from observed transitions. A
// source state that never occurs leaves its row unidentified (0/0), which
// is reported as an error rather than silently defaulted.
inline TransitionMatrix estimate_transitions(const StateSeries& s) {
  TransitionMatrix m;
  m.counts = count_transitions(s);
  const double from0 = static_cast<double>(m.counts[0] + m.counts[1]);
  const double from1 = static_cast<double>(m.counts[2] + m.counts[3]);
  require(from0 > 0, errc::estimation, "no transitions out of state 0: p is unidentified");
  require(from1 > 0, errc::estimation, "no transitions out of state 1: q is unidentified");
  m.p = static_cast<double>(m.counts[0]) / from0;
  m.q = static_cast<double>(m.counts[3]) / from1;
  return m;
}

inline TransitionMatrix estimate_transitions(const PriceSeries& series) {
  return estimate_transitions(encode_states(series));
}

struct SteadyState {
  double pi0 = 0.0;
  double pi1 = 0.0;
};

// Stationary distribution of A, i.e. the left eigenvector with eigenvalue
// one: pi0 = (1-q)/(2-p-q), pi1 = (1-p)/(2-p-q). Undefined when p+q = 2
// (both states absorbing).
inline SteadyState steady_state(const TransitionMatrix& m) {
  const double denom = 2.0 - m.p - m.q;
  require(denom > 0.0, errc::degenerate,
          "p + q = 2: both states absorbing, no unique stationary distribution");
  SteadyState s;
  s.pi0 = (1.0 - m.q) / denom;
  s.pi1 = (1.0 - m.p) / denom;
  return s;
}

// n states of the chain started at `initial` (returned as element 0).
// From state 0 the next state is 0 iff u < p; from state 1 it is 1 iff
// u < q, with u a fresh uniform draw per step.
inline std::vector<int> sample_states(const TransitionMatrix& m, int initial, std::size_t n,
                                      RngStream& rng) {
  require(initial == 0 || initial == 1, errc::domain, "initial state must be 0 or 1");
  require(n >= 1, errc::domain, "need at least one state");
  std::vector<int> out;
  out.reserve(n);
  out.push_back(initial);
  int state = initial;
  for (std::size_t i = 1; i < n; ++i) {
    const double u = rng.uniform();
    state = state == 0 ? (u < m.p ? 0 : 1) : (u < m.q ? 1 : 0);
    out.push_back(state);
  }
  return out;
}

}  // namespace illiq
