#ifndef MAEQ_RANDOM_MA_HPP
#define MAEQ_RANDOM_MA_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "maeq/model.hpp"

namespace maeq {

struct RandomMaConfig {
  int max_states = 5;
  int max_branch = 2;
  std::vector<Rational> rate_pool = {Rational(1), Rational(2), Rational(1, 2)};
  bool allow_tau_cycles = false;
};

/// Deterministic small-model generator for property tests. With
/// `allow_tau_cycles` off, probabilistic transitions only move to
/// higher-numbered states, so the probabilistic fragment is acyclic and
/// every generated model is tau-acyclic; Markovian transitions may point
/// anywhere, which still exercises cyclic timed behaviour. Probabilities
/// come from a fixed grid with denominators at most 4. The result always
/// validates.
inline MarkovAutomaton gen_random_ma(std::uint64_t seed,
                                     const RandomMaConfig& cfg = {}) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };

  MarkovAutomaton ma;
  ma.name = "random_" + std::to_string(seed);
  const int n = pick(1, cfg.max_states);
  std::vector<StateId> states;
  for (int i = 0; i < n; ++i) {
    states.push_back(StateId::base("q" + std::to_string(i)));
    ma.states.insert(states.back());
  }
  ma.init = states.front();

  const std::vector<std::string> labels = {"a", "b", "c"};
  const std::vector<std::pair<Rational, Rational>> split_grid = {
      {Rational(1), Rational(0)},
      {Rational(1, 2), Rational(1, 2)},
      {Rational(1, 3), Rational(2, 3)},
      {Rational(1, 4), Rational(3, 4)},
  };

  auto random_dist = [&](int source_index, bool internal) {
    // Probabilistic moves go strictly forward unless cycles are allowed:
    // backward probabilistic edges make the weak-move spaces blow up past
    // what a bounded search can exhaust, for every engine alike.
    (void)internal;
    const int lo = cfg.allow_tau_cycles ? 0 : source_index + 1;
    if (lo >= n) return Distribution();
    auto [p1, p2] = split_grid[pick(0, static_cast<int>(split_grid.size()) - 1)];
    Distribution d;
    d.add(states[pick(lo, n - 1)], p1);
    if (p2 > 0) d.add(states[pick(lo, n - 1)], p2);
    return d;
  };

  for (int i = 0; i < n; ++i) {
    const int pcount = pick(0, cfg.max_branch);
    for (int k = 0; k < pcount; ++k) {
      const bool internal = pick(0, 2) == 0;  // one third tau
      Action a = internal ? Action::tau()
                          : Action::visible(labels[pick(
                                0, static_cast<int>(labels.size()) - 1)]);
      Distribution d = random_dist(i, internal);
      if (d.mass() == 0) continue;
      if (a.is_visible()) ma.actions.insert(a.label);
      ma.ptrans.push_back({states[i], std::move(a), std::move(d)});
    }
    const int mcount = pick(0, cfg.max_branch);
    for (int k = 0; k < mcount; ++k)
      ma.mtrans.push_back(
          {states[i],
           cfg.rate_pool[pick(0, static_cast<int>(cfg.rate_pool.size()) - 1)],
           states[pick(0, n - 1)]});
  }
  ma.validate();
  return ma;
}

}  // namespace maeq

#endif
