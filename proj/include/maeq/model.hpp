#ifndef MAEQ_MODEL_HPP
#define MAEQ_MODEL_HPP

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "maeq/distribution.hpp"
#include "maeq/rational.hpp"
#include "maeq/state.hpp"

namespace maeq {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Probabilistic transition of a Markov automaton: source, action in
/// Act+tau, full target distribution.
struct PTransition {
  StateId source;
  Action action;  // never a rate
  Distribution target;

  friend bool operator==(const PTransition&, const PTransition&) = default;
  friend bool operator<(const PTransition& a, const PTransition& b) {
    if (a.source != b.source) return a.source < b.source;
    if (a.action != b.action) return a.action < b.action;
    return a.target < b.target;
  }
};

/// Markovian transition: source, positive rate, single target state.
/// Parallel edges are allowed and contribute additively to RATE(s,s').
struct MTransition {
  StateId source;
  Rational rate;
  StateId target;

  friend bool operator==(const MTransition&, const MTransition&) = default;
  friend bool operator<(const MTransition& a, const MTransition& b) {
    if (a.source != b.source) return a.source < b.source;
    if (a.rate != b.rate) return a.rate < b.rate;
    return a.target < b.target;
  }
};

struct MarkovAutomaton {
  std::string name = "ma";
  std::set<StateId> states;
  std::set<std::string> actions;  // visible labels
  std::vector<PTransition> ptrans;
  std::vector<MTransition> mtrans;
  StateId init;

  void require_state(const StateId& s, const std::string& where) const {
    if (!states.count(s))
      throw ModelError(where + ": unknown state " + s.display());
  }

  /// Checks all structural invariants; throws ModelError on violation.
  void validate() const {
    if (states.empty()) throw ModelError("model has no states");
    require_state(init, "init");
    for (const auto& t : ptrans) {
      require_state(t.source, "ptrans");
      if (t.action.is_rate())
        throw ModelError("ptrans: rate label on probabilistic transition");
      if (!t.target.is_full())
        throw ModelError("ptrans from " + t.source.display() +
                         ": distribution mass " + to_string(t.target.mass()) +
                         " != 1");
      for (const auto& [s, p] : t.target.entries())
        require_state(s, "ptrans target");
      if (t.action.is_visible() && !actions.count(t.action.label))
        throw ModelError("ptrans: undeclared action " + t.action.label);
    }
    for (const auto& t : mtrans) {
      require_state(t.source, "mtrans");
      require_state(t.target, "mtrans target");
      if (t.rate <= 0) throw ModelError("mtrans: nonpositive rate");
    }
  }

  /// RATE(s,t): exact sum over parallel Markovian edges from s to t.
  Rational rate_between(const StateId& s, const StateId& t) const {
    require_state(s, "rate_between");
    require_state(t, "rate_between");
    Rational r = 0;
    for (const auto& m : mtrans)
      if (m.source == s && m.target == t) r += m.rate;
    return r;
  }

  /// RATE(s): the exit rate, zero for states without Markovian transitions.
  Rational exit_rate(const StateId& s) const {
    require_state(s, "exit_rate");
    Rational r = 0;
    for (const auto& m : mtrans)
      if (m.source == s) r += m.rate;
    return r;
  }

  /// A state is stable when no tau transition leaves it.
  bool is_stable(const StateId& s) const {
    require_state(s, "is_stable");
    return std::none_of(ptrans.begin(), ptrans.end(), [&](const PTransition& t) {
      return t.source == s && t.action.is_tau();
    });
  }

  bool is_stable_dist(const Distribution& mu) const {
    for (const auto& [s, p] : mu.entries())
      if (!is_stable(s)) return false;
    return true;
  }

  std::set<std::string> visible_alphabet() const { return actions; }
};

/// One transition of a Markov labeled transition system. The action may be
/// a rate label here; the target distribution is full.
struct MltsTransition {
  StateId source;
  Action action;
  Distribution target;

  friend bool operator==(const MltsTransition&, const MltsTransition&) = default;
  friend bool operator<(const MltsTransition& a, const MltsTransition& b) {
    if (a.source != b.source) return a.source < b.source;
    if (a.action != b.action) return a.action < b.action;
    return a.target < b.target;
  }
};

/// Derived transition system: at most one Markovian transition per state,
/// and maximal progress (a state with a tau transition has no rate
/// transition).
struct Mlts {
  std::set<StateId> states;
  std::vector<MltsTransition> trans;

  void require_state(const StateId& s, const std::string& where) const {
    if (!states.count(s))
      throw ModelError(where + ": unknown state " + s.display());
  }

  void add_transition(StateId src, Action a, Distribution mu) {
    MltsTransition t{std::move(src), std::move(a), std::move(mu)};
    if (std::find(trans.begin(), trans.end(), t) == trans.end())
      trans.push_back(std::move(t));
  }

  std::vector<const MltsTransition*> outgoing(const StateId& s) const {
    std::vector<const MltsTransition*> out;
    for (const auto& t : trans)
      if (t.source == s) out.push_back(&t);
    return out;
  }

  std::vector<const MltsTransition*> outgoing(const StateId& s,
                                              const Action& a) const {
    std::vector<const MltsTransition*> out;
    for (const auto& t : trans)
      if (t.source == s && t.action == a) out.push_back(&t);
    return out;
  }

  bool is_stable(const StateId& s) const {
    require_state(s, "is_stable");
    return std::none_of(trans.begin(), trans.end(), [&](const MltsTransition& t) {
      return t.source == s && t.action.is_tau();
    });
  }

  bool is_stable_dist(const Distribution& mu) const {
    for (const auto& [s, p] : mu.entries())
      if (!is_stable(s)) return false;
    return true;
  }

  /// Actions (including rates) enabled in one step from s.
  std::set<Action> enabled(const StateId& s) const {
    std::set<Action> out;
    for (const auto& t : trans)
      if (t.source == s) out.insert(t.action);
    return out;
  }

  /// All actions occurring anywhere in the system.
  std::set<Action> all_actions() const {
    std::set<Action> out;
    for (const auto& t : trans) out.insert(t.action);
    return out;
  }

  void validate() const {
    for (const auto& t : trans) {
      require_state(t.source, "mlts transition");
      if (!t.target.is_full())
        throw ModelError("mlts transition target is not full");
      for (const auto& [s, p] : t.target.entries())
        require_state(s, "mlts transition target");
    }
    for (const auto& s : states) {
      const MltsTransition* rate_tr = nullptr;
      for (const auto& t : trans) {
        if (t.source != s || !t.action.is_rate()) continue;
        if (rate_tr && !(t.action == rate_tr->action &&
                         t.target == rate_tr->target))
          throw ModelError("state " + s.display() +
                           " has two distinct Markovian transitions");
        rate_tr = &t;
      }
      if (rate_tr && !is_stable(s))
        throw ModelError("maximal progress violated at " + s.display());
    }
  }
};

namespace detail {
/// Enumerates all per-state choice combinations of `options[i]` and feeds
/// each combination to `emit`. Helper for lifting transitions to
/// distributions.
template <typename Option, typename Emit>
void for_each_combination(const std::vector<std::vector<Option>>& options,
                          Emit&& emit) {
  std::vector<std::size_t> idx(options.size(), 0);
  if (options.empty()) {
    emit(idx);
    return;
  }
  for (const auto& o : options)
    if (o.empty()) return;
  while (true) {
    emit(idx);
    std::size_t k = 0;
    while (k < idx.size()) {
      if (++idx[k] < options[k].size()) break;
      idx[k++] = 0;
    }
    if (k == idx.size()) break;
  }
}
}  // namespace detail

/// Lifts a one-step transition to a full distribution: every support state
/// must move under `a`, and the results are combined mass-weighted. Returns
/// the empty set when some support state has no `a`-transition.
inline std::set<Distribution> lift_step(const Mlts& m, const Distribution& mu,
                                        const Action& a) {
  if (!mu.is_full())
    throw std::invalid_argument("lift_step: distribution must be full");
  std::vector<StateId> supp = mu.support();
  std::vector<std::vector<const MltsTransition*>> options;
  options.reserve(supp.size());
  for (const auto& s : supp) {
    auto o = m.outgoing(s, a);
    if (o.empty()) return {};
    options.push_back(std::move(o));
  }
  std::set<Distribution> out;
  detail::for_each_combination(options, [&](const std::vector<std::size_t>& idx) {
    Distribution d;
    for (std::size_t i = 0; i < supp.size(); ++i) {
      const Rational w = mu.at(supp[i]);
      for (const auto& [t, p] : options[i][idx[i]]->target.entries())
        d.add(t, w * p);
    }
    out.insert(std::move(d));
  });
  return out;
}

}  // namespace maeq

#endif
