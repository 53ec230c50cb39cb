#ifndef MAEQ_SEMANTICS_HPP
#define MAEQ_SEMANTICS_HPP

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "maeq/model.hpp"

namespace maeq {

/// Which derived transition system to build from a Markov automaton.
/// LateStrongOnly replaces the deterministic weak tau continuation of the
/// late construction by a single strong tau step; it exists to reproduce
/// the regression showing that one strong step is not enough.
enum class SemanticsKind { Early, Late, LateStrongOnly };

/// A per-state choice driving a deterministic tau unfolding: either stop at
/// the state, or always take the same tau transition (identified by its
/// index in the state's tau transition list).
struct Policy {
  static constexpr int kStop = -1;
  std::map<StateId, int> decision;

  bool is_stop(const StateId& s) const {
    auto it = decision.find(s);
    return it != decision.end() && it->second == kStop;
  }

  friend auto operator<=>(const Policy&, const Policy&) = default;
};

namespace detail {

/// Exact absorption probabilities of the chain induced by a policy:
/// Stop states are absorbing, Take states move along their chosen tau
/// transition. Solves (I - Q) X = R by Gaussian elimination over rationals,
/// with states trapped in tau cycles contributing no mass.
class PolicyChain {
 public:
  PolicyChain(const Mlts& m, const Policy& policy) : m_(m), policy_(policy) {}

  Distribution limit_from(const StateId& s) {
    ensure_solved();
    if (policy_.is_stop(s)) return Distribution::dirac(s);
    if (doomed_.count(s)) return Distribution();
    return solution_.at(s);
  }

 private:
  const MltsTransition& chosen(const StateId& s) const {
    auto it = policy_.decision.find(s);
    if (it == policy_.decision.end())
      throw ModelError("policy undecided at " + s.display());
    auto taus = m_.outgoing(s, Action::tau());
    if (it->second < 0 || static_cast<std::size_t>(it->second) >= taus.size())
      throw ModelError("policy references missing tau transition at " +
                       s.display());
    return *taus[it->second];
  }

  void ensure_solved() {
    if (solved_) return;
    solved_ = true;
    // The policy decides the whole tau-reachable region of its roots; solve
    // once over every Take state so any of them can be queried.
    std::vector<StateId> take_states;
    for (const auto& [s, choice] : policy_.decision)
      if (choice != Policy::kStop) take_states.push_back(s);
    // Take states from which no Stop state is reachable lose their mass.
    std::set<StateId> alive;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& s : take_states) {
        if (alive.count(s)) continue;
        for (const auto& [t, p] : chosen(s).target.entries()) {
          if (policy_.is_stop(t) || alive.count(t)) {
            alive.insert(s);
            changed = true;
            break;
          }
        }
      }
    }
    std::vector<StateId> unknowns;
    for (const auto& s : take_states) {
      if (alive.count(s))
        unknowns.push_back(s);
      else
        doomed_.insert(s);
    }
    solve(unknowns);
  }

  void solve(const std::vector<StateId>& unknowns) {
    const std::size_t n = unknowns.size();
    std::map<StateId, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[unknowns[i]] = i;
    // (I - Q) x = r with distribution-valued right-hand sides.
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n, Rational(0)));
    std::vector<std::map<StateId, Rational>> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i][i] = 1;
      for (const auto& [t, p] : chosen(unknowns[i]).target.entries()) {
        if (policy_.is_stop(t)) {
          rhs[i][t] += p;
        } else if (auto it = index.find(t); it != index.end()) {
          a[i][it->second] -= p;
        }
        // mass into doomed states is dropped
      }
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      while (pivot < n && a[pivot][col] == 0) ++pivot;
      if (pivot == n) throw ModelError("singular policy chain system");
      std::swap(a[pivot], a[col]);
      std::swap(rhs[pivot], rhs[col]);
      Rational d = a[col][col];
      for (auto& v : a[col]) v /= d;
      for (auto& [s, v] : rhs[col]) v /= d;
      for (std::size_t row = 0; row < n; ++row) {
        if (row == col || a[row][col] == 0) continue;
        Rational f = a[row][col];
        for (std::size_t k = 0; k < n; ++k) a[row][k] -= f * a[col][k];
        for (const auto& [s, v] : rhs[col]) rhs[row][s] -= f * v;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      Distribution d;
      for (const auto& [s, v] : rhs[i])
        if (v != 0) d.add(s, v);
      solution_[unknowns[i]] = std::move(d);
    }
  }

  const Mlts& m_;
  const Policy& policy_;
  bool solved_ = false;
  std::set<StateId> doomed_;
  std::map<StateId, Distribution> solution_;
};

/// All states reachable from `roots` through tau transitions, regardless of
/// policy. The policies of a deterministic unfolding decide exactly these.
inline std::set<StateId> tau_reachable(const Mlts& m,
                                       const std::vector<StateId>& roots) {
  std::set<StateId> seen;
  std::vector<StateId> work = roots;
  while (!work.empty()) {
    StateId s = work.back();
    work.pop_back();
    if (!seen.insert(s).second) continue;
    for (const auto* t : m.outgoing(s, Action::tau()))
      for (const auto& [u, p] : t->target.entries()) work.push_back(u);
  }
  return seen;
}

constexpr std::size_t kMaxPolicies = 1u << 16;

/// Enumerates every Stop/Take policy over the tau-reachable region in
/// lexicographic order (state order, Stop before transition indices).
template <typename Visit>
void for_each_policy(const Mlts& m, const std::set<StateId>& region,
                     Visit&& visit) {
  std::vector<StateId> states(region.begin(), region.end());
  std::vector<int> fanout;
  std::size_t total = 1;
  for (const auto& s : states) {
    fanout.push_back(static_cast<int>(m.outgoing(s, Action::tau()).size()));
    total *= static_cast<std::size_t>(fanout.back()) + 1;
    if (total > kMaxPolicies)
      throw ModelError("tau policy space too large");
  }
  std::vector<int> choice(states.size(), Policy::kStop);
  while (true) {
    Policy p;
    for (std::size_t i = 0; i < states.size(); ++i)
      p.decision[states[i]] = choice[i];
    visit(p);
    std::size_t k = states.size();
    while (k > 0) {
      --k;
      if (++choice[k] < fanout[k]) break;
      choice[k] = Policy::kStop;
      if (k == 0) return;
    }
    if (k == 0 && choice[0] == Policy::kStop) return;
  }
}

}  // namespace detail

/// Exact limit distribution of a deterministic tau unfolding from `s`.
/// Mass below one indicates probability trapped in a tau cycle with no
/// Stop decision on the way out.
inline Distribution policy_limit(const Mlts& m, const Policy& policy,
                                 const StateId& s) {
  m.require_state(s, "policy_limit");
  detail::PolicyChain chain(m, policy);
  return chain.limit_from(s);
}

struct DetWeakTau {
  struct Item {
    Policy policy;
    Distribution limit;
  };
  std::vector<Item> full;       // limits with mass one
  std::vector<Item> deficient;  // tau-cycling policies, mass below one

  /// Distinct full limit distributions.
  std::set<Distribution> full_limits() const {
    std::set<Distribution> out;
    for (const auto& item : full) out.insert(item.limit);
    return out;
  }
};

/// All deterministic weak tau transitions out of `s`, one per Stop/Take
/// policy over the tau-reachable region.
inline DetWeakTau det_weak_tau(const Mlts& m, const StateId& s) {
  m.require_state(s, "det_weak_tau");
  DetWeakTau out;
  auto region = detail::tau_reachable(m, {s});
  detail::for_each_policy(m, region, [&](const Policy& p) {
    Distribution limit = policy_limit(m, p, s);
    if (limit.is_full())
      out.full.push_back({p, std::move(limit)});
    else
      out.deficient.push_back({p, std::move(limit)});
  });
  return out;
}

/// Deterministic weak tau transitions of a whole distribution: one shared
/// policy drives every support state, and the per-state limits combine
/// mass-weighted. Only full limits are returned.
inline std::set<Distribution> det_weak_tau_dist(const Mlts& m,
                                                const Distribution& mu) {
  std::set<Distribution> out;
  auto region = detail::tau_reachable(m, mu.support());
  detail::for_each_policy(m, region, [&](const Policy& p) {
    detail::PolicyChain chain(m, p);
    Distribution combined;
    for (const auto& [s, w] : mu.entries()) {
      Distribution limit = chain.limit_from(s);
      for (const auto& [t, q] : limit.entries()) combined.add(t, w * q);
    }
    if (combined.is_full()) out.insert(std::move(combined));
  });
  return out;
}

/// Early semantics: probabilistic transitions are copied, and every stable
/// state with positive exit rate gets a single transition labeled with the
/// exit rate into the race-condition distribution.
inline Mlts build_early(const MarkovAutomaton& ma) {
  Mlts out;
  out.states = ma.states;
  for (const auto& t : ma.ptrans)
    out.add_transition(t.source, t.action, t.target);
  for (const auto& s : ma.states) {
    Rational exit = ma.exit_rate(s);
    if (exit == 0 || !ma.is_stable(s)) continue;
    Distribution race;
    for (const auto& t : ma.states) {
      Rational r = ma.rate_between(s, t);
      if (r != 0) race.add(t, r / exit);
    }
    out.add_transition(s, Action::markov(exit), std::move(race));
  }
  out.validate();
  return out;
}

/// Late semantics: non-Markovian early transitions are kept on the base
/// states; each stable state s with a Markovian transition instead moves by
/// tau into pair states [s,t] that carry the delayed sojourn (rate RATE(s)
/// into t) together with copies of s's other early transitions. The race
/// distribution is continued by deterministic weak tau unfoldings run to a
/// stable limit (or, for LateStrongOnly, by a single strong tau step).
inline Mlts build_late(const MarkovAutomaton& ma, SemanticsKind kind) {
  if (kind == SemanticsKind::Early)
    throw std::invalid_argument("build_late: early kind");
  Mlts early = build_early(ma);
  Mlts out;
  out.states = ma.states;
  for (const auto& t : early.trans)
    if (!t.action.is_rate()) out.add_transition(t.source, t.action, t.target);
  for (const auto& s : ma.states) {
    const MltsTransition* rate_tr = nullptr;
    for (const auto& t : early.trans)
      if (t.source == s && t.action.is_rate()) rate_tr = &t;
    if (!rate_tr) continue;
    std::set<Distribution> continuations;
    if (kind == SemanticsKind::Late) {
      for (const auto& mu : det_weak_tau_dist(early, rate_tr->target))
        if (early.is_stable_dist(mu)) continuations.insert(mu);
    } else {
      if (early.is_stable_dist(rate_tr->target))
        continuations.insert(rate_tr->target);
      for (const auto& mu : lift_step(early, rate_tr->target, Action::tau()))
        if (mu.is_full() && early.is_stable_dist(mu)) continuations.insert(mu);
    }
    for (const auto& mu : continuations) {
      Distribution pair_dist;
      for (const auto& [t, p] : mu.entries())
        pair_dist.add(StateId::pair(s.name, t.name), p);
      out.add_transition(s, Action::tau(), pair_dist);
      for (const auto& [t, p] : mu.entries()) {
        StateId ps = StateId::pair(s.name, t.name);
        if (!out.states.insert(ps).second) continue;  // already materialized
        out.add_transition(ps, rate_tr->action, Distribution::dirac(t));
        for (const auto& e : early.trans)
          if (e.source == s && !e.action.is_rate())
            out.add_transition(ps, e.action, e.target);
      }
    }
  }
  out.validate();
  return out;
}

inline Mlts build_semantics(const MarkovAutomaton& ma, SemanticsKind kind) {
  return kind == SemanticsKind::Early ? build_early(ma) : build_late(ma, kind);
}

}  // namespace maeq

#endif
