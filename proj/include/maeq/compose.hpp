#ifndef MAEQ_COMPOSE_HPP
#define MAEQ_COMPOSE_HPP

#include <set>
#include <string>
#include <vector>

#include "maeq/equivalence.hpp"

namespace maeq {

/// Synchronization set: the visible labels both operands must perform
/// together. tau never synchronizes; labels absent from either alphabet are
/// rejected rather than silently ignored.
struct SyncSet {
  std::set<std::string> labels;

  void validate(const MarkovAutomaton& m1, const MarkovAutomaton& m2) const {
    for (const auto& l : labels) {
      if (l == "tau") throw ModelError("sync set may not contain tau");
      if (!m1.actions.count(l) || !m2.actions.count(l))
        throw ModelError("sync action '" + l +
                         "' missing from an operand alphabet");
    }
  }

  /// Default synchronization: the intersection of the visible alphabets.
  static SyncSet common(const MarkovAutomaton& m1, const MarkovAutomaton& m2) {
    SyncSet out;
    for (const auto& a : m1.actions)
      if (m2.actions.count(a)) out.labels.insert(a);
    return out;
  }
};

namespace detail {

inline StateId composite(const StateId& a, const StateId& b) {
  return StateId::base(a.name + "|" + b.name);
}

}  // namespace detail

/// Parallel composition, restricted to the part reachable from the
/// composite initial state. Actions in A synchronize with product target
/// distributions; other actions interleave with the idle side unchanged.
/// Markovian transitions interleave; since parallel edges add up in
/// RATE(s,s'), self-loops on both sides yield the combined rate.
inline MarkovAutomaton parallel_compose(const MarkovAutomaton& m1,
                                        const MarkovAutomaton& m2,
                                        const SyncSet& sync) {
  sync.validate(m1, m2);
  MarkovAutomaton out;
  out.name = m1.name + "||" + m2.name;
  out.actions = m1.actions;
  out.actions.insert(m2.actions.begin(), m2.actions.end());
  out.init = detail::composite(m1.init, m2.init);

  auto embed_left = [&](const Distribution& mu, const StateId& idle) {
    Distribution d;
    for (const auto& [s, p] : mu.entries())
      d.add(detail::composite(s, idle), p);
    return d;
  };
  auto embed_right = [&](const StateId& idle, const Distribution& mu) {
    Distribution d;
    for (const auto& [s, p] : mu.entries())
      d.add(detail::composite(idle, s), p);
    return d;
  };

  std::set<std::pair<StateId, StateId>> seen;
  std::vector<std::pair<StateId, StateId>> work{{m1.init, m2.init}};
  while (!work.empty()) {
    auto [a, b] = work.back();
    work.pop_back();
    if (!seen.insert({a, b}).second) continue;
    StateId here = detail::composite(a, b);
    out.states.insert(here);
    auto enqueue = [&](const StateId& x, const StateId& y) {
      if (!seen.count({x, y})) work.push_back({x, y});
    };
    for (const auto& t : m1.ptrans) {
      if (!(t.source == a)) continue;
      bool synced = t.action.is_visible() && sync.labels.count(t.action.label);
      if (synced) {
        for (const auto& u : m2.ptrans) {
          if (!(u.source == b) || !(u.action == t.action)) continue;
          Distribution d;
          for (const auto& [x, p] : t.target.entries())
            for (const auto& [y, q] : u.target.entries()) {
              d.add(detail::composite(x, y), p * q);
              enqueue(x, y);
            }
          out.ptrans.push_back({here, t.action, std::move(d)});
        }
      } else {
        out.ptrans.push_back({here, t.action, embed_left(t.target, b)});
        for (const auto& [x, p] : t.target.entries()) enqueue(x, b);
      }
    }
    for (const auto& u : m2.ptrans) {
      if (!(u.source == b)) continue;
      if (u.action.is_visible() && sync.labels.count(u.action.label))
        continue;  // handled above
      out.ptrans.push_back({here, u.action, embed_right(a, u.target)});
      for (const auto& [y, q] : u.target.entries()) enqueue(a, y);
    }
    for (const auto& t : m1.mtrans) {
      if (!(t.source == a)) continue;
      out.mtrans.push_back({here, t.rate, detail::composite(t.target, b)});
      enqueue(t.target, b);
    }
    for (const auto& u : m2.mtrans) {
      if (!(u.source == b)) continue;
      out.mtrans.push_back({here, u.rate, detail::composite(a, u.target)});
      enqueue(a, u.target);
    }
  }
  out.validate();
  return out;
}

/// One congruence case: a pair already known (or claimed) Equivalent,
/// composed with a context, re-checked under the same relation.
struct CongruenceCase {
  std::string label;
  SemanticsKind semantics = SemanticsKind::Early;
  RelationKind relation = RelationKind::Bisim;
  Outcome base = Outcome::Equivalent;
  Outcome composed = Outcome::Equivalent;
  bool pass = false;
};

struct CongruenceReport {
  std::vector<CongruenceCase> cases;
  bool all_pass() const {
    for (const auto& c : cases)
      if (!c.pass) return false;
    return true;
  }
};

/// For each Equivalent pair and each context, verifies that composing both
/// sides with the context preserves the verdict. Pairs that are not
/// Equivalent to begin with are recorded but do not constrain composition.
inline CongruenceReport congruence_suite(
    const std::vector<MarkovAutomaton>& contexts,
    const std::vector<std::tuple<SemanticsKind, RelationKind, MarkovAutomaton,
                                 StateId, StateId>>& pairs,
    const SearchBounds& bounds) {
  CongruenceReport report;
  CheckerOptions opt;
  opt.bounds = bounds;
  for (const auto& [sem, rel, ma, ls, rs] : pairs) {
    Verdict base = check_ma(ma, sem, rel, Distribution::dirac(ls),
                            Distribution::dirac(rs), opt);
    for (const auto& ctx : contexts) {
      CongruenceCase c;
      c.label = ma.name + " (" + ls.display() + "," + rs.display() + ") || " +
                ctx.name;
      c.semantics = sem;
      c.relation = rel;
      c.base = base.outcome;
      if (base.outcome != Outcome::Equivalent) {
        c.composed = base.outcome;
        c.pass = true;  // nothing to preserve
        report.cases.push_back(c);
        continue;
      }
      SyncSet a = SyncSet::common(ma, ctx);
      MarkovAutomaton left = ma, right = ma;
      left.init = ls;
      right.init = rs;
      MarkovAutomaton cl = parallel_compose(left, ctx, a);
      MarkovAutomaton cr = parallel_compose(right, ctx, a);
      // Both composites live in one automaton so the checker can relate
      // their initial states directly.
      MarkovAutomaton joint = cl;
      joint.name = cl.name + "+" + cr.name;
      for (const auto& s : cr.states) joint.states.insert(s);
      joint.actions.insert(cr.actions.begin(), cr.actions.end());
      for (const auto& t : cr.ptrans) {
        if (std::find(joint.ptrans.begin(), joint.ptrans.end(), t) ==
            joint.ptrans.end())
          joint.ptrans.push_back(t);
      }
      for (const auto& t : cr.mtrans) {
        if (std::find(joint.mtrans.begin(), joint.mtrans.end(), t) ==
            joint.mtrans.end())
          joint.mtrans.push_back(t);
      }
      Verdict composed =
          check_ma(joint, sem, rel, Distribution::dirac(cl.init),
                   Distribution::dirac(cr.init), opt);
      c.composed = composed.outcome;
      c.pass = composed.outcome == Outcome::Equivalent;
      report.cases.push_back(c);
    }
  }
  return report;
}

}  // namespace maeq

#endif
