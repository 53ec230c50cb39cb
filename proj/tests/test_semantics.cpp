#include <catch2/catch_amalgamated.hpp>

#include "maeq/parse.hpp"
#include "maeq/random_ma.hpp"
#include "maeq/semantics.hpp"

using namespace maeq;

namespace {

Distribution d(const char* n) { return Distribution::dirac(StateId::base(n)); }

/// Oracle for tau-acyclic models: apply the policy one step at a time until
/// nothing moves. Independent of the linear-system solver used by
/// policy_limit.
Distribution iterate_policy(const Mlts& m, const Policy& policy,
                            const StateId& start) {
  Distribution cur = Distribution::dirac(start);
  for (std::size_t round = 0; round <= m.states.size(); ++round) {
    Distribution next;
    bool moved = false;
    for (const auto& [s, p] : cur.entries()) {
      auto it = policy.decision.find(s);
      if (it == policy.decision.end() || it->second == Policy::kStop) {
        next.add(s, p);
        continue;
      }
      moved = true;
      const auto taus = m.outgoing(s, Action::tau());
      for (const auto& [t, q] :
           taus[static_cast<std::size_t>(it->second)]->target.entries())
        next.add(t, p * q);
    }
    cur = std::move(next);
    if (!moved) break;
  }
  return cur;
}

}  // namespace

TEST_CASE("early semantics races the Markovian transitions") {
  auto ma = parse_model(R"(ma race
states: s0, s1, s3, s4
init: s0
ptrans: s0 --alpha--> s1
mtrans: s0 --1--> s3
mtrans: s0 --2--> s4
ptrans: s3 --c--> s3
ptrans: s4 --e--> s4
)");
  Mlts m = build_early(ma);
  auto rate = m.outgoing(StateId::base("s0"), Action::markov(Rational(3)));
  REQUIRE(rate.size() == 1);
  Distribution expect;
  expect.add(StateId::base("s3"), Rational(1, 3));
  expect.add(StateId::base("s4"), Rational(2, 3));
  CHECK(rate[0]->target == expect);
  // alpha is kept alongside the race
  CHECK(m.outgoing(StateId::base("s0"), Action::visible("alpha")).size() == 1);
}

TEST_CASE("maximal progress removes rates from unstable states") {
  auto ma = parse_model(R"(ma mp
states: s, t
init: s
ptrans: s --tau--> t
mtrans: s --5--> t
)");
  Mlts m = build_early(ma);
  for (const auto& t : m.trans) CHECK_FALSE(t.action.is_rate());
  m = build_late(ma, SemanticsKind::Late);
  for (const auto& t : m.trans) CHECK_FALSE(t.action.is_rate());
}

TEST_CASE("late semantics introduces delaying pair states") {
  auto ma = parse_model(R"(ma fig2
states: s0, s1, s3, s4
init: s0
ptrans: s0 --alpha--> s1
mtrans: s0 --1--> s3
mtrans: s0 --2--> s4
ptrans: s3 --c--> s3
ptrans: s4 --e--> s4
)");
  Mlts m = build_late(ma, SemanticsKind::Late);
  StateId p3 = StateId::pair("s0", "s3");
  StateId p4 = StateId::pair("s0", "s4");
  REQUIRE(m.states.count(p3) == 1);
  REQUIRE(m.states.count(p4) == 1);
  // base state: no rate transition, a tau into the pair distribution
  for (const auto& t : m.trans)
    if (t.source == StateId::base("s0")) CHECK_FALSE(t.action.is_rate());
  Distribution pairs;
  pairs.add(p3, Rational(1, 3));
  pairs.add(p4, Rational(2, 3));
  CHECK(m.outgoing(StateId::base("s0"), Action::tau()).size() == 1);
  CHECK(m.outgoing(StateId::base("s0"), Action::tau())[0]->target == pairs);
  // pair states carry the full exit rate into their target, plus copies of
  // s0's visible escape
  auto r3 = m.outgoing(p3, Action::markov(Rational(3)));
  REQUIRE(r3.size() == 1);
  CHECK(r3[0]->target == d("s3"));
  CHECK(m.outgoing(p3, Action::visible("alpha")).size() == 1);
  CHECK(m.outgoing(p4, Action::visible("alpha")).size() == 1);
  m.validate();
}

TEST_CASE("late continuations unfold internal steps to a stable limit") {
  // A delayed target with its own internal branching: the pair states must
  // pair with the stable leaves, not with the intermediate unstable state.
  auto ma = parse_model(R"(ma unfold
states: s, sp, t1, t2
init: s
mtrans: s --2--> sp
ptrans: sp --tau--> { 1/2: t1, 1/2: t2 }
ptrans: t1 --a--> t1
ptrans: t2 --b--> t2
)");
  Mlts m = build_late(ma, SemanticsKind::Late);
  CHECK(m.states.count(StateId::pair("s", "t1")) == 1);
  CHECK(m.states.count(StateId::pair("s", "t2")) == 1);
  CHECK(m.states.count(StateId::pair("s", "sp")) == 0);
}

TEST_CASE("policy limits on hand-checked chains") {
  auto ma = parse_model(R"(ma chains
states: s, b, loop
init: s
ptrans: s --tau--> { 1/2: s, 1/2: b }
ptrans: loop --tau--> loop
ptrans: b --a--> b
)");
  Mlts m = build_early(ma);

  SECTION("geometric retries drain into the stop state") {
    Policy p;
    p.decision[StateId::base("s")] = 0;
    p.decision[StateId::base("b")] = Policy::kStop;
    CHECK(policy_limit(m, p, StateId::base("s")) == d("b"));
  }
  SECTION("stopping immediately keeps the Dirac") {
    Policy p;
    p.decision[StateId::base("s")] = Policy::kStop;
    CHECK(policy_limit(m, p, StateId::base("s")) == d("s"));
  }
  SECTION("a tau cycle with no exit loses all mass") {
    Policy p;
    p.decision[StateId::base("loop")] = 0;
    CHECK(policy_limit(m, p, StateId::base("loop")).mass() == 0);
  }
  SECTION("det_weak_tau sorts limits by mass") {
    auto dw = det_weak_tau(m, StateId::base("loop"));
    REQUIRE(dw.full.size() == 1);  // the Stop policy
    CHECK(dw.full[0].limit == d("loop"));
    REQUIRE(dw.deficient.size() == 1);
    CHECK(dw.deficient[0].limit.mass() == 0);
  }
}

TEST_CASE("policy limits agree with step iteration on tau-acyclic models") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Mlts m = build_early(gen_random_ma(seed));
    for (const auto& s : m.states) {
      auto region = detail::tau_reachable(m, {s});
      detail::for_each_policy(m, region, [&](const Policy& p) {
        CHECK(policy_limit(m, p, s) == iterate_policy(m, p, s));
      });
    }
  }
}

TEST_CASE("det_weak_tau_dist shares one policy across the support") {
  auto ma = parse_model(R"(ma shared
states: u, v, w
init: u
ptrans: u --tau--> w
ptrans: v --tau--> w
ptrans: w --a--> w
)");
  Mlts m = build_early(ma);
  Distribution mu;
  mu.add(StateId::base("u"), Rational(1, 2));
  mu.add(StateId::base("v"), Rational(1, 2));
  auto limits = det_weak_tau_dist(m, mu);
  // u and v decide independently, w is shared: mu itself, both to w, and the
  // two mixed outcomes
  CHECK(limits.count(mu) == 1);
  CHECK(limits.count(Distribution::dirac(StateId::base("w"))) == 1);
  CHECK(limits.size() == 4);
  for (const auto& l : limits) CHECK(l.is_full());
}

TEST_CASE("generated models always validate and build") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    MarkovAutomaton ma = gen_random_ma(seed);
    ma.validate();
    build_early(ma).validate();
    build_late(ma, SemanticsKind::Late).validate();
    build_late(ma, SemanticsKind::LateStrongOnly).validate();
    // determinism in the seed
    CHECK(serialize_model(ma) == serialize_model(gen_random_ma(seed)));
  }
}

TEST_CASE("tau cycles only appear when requested") {
  RandomMaConfig cyc;
  cyc.allow_tau_cycles = true;
  bool saw_cycle = false;
  for (std::uint64_t seed = 0; seed < 100 && !saw_cycle; ++seed) {
    MarkovAutomaton ma = gen_random_ma(seed, cyc);
    Mlts m = build_early(ma);
    for (const auto& s : m.states) {
      auto dw = det_weak_tau(m, s);
      if (!dw.deficient.empty()) saw_cycle = true;
    }
  }
  CHECK(saw_cycle);
}
