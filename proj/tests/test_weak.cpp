#include <catch2/catch_amalgamated.hpp>

#include "maeq/parse.hpp"
#include "maeq/random_ma.hpp"
#include "maeq/weak.hpp"

using namespace maeq;

namespace {

Distribution d(const char* n) { return Distribution::dirac(StateId::base(n)); }

Mlts early_of(const char* text) { return build_early(parse_model(text)); }

}  // namespace

TEST_CASE("split fractions form the reduced grid") {
  auto fs = split_fractions(4);
  std::vector<Rational> expect = {
      Rational(1, 4), Rational(1, 3), Rational(1, 2), Rational(2, 3),
      Rational(3, 4), Rational(1)};
  CHECK(fs == expect);
  CHECK(split_fractions(1) == std::vector<Rational>{Rational(1)});
}

TEST_CASE("weak posts on a hand-checked chain") {
  Mlts m = early_of(R"(ma chain
states: s, u, v, w
init: s
ptrans: s --tau--> u
ptrans: u --a--> v
ptrans: v --tau--> w
ptrans: w --c--> w
)");
  WeakAnalyzer an(m, SearchBounds{});

  SECTION("tau posts contain the reflexive stop and every prefix") {
    auto posts = an.weak_post(StateId::base("s"), Action::tau());
    std::set<Distribution> got(posts.begin(), posts.end());
    CHECK(got == std::set<Distribution>{d("s"), d("u")});
  }
  SECTION("visible posts allow tau on both sides of the step") {
    auto posts = an.weak_post(StateId::base("s"), Action::visible("a"));
    std::set<Distribution> got(posts.begin(), posts.end());
    CHECK(got == std::set<Distribution>{d("v"), d("w")});
  }
  SECTION("missing actions yield no posts") {
    CHECK(an.weak_post(StateId::base("w"), Action::visible("a")).empty());
  }
}

TEST_CASE("weak posts split probabilistic taus by policy") {
  Mlts m = early_of(R"(ma fork
states: s, t1, t2
init: s
ptrans: s --tau--> { 1/2: t1, 1/2: t2 }
ptrans: t1 --tau--> t2
ptrans: t1 --a--> t1
ptrans: t2 --b--> t2
)");
  WeakAnalyzer an(m, SearchBounds{});
  auto posts = an.weak_post(StateId::base("s"), Action::tau());
  std::set<Distribution> got(posts.begin(), posts.end());
  Distribution half;
  half.add(StateId::base("t1"), Rational(1, 2));
  half.add(StateId::base("t2"), Rational(1, 2));
  CHECK(got == std::set<Distribution>{d("s"), half, d("t2")});
}

TEST_CASE("tau closure is reflexive and monotone in the depth bound") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Mlts m = build_early(gen_random_ma(seed));
    WeakAnalyzer shallow(m, SearchBounds{4, 1});
    WeakAnalyzer deep(m, SearchBounds{4, 3});
    for (const auto& s : m.states) {
      Distribution mu = Distribution::dirac(s);
      auto small = shallow.tau_closure(mu);
      auto large = deep.tau_closure(mu);
      CHECK(small.count(mu) == 1);
      CHECK(std::includes(large.begin(), large.end(), small.begin(),
                          small.end()));
      for (const auto& t : large) CHECK(t.is_full());
    }
  }
}

TEST_CASE("challenge sets are monotone in the grid denominator") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Mlts m = build_early(gen_random_ma(seed));
    WeakAnalyzer coarse(m, SearchBounds{2, 3});
    WeakAnalyzer fine(m, SearchBounds{4, 3});
    for (const auto& s : m.states) {
      auto c1 = coarse.challenges(Distribution::dirac(s));
      auto c2 = fine.challenges(Distribution::dirac(s));
      std::set<Challenge> set1(c1.begin(), c1.end());
      std::set<Challenge> set2(c2.begin(), c2.end());
      CHECK(std::includes(set2.begin(), set2.end(), set1.begin(), set1.end()));
    }
  }
}

TEST_CASE("splits enumerate parts on the grid") {
  Distribution mu;
  mu.add(StateId::base("x"), Rational(1, 2));
  mu.add(StateId::base("y"), Rational(1, 2));
  Mlts m;
  m.states.insert(StateId::base("x"));
  m.states.insert(StateId::base("y"));
  WeakAnalyzer an(m, SearchBounds{2, 3});
  auto parts = an.splits(mu);
  // per state: keep 0, 1/4 (=1/2*1/2) or 1/2; drop the empty part
  CHECK(parts.size() == 8);
  for (const auto& p : parts) {
    CHECK(p.mass() > 0);
    for (const auto& [s, q] : p.entries()) CHECK(q <= mu.at(s));
  }
  // the proportional carve {1/8:x, 1/8:y} plus the two grid parts
  auto quarter = an.splits_with_mass(mu, Rational(1, 4));
  CHECK(quarter.size() == 3);
  for (const auto& p : quarter) CHECK(p.mass() == Rational(1, 4));
}

TEST_CASE("responses move before splitting") {
  // After one weak tau the responder reaches {1/2 a-state, 1/2 b-state} and
  // only then takes the half that matches the challenge. Splitting first
  // would pin the responder to one branch too early.
  Mlts m = early_of(R"(ma regroup
states: s, t1, t2
init: s
ptrans: s --tau--> { 1/2: t1, 1/2: t2 }
ptrans: t1 --a--> t1
ptrans: t2 --b--> t2
)");
  WeakAnalyzer an(m, SearchBounds{});
  auto resp = an.search_response(
      d("s"), Action::visible("a"), Rational(1, 2),
      [&](const Distribution& cand) { return cand == d("t1"); });
  REQUIRE(resp.has_value());
  CHECK(*resp == d("t1"));
}

TEST_CASE("divergence detection") {
  Mlts m = early_of(R"(ma div
states: s, r, x
init: s
ptrans: r --tau--> r
ptrans: x --tau--> { 1/2: x, 1/2: s }
)");
  WeakAnalyzer an(m, SearchBounds{});
  CHECK_FALSE(an.is_divergent(StateId::base("s")));
  CHECK(an.is_divergent(StateId::base("r")));
  // x cycles with probability 1/2 per round: the looping policy still
  // escapes with probability one, so x does not diverge
  CHECK_FALSE(an.is_divergent(StateId::base("x")));
  CHECK(is_time_convergent(m, StateId::base("s")));
  CHECK(is_time_convergent(m, StateId::base("x")));
  // r can never settle in a stable state
  CHECK_FALSE(is_time_convergent(m, StateId::base("r")));
  CHECK_FALSE(is_time_convergent(m));
}

TEST_CASE("challenges carry normalized results and grid masses") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Mlts m = build_early(gen_random_ma(seed));
    WeakAnalyzer an(m, SearchBounds{});
    for (const auto& s : m.states) {
      for (const auto& c : an.challenges(Distribution::dirac(s))) {
        CHECK(c.result.is_full());
        CHECK(c.rho > 0);
        CHECK(c.rho <= 1);
      }
    }
  }
}
