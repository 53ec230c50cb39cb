#include <catch2/catch_amalgamated.hpp>

#include "maeq/corpus.hpp"
#include "maeq/random_ma.hpp"

using namespace maeq;

namespace {

Distribution d(const char* n) { return Distribution::dirac(StateId::base(n)); }

Outcome outcome_of(const MarkovAutomaton& ma, SemanticsKind sem,
                   RelationKind rel, const Distribution& mu,
                   const Distribution& nu, CheckerOptions opt = {}) {
  return check_ma(ma, sem, rel, mu, nu, opt).outcome;
}

}  // namespace

TEST_CASE("every documented corpus claim replays") {
  for (const auto& e : corpus()) {
    REQUIRE_FALSE(e.documented_claims.empty());
    for (const auto& c : e.documented_claims) {
      auto r = run_claim(e, c);
      INFO(e.name << ": " << c.display() << " (" << c.note << ")");
      CHECK(r.actual == c.expected);
    }
  }
}

TEST_CASE("verdict metadata is populated") {
  const auto fig1 = corpus()[0];
  Verdict eq = check_ma(fig1.model, SemanticsKind::Early, RelationKind::Bisim,
                        d("s"), d("t"));
  CHECK(eq.outcome == Outcome::Equivalent);
  CHECK_FALSE(eq.witness.empty());
  CHECK_FALSE(eq.counterexample.has_value());
  CHECK(eq.caveat == "ExactOnCorpusClass");
  CHECK(eq.stats.pairs_explored > 0);
  // the queried pair is in the witness
  bool found = false;
  for (const auto& [mu, nu] : eq.witness)
    if (mu == d("s") && nu == d("t")) found = true;
  CHECK(found);

  Verdict ne = check_ma(fig1.model, SemanticsKind::Early, RelationKind::Bisim,
                        d("t"), d("r"));
  CHECK(ne.outcome == Outcome::Distinguished);
  REQUIRE(ne.counterexample.has_value());
  CHECK(ne.witness.empty());
  // the root challenge replays: it really is a challenge of one side at the
  // queried pair
  const FailureNode& root = *ne.counterexample;
  CHECK((root.mu == d("t") && root.nu == d("r")));
  Mlts m = build_early(fig1.model);
  WeakAnalyzer an(m, ne.bounds);
  const auto& cs = an.challenges(root.side == "lhs" ? root.mu : root.nu);
  CHECK(std::find(cs.begin(), cs.end(), root.challenge) != cs.end());
}

TEST_CASE("identity pairs are equivalent under every relation") {
  const auto fig3 = corpus()[2];
  Distribution mixed;
  mixed.add(StateId::base("t3"), Rational(1, 3));
  mixed.add(StateId::base("t4"), Rational(2, 3));
  for (RelationKind rel : {RelationKind::Bisim, RelationKind::Sim,
                           RelationKind::Kernel, RelationKind::Ehz,
                           RelationKind::Dh}) {
    CHECK(outcome_of(fig3.model, SemanticsKind::Early, rel, mixed, mixed) ==
          Outcome::Equivalent);
  }
}

TEST_CASE("bisimulation verdicts are symmetric and transitive on samples") {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 30; ++s) seeds.push_back(s);
  RandomMaConfig cfg;
  cfg.max_states = 4;
  for (auto seed : seeds) {
    MarkovAutomaton ma = gen_random_ma(seed, cfg);
    std::vector<StateId> states(ma.states.begin(), ma.states.end());
    // symmetry on all pairs
    for (const auto& a : states)
      for (const auto& b : states) {
        Outcome ab = outcome_of(ma, SemanticsKind::Early, RelationKind::Bisim,
                                Distribution::dirac(a), Distribution::dirac(b));
        Outcome ba = outcome_of(ma, SemanticsKind::Early, RelationKind::Bisim,
                                Distribution::dirac(b), Distribution::dirac(a));
        CHECK(ab == ba);
      }
    // transitivity of Equivalent
    for (const auto& a : states)
      for (const auto& b : states)
        for (const auto& c : states) {
          if (outcome_of(ma, SemanticsKind::Early, RelationKind::Bisim,
                         Distribution::dirac(a), Distribution::dirac(b)) !=
              Outcome::Equivalent)
            continue;
          if (outcome_of(ma, SemanticsKind::Early, RelationKind::Bisim,
                         Distribution::dirac(b), Distribution::dirac(c)) !=
              Outcome::Equivalent)
            continue;
          CHECK(outcome_of(ma, SemanticsKind::Early, RelationKind::Bisim,
                           Distribution::dirac(a), Distribution::dirac(c)) ==
                Outcome::Equivalent);
        }
  }
}

TEST_CASE("strong challenges suffice: weak challengers agree on samples") {
  // Matching every strong challenge already matches every weak one; the
  // checker with weak challengers enabled must reach the same verdicts.
  RandomMaConfig cfg;
  cfg.max_states = 4;
  cfg.max_branch = 2;
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    MarkovAutomaton ma = gen_random_ma(seed, cfg);
    std::vector<StateId> states(ma.states.begin(), ma.states.end());
    for (const auto& a : states)
      for (const auto& b : states) {
        CheckerOptions strong, weak;
        weak.weak_challenges = true;
        Outcome s = outcome_of(ma, SemanticsKind::Early, RelationKind::Bisim,
                               Distribution::dirac(a), Distribution::dirac(b),
                               strong);
        Outcome w = outcome_of(ma, SemanticsKind::Early, RelationKind::Bisim,
                               Distribution::dirac(a), Distribution::dirac(b),
                               weak);
        INFO("model seed " << seed << ": " << a.display() << " vs "
                           << b.display());
        CHECK(s == w);
      }
  }
}

TEST_CASE("simulation is a preorder and kernel is its symmetrization") {
  const auto sim5 = corpus()[5];
  REQUIRE(sim5.name == "sim_escape");
  // reflexive
  CHECK(outcome_of(sim5.model, SemanticsKind::Early, RelationKind::Sim, d("t"),
                   d("t")) == Outcome::Equivalent);
  // t below s0 but not conversely, so the kernel rejects the pair
  CHECK(outcome_of(sim5.model, SemanticsKind::Early, RelationKind::Sim, d("t"),
                   d("s0")) == Outcome::Equivalent);
  CHECK(outcome_of(sim5.model, SemanticsKind::Early, RelationKind::Sim,
                   d("s0"), d("t")) == Outcome::Distinguished);
  CHECK(outcome_of(sim5.model, SemanticsKind::Early, RelationKind::Kernel,
                   d("t"), d("s0")) == Outcome::Distinguished);
}

TEST_CASE("pair budget is reported as a resource limit") {
  const auto fig1 = corpus()[0];
  CheckerOptions opt;
  opt.pair_budget = 1;
  Verdict v = check_ma(fig1.model, SemanticsKind::Early, RelationKind::Bisim,
                       d("s"), d("t"), opt);
  CHECK(v.outcome == Outcome::ResourceLimit);
}

TEST_CASE("caveat reflects the model class") {
  const auto fig1 = corpus()[0];
  Verdict v = check_ma(fig1.model, SemanticsKind::Early, RelationKind::Bisim,
                       d("s"), d("t"));
  CHECK(v.caveat == "ExactOnCorpusClass");
  // a tau self-loop leaves the exactly-covered class
  auto loop = parse_model(R"(ma loop
states: s, r
init: s
ptrans: r --tau--> r
)");
  Verdict w = check_ma(loop, SemanticsKind::Early, RelationKind::Bisim, d("s"),
                       d("r"));
  CHECK(w.caveat == "BoundedSearch");
}

TEST_CASE("distribution queries work against state queries") {
  const auto fig4 = corpus()[3];
  Distribution mu = parse_dist_literal("{1/2:s1,1/2:s2}");
  Distribution nu = parse_dist_literal("{1/2:s3,1/2:s4}");
  Verdict v = check_ma(fig4.model, SemanticsKind::Early, RelationKind::Bisim,
                       mu, nu);
  REQUIRE(v.outcome == Outcome::Distinguished);
  REQUIRE(v.counterexample.has_value());
  Challenge expected{Action::tau(), Rational(1, 2), d("s1"), true};
  CHECK(v.counterexample->challenge.action == expected.action);
  CHECK(v.counterexample->challenge.rho == expected.rho);
  CHECK(v.counterexample->challenge.result == expected.result);
}

TEST_CASE("queries outside the base states are rejected") {
  const auto fig1 = corpus()[0];
  CHECK_THROWS_AS(check_ma(fig1.model, SemanticsKind::Early,
                           RelationKind::Bisim, d("nope"), d("t")),
                  std::exception);
}

TEST_CASE("divergence-sensitive containment on the corpus") {
  for (const auto& e : corpus()) {
    std::vector<StateId> states(e.model.states.begin(), e.model.states.end());
    for (const auto& a : states)
      for (const auto& b : states) {
        CheckerOptions plain, divs;
        divs.divergence_sensitive = true;
        if (outcome_of(e.model, SemanticsKind::Early, RelationKind::Bisim,
                       Distribution::dirac(a), Distribution::dirac(b), divs) ==
            Outcome::Equivalent) {
          CHECK(outcome_of(e.model, SemanticsKind::Early, RelationKind::Bisim,
                           Distribution::dirac(a), Distribution::dirac(b),
                           plain) == Outcome::Equivalent);
        }
      }
  }
}
