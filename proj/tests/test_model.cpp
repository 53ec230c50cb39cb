#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "maeq/corpus.hpp"
#include "maeq/parse.hpp"

using namespace maeq;

TEST_CASE("rational parsing and printing") {
  CHECK(*parse_rational("3/6") == Rational(1, 2));
  CHECK(*parse_rational("2") == Rational(2));
  CHECK_FALSE(parse_rational("1/0").has_value());
  CHECK_FALSE(parse_rational("x").has_value());
  CHECK(to_string(Rational(4, 6)) == "2/3");
}

TEST_CASE("distribution arithmetic") {
  Distribution d;
  d.add(StateId::base("a"), Rational(1, 3));
  d.add(StateId::base("b"), Rational(1, 3));
  d.add(StateId::base("a"), Rational(1, 3));
  CHECK(d.mass() == Rational(1));
  CHECK(d.is_full());
  CHECK(d.at(StateId::base("a")) == Rational(2, 3));
  CHECK(d.support().size() == 2);

  SECTION("subtract removes zero entries") {
    d.subtract(StateId::base("b"), Rational(1, 3));
    CHECK(d.support().size() == 1);
    CHECK_THROWS(d.subtract(StateId::base("a"), Rational(1)));
  }

  SECTION("normalize rescales to mass one") {
    Distribution half;
    half.add(StateId::base("a"), Rational(1, 4));
    half.add(StateId::base("b"), Rational(1, 4));
    Distribution n = dist_normalize(half);
    CHECK(n.is_full());
    CHECK(n.at(StateId::base("a")) == Rational(1, 2));
  }

  SECTION("dirac") {
    Distribution di = Distribution::dirac(StateId::base("x"));
    CHECK(di.is_full());
    CHECK(di.support().size() == 1);
  }
}

TEST_CASE("distribution literal syntax") {
  Distribution d = parse_dist_literal("{1/2:s1,1/2:s2}");
  CHECK(d.is_full());
  CHECK(d.at(StateId::base("s1")) == Rational(1, 2));
  CHECK(parse_dist_literal("s") == Distribution::dirac(StateId::base("s")));
  CHECK_THROWS_AS(parse_dist_literal("{1/2:s1}"), std::exception);
  CHECK_THROWS_AS(parse_dist_literal("{1:s1} junk"), ParseError);
}

TEST_CASE("model parsing accepts the documented format") {
  auto ma = parse_model(R"(ma demo
# comment line
states: s, t1, t2
init: s
ptrans: s --a--> { 1/2: t1, 1/2: t2 }
ptrans: s --tau--> t1      # Dirac shorthand
mtrans: s --3/2--> t1
)");
  CHECK(ma.name == "demo");
  CHECK(ma.states.size() == 3);
  CHECK(ma.ptrans.size() == 2);
  CHECK(ma.ptrans[1].target == Distribution::dirac(StateId::base("t1")));
  CHECK(ma.mtrans[0].rate == Rational(3, 2));
  CHECK(ma.exit_rate(StateId::base("s")) == Rational(3, 2));
  CHECK_FALSE(ma.is_stable(StateId::base("s")));
  CHECK(ma.is_stable(StateId::base("t1")));
}

TEST_CASE("model parsing rejects malformed input") {
  CHECK_THROWS_AS(parse_model("states: s\ninit: s\n"), ParseError);  // no header
  CHECK_THROWS_AS(parse_model("ma x\ninit: s\n"), ParseError);       // no states
  CHECK_THROWS_AS(parse_model("ma x\nstates: s\n"), ParseError);     // no init
  CHECK_THROWS_AS(parse_model("ma x\nstates: s\ninit: t\n"), ParseError);
  CHECK_THROWS_AS(parse_model(R"(ma x
states: s, t
init: s
ptrans: s --a--> { 1/2: t }
)"),
                  ParseError);  // subdistribution
  CHECK_THROWS_AS(parse_model(R"(ma x
states: s
init: s
mtrans: s --0--> s
)"),
                  ParseError);  // nonpositive rate
  CHECK_THROWS_AS(parse_model(R"(ma x
states: s
init: s
ptrans: s --a--> u
)"),
                  ParseError);  // unknown target
}

TEST_CASE("parallel Markovian edges accumulate in RATE") {
  auto ma = parse_model(R"(ma rates
states: s, t
init: s
mtrans: s --1--> t
mtrans: s --1/2--> t
mtrans: s --2--> s
)");
  CHECK(ma.rate_between(StateId::base("s"), StateId::base("t")) ==
        Rational(3, 2));
  CHECK(ma.exit_rate(StateId::base("s")) == Rational(7, 2));
}

TEST_CASE("serialize and reparse is the identity on the corpus") {
  for (const auto& e : corpus()) {
    MarkovAutomaton again = parse_model(serialize_model(e.model));
    CHECK(again.states == e.model.states);
    CHECK(again.init == e.model.init);
    CHECK(std::set<PTransition>(again.ptrans.begin(), again.ptrans.end()) ==
          std::set<PTransition>(e.model.ptrans.begin(), e.model.ptrans.end()));
    CHECK(std::set<MTransition>(again.mtrans.begin(), again.mtrans.end()) ==
          std::set<MTransition>(e.model.mtrans.begin(), e.model.mtrans.end()));
  }
}

static std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST_CASE("bundled model files match the built-in corpus") {
  for (const auto& e : corpus()) {
    MarkovAutomaton from_file =
        parse_model(read_file(std::string(MAEQ_MODELS_DIR) + "/" + e.name + ".ma"));
    CHECK(from_file.states == e.model.states);
    CHECK(std::set<PTransition>(from_file.ptrans.begin(), from_file.ptrans.end()) ==
          std::set<PTransition>(e.model.ptrans.begin(), e.model.ptrans.end()));
    CHECK(std::set<MTransition>(from_file.mtrans.begin(), from_file.mtrans.end()) ==
          std::set<MTransition>(e.model.mtrans.begin(), e.model.mtrans.end()));
  }
}

TEST_CASE("lift_step combines per-state moves mass-weighted") {
  auto ma = parse_model(R"(ma lift
states: s, t, u, v
init: s
ptrans: s --a--> { 1/2: u, 1/2: v }
ptrans: t --a--> u
ptrans: t --a--> v
)");
  Mlts m = build_early(ma);
  Distribution mu;
  mu.add(StateId::base("s"), Rational(1, 2));
  mu.add(StateId::base("t"), Rational(1, 2));
  auto lifted = lift_step(m, mu, Action::visible("a"));
  // two choices at t, one at s
  CHECK(lifted.size() == 2);
  for (const auto& d : lifted) CHECK(d.is_full());
  // s contributes 1/4 to each of u, v; t contributes 1/2 to its choice
  Distribution expect;
  expect.add(StateId::base("u"), Rational(3, 4));
  expect.add(StateId::base("v"), Rational(1, 4));
  CHECK(lifted.count(expect) == 1);
  // no b-transitions anywhere
  CHECK(lift_step(m, mu, Action::visible("b")).empty());
}
