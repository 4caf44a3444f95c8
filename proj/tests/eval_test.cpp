#include <catch2/catch_amalgamated.hpp>

#include "acclab/accountability.hpp"
#include "acclab/eval.hpp"
#include "acclab/parser.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

using namespace acclab;

namespace {

FormulaPtr parse(const std::string& text) {
  Signature sig;
  return parse_formula(text, sig, /*lenient_functions=*/true);
}

// The multi-session database trace: two managers leak, and every pair of
// three employees leaks.
Trace db_trace() {
  auto lm = [](const char* m, const char* d) {
    return Fact{"LeakManager", {Term::pub(m), Term::fresh(d)}};
  };
  auto le = [](const char* a, const char* b, const char* d) {
    return Fact{"LeakEmployees", {Term::pub(a), Term::pub(b), Term::fresh(d)}};
  };
  return make_trace({{lm("M1", "d1")},
                     {lm("M2", "d2")},
                     {le("E1", "E2", "d3")},
                     {le("E2", "E3", "d4")},
                     {le("E1", "E3", "d5")}});
}

}  // namespace

TEST_CASE("actions are satisfied by matching trace facts") {
  RewriteTheory th;
  Trace t = make_trace(
      {{Fact{"LeakManager", {Term::pub("M1"), Term::fresh("d")}}}});
  CHECK(evaluate(t, {}, parse("Ex data #i. LeakManager('M1', data) @ #i"), th));
  CHECK_FALSE(
      evaluate(t, {}, parse("Ex data #i. LeakManager('M2', data) @ #i"), th));
  CHECK_FALSE(evaluate(t, {}, Formula::falsum(), th));
  CHECK_FALSE(evaluate(Trace{}, {},
                       parse("Ex data #i. LeakManager('M1', data) @ #i"), th));
}

TEST_CASE("equalities are decided modulo the rewrite theory") {
  RewriteTheory th;
  Trace t;
  CHECK(evaluate(t, {}, parse("fst(<'a', 'b'>) = 'a'"), th));
  CHECK_FALSE(evaluate(t, {}, parse("'a' = 'b'"), th));
}

TEST_CASE("unguarded quantifiers are refused with the variable named") {
  RewriteTheory th;
  Trace t = make_trace({{Fact{"A", {Term::pub("a")}}}});
  try {
    evaluate(t, {}, parse("Ex x. x = x"), th);
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("x") != std::string::npos);
  }
  // negative occurrence cannot generate candidates either
  CHECK_THROWS_AS(evaluate(t, {}, parse("Ex x #i. not (A(x) @ #i)"), th),
                  EvalError);
}

TEST_CASE("free variables must be covered by the valuation") {
  RewriteTheory th;
  Trace t;
  CHECK_THROWS_AS(evaluate(t, {}, parse("x = 'a'"), th), EvalError);
  Valuation v;
  v.bind_msg(Variable{"x", Sort::Msg}, Term::pub("a"));
  CHECK(evaluate(t, v, parse("x = 'a'"), th));
}

TEST_CASE("match_instantiations reproduces the worked example") {
  RewriteTheory th;
  Trace t = db_trace();
  CaseTest t1 = CaseTest::make(
      "t1", parse("Ex data #i. LeakManager($m, data) @ #i"));
  CaseTest t2 = CaseTest::make(
      "t2", parse("Ex data #i. LeakEmployees($ei, $ej, data) @ #i"));

  Variable m{"m", Sort::Pub};
  std::set<Substitution> m1 = match_instantiations(t, t1, th);
  CHECK(m1 == std::set<Substitution>{
                  Substitution::of({{m, Term::pub("M1")}}),
                  Substitution::of({{m, Term::pub("M2")}})});

  Variable ei{"ei", Sort::Pub};
  Variable ej{"ej", Sort::Pub};
  std::set<Substitution> m2 = match_instantiations(t, t2, th);
  CHECK(m2 == std::set<Substitution>{
                  Substitution::of({{ei, Term::pub("E1")}, {ej, Term::pub("E2")}}),
                  Substitution::of({{ei, Term::pub("E2")}, {ej, Term::pub("E3")}}),
                  Substitution::of({{ei, Term::pub("E1")}, {ej, Term::pub("E3")}})});

  Trace none = make_trace({{Fact{"Other", {Term::pub("x")}}}});
  CHECK(match_instantiations(none, t1, th).empty());
}

TEST_CASE("destructuring equalities bind through pairs") {
  RewriteTheory th;
  Trace t = make_trace(
      {{Fact{"B", {pair_term(Term::fresh("sid1"), Term::pub("M1"))}}}});
  FormulaPtr dmn = parse("Ex sid x #i. m = <sid, x> & B(m) @ #i");
  std::set<Substitution> ms =
      enumerate_matches(t, dmn, {Variable{"m", Sort::Msg}}, th);
  REQUIRE(ms.size() == 1);
  CHECK(*ms.begin()->find(Variable{"m", Sort::Msg}) ==
        pair_term(Term::fresh("sid1"), Term::pub("M1")));
  // a non-pair argument does not match the destructuring
  Trace t2 = make_trace({{Fact{"B", {Term::pub("M1")}}}});
  CHECK(enumerate_matches(t2, dmn, {Variable{"m", Sort::Msg}}, th).empty());
}

TEST_CASE("match enumeration agrees with the brute-force oracle") {
  RewriteTheory th;
  testing::Gen g(9001);
  CaseTest tests[] = {
      CaseTest::make("ta", parse("Ex #i. A($a) @ #i")),
      CaseTest::make("tb", parse("Ex y #i. B($a, y) @ #i")),
      CaseTest::make("tc", parse("Ex #i #j. A($a) @ #i & C($a) @ #j")),
  };
  for (int round = 0; round < 150; ++round) {
    Trace t = testing::random_trace(g, th);
    for (const CaseTest& ct : tests) {
      INFO("trace " << t.to_string() << " test " << ct.name);
      CHECK(match_instantiations(t, ct, th) ==
            testing::oracle_matches(t, ct.body, ct.free_vars, th));
    }
  }
}

TEST_CASE("guarded evaluation agrees with the brute-force oracle") {
  RewriteTheory th;
  testing::Gen g(9002);
  int checked = 0;
  for (int round = 0; round < 300; ++round) {
    Trace t = testing::random_trace(g, th);
    FormulaPtr f = testing::random_guarded_formula(g, 1);
    if (!f->free_vars().empty()) continue;
    INFO("trace " << t.to_string() << " formula " << f->to_string());
    CHECK(evaluate(t, {}, f, th) == testing::oracle_evaluate(t, {}, f, th));
    ++checked;
  }
  CHECK(checked > 200);
}

TEST_CASE("negation coherence") {
  RewriteTheory th;
  testing::Gen g(9003);
  for (int round = 0; round < 100; ++round) {
    Trace t = testing::random_trace(g, th);
    FormulaPtr f = testing::random_guarded_formula(g, 1);
    if (!f->free_vars().empty()) continue;
    CHECK(evaluate(t, {}, Formula::lnot(f), th) == !evaluate(t, {}, f, th));
  }
}

TEST_CASE("holds_forall and holds_exists are dual") {
  RewriteTheory th;
  testing::Gen g(9004);
  for (int round = 0; round < 50; ++round) {
    std::vector<Trace> universe;
    for (int i = 0; i < 4; ++i) universe.push_back(testing::random_trace(g, th));
    FormulaPtr f = testing::random_guarded_formula(g, 1);
    INFO(f->to_string());
    CHECK(holds_forall(universe, f, th) ==
          !holds_exists(universe, Formula::lnot(f), th));
  }
}

TEST_CASE("tautologies with unmatchable free variables hold vacuously") {
  RewriteTheory th;
  std::vector<Trace> universe{db_trace()};
  FormulaPtr taut = parse("x = x");
  CHECK(holds_forall(universe, taut, th));
  CHECK_FALSE(holds_exists(universe, Formula::lnot(taut), th));
}

TEST_CASE("validity of closed formulas over a universe") {
  RewriteTheory th;
  std::vector<Trace> universe{
      db_trace(),
      make_trace({{Fact{"LeakManager", {Term::pub("M1"), Term::fresh("d")}}}}),
      Trace{}};
  // every manager leak is eventually a leak of someone
  FormulaPtr f = parse(
      "All m d #i. LeakManager(m, d) @ #i ==> (Ex who d2 #j. "
      "LeakManager(who, d2) @ #j)");
  CHECK(holds_forall(universe, f, th));
  FormulaPtr g = parse("Ex d #i. LeakManager('M2', d) @ #i");
  CHECK(holds_exists(universe, g, th));
  CHECK_FALSE(holds_forall(universe, g, th));
}
