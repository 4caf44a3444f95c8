#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "acclab/accountability.hpp"
#include "acclab/parser.hpp"
#include "acclab/protocol.hpp"

using namespace acclab;

namespace {

FormulaPtr parse(const std::string& text) {
  Signature sig;
  return parse_formula(text, sig, /*lenient_functions=*/true);
}

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(ACCLAB_SOURCE_DIR) + "/fixtures/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CaseTest test_t1() {
  return CaseTest::make("t1", parse("Ex data #i. LeakManager($m, data) @ #i"));
}
CaseTest test_t2() {
  return CaseTest::make("t2",
                        parse("Ex data #i. LeakEmployees($ei, $ej, data) @ #i"));
}
FormulaPtr db_phi() {
  return parse(
      "not (Ex m ei ej data #i. LeakManager(m, data) @ #i | "
      "LeakEmployees(ei, ej, data) @ #i)");
}

Trace five_leak_trace() {
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

std::set<Term> parties(std::initializer_list<const char*> names) {
  std::set<Term> out;
  for (const char* n : names) out.insert(Term::pub(n));
  return out;
}

// Universe of the db fixture with the single-session pool M, E1, E2.
struct DbUniverse {
  ProtocolSpec protocol;
  std::vector<CaseTest> tests;
  Universe universe;
  RelationMatrix rel;

  static DbUniverse make(std::size_t bound) {
    ProtocolSpec p = parse_protocol(slurp("db.msr"), "db.msr");
    EnumerationBounds b;
    b.max_steps = bound;
    b.pool = {Term::pub("M"), Term::pub("E1"), Term::pub("E2")};
    std::vector<Trace> traces = enumerate_traces(p, b);
    std::vector<CaseTest> tests{test_t1(), test_t2()};
    Universe u(std::move(traces), tests, db_phi(), p.theory);
    RelationMatrix rm(u, Relation::ctr());
    return DbUniverse{std::move(p), std::move(tests), std::move(u),
                      std::move(rm)};
  }
};

}  // namespace

TEST_CASE("verdict_of reproduces the multi-session worked example") {
  RewriteTheory th;
  Trace t = five_leak_trace();
  Verdict expected{parties({"M1"}),
                   parties({"M2"}),
                   parties({"E1", "E2"}),
                   parties({"E2", "E3"}),
                   parties({"E1", "E3"})};
  CHECK(verdict_of(t, {test_t1(), test_t2()}, th) == expected);
  CHECK(verdict_of(Trace{}, {test_t1(), test_t2()}, th).empty());
  Trace single = make_trace(
      {{Fact{"LeakManager", {Term::pub("M1"), Term::fresh("d")}}}});
  CHECK(verdict_of(single, {test_t1(), test_t2()}, th) ==
        Verdict{parties({"M1"})});
}

TEST_CASE("ctr_of reproduces the five pairs of the worked example") {
  RewriteTheory th;
  Trace t = five_leak_trace();
  MatchSet ms = ctr_of(t, {test_t1(), test_t2()}, th);
  Variable m{"m", Sort::Pub}, ei{"ei", Sort::Pub}, ej{"ej", Sort::Pub};
  MatchSet expected{
      {"t1", Substitution::of({{m, Term::pub("M1")}})},
      {"t1", Substitution::of({{m, Term::pub("M2")}})},
      {"t2", Substitution::of({{ei, Term::pub("E1")}, {ej, Term::pub("E2")}})},
      {"t2", Substitution::of({{ei, Term::pub("E2")}, {ej, Term::pub("E3")}})},
      {"t2", Substitution::of({{ei, Term::pub("E1")}, {ej, Term::pub("E3")}})},
  };
  CHECK(ms == expected);
  CHECK(ctr_of(Trace{}, {test_t1(), test_t2()}, th).empty());
}

TEST_CASE("ctr containment implies verdict containment") {
  DbUniverse db = DbUniverse::make(3);
  const Universe& u = db.universe;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (!std::includes(u.ctr(i).begin(), u.ctr(i).end(), u.ctr(j).begin(),
                         u.ctr(j).end()))
        continue;
      CHECK(std::includes(u.verdict(i).begin(), u.verdict(i).end(),
                          u.verdict(j).begin(), u.verdict(j).end()));
    }
}

TEST_CASE("rel_ctr relates traces by match containment") {
  RewriteTheory th;
  std::vector<CaseTest> tests{test_t1(), test_t2()};
  FormulaPtr phi = db_phi();
  Trace multi = make_trace(
      {{Fact{"Corrupted", {Term::pub("M1")}},
        Fact{"LeakManager", {Term::pub("M1"), Term::fresh("d1")}}},
       {Fact{"Corrupted", {Term::pub("E1")}},
        Fact{"Corrupted", {Term::pub("E2")}},
        Fact{"LeakEmployees",
             {Term::pub("E1"), Term::pub("E2"), Term::fresh("d2")}}}});
  Trace single = make_trace(
      {{Fact{"Corrupted", {Term::pub("M1")}},
        Fact{"LeakManager", {Term::pub("M1"), Term::fresh("d1")}}}});
  CHECK(rel_ctr(multi, single, tests, phi, th));
  CHECK_FALSE(rel_ctr(single, multi, tests, phi, th));
  CHECK(rel_ctr(single, single, tests, phi, th));
  CHECK(rel_ctr(Trace{}, Trace{}, tests, phi, th));
  // a counterfactual with an unrelated match is rejected
  Trace other = make_trace(
      {{Fact{"Corrupted", {Term::pub("M2")}},
        Fact{"LeakManager", {Term::pub("M2"), Term::fresh("d1")}}}});
  CHECK_FALSE(rel_ctr(multi, other, tests, phi, th));
}

TEST_CASE("apv reproduces the four single-session verdicts") {
  DbUniverse db = DbUniverse::make(4);
  const Universe& u = db.universe;

  auto manager_step = [] {
    std::vector<Fact> fs;
    fs.push_back(Fact{"Corrupted", {Term::pub("M")}});
    fs.push_back(Fact{"LeakManager", {Term::pub("M"), Term::fresh("n1")}});
    fs.push_back(Fact{
        "AccessSig",
        {Term::app("sig",
                   {Term::fresh("n1"), Term::app("sk", {Term::pub("M")})})}});
    return fs;
  };
  auto employee_step = [](const char* d) {
    std::vector<Fact> fs;
    fs.push_back(Fact{"Corrupted", {Term::pub("E1")}});
    fs.push_back(Fact{"Corrupted", {Term::pub("E2")}});
    fs.push_back(
        Fact{"LeakEmployees", {Term::pub("E1"), Term::pub("E2"), Term::fresh(d)}});
    return fs;
  };

  // no violation, empty verdict
  CHECK(apv(u, db.rel, Trace{}).empty());

  // the manager leaked on its own
  Trace t_m = canonicalize_fresh(make_trace({manager_step()}));
  CHECK(apv(u, db.rel, t_m) == Verdict{parties({"M"})});

  // the employees colluded
  Trace t_e = canonicalize_fresh(make_trace({employee_step("n1")}));
  CHECK(apv(u, db.rel, t_e) == Verdict{parties({"E1", "E2"})});

  // both leaks in one trace
  Trace t_both = canonicalize_fresh(
      make_trace({manager_step(), employee_step("n2")}));
  CHECK(apv(u, db.rel, t_both) ==
        Verdict{parties({"M"}), parties({"E1", "E2"})});
}

TEST_CASE("apv rejects traces outside the universe") {
  DbUniverse db = DbUniverse::make(2);
  Trace alien = make_trace({{Fact{"Other", {Term::pub("X")}}}});
  CHECK_THROWS_AS(apv(db.universe, db.rel, alien), Error);
}

TEST_CASE("apv corollaries hold on the db universe") {
  DbUniverse db = DbUniverse::make(3);
  const Universe& u = db.universe;
  for (std::size_t i = 0; i < u.size(); ++i) {
    Verdict a = apv(u, db.rel, i);
    // accountability implies verifiability
    CHECK(a.empty() == !u.violates(i));
    // no strict subset pair inside one apv
    for (const auto& s : a)
      for (const auto& s2 : a) CHECK_FALSE(strict_subset(s2, s));
  }
  // related pairs: every apv set of the counterfactual contains an apv set
  // of the actual, unless the actual apv is empty
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (!db.rel.related(i, j)) continue;
      Verdict ai = apv(u, db.rel, i);
      Verdict aj = apv(u, db.rel, j);
      for (const auto& sp : aj) {
        bool ok = ai.empty();
        for (const auto& s : ai)
          if (std::includes(sp.begin(), sp.end(), s.begin(), s.end()))
            ok = true;
        CHECK(ok);
      }
    }
}

TEST_CASE("r_ctr satisfies all relation axioms on the db universe") {
  DbUniverse db = DbUniverse::make(3);
  RelationAxiomReport r = check_relation_axioms(db.universe, db.rel);
  for (const RelationAxiomEntry& e : r.entries) {
    INFO(e.name << " " << e.counterexample);
    CHECK(e.pass);
  }
}

TEST_CASE("the identity relation fails relation introduction") {
  RewriteTheory th;
  Trace two = make_trace(
      {{Fact{"Corrupted", {Term::pub("M1")}},
        Fact{"LeakManager", {Term::pub("M1"), Term::fresh("n1")}}},
       {Fact{"Corrupted", {Term::pub("M2")}},
        Fact{"LeakManager", {Term::pub("M2"), Term::fresh("n2")}}}});
  Trace one = make_trace(
      {{Fact{"Corrupted", {Term::pub("M1")}},
        Fact{"LeakManager", {Term::pub("M1"), Term::fresh("n1")}}}});
  Universe u({Trace{}, one, two}, {test_t1()}, db_phi(), th);
  std::set<std::pair<std::size_t, std::size_t>> id_pairs{{0, 0}, {1, 1}, {2, 2}};
  RelationMatrix identity(u, Relation::explicit_pairs(id_pairs));
  RelationAxiomReport r = check_relation_axioms(u, identity);
  for (const RelationAxiomEntry& e : r.entries) {
    if (e.name == "reflexivity" || e.name == "transitivity" ||
        e.name == "corrupted_subset")
      CHECK(e.pass);
    if (e.name == "rel_introduction") CHECK_FALSE(e.pass);
  }
}

TEST_CASE("the empty relation fails reflexivity") {
  RewriteTheory th;
  Universe u({Trace{}}, {test_t1()}, db_phi(), th);
  RelationMatrix empty(u, Relation::explicit_pairs({}));
  RelationAxiomReport r = check_relation_axioms(u, empty);
  bool refl_pass = true;
  for (const RelationAxiomEntry& e : r.entries)
    if (e.name == "reflexivity") refl_pass = e.pass;
  CHECK_FALSE(refl_pass);
}

TEST_CASE("accountability holds on the db universe") {
  DbUniverse db = DbUniverse::make(3);
  AccountabilityResult res = check_accountability(db.universe, db.rel);
  CHECK(res.holds);
}

TEST_CASE("dropping a case test breaks accountability with a witness") {
  ProtocolSpec p = parse_protocol(slurp("db.msr"), "db.msr");
  EnumerationBounds b;
  b.max_steps = 3;
  b.pool = {Term::pub("M"), Term::pub("E1"), Term::pub("E2")};
  Universe u(enumerate_traces(p, b), {test_t1()}, db_phi(), p.theory);
  RelationMatrix rm(u, Relation::ctr());
  AccountabilityResult res = check_accountability(u, rm);
  REQUIRE_FALSE(res.holds);
  REQUIRE(res.witness.has_value());
  // the witness is an employee leak: empty verdict, nonempty apv
  CHECK(res.witness_verdict.empty());
  CHECK_FALSE(res.witness_apv.empty());
  bool employee_leak = false;
  for (const TraceStep& step : u.trace(*res.witness).steps)
    for (const Fact& f : step)
      if (f.symbol == "LeakEmployees") employee_leak = true;
  CHECK(employee_leak);
}

TEST_CASE("case tests require free pub-sorted variables") {
  CHECK_THROWS_AS(CaseTest::make("bad", parse("Ex x #i. A(x) @ #i")),
                  SpecError);
  CHECK_THROWS_AS(CaseTest::make("bad", parse("Ex #i. A(m) @ #i & B(m, m) @ #j")),
                  SpecError);
}
