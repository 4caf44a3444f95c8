#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "acclab/protocol.hpp"

using namespace acclab;

namespace {

std::string fixture_path(const std::string& name) {
  return std::string(ACCLAB_SOURCE_DIR) + "/fixtures/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProtocolSpec load_fixture(const std::string& name) {
  return parse_protocol(slurp(fixture_path(name)), name);
}

EnumerationBounds bounds_of(std::size_t steps, std::vector<Term> pool) {
  EnumerationBounds b;
  b.max_steps = steps;
  b.pool = std::move(pool);
  return b;
}

}  // namespace

TEST_CASE("a single unconditional rule yields its instances as traces") {
  ProtocolSpec p = parse_protocol("rule R: [] --[ A($x) ]-> []");
  auto traces = enumerate_traces(p, bounds_of(1, {Term::pub("P1")}));
  REQUIRE(traces.size() == 2);
  CHECK(traces[0] == Trace{});
  CHECK(traces[1] == make_trace({{Fact{"A", {Term::pub("P1")}}}}));

  auto traces2 =
      enumerate_traces(p, bounds_of(1, {Term::pub("P1"), Term::pub("P2")}));
  CHECK(traces2.size() == 3);
}

TEST_CASE("premises are consumed linearly and fresh names are generated") {
  ProtocolSpec p = parse_protocol(
      "rule Mint: [] --[]-> [ Token(~t) ]\n"
      "rule Spend: [ Token(t) ] --[ Spent(t) ]-> []");
  auto traces = enumerate_traces(p, bounds_of(2, {Term::pub("P1")}));
  // [], and the single mint+spend trace; minting alone records no action
  REQUIRE(traces.size() == 2);
  CHECK(traces[1] ==
        make_trace({{Fact{"Spent", {Term::fresh("n1")}}}}));
  // the token is linear: spending twice needs two mints
  auto deeper = enumerate_traces(p, bounds_of(3, {Term::pub("P1")}));
  bool double_spend = false;
  for (const Trace& t : deeper)
    if (t.size() == 2) double_spend = true;
  CHECK_FALSE(double_spend);
}

TEST_CASE("rule variables must come from premises, fresh names, or the pool") {
  CHECK_THROWS_AS(parse_protocol("rule R: [] --[ A(x) ]-> []"), SpecError);
  CHECK_THROWS_AS(
      parse_protocol("rule R: [] --[ A($x) ]-> []\nrule R: [] --[]-> []"),
      SpecError);
  CHECK_THROWS_AS(
      parse_protocol("rule R: [] --[ A($x) ]-> []\nrule S: [] --[ A($x, $y) ]-> []"),
      SpecError);
}

TEST_CASE("restrictions filter the enumerated universe") {
  ProtocolSpec p = parse_protocol(
      "rule Pair: [] --[ P($x, $y) ]-> []\n"
      "restriction distinct: \"All x y #i. P(x, y) @ #i ==> not (x = y)\"");
  auto traces =
      enumerate_traces(p, bounds_of(1, {Term::pub("A"), Term::pub("B")}));
  // empty, (A,B), (B,A); the diagonal instances are filtered out
  CHECK(traces.size() == 3);
  for (const Trace& t : traces)
    for (const TraceStep& step : t.steps)
      for (const Fact& f : step) CHECK_FALSE(f.args[0] == f.args[1]);
}

TEST_CASE("db fixture enumerates and contains the example traces") {
  ProtocolSpec p = load_fixture("db.msr");
  auto pool3 = bounds_of(2, default_pool(3));
  auto traces = enumerate_traces(p, pool3);
  CHECK(traces.size() > 10);

  // every prefix of every trace is in the set
  std::set<Trace> set(traces.begin(), traces.end());
  for (const Trace& t : traces)
    for (std::size_t k = 0; k < t.size(); ++k) {
      Trace prefix;
      prefix.steps.assign(t.steps.begin(), t.steps.begin() + k);
      CHECK(set.count(canonicalize_fresh(prefix)));
    }

  // monotonicity in the bound
  auto traces3 = enumerate_traces(p, bounds_of(3, default_pool(3)));
  std::set<Trace> set3(traces3.begin(), traces3.end());
  for (const Trace& t : traces) CHECK(set3.count(t));

  // determinism
  CHECK(traces == enumerate_traces(p, pool3));
}

TEST_CASE("the five-leak example trace is reachable in the db fixture") {
  ProtocolSpec p = load_fixture("db.msr");
  std::vector<Term> pool{Term::pub("M1"), Term::pub("M2"), Term::pub("E1"),
                         Term::pub("E2"), Term::pub("E3")};
  auto lm = [](const char* m, const char* d) {
    std::vector<Fact> fs;
    fs.push_back(Fact{"Corrupted", {Term::pub(m)}});
    fs.push_back(Fact{"LeakManager", {Term::pub(m), Term::fresh(d)}});
    fs.push_back(Fact{
        "AccessSig",
        {Term::app("sig", {Term::fresh(d), Term::app("sk", {Term::pub(m)})})}});
    return fs;
  };
  auto le = [](const char* a, const char* b, const char* d) {
    std::vector<Fact> fs;
    fs.push_back(Fact{"Corrupted", {Term::pub(a)}});
    fs.push_back(Fact{"Corrupted", {Term::pub(b)}});
    fs.push_back(
        Fact{"LeakEmployees", {Term::pub(a), Term::pub(b), Term::fresh(d)}});
    return fs;
  };
  Trace five = make_trace({lm("M1", "d1"), lm("M2", "d2"),
                           le("E1", "E2", "d3"), le("E2", "E3", "d4"),
                           le("E1", "E3", "d5")});
  CHECK(reachable(p, bounds_of(5, pool), five));

  // a manager appearing in an employee pair is excluded by the role
  // restriction
  Trace bad = make_trace({lm("M1", "d1"), le("M1", "E1", "d2")});
  CHECK_FALSE(reachable(p, bounds_of(5, pool), bad));
}

TEST_CASE("corrupted parties of a trace") {
  CHECK(corrupted(Trace{}).empty());
  Trace t = make_trace({{Fact{"Corrupted", {Term::pub("M1")}}},
                        {Fact{"Leak", {Term::pub("M1")}}}});
  CHECK(corrupted(t) == std::set<Term>{Term::pub("M1")});
  Trace t2 = make_trace({{Fact{"Corrupted", {Term::pub("E1")}}},
                         {Fact{"Corrupted", {Term::pub("E2")}}}});
  CHECK(corrupted(t2) == std::set<Term>{Term::pub("E1"), Term::pub("E2")});
}

TEST_CASE("rename_parties is homomorphic and validates bijectivity") {
  Trace t = make_trace(
      {{Fact{"Corrupted", {Term::pub("P1")}},
        Fact{"Sig", {Term::app("sk", {Term::pub("P1")})}}}});
  CHECK(rename_parties(t, {}) == t);
  PartyRenaming swap{{Term::pub("P1"), Term::pub("P2")},
                     {Term::pub("P2"), Term::pub("P1")}};
  Trace swapped = rename_parties(t, swap);
  CHECK(swapped ==
        make_trace({{Fact{"Corrupted", {Term::pub("P2")}},
                     Fact{"Sig", {Term::app("sk", {Term::pub("P2")})}}}}));
  CHECK(rename_parties(swapped, swap) == t);
  PartyRenaming squash{{Term::pub("P1"), Term::pub("X")},
                       {Term::pub("P2"), Term::pub("X")}};
  CHECK_THROWS_AS(rename_parties(t, squash), Error);
}

TEST_CASE("the enumerated db universe is closed under pool bijections") {
  ProtocolSpec p = load_fixture("db.msr");
  REQUIRE(check_br_syntactic(p).ok);
  std::vector<Term> pool = default_pool(3);
  auto traces = enumerate_traces(p, bounds_of(3, pool));
  std::set<Trace> set(traces.begin(), traces.end());
  std::vector<std::size_t> perm{0, 1, 2};
  do {
    PartyRenaming f;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!(pool[i] == pool[perm[i]])) f[pool[i]] = pool[perm[i]];
    for (const Trace& t : traces)
      CHECK(set.count(canonicalize_fresh(rename_parties(t, f))));
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("literal public names break the bijective-renaming check") {
  ProtocolSpec p = load_fixture("mixvote_fixed_server.msr");
  BrReport r = check_br_syntactic(p);
  CHECK_FALSE(r.ok);
  REQUIRE_FALSE(r.findings.empty());
  bool cites_rule = false;
  for (const BrFinding& f : r.findings)
    if (f.rule == "RecordBallot" &&
        f.message.find("'S'") != std::string::npos)
      cites_rule = true;
  CHECK(cites_rule);
}

TEST_CASE("non-variable Corrupted arguments break the renaming check") {
  ProtocolSpec p = parse_protocol(
      "rule R: [] --[ Corrupted(<$sid, $m>) ]-> []\n"
      "rule S: [] --[ Other($x) ]-> []");
  BrReport r = check_br_syntactic(p);
  CHECK_FALSE(r.ok);
  // the rename closure indeed fails: Corrupted carries a composite term
  bool mentions = false;
  for (const BrFinding& f : r.findings)
    if (f.message.find("Corrupted") != std::string::npos) mentions = true;
  CHECK(mentions);
}

TEST_CASE("all-variable rules pass the renaming check") {
  ProtocolSpec p = parse_protocol("rule R: [] --[ Corrupted($x), A($x) ]-> []");
  CHECK(check_br_syntactic(p).ok);
}

TEST_CASE("enumeration aborts beyond the state cap") {
  ProtocolSpec p = parse_protocol("rule R: [] --[ A($x) ]-> []");
  EnumerationBounds b = bounds_of(6, default_pool(3));
  b.state_cap = 50;
  CHECK_THROWS_AS(enumerate_traces(p, b), StateCapError);
}

TEST_CASE("bounds are validated") {
  ProtocolSpec p = parse_protocol("rule R: [] --[ A($x) ]-> []");
  EnumerationBounds zero;
  zero.max_steps = 0;
  zero.pool = default_pool(1);
  CHECK_THROWS_AS(enumerate_traces(p, zero), SpecError);
  EnumerationBounds no_pool;
  no_pool.max_steps = 1;
  CHECK_THROWS_AS(enumerate_traces(p, no_pool), SpecError);
}

TEST_CASE("protocol parse errors carry positions") {
  try {
    parse_protocol("rule Broken: [ --[]-> []", "bad.msr");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.file_name == "bad.msr");
    CHECK(e.line == 1);
  }
}

TEST_CASE("private function symbols are parsed and recorded") {
  ProtocolSpec p = parse_protocol(
      "functions: sk/1 [private], pk/1\n"
      "rule R: [] --[ Key(pk(sk($x))) ]-> []");
  REQUIRE(p.signature.find("sk"));
  CHECK(p.signature.find("sk")->is_private);
  REQUIRE(p.signature.find("pk"));
  CHECK_FALSE(p.signature.find("pk")->is_private);
}
