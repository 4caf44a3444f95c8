#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "acclab/accountability.hpp"
#include "acclab/conditions.hpp"
#include "acclab/diagnosis.hpp"
#include "acclab/protocol.hpp"

namespace acclab {

// ---------------------------------------------------------------------------
// Random protocols for property campaigns
// ---------------------------------------------------------------------------
//
// Small random protocols, case-test sets, and security properties for
// validating the soundness/completeness results empirically: the generator
// deliberately produces both well-designed and broken combinations (tests
// matching harmless actions, violations without corruption, overlapping
// tests) so that conditions fail in all the interesting ways.

struct RandomInstance {
  ProtocolSpec protocol;
  std::vector<CaseTest> tests;
  FormulaPtr security_property;
  EnumerationBounds bounds;
};

namespace detail {

inline std::string rule_text(std::mt19937& rng, std::size_t index) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  std::string name = "R" + std::to_string(index);
  switch (pick(7)) {
    case 0:
      return "rule " + name + ": [] --[ Corrupted($p), Vio($p) ]-> []";
    case 1:
      return "rule " + name +
             ": [] --[ Corrupted($p), Corrupted($q), Vio2($p, $q) ]-> []";
    case 2:
      return "rule " + name + ": [] --[ Vio($p) ]-> []";
    case 3:
      return "rule " + name + ": [] --[ Corrupted($p) ]-> [ Key($p) ]";
    case 4:
      return "rule " + name + ": [ Key(p) ] --[ Vio(p) ]-> [ Key(p) ]";
    case 5:
      return "rule " + name + ": [ Key(p), Key(q) ] --[ Vio2(p, q) ]-> []";
    default:
      return "rule " + name + ": [] --[ Corrupted($p), VioD($p, ~d) ]-> []";
  }
}

inline std::string test_text(std::mt19937& rng) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  switch (pick(4)) {
    case 0:
      return "Ex #i. Vio($a) @ #i";
    case 1:
      return "Ex d #i. VioD($a, d) @ #i";
    case 2:
      return "Ex #i. Vio2($a, $b) @ #i";
    default:
      return "Ex #i. Vio($a) @ #i & Corrupted($a) @ #i";
  }
}

inline std::string phi_text(std::mt19937& rng) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  static const char* kAtoms[] = {"Ex x #i. Vio(x) @ #i",
                                 "Ex x y #i. Vio2(x, y) @ #i",
                                 "Ex x d #i. VioD(x, d) @ #i"};
  int mask = 1 + pick(7);
  std::string body;
  for (int b = 0; b < 3; ++b) {
    if (!(mask & (1 << b))) continue;
    if (!body.empty()) body += " | ";
    body += "(" + std::string(kAtoms[b]) + ")";
  }
  return "not (" + body + ")";
}

}  // namespace detail

// Draws one random instance. Retries internally until the universe is
// non-degenerate: every case test must match somewhere (the case-test
// well-formedness requirement) and the universe must stay desk-sized.
inline RandomInstance random_instance(std::mt19937& rng,
                                      std::size_t max_universe = 400) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  for (;;) {
    std::string msr;
    std::size_t n_rules = 2 + pick(3);
    for (std::size_t i = 1; i <= n_rules; ++i)
      msr += detail::rule_text(rng, i) + "\n";

    RandomInstance inst;
    inst.protocol = parse_protocol(msr, "<random>");
    inst.bounds.max_steps = 3 + pick(2);
    inst.bounds.pool = default_pool(2 + pick(2));
    inst.bounds.state_cap = 60000;

    Signature sig = inst.protocol.signature;
    std::size_t n_tests = 1 + pick(2);
    std::set<std::string> bodies;
    for (std::size_t i = 1; i <= n_tests; ++i) {
      std::string body = detail::test_text(rng);
      if (!bodies.insert(body).second) continue;
      inst.tests.push_back(CaseTest::make(
          "t" + std::to_string(inst.tests.size() + 1),
          parse_formula(body, sig, true), rule_roots(inst.protocol.theory)));
    }
    inst.security_property = parse_formula(detail::phi_text(rng), sig, true);

    std::vector<Trace> traces;
    try {
      traces = enumerate_traces(inst.protocol, inst.bounds);
    } catch (const StateCapError&) {
      continue;
    }
    if (traces.size() < 2 || traces.size() > max_universe) continue;

    Universe u(traces, inst.tests, inst.security_property,
               inst.protocol.theory);
    bool all_sat = true;
    for (const auto& [name, sat] : check_case_test_satisfiable(u))
      if (!sat) all_sat = false;
    if (!all_sat) continue;
    return inst;
  }
}

// ---------------------------------------------------------------------------
// Theorem validation campaign
// ---------------------------------------------------------------------------

struct CampaignResult {
  std::size_t protocols = 0;
  std::vector<std::string> discrepancies;

  bool clean() const { return discrepancies.empty(); }
};

// Cross-validates, on `count` random instances, the equivalence of the
// verdict-based conditions with both the accountability definition and the
// compiled trace-property conditions, the implication lemmas between them,
// and the a-posteriori-verdict corollaries. Any mismatch is reported as a
// discrepancy; the expectation is zero.
inline CampaignResult run_campaign(std::size_t count, std::uint32_t seed,
                                   std::size_t max_universe = 400) {
  std::mt19937 rng(seed);
  CampaignResult result;
  for (std::size_t round = 0; round < count; ++round) {
    RandomInstance inst = random_instance(rng, max_universe);
    std::vector<Trace> traces = enumerate_traces(inst.protocol, inst.bounds);
    Universe u(traces, inst.tests, inst.security_property,
               inst.protocol.theory);
    RelationMatrix rel(u, Relation::ctr());
    ++result.protocols;
    std::string tag = "protocol #" + std::to_string(round + 1);
    auto flag = [&](const std::string& msg) {
      result.discrepancies.push_back(tag + ": " + msg);
    };

    ConditionReport axioms = check_axioms(u, rel);
    bool ver = axioms.all_pass("verifiability");
    bool min = axioms.all_pass("minimality");
    bool suff = axioms.all_pass("sufficiency");
    bool uniq = axioms.all_pass("uniqueness");
    bool comp = axioms.all_pass("completeness");
    bool vc = ver && min && suff && uniq && comp;

    AccountabilityResult acc = check_accountability(u, rel);
    if (vc != acc.holds)
      flag("[iff] axioms " + std::string(vc ? "hold" : "fail") +
           " but accountability " + (acc.holds ? "holds" : "fails"));

    std::vector<CompiledCondition> compiled =
        compile_conditions(inst.tests, inst.security_property);
    for (const CompiledCondition& c : compiled)
      if (!is_guarded(c.formula, rule_roots(inst.protocol.theory)))
        flag("[guard] compiled condition " + c.name + " is not guarded");
    ConditionReport tp = check_compiled(u, compiled);
    bool ver_e = tp.all_pass("verif_empty");
    bool ver_ne = tp.all_pass("verif_nonempty");
    bool min_tp = tp.all_pass("min");
    bool uniq_tp = tp.all_pass("uniq");
    bool suff_tp = tp.all_pass("suff");
    bool single = tp.all_pass("single");
    bool insi = tp.all_pass("inj");
    ConditionReport repp_rep = check_repp_bruteforce(u, insi);
    bool repp = repp_rep.all_pass("repp");

    if (ver != (ver_e && ver_ne))
      flag("[equiv] verifiability axiom disagrees with "
           "verif_empty/verif_nonempty");
    if (min != min_tp) flag("[equiv] minimality axiom disagrees with min");
    if (uniq != uniq_tp) flag("[equiv] uniqueness axiom disagrees with uniq");
    if (suff_tp && uniq_tp && insi && repp && !suff)
      flag("[impl] suff/uniq/inj/repp hold but the sufficiency axiom fails");
    if (suff && single && ver && !suff_tp)
      flag("[impl] sufficiency, single-matched and verifiability hold but "
           "suff fails");
    if (ver_ne && !comp) flag("[impl] verif_nonempty holds but completeness "
                              "fails");

    bool vc_tp = ver_e && ver_ne && min_tp && uniq_tp && suff_tp;
    if (vc_tp && insi && repp && !acc.holds)
      flag("[impl] trace-property conditions hold but accountability fails");
    if (acc.holds && single && !vc_tp)
      flag("[impl] accountability and single-matched hold but some "
           "trace-property condition fails");

    std::vector<Verdict> apvs;
    apvs.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) apvs.push_back(apv(u, rel, i));

    for (std::size_t i = 0; i < u.size(); ++i) {
      const Verdict& a = apvs[i];
      if (a.empty() != !u.violates(i))
        flag("[apv] apv emptiness disagrees with the security property on "
             "trace " + std::to_string(i));
      for (const auto& s : a)
        for (const auto& s2 : a)
          if (strict_subset(s2, s))
            flag("[apv] apv contains a strict subset pair on trace " +
                 std::to_string(i));
    }
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (std::includes(u.ctr(i).begin(), u.ctr(i).end(),
                          u.ctr(j).begin(), u.ctr(j).end())) {
          if (!std::includes(u.verdict(i).begin(), u.verdict(i).end(),
                             u.verdict(j).begin(), u.verdict(j).end()))
            flag("[apv] ctr containment without verdict containment");
        }
        if (rel.related(i, j)) {
          for (const auto& sp : apvs[j]) {
            bool ok = apvs[i].empty();
            for (const auto& s : apvs[i])
              if (std::includes(sp.begin(), sp.end(), s.begin(), s.end()))
                ok = true;
            if (!ok) flag("[apv] related pair violates the apv subset lemma");
          }
        }
      }
  }
  return result;
}

}  // namespace acclab
