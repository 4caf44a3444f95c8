#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "acclab/accountability.hpp"

namespace acclab {

// ---------------------------------------------------------------------------
// Condition reports
// ---------------------------------------------------------------------------

enum class CondStatus { Pass, Fail, Skipped };

inline const char* cond_status_name(CondStatus s) {
  switch (s) {
    case CondStatus::Pass: return "pass";
    case CondStatus::Fail: return "fail";
    case CondStatus::Skipped: return "skipped";
  }
  return "?";
}

struct ConditionEntry {
  std::string name;    // suff, verif_empty, verif_nonempty, min, uniq, inj,
                       // single, repp, br, or an axiom name
  std::string test;    // case-test name, empty for global conditions
  std::string family;  // "axiom" | "trace-property" | "syntactic"
  std::string mode;    // "exists" | "forall" | ""
  CondStatus status = CondStatus::Pass;
  std::vector<std::string> witnesses;
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionEntry> entries;

  const ConditionEntry* find(const std::string& name,
                             const std::string& test = "") const {
    for (const ConditionEntry& e : entries)
      if (e.name == name && (test.empty() || e.test == test)) return &e;
    return nullptr;
  }

  bool all_pass(const std::string& name) const {
    bool seen = false;
    for (const ConditionEntry& e : entries)
      if (e.name == name) {
        seen = true;
        if (e.status != CondStatus::Pass) return false;
      }
    return seen;
  }

  void append(const ConditionReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
  }
};

// ---------------------------------------------------------------------------
// Verdict-based axioms, evaluated by brute force over the universe
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::set<Term>> subsets_of(const std::set<Term>& s) {
  std::vector<Term> items(s.begin(), s.end());
  std::vector<std::set<Term>> out;
  out.reserve(std::size_t{1} << items.size());
  for (std::size_t mask = 0; mask < (std::size_t{1} << items.size());
       ++mask) {
    std::set<Term> sub;
    for (std::size_t i = 0; i < items.size(); ++i)
      if (mask & (std::size_t{1} << i)) sub.insert(items[i]);
    out.push_back(std::move(sub));
  }
  return out;
}

}  // namespace detail

// The five verdict-based conditions. Completeness quantifies candidate sets
// S over the subsets of cor(t), which its own conjunct S <= cor(t) makes
// exhaustive.
inline ConditionReport check_axioms(const Universe& u,
                                    const RelationMatrix& rel) {
  ConditionReport report;
  auto add = [&](const std::string& name, bool pass,
                 const std::string& witness) {
    ConditionEntry e;
    e.name = name;
    e.family = "axiom";
    e.status = pass ? CondStatus::Pass : CondStatus::Fail;
    if (!pass) e.witnesses.push_back(witness);
    report.entries.push_back(std::move(e));
  };

  // Traces with a singleton verdict {S}, keyed by S (as party ids), with the
  // ones corrupting no party outside S marked; used by Suff and Comp.
  std::map<std::vector<int>, std::vector<std::size_t>> singleton_vf;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u.verdict(i).size() != 1) continue;
    std::vector<int> key = u.party_ids(*u.verdict(i).begin());
    if (!Universe::subset_ids(u.cor_ids(i), key)) continue;
    singleton_vf[std::move(key)].push_back(i);
  }
  auto witness_exists = [&](std::size_t t, const std::vector<int>& s_ids) {
    auto it = singleton_vf.find(s_ids);
    if (it == singleton_vf.end()) return false;
    for (std::size_t j : it->second)
      if (rel.related(t, j)) return true;
    return false;
  };

  {
    bool pass = true;
    std::string witness;
    for (std::size_t i = 0; pass && i < u.size(); ++i)
      if (u.verdict(i).empty() == u.violates(i)) {
        pass = false;
        witness = u.trace(i).to_string();
      }
    add("verifiability", pass, witness);
  }
  {
    bool pass = true;
    std::string witness;
    for (std::size_t i = 0; pass && i < u.size(); ++i)
      for (const auto& s : u.verdict(i)) {
        for (const auto& s2 : u.verdict(i))
          if (strict_subset(s2, s)) {
            pass = false;
            witness = u.trace(i).to_string();
          }
        if (!pass) break;
      }
    add("minimality", pass, witness);
  }
  {
    bool pass = true;
    std::string witness;
    for (std::size_t i = 0; pass && i < u.size(); ++i)
      for (const auto& s : u.verdict(i))
        if (!witness_exists(i, u.party_ids(s))) {
          pass = false;
          witness = u.trace(i).to_string();
          break;
        }
    add("sufficiency", pass, witness);
  }
  {
    bool pass = true;
    std::string witness;
    for (std::size_t i = 0; pass && i < u.size(); ++i)
      for (const auto& s : u.verdict(i))
        if (!std::includes(u.cor(i).begin(), u.cor(i).end(), s.begin(),
                           s.end())) {
          pass = false;
          witness = u.trace(i).to_string();
          break;
        }
    add("uniqueness", pass, witness);
  }
  {
    bool pass = true;
    std::string witness;
    for (std::size_t i = 0; pass && i < u.size(); ++i) {
      if (!u.violates(i)) continue;
      // Verdict groups as id vectors, for the strict-subset test below.
      std::vector<std::vector<int>> groups;
      for (const auto& s2 : u.verdict(i)) groups.push_back(u.party_ids(s2));
      for (const std::set<Term>& s : detail::subsets_of(u.cor(i))) {
        std::vector<int> s_ids = u.party_ids(s);
        if (!witness_exists(i, s_ids)) continue;
        bool no_smaller = true;
        for (const auto& g : groups)
          if (Universe::strict_subset_ids(g, s_ids)) no_smaller = false;
        if (!no_smaller) continue;
        if (!u.verdict(i).count(s)) {
          pass = false;
          witness = u.trace(i).to_string() + " with S = " +
                    verdict_to_string(Verdict{s});
          break;
        }
      }
    }
    add("completeness", pass, witness);
  }
  return report;
}

inline ConditionReport check_axioms(const Universe& u, const Relation& rel) {
  return check_axioms(u, RelationMatrix(u, rel));
}

// ---------------------------------------------------------------------------
// Trace-property conditions
// ---------------------------------------------------------------------------

struct CompiledCondition {
  std::string name;  // suff, single, inj, verif_empty, verif_nonempty, min,
                     // uniq
  std::string test;  // empty for verif_empty
  bool exists_mode = false;
  FormulaPtr formula;
};

namespace detail {

// One renamed-apart copy of a case test, its existential prefix hoisted so
// it can be merged into an enclosing quantifier block.
struct InlinedTest {
  std::vector<Variable> prefix;    // hoisted quantifier variables
  std::vector<Variable> fv_copy;   // aligned with the test's free variables
  FormulaPtr body;                 // prefix-stripped body
};

inline std::string pick_name(const std::string& base,
                             std::set<std::string>& taken) {
  std::string name = base;
  for (std::size_t i = 1; taken.count(name); ++i)
    name = base + std::to_string(i);
  taken.insert(name);
  return name;
}

inline InlinedTest inline_test(const CaseTest& ct,
                               std::set<std::string>& taken) {
  // Hoist the directly nested existential chain.
  std::vector<Variable> inner;
  FormulaPtr body = ct.body;
  while (body->kind() == Formula::Kind::Exists) {
    inner.insert(inner.end(), body->vars().begin(), body->vars().end());
    body = body->child();
  }
  std::map<Variable, Variable> renaming;
  InlinedTest out;
  for (const Variable& v : ct.free_vars) {
    Variable fresh{pick_name(v.name, taken), v.sort};
    renaming[v] = fresh;
    out.fv_copy.push_back(fresh);
    out.prefix.push_back(fresh);
  }
  for (const Variable& v : inner) {
    Variable fresh{pick_name(v.name, taken), v.sort};
    renaming[v] = fresh;
    out.prefix.push_back(fresh);
  }
  out.body = body->rename_vars(renaming);
  return out;
}

// [w strictly below v]: every w_i equals some v_j and some v_j differs from
// every w_i.
inline FormulaPtr strict_subset_formula(const std::vector<Variable>& w,
                                        const std::vector<Variable>& v) {
  std::vector<FormulaPtr> covers;
  covers.reserve(w.size());
  for (const Variable& wi : w) {
    std::vector<FormulaPtr> any;
    any.reserve(v.size());
    for (const Variable& vj : v)
      any.push_back(Formula::term_eq(Term::var(wi), Term::var(vj)));
    covers.push_back(Formula::disj(any));
  }
  std::vector<FormulaPtr> misses;
  misses.reserve(v.size());
  for (const Variable& vj : v) {
    std::vector<FormulaPtr> none;
    none.reserve(w.size());
    for (const Variable& wi : w)
      none.push_back(
          Formula::lnot(Formula::term_eq(Term::var(vj), Term::var(wi))));
    misses.push_back(Formula::conj(none));
  }
  return Formula::land(Formula::conj(covers), Formula::disj(misses));
}

// not (Ex ...) for a fresh copy of a case test.
inline FormulaPtr no_match(const CaseTest& ct, std::set<std::string>& taken) {
  InlinedTest c = inline_test(ct, taken);
  return Formula::lnot(Formula::exists(c.prefix, c.body));
}

// All w. ct[w] ==> w = v, for a fresh copy of the same case test.
inline FormulaPtr unique_match(const CaseTest& ct, const InlinedTest& a,
                               std::set<std::string>& taken) {
  InlinedTest b = inline_test(ct, taken);
  std::vector<FormulaPtr> eqs;
  eqs.reserve(b.fv_copy.size());
  for (std::size_t l = 0; l < b.fv_copy.size(); ++l)
    eqs.push_back(Formula::term_eq(Term::var(b.fv_copy[l]),
                                   Term::var(a.fv_copy[l])));
  return Formula::forall(b.prefix,
                         Formula::implies(b.body, Formula::conj(eqs)));
}

// All a #k. Corrupted(a)@#k ==> a = v_1 | ... | a = v_n.
inline FormulaPtr corrupted_subset(const std::vector<Variable>& fv,
                                   std::set<std::string>& taken) {
  Variable a{pick_name("a", taken), Sort::Msg};
  Variable k{pick_name("k", taken), Sort::Temp};
  std::vector<FormulaPtr> any;
  any.reserve(fv.size());
  for (const Variable& v : fv)
    any.push_back(Formula::term_eq(Term::var(a), Term::var(v)));
  return Formula::forall(
      {a, k},
      Formula::implies(Formula::action(Fact{kCorruptedFact, {Term::var(a)}},
                                       Term::var(k)),
                       Formula::disj(any)));
}

}  // namespace detail

// Compiles the trace-property verification conditions for a set of case
// tests and a security property: per test, suff / single / inj /
// verif_nonempty / min / uniq, plus one global verif_empty. Free-variable
// vectors of distinct test copies are renamed apart; existential prefixes
// are hoisted into the enclosing block so every emitted formula is guarded
// whenever the inputs are.
inline std::vector<CompiledCondition> compile_conditions(
    const std::vector<CaseTest>& tests, const FormulaPtr& phi) {
  std::vector<CompiledCondition> out;
  if (!phi->free_vars().empty())
    throw SpecError("security property must be closed");

  {
    std::set<std::string> taken;
    std::vector<FormulaPtr> nones;
    nones.reserve(tests.size());
    for (const CaseTest& ct : tests)
      nones.push_back(detail::no_match(ct, taken));
    out.push_back({"verif_empty", "", false,
                   Formula::implies(Formula::conj(nones), phi)});
  }

  for (std::size_t i = 0; i < tests.size(); ++i) {
    const CaseTest& ti = tests[i];

    auto matched_copy = [&](std::set<std::string>& taken) {
      return detail::inline_test(ti, taken);
    };

    // verif_nonempty: every match implies a violation.
    {
      std::set<std::string> taken;
      detail::InlinedTest a = matched_copy(taken);
      out.push_back({"verif_nonempty", ti.name, false,
                     Formula::forall(a.prefix,
                                     Formula::implies(a.body,
                                                      Formula::lnot(phi)))});
    }
    // single: some trace is matched by exactly this test with exactly one
    // assignment.
    {
      std::set<std::string> taken;
      detail::InlinedTest a = matched_copy(taken);
      std::vector<FormulaPtr> conjs{a.body,
                                    detail::unique_match(ti, a, taken)};
      for (std::size_t j = 0; j < tests.size(); ++j)
        if (j != i) conjs.push_back(detail::no_match(tests[j], taken));
      out.push_back({"single", ti.name, true,
                     Formula::exists(a.prefix, Formula::conj(conjs))});
    }
    // suff: additionally, only instantiated parties are corrupted.
    {
      std::set<std::string> taken;
      detail::InlinedTest a = matched_copy(taken);
      std::vector<FormulaPtr> conjs{a.body,
                                    detail::unique_match(ti, a, taken)};
      for (std::size_t j = 0; j < tests.size(); ++j)
        if (j != i) conjs.push_back(detail::no_match(tests[j], taken));
      conjs.push_back(detail::corrupted_subset(a.fv_copy, taken));
      out.push_back({"suff", ti.name, true,
                     Formula::exists(a.prefix, Formula::conj(conjs))});
    }
    // inj: matching assignments are pairwise distinct.
    {
      std::set<std::string> taken;
      detail::InlinedTest a = matched_copy(taken);
      std::vector<FormulaPtr> distinct;
      for (std::size_t l = 0; l < a.fv_copy.size(); ++l)
        for (std::size_t m = l + 1; m < a.fv_copy.size(); ++m)
          distinct.push_back(Formula::lnot(Formula::term_eq(
              Term::var(a.fv_copy[l]), Term::var(a.fv_copy[m]))));
      out.push_back({"inj", ti.name, false,
                     Formula::forall(a.prefix,
                                     Formula::implies(
                                         a.body, Formula::conj(distinct)))});
    }
    // min: no test matches with a strictly smaller party set.
    {
      std::set<std::string> taken;
      detail::InlinedTest a = matched_copy(taken);
      std::vector<FormulaPtr> nones;
      for (const CaseTest& tj : tests) {
        detail::InlinedTest b = detail::inline_test(tj, taken);
        nones.push_back(Formula::lnot(Formula::exists(
            b.prefix,
            Formula::land(b.body, detail::strict_subset_formula(
                                      b.fv_copy, a.fv_copy)))));
      }
      out.push_back({"min", ti.name, false,
                     Formula::forall(a.prefix,
                                     Formula::implies(a.body,
                                                      Formula::conj(nones)))});
    }
    // uniq: every instantiated party has been corrupted.
    {
      std::set<std::string> taken;
      detail::InlinedTest a = matched_copy(taken);
      std::string k = detail::pick_name("k", taken);
      std::vector<FormulaPtr> each;
      each.reserve(a.fv_copy.size());
      for (const Variable& v : a.fv_copy) {
        Variable tp{k, Sort::Temp};
        each.push_back(Formula::exists(
            {tp}, Formula::action(Fact{kCorruptedFact, {Term::var(v)}},
                                  Term::var(tp))));
      }
      out.push_back({"uniq", ti.name, false,
                     Formula::forall(a.prefix,
                                     Formula::implies(a.body,
                                                      Formula::conj(each)))});
    }
  }
  return out;
}

// Evaluates the compiled conditions over the universe with the quantification
// mode each condition carries. Failing universal conditions report a witness
// trace.
inline ConditionReport check_compiled(
    const Universe& u, const std::vector<CompiledCondition>& compiled) {
  ConditionReport report;
  for (const CompiledCondition& c : compiled) {
    ConditionEntry e;
    e.name = c.name;
    e.test = c.test;
    e.family = "trace-property";
    e.mode = c.exists_mode ? "exists" : "forall";
    if (c.exists_mode) {
      e.status = holds_exists(u.traces(), c.formula, u.theory())
                     ? CondStatus::Pass
                     : CondStatus::Fail;
      if (e.status == CondStatus::Fail)
        e.detail = "no trace in the universe satisfies the condition";
    } else {
      e.status = CondStatus::Pass;
      for (const Trace& t : u.traces()) {
        std::vector<Trace> one{t};
        if (!holds_forall(one, c.formula, u.theory())) {
          e.status = CondStatus::Fail;
          e.witnesses.push_back(t.to_string());
          break;
        }
      }
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Replacement property, by brute force
// ---------------------------------------------------------------------------

// For every match (t, rho) of a test and every single-matched trace t' of the
// same test with instantiation rho', some trace t'' must exist whose only
// match is (test, rho) and whose corrupted set is cor(t') renamed by
// rho o rho'^-1. Requires instance injectivity for the inverse to exist.
inline ConditionReport check_repp_bruteforce(const Universe& u,
                                             bool insi_passed) {
  ConditionReport report;
  ConditionEntry e;
  e.name = "repp";
  e.family = "syntactic";
  if (!insi_passed) {
    e.status = CondStatus::Skipped;
    e.detail = "instance injectivity failed, instantiation inverses are "
               "undefined";
    report.entries.push_back(std::move(e));
    return report;
  }
  e.status = CondStatus::Pass;
  // Single-matched traces keyed by their only match.
  std::map<int, std::vector<std::size_t>> singles_by_match;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.ctr_ids(i).size() == 1)
      singles_by_match[u.ctr_ids(i)[0]].push_back(i);
  for (const CaseTest& ct : u.tests()) {
    std::set<Substitution> all_matches;
    std::vector<std::pair<std::size_t, Substitution>> single;
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (const CtrMatch& m : u.ctr(i))
        if (m.test == ct.name) all_matches.insert(m.inst);
      if (u.ctr(i).size() == 1 && u.ctr(i).begin()->test == ct.name)
        single.emplace_back(i, u.ctr(i).begin()->inst);
    }
    for (const Substitution& rho : all_matches) {
      int want_match = u.find_match_id(CtrMatch{ct.name, rho});
      for (const auto& [tp, rho_prime] : single) {
        PartyRenaming g = party_rename(rho, rho_prime);
        std::set<Term> want_cor;
        for (const Term& p : u.cor(tp)) want_cor.insert(apply_renaming(g, p));
        std::vector<int> want_ids = u.party_ids(want_cor);
        bool found = false;
        auto it = singles_by_match.find(want_match);
        if (it != singles_by_match.end())
          for (std::size_t i : it->second)
            if (u.ctr(i).begin()->test == ct.name && u.cor_ids(i) == want_ids) {
              found = true;
              break;
            }
        if (!found) {
          e.status = CondStatus::Fail;
          e.detail = "no trace with only (" + ct.name + ", " +
                     rho.to_string() + ") and corrupted set " +
                     verdict_to_string(Verdict{want_cor});
          e.witnesses.push_back(u.trace(tp).to_string());
          break;
        }
      }
      if (e.status == CondStatus::Fail) break;
    }
    if (e.status == CondStatus::Fail) break;
  }
  report.entries.push_back(std::move(e));
  return report;
}

// Case-test satisfiability on the universe (a well-formedness requirement).
inline std::vector<std::pair<std::string, bool>> check_case_test_satisfiable(
    const Universe& u) {
  std::vector<std::pair<std::string, bool>> out;
  for (const CaseTest& ct : u.tests()) {
    bool sat = false;
    for (std::size_t i = 0; !sat && i < u.size(); ++i)
      for (const CtrMatch& m : u.ctr(i))
        if (m.test == ct.name) {
          sat = true;
          break;
        }
    out.emplace_back(ct.name, sat);
  }
  return out;
}

}  // namespace acclab
