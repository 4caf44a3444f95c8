#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "acclab/eval.hpp"
#include "acclab/guardedness.hpp"
#include "acclab/trace.hpp"

namespace acclab {

// ---------------------------------------------------------------------------
// Case tests and verdicts
// ---------------------------------------------------------------------------

// A trace formula with at least one free party variable. Each satisfying
// instantiation of the free variables names a group of jointly blamed
// parties.
struct CaseTest {
  std::string name;
  FormulaPtr body;
  std::vector<Variable> free_vars;  // ordered by first occurrence, pub-sorted

  static CaseTest make(std::string name, FormulaPtr formula,
                       const std::set<std::string>& roots =
                           detail::builtin_rule_roots()) {
    CaseTest ct;
    ct.name = std::move(name);
    ct.free_vars = formula->free_vars_ordered();
    if (ct.free_vars.empty())
      throw SpecError("case test '" + ct.name +
                      "' has no free party variables");
    for (const Variable& v : ct.free_vars) {
      if (v.sort == Sort::Temp)
        throw SpecError("case test '" + ct.name +
                        "' has a free temporal variable '#" + v.name + "'");
      if (v.sort != Sort::Pub)
        throw SpecError("case test '" + ct.name + "': free variable '" +
                        v.name + "' must be pub-sorted (write $" + v.name +
                        ")");
    }
    ct.body = guard_transform(formula, ct.free_vars, roots);
    return ct;
  }

  // fv(test) instantiated by a substitution, as a party set.
  std::set<Term> blamed(const Substitution& inst) const {
    std::set<Term> out;
    for (const Variable& v : free_vars) {
      const Term* t = inst.find(v);
      if (!t)
        throw Error("instantiation does not cover '" + v.name + "'");
      out.insert(*t);
    }
    return out;
  }
};

// A verdict: a set of sets of parties, each inner set jointly accountable.
using Verdict = std::set<std::set<Term>>;

inline std::string verdict_to_string(const Verdict& v) {
  std::string out = "<";
  bool first_group = true;
  for (const auto& group : v) {
    if (!first_group) out += ", ";
    first_group = false;
    out += "(";
    bool first = true;
    for (const Term& p : group) {
      if (!first) out += ", ";
      first = false;
      out += p.to_string();
    }
    out += ")";
  }
  return out + ">";
}

// One matching case test with its satisfying instantiation.
struct CtrMatch {
  std::string test;
  Substitution inst;

  friend bool operator<(const CtrMatch& a, const CtrMatch& b) {
    if (a.test != b.test) return a.test < b.test;
    return a.inst < b.inst;
  }
  friend bool operator==(const CtrMatch& a, const CtrMatch& b) {
    return a.test == b.test && a.inst == b.inst;
  }
};

using MatchSet = std::set<CtrMatch>;

// The satisfying instantiations of one case test on one trace, restricted to
// its free variables and canonical modulo E.
inline std::set<Substitution> match_instantiations(const Trace& t,
                                                   const CaseTest& ct,
                                                   const RewriteTheory& th) {
  return enumerate_matches(t, ct.body, ct.free_vars, th);
}

// ctr(t): every (case test, instantiation) pair matching the trace.
inline MatchSet ctr_of(const Trace& t, const std::vector<CaseTest>& tests,
                       const RewriteTheory& th) {
  MatchSet out;
  for (const CaseTest& ct : tests)
    for (const Substitution& inst : match_instantiations(t, ct, th))
      out.insert(CtrMatch{ct.name, inst});
  return out;
}

// The verdict function induced by the case tests: the union of the blamed
// groups over all matches, modulo E.
inline Verdict verdict_of(const Trace& t, const std::vector<CaseTest>& tests,
                          const RewriteTheory& th) {
  Verdict out;
  for (const CaseTest& ct : tests)
    for (const Substitution& inst : match_instantiations(t, ct, th))
      out.insert(ct.blamed(inst));
  return out;
}

// ---------------------------------------------------------------------------
// Universe and counterfactual relations
// ---------------------------------------------------------------------------

// The finite trace set all semantic checks are relative to, with the
// per-trace data they share: ctr, cor, the induced verdict, and violation of
// the security property.
class Universe {
 public:
  Universe(std::vector<Trace> traces, const std::vector<CaseTest>& tests,
           FormulaPtr security_property, const RewriteTheory& theory)
      : traces_(std::move(traces)),
        tests_(tests),
        phi_(std::move(security_property)),
        theory_(theory) {
    for (std::size_t i = 0; i < traces_.size(); ++i) index_[traces_[i]] = i;
    ctr_.reserve(traces_.size());
    cor_.reserve(traces_.size());
    vf_.reserve(traces_.size());
    violates_.reserve(traces_.size());
    std::map<std::string, const CaseTest*> by_name;
    for (const CaseTest& ct : tests_) by_name[ct.name] = &ct;
    for (const Trace& t : traces_) {
      MatchSet ms = ctr_of(t, tests_, theory_);
      Verdict v;
      for (const CtrMatch& m : ms) v.insert(by_name.at(m.test)->blamed(m.inst));
      ctr_.push_back(std::move(ms));
      cor_.push_back(corrupted(t));
      vf_.push_back(std::move(v));
      violates_.push_back(!evaluate(t, Valuation{}, phi_, theory_));
    }
    // Integer ids for matches and parties back the brute-force passes.
    ctr_ids_.resize(traces_.size());
    cor_ids_.resize(traces_.size());
    for (std::size_t i = 0; i < traces_.size(); ++i) {
      for (const CtrMatch& m : ctr_[i]) ctr_ids_[i].push_back(match_id(m));
      for (const Term& pt : cor_[i]) cor_ids_[i].push_back(party_id(pt));
      std::sort(ctr_ids_[i].begin(), ctr_ids_[i].end());
      std::sort(cor_ids_[i].begin(), cor_ids_[i].end());
    }
    for (const Verdict& v : vf_)
      for (const std::set<Term>& group : v)
        for (const Term& pt : group) party_id(pt);
  }

  std::size_t size() const { return traces_.size(); }
  const std::vector<Trace>& traces() const { return traces_; }
  const Trace& trace(std::size_t i) const { return traces_[i]; }
  const std::vector<CaseTest>& tests() const { return tests_; }
  const FormulaPtr& security_property() const { return phi_; }
  const RewriteTheory& theory() const { return theory_; }

  const MatchSet& ctr(std::size_t i) const { return ctr_[i]; }
  const std::set<Term>& cor(std::size_t i) const { return cor_[i]; }
  const Verdict& verdict(std::size_t i) const { return vf_[i]; }
  bool violates(std::size_t i) const { return violates_[i]; }

  std::optional<std::size_t> find(const Trace& t) const {
    auto it = index_.find(t);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool single_matched(std::size_t i) const { return ctr_[i].size() == 1; }
  bool multi_matched(std::size_t i) const { return ctr_[i].size() > 1; }

  // Interned views used by the brute-force passes. Both vectors are sorted.
  const std::vector<int>& ctr_ids(std::size_t i) const { return ctr_ids_[i]; }
  const std::vector<int>& cor_ids(std::size_t i) const { return cor_ids_[i]; }

  int find_match_id(const CtrMatch& m) const {
    auto it = match_ids_.find(m);
    return it == match_ids_.end() ? -1 : it->second;
  }
  int find_party_id(const Term& t) const {
    auto it = party_ids_.find(t);
    return it == party_ids_.end() ? -1 : it->second;
  }
  std::vector<int> party_ids(const std::set<Term>& parties) const {
    std::vector<int> out;
    out.reserve(parties.size());
    for (const Term& p : parties) {
      int id = find_party_id(p);
      if (id < 0) return {-1};  // unknown party: matches no trace
      out.push_back(id);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  static bool subset_ids(const std::vector<int>& a,
                         const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  }
  static bool strict_subset_ids(const std::vector<int>& a,
                                const std::vector<int>& b) {
    return a.size() < b.size() && subset_ids(a, b);
  }

 private:
  int match_id(const CtrMatch& m) {
    auto [it, inserted] =
        match_ids_.emplace(m, static_cast<int>(match_ids_.size()));
    return it->second;
  }
  int party_id(const Term& t) {
    auto [it, inserted] =
        party_ids_.emplace(t, static_cast<int>(party_ids_.size()));
    return it->second;
  }

  std::vector<Trace> traces_;
  std::vector<CaseTest> tests_;
  FormulaPtr phi_;
  RewriteTheory theory_;
  std::map<Trace, std::size_t> index_;
  std::vector<MatchSet> ctr_;
  std::vector<std::set<Term>> cor_;
  std::vector<Verdict> vf_;
  std::vector<bool> violates_;
  std::map<CtrMatch, int> match_ids_;
  std::map<Term, int> party_ids_;
  std::vector<std::vector<int>> ctr_ids_;
  std::vector<std::vector<int>> cor_ids_;
};

// r_ctr: the counterfactual keeps a nonempty subset of the actual matches
// and corrupts no additional party. Completed with identity pairs so that
// reflexivity holds on non-violating traces as well.
inline bool rel_ctr(const Trace& t, const Trace& t_prime,
                    const std::vector<CaseTest>& tests,
                    const FormulaPtr& /*security_property*/,
                    const RewriteTheory& th) {
  if (t == t_prime) return true;
  MatchSet a = ctr_of(t, tests, th);
  MatchSet b = ctr_of(t_prime, tests, th);
  if (b.empty()) return false;
  if (!std::includes(a.begin(), a.end(), b.begin(), b.end())) return false;
  std::set<Term> ca = corrupted(t);
  std::set<Term> cb = corrupted(t_prime);
  return std::includes(ca.begin(), ca.end(), cb.begin(), cb.end());
}

// A counterfactual relation over a fixed universe: either the built-in
// r_ctr or an explicit finite set of trace pairs.
class Relation {
 public:
  static Relation ctr() { return Relation(true, {}); }
  static Relation explicit_pairs(std::set<std::pair<std::size_t, std::size_t>> p) {
    return Relation(false, std::move(p));
  }

  bool is_ctr() const { return builtin_ctr_; }

  bool related(const Universe& u, std::size_t i, std::size_t j) const {
    if (!builtin_ctr_) return pairs_.count({i, j}) != 0;
    if (i == j) return true;
    const MatchSet& a = u.ctr(i);
    const MatchSet& b = u.ctr(j);
    if (b.empty()) return false;
    if (!std::includes(a.begin(), a.end(), b.begin(), b.end())) return false;
    const std::set<Term>& ca = u.cor(i);
    const std::set<Term>& cb = u.cor(j);
    return std::includes(ca.begin(), ca.end(), cb.begin(), cb.end());
  }

 private:
  Relation(bool b, std::set<std::pair<std::size_t, std::size_t>> p)
      : builtin_ctr_(b), pairs_(std::move(p)) {}
  bool builtin_ctr_;
  std::set<std::pair<std::size_t, std::size_t>> pairs_;
};

// Materialization of a relation over one universe as a bit matrix; every
// brute-force pass queries this instead of recomputing subset checks.
class RelationMatrix {
 public:
  RelationMatrix(const Universe& u, const Relation& rel)
      : n_(u.size()), words_((n_ + 63) / 64), bits_(n_ * words_, 0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        bool r;
        if (rel.is_ctr()) {
          r = i == j ||
              (!u.ctr_ids(j).empty() &&
               Universe::subset_ids(u.ctr_ids(j), u.ctr_ids(i)) &&
               Universe::subset_ids(u.cor_ids(j), u.cor_ids(i)));
        } else {
          r = rel.related(u, i, j);
        }
        if (r) set(i, j);
      }
  }

  std::size_t size() const { return n_; }

  bool related(std::size_t i, std::size_t j) const {
    return bits_[i * words_ + j / 64] >> (j % 64) & 1;
  }

  // Is row i a superset of row j? Holds for all related (i, j) iff the
  // relation is transitive.
  bool row_superset(std::size_t i, std::size_t j) const {
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t a = bits_[i * words_ + w];
      std::uint64_t b = bits_[j * words_ + w];
      if ((a & b) != b) return false;
    }
    return true;
  }

 private:
  void set(std::size_t i, std::size_t j) {
    bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64);
  }
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

// ---------------------------------------------------------------------------
// The a posteriori verdict
// ---------------------------------------------------------------------------

inline bool strict_subset(const std::set<Term>& a, const std::set<Term>& b) {
  return a.size() < b.size() &&
         std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// All minimal corrupted-party sets sufficient to cause the observed
// violation, relative to the finite universe.
inline Verdict apv(const Universe& u, const RelationMatrix& rel,
                   std::size_t t) {
  Verdict out;
  if (!u.violates(t)) return out;
  // Distinct corrupted sets of related violating traces, then the minimal
  // ones among them.
  std::map<std::vector<int>, std::size_t> candidates;
  for (std::size_t tp = 0; tp < u.size(); ++tp)
    if (rel.related(t, tp) && u.violates(tp))
      candidates.emplace(u.cor_ids(tp), tp);
  for (const auto& [ids, witness] : candidates) {
    bool minimal = true;
    for (const auto& [other, w2] : candidates)
      if (Universe::strict_subset_ids(other, ids)) minimal = false;
    if (minimal) out.insert(u.cor(witness));
  }
  return out;
}

inline Verdict apv(const Universe& u, const Relation& rel, std::size_t t) {
  return apv(u, RelationMatrix(u, rel), t);
}

inline Verdict apv(const Universe& u, const RelationMatrix& rel,
                   const Trace& t) {
  std::optional<std::size_t> idx = u.find(t);
  if (!idx)
    throw Error("apv: trace is not part of the universe: " + t.to_string());
  return apv(u, rel, *idx);
}

// ---------------------------------------------------------------------------
// Relation well-formedness and the direct accountability check
// ---------------------------------------------------------------------------

struct RelationAxiomEntry {
  std::string name;
  bool pass = true;
  std::string counterexample;
};

struct RelationAxiomReport {
  std::vector<RelationAxiomEntry> entries;
  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
};

// Checks reflexivity, transitivity, the corrupted-subset requirement, and
// the introduction/elimination requirements RelI and RelE by brute force
// over the universe.
inline RelationAxiomReport check_relation_axioms(const Universe& u,
                                                 const RelationMatrix& rel) {
  RelationAxiomReport report;
  auto pair_str = [&](std::size_t i, std::size_t j) {
    return "(" + u.trace(i).to_string() + ", " + u.trace(j).to_string() + ")";
  };

  RelationAxiomEntry refl{"reflexivity", true, ""};
  for (std::size_t i = 0; refl.pass && i < u.size(); ++i)
    if (!rel.related(i, i)) {
      refl.pass = false;
      refl.counterexample = u.trace(i).to_string();
    }
  report.entries.push_back(refl);

  // Transitive iff every related (i, j) has row(i) covering row(j).
  RelationAxiomEntry trans{"transitivity", true, ""};
  for (std::size_t i = 0; trans.pass && i < u.size(); ++i)
    for (std::size_t j = 0; trans.pass && j < u.size(); ++j)
      if (rel.related(i, j) && !rel.row_superset(i, j)) {
        trans.pass = false;
        trans.counterexample = pair_str(i, j) + " breaks transitivity";
      }
  report.entries.push_back(trans);

  RelationAxiomEntry sub{"corrupted_subset", true, ""};
  for (std::size_t i = 0; sub.pass && i < u.size(); ++i)
    for (std::size_t j = 0; sub.pass && j < u.size(); ++j)
      if (rel.related(i, j) &&
          !Universe::subset_ids(u.cor_ids(j), u.cor_ids(i))) {
        sub.pass = false;
        sub.counterexample = pair_str(i, j);
      }
  report.entries.push_back(sub);

  // RelI: a trace with exactly the same match, corrupting exactly the blamed
  // parties and no party beyond the actual trace, is a valid counterfactual.
  RelationAxiomEntry intro{"rel_introduction", true, ""};
  {
    std::map<std::string, const CaseTest*> by_name;
    for (const CaseTest& ct : u.tests()) by_name[ct.name] = &ct;
    // Traces whose ctr is one specific match, keyed by that match id.
    std::map<int, std::vector<std::size_t>> singles;
    for (std::size_t j = 0; j < u.size(); ++j)
      if (u.ctr_ids(j).size() == 1)
        singles[u.ctr_ids(j)[0]].push_back(j);
    for (std::size_t i = 0; intro.pass && i < u.size(); ++i) {
      for (const CtrMatch& m : u.ctr(i)) {
        auto it = singles.find(u.find_match_id(m));
        if (it == singles.end()) continue;
        std::vector<int> blamed =
            u.party_ids(by_name.at(m.test)->blamed(m.inst));
        for (std::size_t j : it->second) {
          if (u.cor_ids(j) != blamed) continue;
          if (!Universe::subset_ids(u.cor_ids(j), u.cor_ids(i))) continue;
          if (!rel.related(i, j)) {
            intro.pass = false;
            intro.counterexample = pair_str(i, j);
            break;
          }
        }
        if (!intro.pass) break;
      }
    }
  }
  report.entries.push_back(intro);

  // RelE: a related violating pair never has additional matches on the
  // counterfactual side.
  RelationAxiomEntry elim{"rel_elimination", true, ""};
  for (std::size_t i = 0; elim.pass && i < u.size(); ++i) {
    if (!u.violates(i)) continue;
    for (std::size_t j = 0; elim.pass && j < u.size(); ++j) {
      if (!rel.related(i, j) || !u.violates(j)) continue;
      if (!Universe::subset_ids(u.ctr_ids(j), u.ctr_ids(i))) {
        elim.pass = false;
        elim.counterexample = pair_str(i, j);
      }
    }
  }
  report.entries.push_back(elim);

  return report;
}

struct AccountabilityResult {
  bool holds = true;
  std::optional<std::size_t> witness;
  Verdict witness_verdict;
  Verdict witness_apv;
};

// The definition, checked directly: the induced verdict function coincides
// with the a posteriori verdict on every trace of the universe.
inline AccountabilityResult check_accountability(const Universe& u,
                                                 const RelationMatrix& rel) {
  AccountabilityResult res;
  for (std::size_t i = 0; i < u.size(); ++i) {
    Verdict expected = apv(u, rel, i);
    if (u.verdict(i) != expected) {
      res.holds = false;
      res.witness = i;
      res.witness_verdict = u.verdict(i);
      res.witness_apv = std::move(expected);
      return res;
    }
  }
  return res;
}

inline AccountabilityResult check_accountability(const Universe& u,
                                                 const Relation& rel) {
  return check_accountability(u, RelationMatrix(u, rel));
}

}  // namespace acclab
