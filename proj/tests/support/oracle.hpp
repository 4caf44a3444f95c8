#pragma once

// Brute-force reference evaluator: a direct transcription of the
// satisfaction relation where message quantifiers range over all subterms
// occurring in the trace and temporal quantifiers over all indices. It is
// exact on guarded formulas over small traces and shares no code with the
// guard-driven evaluator it checks.

#include <set>
#include <vector>

#include "acclab/formula.hpp"
#include "acclab/terms.hpp"
#include "acclab/trace.hpp"

namespace acclab::testing {

inline bool oracle_member(const Fact& f, const TraceStep& step,
                          const RewriteTheory& th) {
  for (const Fact& g : step)
    if (th.equal_mod_e(f, g)) return true;
  return false;
}

inline bool oracle_eval(const Trace& t, Valuation v, const FormulaPtr& f,
                        const RewriteTheory& th,
                        const std::vector<Term>& domain) {
  switch (f->kind()) {
    case Formula::Kind::Falsum:
      return false;
    case Formula::Kind::TermEq:
      return th.equal_mod_e(v.as_substitution().apply(f->lhs()),
                            v.as_substitution().apply(f->rhs()));
    case Formula::Kind::TimeLess:
      return v.time.at(f->lhs().as_var()) < v.time.at(f->rhs().as_var());
    case Formula::Kind::TimeEq:
      return v.time.at(f->lhs().as_var()) == v.time.at(f->rhs().as_var());
    case Formula::Kind::Action: {
      std::size_t k = v.time.at(f->timepoint().as_var());
      if (k < 1 || k > t.size()) return false;
      return oracle_member(v.as_substitution().apply(f->fact()), t.at(k), th);
    }
    case Formula::Kind::Not:
      return !oracle_eval(t, v, f->child(), th, domain);
    case Formula::Kind::And:
      return oracle_eval(t, v, f->left(), th, domain) &&
             oracle_eval(t, v, f->right(), th, domain);
    case Formula::Kind::Or:
      return oracle_eval(t, v, f->left(), th, domain) ||
             oracle_eval(t, v, f->right(), th, domain);
    case Formula::Kind::Implies:
      return !oracle_eval(t, v, f->left(), th, domain) ||
             oracle_eval(t, v, f->right(), th, domain);
    case Formula::Kind::Iff:
      return oracle_eval(t, v, f->left(), th, domain) ==
             oracle_eval(t, v, f->right(), th, domain);
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      bool universal = f->kind() == Formula::Kind::Forall;
      // Bind the block variables one by one over the finite domains.
      std::vector<Variable> vars = f->vars();
      std::vector<Valuation> frontier{v};
      for (const Variable& var : vars) {
        std::vector<Valuation> next;
        for (const Valuation& base : frontier) {
          if (var.sort == Sort::Temp) {
            for (std::size_t k = 1; k <= t.size(); ++k) {
              Valuation w = base;
              w.time[var] = k;
              next.push_back(std::move(w));
            }
          } else {
            for (const Term& d : domain) {
              if (!sort_accepts(var.sort, d.sort())) continue;
              Valuation w = base;
              w.msg[var] = d;
              next.push_back(std::move(w));
            }
          }
        }
        frontier = std::move(next);
      }
      for (const Valuation& w : frontier) {
        bool r = oracle_eval(t, w, f->child(), th, domain);
        if (universal && !r) return false;
        if (!universal && r) return true;
      }
      return universal;
    }
  }
  return false;
}

inline std::vector<Term> oracle_domain(const Trace& t,
                                       const RewriteTheory& th) {
  std::set<Term> subs;
  for (const Term& s : trace_subterms(t)) subs.insert(th.normalize(s));
  return std::vector<Term>(subs.begin(), subs.end());
}

inline bool oracle_evaluate(const Trace& t, const Valuation& v,
                            const FormulaPtr& f, const RewriteTheory& th) {
  return oracle_eval(t, v, f, th, oracle_domain(t, th));
}

// All substitutions of `targets` (over the subterm domain) under which the
// formula holds; the reference for match_instantiations.
inline std::set<Substitution> oracle_matches(
    const Trace& t, const FormulaPtr& f, const std::vector<Variable>& targets,
    const RewriteTheory& th) {
  std::vector<Term> domain = oracle_domain(t, th);
  std::set<Substitution> out;
  std::vector<Valuation> frontier{Valuation{}};
  for (const Variable& var : targets) {
    std::vector<Valuation> next;
    for (const Valuation& base : frontier)
      for (const Term& d : domain) {
        if (!sort_accepts(var.sort, d.sort())) continue;
        Valuation w = base;
        w.msg[var] = d;
        next.push_back(std::move(w));
      }
    frontier = std::move(next);
  }
  for (const Valuation& w : frontier)
    if (oracle_eval(t, w, f, th, domain)) {
      Substitution s;
      for (const Variable& var : targets)
        s.bind(var, th.normalize(w.msg.at(var)));
      out.insert(std::move(s));
    }
  return out;
}

}  // namespace acclab::testing
