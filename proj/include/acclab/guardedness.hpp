#pragma once

#include <set>
#include <string>
#include <vector>

#include "acclab/formula.hpp"

namespace acclab {

namespace detail {

// Decomposes a formula into top-level conjuncts, pushing negation through
// disjunctions, implications and double negation. Anything else is kept as a
// single opaque conjunct.
inline void flatten_conjuncts(const FormulaPtr& f,
                              std::vector<FormulaPtr>& out) {
  switch (f->kind()) {
    case Formula::Kind::And:
      flatten_conjuncts(f->left(), out);
      flatten_conjuncts(f->right(), out);
      return;
    case Formula::Kind::Not: {
      const FormulaPtr& c = f->child();
      switch (c->kind()) {
        case Formula::Kind::Or:
          flatten_conjuncts(Formula::lnot(c->left()), out);
          flatten_conjuncts(Formula::lnot(c->right()), out);
          return;
        case Formula::Kind::Implies:
          flatten_conjuncts(c->left(), out);
          flatten_conjuncts(Formula::lnot(c->right()), out);
          return;
        case Formula::Kind::Not:
          flatten_conjuncts(c->child(), out);
          return;
        default:
          out.push_back(f);
          return;
      }
    }
    default:
      out.push_back(f);
      return;
  }
}

// Dual decomposition into top-level disjuncts.
inline void flatten_disjuncts(const FormulaPtr& f,
                              std::vector<FormulaPtr>& out) {
  switch (f->kind()) {
    case Formula::Kind::Or:
      flatten_disjuncts(f->left(), out);
      flatten_disjuncts(f->right(), out);
      return;
    case Formula::Kind::Implies:
      flatten_disjuncts(Formula::lnot(f->left()), out);
      flatten_disjuncts(f->right(), out);
      return;
    case Formula::Kind::Not: {
      const FormulaPtr& c = f->child();
      switch (c->kind()) {
        case Formula::Kind::And:
          flatten_disjuncts(Formula::lnot(c->left()), out);
          flatten_disjuncts(Formula::lnot(c->right()), out);
          return;
        case Formula::Kind::Not:
          flatten_disjuncts(c->child(), out);
          return;
        default:
          out.push_back(f);
          return;
      }
    }
    default:
      out.push_back(f);
      return;
  }
}

inline std::vector<FormulaPtr> conjuncts_of(const FormulaPtr& f) {
  std::vector<FormulaPtr> out;
  flatten_conjuncts(f, out);
  return out;
}

inline std::vector<FormulaPtr> disjuncts_of(const FormulaPtr& f) {
  std::vector<FormulaPtr> out;
  flatten_disjuncts(f, out);
  return out;
}

// True iff no subterm is headed by a symbol that roots a rewrite rule, so a
// failed syntactic match on a normal form is a definite mismatch.
inline bool constructor_pure(const Term& t,
                             const std::set<std::string>& rule_roots) {
  if (t.is_app()) {
    if (rule_roots.count(t.name())) return false;
    for (const Term& a : t.args())
      if (!constructor_pure(a, rule_roots)) return false;
  }
  return true;
}

inline const std::set<std::string>& builtin_rule_roots() {
  static const std::set<std::string> kRoots{"fst", "snd"};
  return kRoots;
}

// Variables of `vars` that an evaluator can bind finitely inside one
// disjunct: variables occurring in a positive action atom whose pattern is
// constructor-pure, extended by propagation through (timepoint) equalities
// with constructor-pure pattern sides. Variables that do not occur at all
// count as coverable (the quantifier is vacuous for them).
inline bool block_vars_coverable(const std::vector<Variable>& vars,
                                 const std::vector<FormulaPtr>& conjuncts,
                                 const std::set<Variable>& occurring,
                                 const std::set<std::string>& rule_roots) {
  std::set<Variable> quantified(vars.begin(), vars.end());
  std::set<Variable> covered;
  for (const FormulaPtr& c : conjuncts) {
    if (c->kind() != Formula::Kind::Action) continue;
    bool pure = true;
    for (const Term& a : c->fact().args)
      if (!constructor_pure(a, rule_roots)) pure = false;
    if (!pure) continue;
    for (const Variable& v : c->fact().vars())
      if (quantified.count(v)) covered.insert(v);
    Variable tp = c->timepoint().as_var();
    if (quantified.count(tp)) covered.insert(tp);
  }
  auto is_known = [&](const Variable& v) {
    return !quantified.count(v) || covered.count(v);
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const FormulaPtr& c : conjuncts) {
      if (c->kind() == Formula::Kind::TermEq) {
        for (int dir = 0; dir < 2; ++dir) {
          const Term& known = dir ? c->rhs() : c->lhs();
          const Term& pattern = dir ? c->lhs() : c->rhs();
          if (!constructor_pure(pattern, rule_roots)) continue;
          bool known_ok = true;
          for (const Variable& v : known.vars())
            if (!is_known(v)) known_ok = false;
          if (!known_ok) continue;
          for (const Variable& v : pattern.vars())
            if (quantified.count(v) && !covered.count(v)) {
              covered.insert(v);
              changed = true;
            }
        }
      } else if (c->kind() == Formula::Kind::TimeEq) {
        Variable a = c->lhs().as_var();
        Variable b = c->rhs().as_var();
        if (is_known(a) && quantified.count(b) && !covered.count(b)) {
          covered.insert(b);
          changed = true;
        }
        if (is_known(b) && quantified.count(a) && !covered.count(a)) {
          covered.insert(a);
          changed = true;
        }
      }
    }
  }
  for (const Variable& v : vars) {
    if (covered.count(v)) continue;
    if (occurring.count(v)) return false;
  }
  return true;
}

// Checks one quantifier block in existential view: for every disjunct of the
// body, the quantified variables occurring in it must be coverable from that
// disjunct's positive action atoms.
inline bool block_guarded(const std::vector<Variable>& vars,
                          const FormulaPtr& body,
                          const std::set<std::string>& rule_roots) {
  for (const FormulaPtr& d : disjuncts_of(body)) {
    std::set<Variable> occurring = d->free_vars();
    if (!block_vars_coverable(vars, conjuncts_of(d), occurring, rule_roots))
      return false;
  }
  return true;
}

}  // namespace detail

inline std::set<std::string> rule_roots(const RewriteTheory& th) {
  std::set<std::string> out;
  for (const RewriteRule& r : th.rules()) out.insert(r.lhs.name());
  return out;
}

// A formula is guarded if every quantifier block can be evaluated finitely:
// in existential view, each disjunct of the block body anchors all quantified
// variables in a positive action atom (directly, or derived through
// equalities as in case tests of the form Ex sid x #i. m = <sid, x> & B(m)@i,
// whose guard is surfaced by reordering). Universal blocks are checked
// through their dual. Subformulas are checked recursively.
inline bool is_guarded(
    const FormulaPtr& f,
    const std::set<std::string>& rule_roots = detail::builtin_rule_roots()) {
  switch (f->kind()) {
    case Formula::Kind::Falsum:
    case Formula::Kind::TermEq:
    case Formula::Kind::TimeLess:
    case Formula::Kind::TimeEq:
    case Formula::Kind::Action:
      return true;
    case Formula::Kind::Not:
      return is_guarded(f->child(), rule_roots);
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
    case Formula::Kind::Iff:
      return is_guarded(f->left(), rule_roots) &&
             is_guarded(f->right(), rule_roots);
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      // Merge directly nested like quantifiers into one block.
      std::vector<Variable> vars = f->vars();
      FormulaPtr body = f->child();
      while (body->kind() == f->kind()) {
        std::set<Variable> seen(vars.begin(), vars.end());
        bool clash = false;
        for (const Variable& v : body->vars())
          if (seen.count(v)) clash = true;
        if (clash) break;
        vars.insert(vars.end(), body->vars().begin(), body->vars().end());
        body = body->child();
      }
      FormulaPtr view = f->kind() == Formula::Kind::Exists
                            ? body
                            : Formula::lnot(body);
      if (!detail::block_guarded(vars, view, rule_roots)) return false;
      return is_guarded(body, rule_roots);
    }
  }
  return false;
}

// Whether `Ex fv. body` would be guarded: the form required of case tests
// before conditions can be compiled from them.
inline bool exists_usable(
    const FormulaPtr& body, const std::vector<Variable>& fv,
    const std::set<std::string>& rule_roots = detail::builtin_rule_roots()) {
  return is_guarded(Formula::exists(fv, body), rule_roots);
}

// Brings a case-test body into existentially usable shape. Bodies already in
// that shape are returned unchanged. A guarded universal body is conjoined
// with Guarded-fact constraints over the free party variables, which is
// equivalent on protocols that emit Guarded facts for all parties. Anything
// else is rejected.
inline FormulaPtr guard_transform(
    const FormulaPtr& body, const std::vector<Variable>& free_vars,
    const std::set<std::string>& rule_roots = detail::builtin_rule_roots()) {
  if (exists_usable(body, free_vars, rule_roots)) return body;
  if (!is_guarded(body, rule_roots))
    throw SpecError("case test is not guarded: " + body->to_string());
  std::set<std::string> taken;
  for (const Variable& v : body->free_vars()) taken.insert(v.name);
  std::string k = "k";
  while (taken.count(k)) k += "0";
  Term tp = Term::var(k, Sort::Temp);
  std::vector<FormulaPtr> guards;
  guards.reserve(free_vars.size());
  for (const Variable& v : free_vars)
    guards.push_back(
        Formula::action(Fact{kGuardedFact, {Term::var(v)}}, tp));
  // Ex k. Guarded(v1)@k & ... & original; the quantifier sits at the root so
  // the guard atoms anchor the free variables of the enclosing block.
  FormulaPtr out = Formula::exists(
      {tp.as_var()}, Formula::land(Formula::conj(guards), body));
  if (!exists_usable(out, free_vars, rule_roots))
    throw SpecError("case test cannot be brought into guarded form: " +
                    body->to_string());
  return out;
}

}  // namespace acclab
