#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "acclab/guardedness.hpp"
#include "acclab/trace.hpp"

namespace acclab {

// Finite model checker for trace formulas over one trace. Quantifier blocks
// are evaluated by matching their positive action atoms against the trace
// modulo E and propagating bindings through equalities; this is sound and
// complete for guarded formulas. Quantified variables that cannot be bound
// this way raise EvalError.
class Evaluator {
 public:
  Evaluator(const Trace& trace, const RewriteTheory& theory)
      : t_(trace), th_(theory) {
    for (const RewriteRule& r : theory.rules()) roots_.insert(r.lhs.name());
  }

  bool eval(const Valuation& v, const FormulaPtr& f) const {
    switch (f->kind()) {
      case Formula::Kind::Falsum:
        return false;
      case Formula::Kind::TermEq:
        return th_.equal_mod_e(ground(f->lhs(), v), ground(f->rhs(), v));
      case Formula::Kind::TimeLess:
        return time_at(f->lhs(), v) < time_at(f->rhs(), v);
      case Formula::Kind::TimeEq:
        return time_at(f->lhs(), v) == time_at(f->rhs(), v);
      case Formula::Kind::Action: {
        std::size_t k = time_at(f->timepoint(), v);
        if (k < 1 || k > t_.size()) return false;
        Fact g{f->fact().symbol, {}};
        g.args.reserve(f->fact().args.size());
        for (const Term& a : f->fact().args)
          g.args.push_back(th_.normalize(ground(a, v)));
        const TraceStep& step = t_.at(k);
        return std::binary_search(step.begin(), step.end(), g);
      }
      case Formula::Kind::Not:
        return !eval(v, f->child());
      case Formula::Kind::And:
        return eval(v, f->left()) && eval(v, f->right());
      case Formula::Kind::Or:
        return eval(v, f->left()) || eval(v, f->right());
      case Formula::Kind::Implies:
        return !eval(v, f->left()) || eval(v, f->right());
      case Formula::Kind::Iff:
        return eval(v, f->left()) == eval(v, f->right());
      case Formula::Kind::Exists:
        return search_block(v, f->vars(), f->child(),
                            [](const Valuation&) { return true; });
      case Formula::Kind::Forall:
        return !search_block(v, f->vars(), Formula::lnot(f->child()),
                             [](const Valuation&) { return true; });
    }
    return false;
  }

  // Invokes `fn` for every satisfying assignment of `vars` (relative to the
  // incoming valuation); stops early when fn returns true. Returns whether it
  // was stopped.
  bool search_block(Valuation v, std::vector<Variable> vars, FormulaPtr body,
                    const std::function<bool(const Valuation&)>& fn) const {
    // Quantified variables shadow outer bindings.
    for (const Variable& var : vars) {
      v.msg.erase(var);
      v.time.erase(var);
    }
    // Merge directly nested existential blocks unless names clash.
    while (body->kind() == Formula::Kind::Exists) {
      std::set<Variable> seen(vars.begin(), vars.end());
      bool clash = false;
      for (const Variable& var : body->vars())
        if (seen.count(var)) clash = true;
      if (clash) break;
      vars.insert(vars.end(), body->vars().begin(), body->vars().end());
      body = body->child();
    }
    for (const FormulaPtr& d : detail::disjuncts_of(body)) {
      std::set<Variable> occurring = d->free_vars();
      std::vector<Variable> needed;
      for (const Variable& var : vars)
        if (occurring.count(var)) needed.push_back(var);
      if (solve(v, needed, detail::conjuncts_of(d), d, fn)) return true;
    }
    return false;
  }

  const Trace& trace() const { return t_; }
  const RewriteTheory& theory() const { return th_; }

 private:
  bool solve(const Valuation& v, const std::vector<Variable>& needed,
             const std::vector<FormulaPtr>& conjuncts, const FormulaPtr& whole,
             const std::function<bool(const Valuation&)>& fn) const {
    std::vector<Variable> unbound;
    for (const Variable& var : needed)
      if (!bound(v, var)) unbound.push_back(var);

    // Prune on already-decidable atomic conjuncts.
    for (const FormulaPtr& c : conjuncts) {
      FormulaPtr atom = c;
      bool positive = true;
      if (atom->kind() == Formula::Kind::Not && atom->child()->is_atom()) {
        atom = atom->child();
        positive = false;
      }
      if (!atom->is_atom()) continue;
      bool decidable = true;
      for (const Variable& var : atom->free_vars())
        if (!bound(v, var)) decidable = false;
      if (decidable && eval(v, atom) != positive) return false;
    }

    if (unbound.empty()) {
      if (eval(v, whole)) return fn(v);
      return false;
    }

    std::set<Variable> unbound_set(unbound.begin(), unbound.end());

    // Generator: a positive action atom mentioning an unbound variable.
    for (const FormulaPtr& c : conjuncts) {
      if (c->kind() != Formula::Kind::Action) continue;
      bool relevant = false;
      for (const Variable& var : c->fact().vars())
        if (unbound_set.count(var)) relevant = true;
      Variable tp = c->timepoint().as_var();
      if (unbound_set.count(tp)) relevant = true;
      if (!relevant) continue;

      Fact pattern{c->fact().symbol, {}};
      pattern.args.reserve(c->fact().args.size());
      bool pure = true;
      for (const Term& a : c->fact().args) {
        Term p = th_.normalize(partial(a, v));
        if (!detail::constructor_pure(p, roots_)) pure = false;
        pattern.args.push_back(std::move(p));
      }
      if (!pure) continue;  // matching against this atom could be incomplete

      std::size_t lo = 1, hi = t_.size();
      if (auto it = v.time.find(tp); it != v.time.end()) {
        if (it->second < 1 || it->second > t_.size()) return false;
        lo = hi = it->second;
      }
      for (std::size_t k = lo; k <= hi; ++k) {
        for (const Fact& g : t_.at(k)) {
          if (g.symbol != pattern.symbol ||
              g.args.size() != pattern.args.size())
            continue;
          Substitution s;
          bool ok = true;
          for (std::size_t i = 0; ok && i < pattern.args.size(); ++i)
            ok = match_term(pattern.args[i], g.args[i], s);
          if (!ok) continue;
          Valuation v2 = v;
          v2.time[tp] = k;
          for (const auto& [var, val] : s.mapping()) v2.msg[var] = val;
          if (solve(v2, needed, conjuncts, whole, fn)) return true;
        }
      }
      // Every model must satisfy this atom, so its matches are exhaustive.
      return false;
    }

    // Derivation through an equality whose one side is already determined.
    for (const FormulaPtr& c : conjuncts) {
      if (c->kind() == Formula::Kind::TermEq) {
        for (int dir = 0; dir < 2; ++dir) {
          const Term& known = dir ? c->rhs() : c->lhs();
          const Term& other = dir ? c->lhs() : c->rhs();
          if (!all_bound(known, v)) continue;
          bool has_unbound = false;
          for (const Variable& var : other.vars())
            if (unbound_set.count(var)) has_unbound = true;
          if (!has_unbound) continue;
          Term pattern = th_.normalize(partial(other, v));
          if (!detail::constructor_pure(pattern, roots_)) continue;
          Term subject = th_.normalize(ground(known, v));
          Substitution s;
          if (!match_term(pattern, subject, s))
            return false;  // pure pattern: definitive mismatch
          Valuation v2 = v;
          for (const auto& [var, val] : s.mapping()) v2.msg[var] = val;
          return solve(v2, needed, conjuncts, whole, fn);
        }
      } else if (c->kind() == Formula::Kind::TimeEq) {
        Variable a = c->lhs().as_var();
        Variable b = c->rhs().as_var();
        for (int dir = 0; dir < 2; ++dir) {
          Variable known = dir ? b : a;
          Variable other = dir ? a : b;
          if (!v.time.count(known) || !unbound_set.count(other)) continue;
          Valuation v2 = v;
          v2.time[other] = v.time.at(known);
          return solve(v2, needed, conjuncts, whole, fn);
        }
      }
    }

    std::string names;
    for (const Variable& var : unbound)
      names += (names.empty() ? "" : ", ") + var.name;
    throw EvalError("cannot evaluate quantifier: variables {" + names +
                    "} are not guarded by an action in " + whole->to_string());
  }

  static bool bound(const Valuation& v, const Variable& var) {
    return var.sort == Sort::Temp ? v.time.count(var) != 0
                                  : v.msg.count(var) != 0;
  }

  bool all_bound(const Term& t, const Valuation& v) const {
    for (const Variable& var : t.vars())
      if (!bound(v, var)) return false;
    return true;
  }

  // Substitutes bound message variables, leaving unbound variables in place.
  Term partial(const Term& t, const Valuation& v) const {
    switch (t.kind()) {
      case Term::Kind::Var: {
        auto it = v.msg.find(t.as_var());
        return it == v.msg.end() ? t : it->second;
      }
      case Term::Kind::App: {
        std::vector<Term> args;
        args.reserve(t.args().size());
        for (const Term& a : t.args()) args.push_back(partial(a, v));
        return Term::app(t.name(), std::move(args));
      }
      default:
        return t;
    }
  }

  Term ground(const Term& t, const Valuation& v) const {
    Term g = partial(t, v);
    if (!g.is_ground()) {
      std::set<Variable> vars = g.vars();
      throw EvalError("unbound variable '" + vars.begin()->name +
                      "' in term " + t.to_string());
    }
    return g;
  }

  std::size_t time_at(const Term& tp, const Valuation& v) const {
    auto it = v.time.find(tp.as_var());
    if (it == v.time.end())
      throw EvalError("unbound temporal variable '#" + tp.name() + "'");
    return it->second;
  }

  const Trace& t_;
  const RewriteTheory& th_;
  std::set<std::string> roots_;
};

inline bool evaluate(const Trace& t, const Valuation& v, const FormulaPtr& f,
                     const RewriteTheory& th) {
  return Evaluator(t, th).eval(v, f);
}

// The exact finite set of substitutions for `targets` under which the
// formula holds on the trace, canonical modulo E. Targets are bound by
// guard matching, exactly like quantified variables.
inline std::set<Substitution> enumerate_matches(
    const Trace& t, const FormulaPtr& f, const std::vector<Variable>& targets,
    const RewriteTheory& th) {
  Evaluator ev(t, th);
  std::set<Substitution> out;
  ev.search_block({}, targets, f, [&](const Valuation& v) {
    Substitution s;
    for (const Variable& var : targets) {
      auto it = v.msg.find(var);
      if (it != v.msg.end()) s.bind(var, th.normalize(it->second));
    }
    out.insert(std::move(s));
    return false;
  });
  return out;
}

namespace detail {

inline void collect_actions(const FormulaPtr& f,
                            std::vector<FormulaPtr>& out) {
  switch (f->kind()) {
    case Formula::Kind::Action:
      out.push_back(f);
      return;
    case Formula::Kind::Not:
      collect_actions(f->child(), out);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
    case Formula::Kind::Iff:
      collect_actions(f->left(), out);
      collect_actions(f->right(), out);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      collect_actions(f->child(), out);
      return;
    default:
      return;
  }
}

// Valuations for the free variables of an open formula: per-variable
// candidates are gathered from matches of the formula's action atoms
// anywhere in the trace, and combined as a cross product. Formulas whose
// free variables have no action occurrences admit no valuations.
inline std::vector<Valuation> candidate_valuations(const Trace& t,
                                                   const FormulaPtr& f,
                                                   const RewriteTheory& th) {
  std::set<Variable> fv = f->free_vars();
  if (fv.empty()) return {Valuation{}};
  std::vector<FormulaPtr> actions;
  collect_actions(f, actions);

  std::map<Variable, std::set<Term>> msg_cands;
  std::map<Variable, std::set<std::size_t>> time_cands;
  for (const Variable& v : fv) {
    if (v.sort == Sort::Temp) {
      for (std::size_t k = 1; k <= t.size(); ++k) time_cands[v].insert(k);
      continue;
    }
    for (const FormulaPtr& a : actions) {
      if (!a->fact().vars().count(v)) continue;
      for (const TraceStep& step : t.steps) {
        for (const Fact& g : step) {
          if (g.symbol != a->fact().symbol ||
              g.args.size() != a->fact().args.size())
            continue;
          Substitution s;
          bool ok = true;
          for (std::size_t i = 0; ok && i < g.args.size(); ++i)
            ok = match_term(th.normalize(a->fact().args[i]), g.args[i], s);
          if (!ok) continue;
          if (const Term* val = s.find(v)) msg_cands[v].insert(*val);
        }
      }
    }
  }

  std::vector<Valuation> out;
  out.emplace_back();
  for (const Variable& v : fv) {
    std::vector<Valuation> next;
    if (v.sort == Sort::Temp) {
      for (const Valuation& base : out)
        for (std::size_t k : time_cands[v]) {
          Valuation w = base;
          w.time[v] = k;
          next.push_back(std::move(w));
        }
    } else {
      for (const Valuation& base : out)
        for (const Term& val : msg_cands[v]) {
          Valuation w = base;
          w.msg[v] = val;
          next.push_back(std::move(w));
        }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace detail

// Validity over a finite trace set: every trace and every realizable
// valuation of the free variables satisfies the formula.
template <typename Traces>
bool holds_forall(const Traces& universe, const FormulaPtr& f,
                  const RewriteTheory& th) {
  for (const Trace& t : universe) {
    Evaluator ev(t, th);
    for (const Valuation& v : detail::candidate_valuations(t, f, th))
      if (!ev.eval(v, f)) return false;
  }
  return true;
}

// Satisfiability over a finite trace set.
template <typename Traces>
bool holds_exists(const Traces& universe, const FormulaPtr& f,
                  const RewriteTheory& th) {
  for (const Trace& t : universe) {
    Evaluator ev(t, th);
    for (const Valuation& v : detail::candidate_valuations(t, f, th))
      if (ev.eval(v, f)) return true;
  }
  return false;
}

}  // namespace acclab
