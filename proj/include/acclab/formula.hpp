#pragma once

#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "acclab/terms.hpp"

namespace acclab {

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Two-sorted first-order trace formula over trace atoms. Atoms are falsum,
// term equality, timepoint ordering/equality, and actions F@i. The derived
// connectives |, ==>, <=> and All are kept as explicit nodes; their semantics
// follow the standard abbreviations.
class Formula {
 public:
  enum class Kind {
    Falsum,
    TermEq,    // t1 = t2
    TimeLess,  // #i < #j
    TimeEq,    // #i = #j
    Action,    // F(args) @ #i
    Not,
    And,
    Or,
    Implies,
    Iff,
    Exists,
    Forall,
  };

  static FormulaPtr falsum() { return make(Kind::Falsum); }
  static FormulaPtr truth() { return lnot(falsum()); }

  static FormulaPtr term_eq(Term a, Term b) {
    auto f = make(Kind::TermEq);
    f->lhs_ = std::move(a);
    f->rhs_ = std::move(b);
    return f;
  }
  static FormulaPtr time_less(Term i, Term j) {
    require_temp(i);
    require_temp(j);
    auto f = make(Kind::TimeLess);
    f->lhs_ = std::move(i);
    f->rhs_ = std::move(j);
    return f;
  }
  static FormulaPtr time_eq(Term i, Term j) {
    require_temp(i);
    require_temp(j);
    auto f = make(Kind::TimeEq);
    f->lhs_ = std::move(i);
    f->rhs_ = std::move(j);
    return f;
  }
  static FormulaPtr action(Fact fact, Term timepoint) {
    require_temp(timepoint);
    auto f = make(Kind::Action);
    f->fact_ = std::move(fact);
    f->lhs_ = std::move(timepoint);
    return f;
  }

  static FormulaPtr lnot(FormulaPtr a) {
    auto f = make(Kind::Not);
    f->a_ = std::move(a);
    return f;
  }
  static FormulaPtr land(FormulaPtr a, FormulaPtr b) {
    return binary(Kind::And, std::move(a), std::move(b));
  }
  static FormulaPtr lor(FormulaPtr a, FormulaPtr b) {
    return binary(Kind::Or, std::move(a), std::move(b));
  }
  static FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
    return binary(Kind::Implies, std::move(a), std::move(b));
  }
  static FormulaPtr iff(FormulaPtr a, FormulaPtr b) {
    return binary(Kind::Iff, std::move(a), std::move(b));
  }

  static FormulaPtr exists(std::vector<Variable> vars, FormulaPtr body) {
    if (vars.empty()) return body;
    auto f = make(Kind::Exists);
    f->vars_ = std::move(vars);
    f->a_ = std::move(body);
    return f;
  }
  static FormulaPtr forall(std::vector<Variable> vars, FormulaPtr body) {
    if (vars.empty()) return body;
    auto f = make(Kind::Forall);
    f->vars_ = std::move(vars);
    f->a_ = std::move(body);
    return f;
  }

  // Right-fold conjunction/disjunction; empty conjunction is truth, empty
  // disjunction is falsum.
  static FormulaPtr conj(const std::vector<FormulaPtr>& xs) {
    if (xs.empty()) return truth();
    FormulaPtr acc = xs.back();
    for (std::size_t i = xs.size() - 1; i-- > 0;) acc = land(xs[i], acc);
    return acc;
  }
  static FormulaPtr disj(const std::vector<FormulaPtr>& xs) {
    if (xs.empty()) return falsum();
    FormulaPtr acc = xs.back();
    for (std::size_t i = xs.size() - 1; i-- > 0;) acc = lor(xs[i], acc);
    return acc;
  }

  Kind kind() const { return kind_; }
  const Term& lhs() const { return lhs_; }
  const Term& rhs() const { return rhs_; }
  const Fact& fact() const { return fact_; }
  const Term& timepoint() const { return lhs_; }
  const std::vector<Variable>& vars() const { return vars_; }
  const FormulaPtr& child() const { return a_; }
  const FormulaPtr& left() const { return a_; }
  const FormulaPtr& right() const { return b_; }

  bool is_atom() const {
    switch (kind_) {
      case Kind::Falsum:
      case Kind::TermEq:
      case Kind::TimeLess:
      case Kind::TimeEq:
      case Kind::Action:
        return true;
      default:
        return false;
    }
  }

  // Free variables, message and temporal alike.
  std::set<Variable> free_vars() const {
    std::set<Variable> out;
    std::set<Variable> bound;
    collect_free(out, bound);
    return out;
  }

  // Free variables in order of first occurrence (left to right).
  std::vector<Variable> free_vars_ordered() const {
    std::vector<Variable> out;
    std::set<Variable> seen;
    std::set<Variable> bound;
    collect_free_ordered(out, seen, bound);
    return out;
  }

  // Capture-checked homomorphic application of a substitution to free
  // variables. Bindings whose variable is shadowed by a quantifier are not
  // applied below that quantifier.
  FormulaPtr apply(const Substitution& s) const {
    switch (kind_) {
      case Kind::Falsum:
        return falsum();
      case Kind::TermEq:
        return term_eq(s.apply(lhs_), s.apply(rhs_));
      case Kind::TimeLess:
      case Kind::TimeEq: {
        auto f = make(kind_);
        f->lhs_ = apply_time(s, lhs_);
        f->rhs_ = apply_time(s, rhs_);
        return f;
      }
      case Kind::Action: {
        auto f = make(Kind::Action);
        f->fact_ = s.apply(fact_);
        f->lhs_ = apply_time(s, lhs_);
        return f;
      }
      case Kind::Not:
        return lnot(a_->apply(s));
      case Kind::And:
      case Kind::Or:
      case Kind::Implies:
      case Kind::Iff:
        return binary(kind_, a_->apply(s), b_->apply(s));
      case Kind::Exists:
      case Kind::Forall: {
        Substitution inner;
        std::set<Variable> shadow(vars_.begin(), vars_.end());
        for (const auto& [v, t] : s.mapping()) {
          if (shadow.count(v)) continue;
          for (const Variable& tv : t.vars())
            if (shadow.count(tv))
              throw Error("substitution would capture variable '" + tv.name +
                          "'");
          inner.bind(v, t);
        }
        auto f = make(kind_);
        f->vars_ = vars_;
        f->a_ = a_->apply(inner);
        return f;
      }
    }
    return nullptr;
  }

  // Consistent renaming of all variables, bound and free.
  FormulaPtr rename_vars(const std::map<Variable, Variable>& r) const {
    Substitution s;
    for (const auto& [from, to] : r) s.bind(from, Term::var(to));
    return rename_vars_inner(r, s);
  }

  friend bool equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind_ != b->kind_) return false;
    switch (a->kind_) {
      case Kind::Falsum:
        return true;
      case Kind::TermEq:
      case Kind::TimeLess:
      case Kind::TimeEq:
        return a->lhs_ == b->lhs_ && a->rhs_ == b->rhs_;
      case Kind::Action:
        return a->fact_ == b->fact_ && a->lhs_ == b->lhs_;
      case Kind::Not:
        return equal(a->a_, b->a_);
      case Kind::And:
      case Kind::Or:
      case Kind::Implies:
      case Kind::Iff:
        return equal(a->a_, b->a_) && equal(a->b_, b->b_);
      case Kind::Exists:
      case Kind::Forall:
        return a->vars_ == b->vars_ && equal(a->a_, b->a_);
    }
    return false;
  }

  void print(std::ostream& os) const {
    switch (kind_) {
      case Kind::Falsum:
        os << 'F';
        return;
      case Kind::TermEq:
        lhs_.print(os);
        os << " = ";
        rhs_.print(os);
        return;
      case Kind::TimeLess:
        lhs_.print(os);
        os << " < ";
        rhs_.print(os);
        return;
      case Kind::TimeEq:
        lhs_.print(os);
        os << " = ";
        rhs_.print(os);
        return;
      case Kind::Action:
        fact_.print(os);
        os << " @ ";
        lhs_.print(os);
        return;
      case Kind::Not:
        if (a_->kind_ == Kind::Falsum) {
          os << 'T';
          return;
        }
        os << "not (";
        a_->print(os);
        os << ')';
        return;
      case Kind::And:
      case Kind::Or:
      case Kind::Implies:
      case Kind::Iff: {
        const char* op = kind_ == Kind::And       ? " & "
                         : kind_ == Kind::Or      ? " | "
                         : kind_ == Kind::Implies ? " ==> "
                                                  : " <=> ";
        print_operand(os, *a_);
        os << op;
        print_operand(os, *b_);
        return;
      }
      case Kind::Exists:
      case Kind::Forall:
        os << (kind_ == Kind::Exists ? "Ex" : "All");
        for (const Variable& v : vars_) {
          os << ' ';
          Term::var(v).print(os);
        }
        os << ". ";
        a_->print(os);
        return;
    }
  }

  std::string to_string() const {
    std::ostringstream os;
    print(os);
    return os.str();
  }

 private:
  static std::shared_ptr<Formula> make(Kind k) {
    auto f = std::make_shared<Formula>();
    f->kind_ = k;
    return f;
  }
  static FormulaPtr binary(Kind k, FormulaPtr a, FormulaPtr b) {
    auto f = make(k);
    f->a_ = std::move(a);
    f->b_ = std::move(b);
    return f;
  }
  static void require_temp(const Term& t) {
    if (!(t.is_var() && t.sort() == Sort::Temp))
      throw SpecError("timepoint position requires a temporal variable, got " +
                      t.to_string());
  }
  static Term apply_time(const Substitution& s, const Term& t) {
    const Term* r = s.find(t.as_var());
    return r ? *r : t;
  }

  static void print_operand(std::ostream& os, const Formula& f) {
    bool atomic = f.is_atom() || f.kind_ == Kind::Not;
    if (atomic) {
      f.print(os);
    } else {
      os << '(';
      f.print(os);
      os << ')';
    }
  }

  void collect_free(std::set<Variable>& out,
                    std::set<Variable>& bound) const {
    auto add_term = [&](const Term& t) {
      for (const Variable& v : t.vars())
        if (!bound.count(v)) out.insert(v);
    };
    switch (kind_) {
      case Kind::Falsum:
        return;
      case Kind::TermEq:
      case Kind::TimeLess:
      case Kind::TimeEq:
        add_term(lhs_);
        add_term(rhs_);
        return;
      case Kind::Action:
        for (const Term& a : fact_.args) add_term(a);
        add_term(lhs_);
        return;
      case Kind::Not:
        a_->collect_free(out, bound);
        return;
      case Kind::And:
      case Kind::Or:
      case Kind::Implies:
      case Kind::Iff:
        a_->collect_free(out, bound);
        b_->collect_free(out, bound);
        return;
      case Kind::Exists:
      case Kind::Forall: {
        std::vector<Variable> added;
        for (const Variable& v : vars_)
          if (bound.insert(v).second) added.push_back(v);
        a_->collect_free(out, bound);
        for (const Variable& v : added) bound.erase(v);
        return;
      }
    }
  }

  void collect_free_ordered(std::vector<Variable>& out,
                            std::set<Variable>& seen,
                            std::set<Variable>& bound) const {
    auto add_term = [&](const Term& t) {
      add_term_ordered(t, out, seen, bound);
    };
    switch (kind_) {
      case Kind::Falsum:
        return;
      case Kind::TermEq:
      case Kind::TimeLess:
      case Kind::TimeEq:
        add_term(lhs_);
        add_term(rhs_);
        return;
      case Kind::Action:
        for (const Term& a : fact_.args) add_term(a);
        add_term(lhs_);
        return;
      case Kind::Not:
        a_->collect_free_ordered(out, seen, bound);
        return;
      case Kind::And:
      case Kind::Or:
      case Kind::Implies:
      case Kind::Iff:
        a_->collect_free_ordered(out, seen, bound);
        b_->collect_free_ordered(out, seen, bound);
        return;
      case Kind::Exists:
      case Kind::Forall: {
        std::vector<Variable> added;
        for (const Variable& v : vars_)
          if (bound.insert(v).second) added.push_back(v);
        a_->collect_free_ordered(out, seen, bound);
        for (const Variable& v : added) bound.erase(v);
        return;
      }
    }
  }

  static void add_term_ordered(const Term& t, std::vector<Variable>& out,
                               std::set<Variable>& seen,
                               const std::set<Variable>& bound) {
    if (t.is_var()) {
      Variable v = t.as_var();
      if (!bound.count(v) && seen.insert(v).second) out.push_back(v);
      return;
    }
    for (const Term& a : t.args()) add_term_ordered(a, out, seen, bound);
  }

  FormulaPtr rename_vars_inner(const std::map<Variable, Variable>& r,
                               const Substitution& s) const {
    switch (kind_) {
      case Kind::Exists:
      case Kind::Forall: {
        std::vector<Variable> vs;
        vs.reserve(vars_.size());
        for (const Variable& v : vars_) {
          auto it = r.find(v);
          vs.push_back(it == r.end() ? v : it->second);
        }
        auto f = make(kind_);
        f->vars_ = std::move(vs);
        f->a_ = a_->rename_vars_inner(r, s);
        return f;
      }
      case Kind::Not:
        return lnot(a_->rename_vars_inner(r, s));
      case Kind::And:
      case Kind::Or:
      case Kind::Implies:
      case Kind::Iff:
        return binary(kind_, a_->rename_vars_inner(r, s),
                      b_->rename_vars_inner(r, s));
      default:
        return apply(s);
    }
  }

  Kind kind_ = Kind::Falsum;
  Term lhs_, rhs_;
  Fact fact_;
  std::vector<Variable> vars_;
  FormulaPtr a_, b_;
};

inline std::ostream& operator<<(std::ostream& os, const Formula& f) {
  f.print(os);
  return os;
}

// Valuation: temporal variables map to trace indices (1-based), message
// variables to ground terms of a compatible sort.
struct Valuation {
  std::map<Variable, Term> msg;
  std::map<Variable, std::size_t> time;

  void bind_msg(const Variable& v, const Term& t) {
    if (!sort_accepts(v.sort, t.sort()))
      throw SortError("valuation: cannot bind '" + v.name + "' to " +
                      t.to_string());
    msg[v] = t;
  }
  void bind_time(const Variable& v, std::size_t idx) { time[v] = idx; }

  Substitution as_substitution() const {
    Substitution s;
    for (const auto& [v, t] : msg) s.bind(v, t);
    return s;
  }
};

}  // namespace acclab
