#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "acclab/errors.hpp"

namespace acclab {

// ---------------------------------------------------------------------------
// Sorts
// ---------------------------------------------------------------------------

// pub and fresh are incomparable subsorts of msg; temp stands apart and is
// used only for timepoint variables.
enum class Sort { Msg, Pub, Fresh, Temp };

inline const char* sort_name(Sort s) {
  switch (s) {
    case Sort::Msg: return "msg";
    case Sort::Pub: return "pub";
    case Sort::Fresh: return "fresh";
    case Sort::Temp: return "temp";
  }
  return "?";
}

// True iff a variable of sort `var_sort` may be bound to a value of sort
// `value_sort`.
inline bool sort_accepts(Sort var_sort, Sort value_sort) {
  if (var_sort == value_sort) return true;
  if (var_sort == Sort::Msg)
    return value_sort == Sort::Pub || value_sort == Sort::Fresh;
  return false;
}

// ---------------------------------------------------------------------------
// Variables
// ---------------------------------------------------------------------------

struct Variable {
  std::string name;
  Sort sort = Sort::Msg;

  friend auto operator<=>(const Variable&, const Variable&) = default;
};

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

// Immutable order-sorted term: a variable, a public name, a fresh name, or a
// function application. Value semantics; argument vectors are shared.
class Term {
 public:
  enum class Kind { Var, PubName, FreshName, App };

  Term() : kind_(Kind::PubName), name_("?") {}

  static Term var(std::string name, Sort sort = Sort::Msg) {
    Term t;
    t.kind_ = Kind::Var;
    t.name_ = std::move(name);
    t.sort_ = sort;
    return t;
  }
  static Term var(const Variable& v) { return var(v.name, v.sort); }
  static Term pub(std::string name) {
    Term t;
    t.kind_ = Kind::PubName;
    t.name_ = std::move(name);
    t.sort_ = Sort::Pub;
    return t;
  }
  static Term fresh(std::string name) {
    Term t;
    t.kind_ = Kind::FreshName;
    t.name_ = std::move(name);
    t.sort_ = Sort::Fresh;
    return t;
  }
  static Term app(std::string symbol, std::vector<Term> args) {
    for (const Term& a : args)
      if (a.sort() == Sort::Temp)
        throw SortError("temporal value used as message argument of '" +
                        symbol + "'");
    Term t;
    t.kind_ = Kind::App;
    t.name_ = std::move(symbol);
    t.sort_ = Sort::Msg;
    if (!args.empty())
      t.args_ = std::make_shared<const std::vector<Term>>(std::move(args));
    return t;
  }

  Kind kind() const { return kind_; }
  Sort sort() const { return sort_; }
  const std::string& name() const { return name_; }

  const std::vector<Term>& args() const {
    static const std::vector<Term> kNone;
    return args_ ? *args_ : kNone;
  }

  bool is_var() const { return kind_ == Kind::Var; }
  bool is_app() const { return kind_ == Kind::App; }
  bool is_name() const {
    return kind_ == Kind::PubName || kind_ == Kind::FreshName;
  }

  Variable as_var() const { return Variable{name_, sort_}; }

  bool is_ground() const {
    if (kind_ == Kind::Var) return false;
    for (const Term& a : args())
      if (!a.is_ground()) return false;
    return true;
  }

  void collect_vars(std::set<Variable>& out) const {
    if (kind_ == Kind::Var) {
      out.insert(as_var());
      return;
    }
    for (const Term& a : args()) a.collect_vars(out);
  }
  std::set<Variable> vars() const {
    std::set<Variable> out;
    collect_vars(out);
    return out;
  }

  void collect_names(std::set<Term>& out, Kind kind) const {
    if (kind_ == kind) out.insert(*this);
    for (const Term& a : args()) a.collect_names(out, kind);
  }

  void collect_subterms(std::set<Term>& out) const {
    out.insert(*this);
    for (const Term& a : args()) a.collect_subterms(out);
  }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_ || a.sort_ != b.sort_ || a.name_ != b.name_)
      return false;
    const auto& xs = a.args();
    const auto& ys = b.args();
    if (xs.size() != ys.size()) return false;
    if (a.args_ == b.args_) return true;
    return std::equal(xs.begin(), xs.end(), ys.begin());
  }
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

  friend bool operator<(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
    if (a.name_ != b.name_) return a.name_ < b.name_;
    if (a.sort_ != b.sort_) return a.sort_ < b.sort_;
    const auto& xs = a.args();
    const auto& ys = b.args();
    return std::lexicographical_compare(xs.begin(), xs.end(), ys.begin(),
                                        ys.end());
  }

  void print(std::ostream& os) const {
    switch (kind_) {
      case Kind::Var:
        if (sort_ == Sort::Pub) os << '$';
        else if (sort_ == Sort::Fresh) os << '~';
        else if (sort_ == Sort::Temp) os << '#';
        os << name_;
        return;
      case Kind::PubName:
        os << '\'' << name_ << '\'';
        return;
      case Kind::FreshName:
        os << '~' << name_;
        return;
      case Kind::App:
        if (name_ == "pair" && args().size() == 2) {
          os << '<';
          const Term* t = this;
          t->args()[0].print(os);
          while (t->args()[1].is_app() && t->args()[1].name() == "pair" &&
                 t->args()[1].args().size() == 2) {
            t = &t->args()[1];
            os << ", ";
            t->args()[0].print(os);
          }
          os << ", ";
          t->args()[1].print(os);
          os << '>';
          return;
        }
        os << name_;
        if (!args().empty()) {
          os << '(';
          for (std::size_t i = 0; i < args().size(); ++i) {
            if (i) os << ", ";
            args()[i].print(os);
          }
          os << ')';
        }
        return;
    }
  }

  std::string to_string() const {
    std::ostringstream os;
    print(os);
    return os.str();
  }

 private:
  Kind kind_;
  Sort sort_ = Sort::Pub;
  std::string name_;
  std::shared_ptr<const std::vector<Term>> args_;
};

inline std::ostream& operator<<(std::ostream& os, const Term& t) {
  t.print(os);
  return os;
}

inline Term pair_term(Term a, Term b) {
  return Term::app("pair", {std::move(a), std::move(b)});
}

// <x1, ..., xn> as right-nested pairs.
inline Term tuple_term(std::vector<Term> xs) {
  if (xs.empty()) throw Error("empty tuple");
  Term acc = xs.back();
  for (std::size_t i = xs.size() - 1; i-- > 0;)
    acc = pair_term(xs[i], std::move(acc));
  return acc;
}

// ---------------------------------------------------------------------------
// Signature
// ---------------------------------------------------------------------------

struct FunctionSymbol {
  std::string name;
  std::size_t arity = 0;
  bool is_private = false;
};

class Signature {
 public:
  Signature() {
    add(FunctionSymbol{"pair", 2});
    add(FunctionSymbol{"fst", 1});
    add(FunctionSymbol{"snd", 1});
  }

  void add(FunctionSymbol f) {
    auto it = symbols_.find(f.name);
    if (it != symbols_.end()) {
      if (it->second.arity != f.arity)
        throw SpecError("function symbol '" + f.name +
                        "' redeclared with different arity");
      it->second.is_private = it->second.is_private || f.is_private;
      return;
    }
    symbols_.emplace(f.name, std::move(f));
  }

  const FunctionSymbol* find(const std::string& name) const {
    auto it = symbols_.find(name);
    return it == symbols_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, FunctionSymbol>& symbols() const {
    return symbols_;
  }

 private:
  std::map<std::string, FunctionSymbol> symbols_;
};

// ---------------------------------------------------------------------------
// Facts
// ---------------------------------------------------------------------------

inline constexpr const char* kCorruptedFact = "Corrupted";
inline constexpr const char* kGuardedFact = "Guarded";

struct Fact {
  std::string symbol;
  std::vector<Term> args;

  bool is_ground() const {
    for (const Term& a : args)
      if (!a.is_ground()) return false;
    return true;
  }

  std::set<Variable> vars() const {
    std::set<Variable> out;
    for (const Term& a : args) a.collect_vars(out);
    return out;
  }

  friend bool operator==(const Fact& a, const Fact& b) {
    return a.symbol == b.symbol && a.args == b.args;
  }
  friend bool operator<(const Fact& a, const Fact& b) {
    if (a.symbol != b.symbol) return a.symbol < b.symbol;
    return std::lexicographical_compare(a.args.begin(), a.args.end(),
                                        b.args.begin(), b.args.end());
  }

  void print(std::ostream& os) const {
    os << symbol << '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) os << ", ";
      args[i].print(os);
    }
    os << ')';
  }
  std::string to_string() const {
    std::ostringstream os;
    print(os);
    return os.str();
  }
};

inline std::ostream& operator<<(std::ostream& os, const Fact& f) {
  f.print(os);
  return os;
}

// ---------------------------------------------------------------------------
// Substitutions
// ---------------------------------------------------------------------------

// Finite well-sorted mapping from variables to terms; identity elsewhere.
class Substitution {
 public:
  Substitution() = default;

  static Substitution of(std::initializer_list<std::pair<Variable, Term>> xs) {
    Substitution s;
    for (const auto& [v, t] : xs) s.bind(v, t);
    return s;
  }

  void bind(const Variable& v, const Term& t) {
    if (!sort_accepts(v.sort, t.sort()))
      throw SortError("cannot bind " + std::string(sort_name(v.sort)) +
                      "-sorted variable '" + v.name + "' to " +
                      sort_name(t.sort()) + "-sorted term " + t.to_string());
    map_[v] = t;
  }

  bool contains(const Variable& v) const { return map_.count(v) != 0; }

  const Term* find(const Variable& v) const {
    auto it = map_.find(v);
    return it == map_.end() ? nullptr : &it->second;
  }

  const std::map<Variable, Term>& mapping() const { return map_; }
  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }

  std::set<Variable> domain() const {
    std::set<Variable> out;
    for (const auto& [v, t] : map_) out.insert(v);
    return out;
  }

  std::set<Term> range() const {
    std::set<Term> out;
    for (const auto& [v, t] : map_) out.insert(t);
    return out;
  }

  bool is_injective() const { return range().size() == map_.size(); }

  // Homomorphic application; variables outside the domain are unchanged.
  Term apply(const Term& t) const {
    switch (t.kind()) {
      case Term::Kind::Var: {
        const Term* r = find(t.as_var());
        return r ? *r : t;
      }
      case Term::Kind::PubName:
      case Term::Kind::FreshName:
        return t;
      case Term::Kind::App: {
        std::vector<Term> args;
        args.reserve(t.args().size());
        for (const Term& a : t.args()) args.push_back(apply(a));
        return Term::app(t.name(), std::move(args));
      }
    }
    return t;
  }

  Fact apply(const Fact& f) const {
    Fact out{f.symbol, {}};
    out.args.reserve(f.args.size());
    for (const Term& a : f.args) out.args.push_back(apply(a));
    return out;
  }

  // Restriction of the mapping to the given variables.
  Substitution restrict_to(const std::vector<Variable>& vars) const {
    Substitution s;
    for (const Variable& v : vars) {
      const Term* t = find(v);
      if (t) s.map_[v] = *t;
    }
    return s;
  }

  friend bool operator==(const Substitution& a, const Substitution& b) {
    return a.map_ == b.map_;
  }
  friend bool operator<(const Substitution& a, const Substitution& b) {
    return a.map_ < b.map_;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (const auto& [v, t] : map_) {
      if (!first) os << ", ";
      first = false;
      Term::var(v).print(os);
      os << " -> ";
      t.print(os);
    }
    os << '}';
    return os.str();
  }

 private:
  std::map<Variable, Term> map_;
};

// First-order syntactic matching: extends `out` so that pattern(out) equals
// subject, or returns false. The subject is expected to be in normal form
// where it matters (trace facts and state facts are kept normalized).
inline bool match_term(const Term& pattern, const Term& subject,
                       Substitution& out) {
  switch (pattern.kind()) {
    case Term::Kind::Var: {
      const Variable v = pattern.as_var();
      if (const Term* bound = out.find(v)) return *bound == subject;
      if (!sort_accepts(v.sort, subject.sort())) return false;
      out.bind(v, subject);
      return true;
    }
    case Term::Kind::PubName:
    case Term::Kind::FreshName:
      return pattern == subject;
    case Term::Kind::App: {
      if (!subject.is_app() || subject.name() != pattern.name() ||
          subject.args().size() != pattern.args().size())
        return false;
      for (std::size_t i = 0; i < pattern.args().size(); ++i)
        if (!match_term(pattern.args()[i], subject.args()[i], out))
          return false;
      return true;
    }
  }
  return false;
}

inline bool match_fact(const Fact& pattern, const Fact& subject,
                       Substitution& out) {
  if (pattern.symbol != subject.symbol ||
      pattern.args.size() != subject.args.size())
    return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i)
    if (!match_term(pattern.args[i], subject.args[i], out)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Rewrite theories
// ---------------------------------------------------------------------------

struct RewriteRule {
  Term lhs;
  Term rhs;
};

// A user-supplied rewrite system oriented left-to-right, presumed convergent.
// Equality modulo E is normal-form comparison. The built-in projection rules
// for pairs are always present.
class RewriteTheory {
 public:
  RewriteTheory() {
    const Term x = Term::var("x");
    const Term y = Term::var("y");
    rules_.push_back({Term::app("fst", {pair_term(x, y)}), x});
    rules_.push_back({Term::app("snd", {pair_term(x, y)}), y});
  }

  void add_rule(Term lhs, Term rhs) {
    if (!lhs.is_app())
      throw SpecError("rewrite rule left-hand side must be a function "
                      "application: " + lhs.to_string());
    std::set<Variable> lv = lhs.vars();
    for (const Variable& v : rhs.vars())
      if (!lv.count(v))
        throw SpecError("rewrite rule introduces variable '" + v.name +
                        "' on the right-hand side");
    rules_.push_back({std::move(lhs), std::move(rhs)});
  }

  const std::vector<RewriteRule>& rules() const { return rules_; }

  std::size_t step_budget() const { return step_budget_; }
  void set_step_budget(std::size_t n) { step_budget_ = n; }

  // Innermost-leftmost normal form. Throws RewriteBudgetError after
  // step_budget() root rewrites on a single term.
  Term normalize(const Term& t) const {
    std::size_t steps = 0;
    return normalize_inner(t, steps);
  }

  bool equal_mod_e(const Term& a, const Term& b) const {
    return normalize(a) == normalize(b);
  }

  Fact normalize(const Fact& f) const {
    Fact out{f.symbol, {}};
    out.args.reserve(f.args.size());
    for (const Term& a : f.args) out.args.push_back(normalize(a));
    return out;
  }

  bool equal_mod_e(const Fact& a, const Fact& b) const {
    if (a.symbol != b.symbol || a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
      if (!equal_mod_e(a.args[i], b.args[i])) return false;
    return true;
  }

 private:
  Term normalize_inner(const Term& t, std::size_t& steps) const {
    Term cur = t;
    if (cur.is_app()) {
      std::vector<Term> args;
      args.reserve(cur.args().size());
      bool changed = false;
      for (const Term& a : cur.args()) {
        Term n = normalize_inner(a, steps);
        changed = changed || !(n == a);
        args.push_back(std::move(n));
      }
      if (changed) cur = Term::app(cur.name(), std::move(args));
    }
    for (;;) {
      bool fired = false;
      for (const RewriteRule& r : rules_) {
        Substitution s;
        if (match_term(r.lhs, cur, s)) {
          if (++steps > step_budget_)
            throw RewriteBudgetError(
                "rewrite budget of " + std::to_string(step_budget_) +
                " steps exceeded while normalizing " + t.to_string());
          cur = normalize_inner(s.apply(r.rhs), steps);
          fired = true;
          break;
        }
      }
      if (!fired) return cur;
    }
  }

  std::vector<RewriteRule> rules_;
  std::size_t step_budget_ = 10000;
};

// ---------------------------------------------------------------------------
// Party renaming
// ---------------------------------------------------------------------------

// Mapping between public names, identity outside its explicit entries.
using PartyRenaming = std::map<Term, Term>;

inline Term apply_renaming(const PartyRenaming& f, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::PubName: {
      auto it = f.find(t);
      return it == f.end() ? t : it->second;
    }
    case Term::Kind::App: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(apply_renaming(f, a));
      return Term::app(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

inline Fact apply_renaming(const PartyRenaming& f, const Fact& fact) {
  Fact out{fact.symbol, {}};
  out.args.reserve(fact.args.size());
  for (const Term& a : fact.args) out.args.push_back(apply_renaming(f, a));
  return out;
}

// The composed bijection sending rho_prime(v) to rho(v) for each variable v
// of the shared domain; identity entries are dropped.
inline PartyRenaming party_rename(const Substitution& rho,
                                  const Substitution& rho_prime) {
  if (rho.domain() != rho_prime.domain())
    throw Error("party_rename: substitutions must share a domain");
  if (!rho.is_injective() || !rho_prime.is_injective())
    throw Error("party_rename: substitutions must be injective");
  PartyRenaming out;
  for (const auto& [v, from] : rho_prime.mapping()) {
    const Term& to = *rho.find(v);
    if (from.kind() != Term::Kind::PubName || to.kind() != Term::Kind::PubName)
      throw Error("party_rename: substitutions must map to public names");
    if (!(from == to)) out[from] = to;
  }
  return out;
}

}  // namespace acclab
