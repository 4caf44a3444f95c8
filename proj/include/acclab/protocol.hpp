#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "acclab/eval.hpp"
#include "acclab/parser.hpp"
#include "acclab/trace.hpp"

namespace acclab {

// ---------------------------------------------------------------------------
// Multiset-rewrite rules
// ---------------------------------------------------------------------------

// A labeled multiset-rewrite rule: premises are consumed linearly, actions
// are recorded in the trace, conclusions are added to the state. Variables
// prefixed ~ that do not occur in the premises are bound to unique fresh
// names at application; free pub-sorted variables are instantiated from the
// party pool.
struct Rule {
  std::string name;
  std::vector<Fact> premises;
  std::vector<Fact> actions;
  std::vector<Fact> conclusions;

  std::vector<Variable> fresh_vars;  // bound at application, generator order
  std::vector<Variable> pool_vars;   // free pub variables, pool order

  std::set<Variable> premise_vars() const {
    std::set<Variable> out;
    for (const Fact& f : premises)
      for (const Variable& v : f.vars()) out.insert(v);
    return out;
  }
};

struct ProtocolSpec {
  Signature signature;
  RewriteTheory theory;
  std::vector<Rule> rules;
  std::vector<Term> declared_pool;  // optional explicit party pool
  std::size_t declared_pool_size = 0;
  std::vector<std::pair<std::string, FormulaPtr>> restrictions;

  // Checks rule-name uniqueness, fact arity consistency, reserved fact
  // arities, and variable coverage; fills in fresh_vars/pool_vars.
  void validate() {
    std::set<std::string> names;
    std::map<std::string, std::size_t> fact_arity;
    fact_arity[kCorruptedFact] = 1;
    fact_arity[kGuardedFact] = 1;
    for (Rule& r : rules) {
      if (!names.insert(r.name).second)
        throw SpecError("duplicate rule name '" + r.name + "'");
      auto check_arity = [&](const Fact& f) {
        auto [it, inserted] = fact_arity.emplace(f.symbol, f.args.size());
        if (!inserted && it->second != f.args.size())
          throw SpecError("fact '" + f.symbol +
                          "' used with inconsistent arities");
      };
      for (const Fact& f : r.premises) check_arity(f);
      for (const Fact& f : r.actions) check_arity(f);
      for (const Fact& f : r.conclusions) check_arity(f);

      std::set<Variable> known = r.premise_vars();
      r.fresh_vars.clear();
      r.pool_vars.clear();
      std::set<Variable> seen;
      auto classify = [&](const Fact& f) {
        for (const Term& a : f.args)
          for (const Variable& v : a.vars()) {
            if (known.count(v) || !seen.insert(v).second) continue;
            if (v.sort == Sort::Fresh) {
              r.fresh_vars.push_back(v);
            } else if (v.sort == Sort::Pub) {
              r.pool_vars.push_back(v);
            } else {
              throw SpecError("rule '" + r.name + "': variable '" + v.name +
                              "' does not occur in the premises and is "
                              "neither fresh nor pub-sorted");
            }
          }
      };
      for (const Fact& f : r.actions) classify(f);
      for (const Fact& f : r.conclusions) classify(f);
    }
    for (const auto& [rname, f] : restrictions) {
      if (!f->free_vars().empty())
        throw SpecError("restriction '" + rname + "' must be closed");
      if (!is_guarded(f, rule_roots(theory)))
        throw SpecError("restriction '" + rname + "' is not guarded");
    }
  }
};

struct EnumerationBounds {
  std::size_t max_steps = 5;
  std::vector<Term> pool;             // public names
  std::size_t fresh_budget = 0;      // 0: derived from max_steps and rules
  std::size_t state_cap = 1'000'000;  // search-node cap

  void check() const {
    if (max_steps < 1) throw SpecError("enumeration bound must be >= 1");
    if (pool.empty()) throw SpecError("party pool must not be empty");
    for (const Term& p : pool)
      if (p.kind() != Term::Kind::PubName)
        throw SpecError("party pool entries must be public names");
  }
};

inline std::vector<Term> default_pool(std::size_t n) {
  std::vector<Term> out;
  out.reserve(n);
  for (std::size_t i = 1; i <= n; ++i)
    out.push_back(Term::pub("A" + std::to_string(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Bounded trace enumeration
// ---------------------------------------------------------------------------

namespace detail {

using State = std::map<Fact, std::size_t>;  // multiset of ground facts

struct RuleInstance {
  std::vector<Fact> consumed;
  std::vector<Fact> actions;
  std::vector<Fact> conclusions;
  std::size_t fresh_used = 0;
};

// All ways to match the premise list against the state, linearly.
inline void match_premises(const ProtocolSpec& p, const Rule& r,
                           std::size_t idx, State& state, Substitution& sub,
                           std::vector<Fact>& consumed,
                           std::vector<Substitution>& subs_out,
                           std::vector<std::vector<Fact>>& consumed_out) {
  if (idx == r.premises.size()) {
    subs_out.push_back(sub);
    consumed_out.push_back(consumed);
    return;
  }
  const Fact pattern = sub.apply(r.premises[idx]);
  std::vector<Fact> candidates;
  for (const auto& [fact, count] : state)
    if (count > 0 && fact.symbol == pattern.symbol &&
        fact.args.size() == pattern.args.size())
      candidates.push_back(fact);
  for (const Fact& fact : candidates) {
    Substitution attempt = sub;
    if (!match_fact(pattern, fact, attempt)) continue;
    --state[fact];
    consumed.push_back(fact);
    match_premises(p, r, idx + 1, state, attempt, consumed, subs_out,
                   consumed_out);
    consumed.pop_back();
    ++state[fact];
  }
}

inline void assign_pool(const std::vector<Variable>& vars, std::size_t idx,
                        const std::vector<Term>& pool, Substitution& sub,
                        std::vector<Substitution>& out) {
  if (idx == vars.size()) {
    out.push_back(sub);
    return;
  }
  for (const Term& p : pool) {
    Substitution attempt = sub;
    attempt.bind(vars[idx], p);
    assign_pool(vars, idx + 1, pool, attempt, out);
  }
}

// All instances of `r` applicable in `state`, in deterministic order.
inline std::vector<RuleInstance> rule_instances(const ProtocolSpec& p,
                                                const Rule& r, State& state,
                                                const EnumerationBounds& b,
                                                std::size_t fresh_used,
                                                std::size_t fresh_budget) {
  std::vector<Substitution> premise_subs;
  std::vector<std::vector<Fact>> consumed_sets;
  {
    Substitution empty;
    std::vector<Fact> consumed;
    match_premises(p, r, 0, state, empty, consumed, premise_subs,
                   consumed_sets);
  }
  std::vector<RuleInstance> out;
  for (std::size_t i = 0; i < premise_subs.size(); ++i) {
    std::vector<Substitution> full;
    assign_pool(r.pool_vars, 0, b.pool, premise_subs[i], full);
    for (Substitution& sub : full) {
      if (fresh_used + r.fresh_vars.size() > fresh_budget) continue;
      std::size_t counter = fresh_used;
      for (const Variable& v : r.fresh_vars)
        sub.bind(v, Term::fresh("fn" + std::to_string(++counter)));
      RuleInstance inst;
      inst.consumed = consumed_sets[i];
      inst.fresh_used = r.fresh_vars.size();
      for (const Fact& f : r.actions)
        inst.actions.push_back(p.theory.normalize(sub.apply(f)));
      for (const Fact& f : r.conclusions)
        inst.conclusions.push_back(p.theory.normalize(sub.apply(f)));
      out.push_back(std::move(inst));
    }
  }
  return out;
}

inline void collect_formula_pub_names(const FormulaPtr& f,
                                      std::set<Term>& out) {
  switch (f->kind()) {
    case Formula::Kind::Falsum:
      return;
    case Formula::Kind::TermEq:
      f->lhs().collect_names(out, Term::Kind::PubName);
      f->rhs().collect_names(out, Term::Kind::PubName);
      return;
    case Formula::Kind::TimeLess:
    case Formula::Kind::TimeEq:
      return;
    case Formula::Kind::Action:
      for (const Term& a : f->fact().args)
        a.collect_names(out, Term::Kind::PubName);
      return;
    case Formula::Kind::Not:
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      collect_formula_pub_names(f->child(), out);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
    case Formula::Kind::Iff:
      collect_formula_pub_names(f->left(), out);
      collect_formula_pub_names(f->right(), out);
      return;
  }
}

struct EnumerationContext {
  const ProtocolSpec& spec;
  const EnumerationBounds& bounds;
  std::size_t fresh_budget;
  std::size_t nodes = 0;
  std::set<Trace> traces;

  bool satisfies_restrictions(const Trace& t) {
    for (const auto& [name, f] : spec.restrictions)
      if (!evaluate(t, Valuation{}, f, spec.theory)) return false;
    return true;
  }

  void record(const Trace& raw) {
    Trace canon = canonicalize_fresh(raw);
    if (traces.count(canon)) return;
    if (satisfies_restrictions(canon)) traces.insert(std::move(canon));
  }

  void explore(State& state, Trace& trace, std::size_t depth,
               std::size_t fresh_used) {
    if (++nodes > bounds.state_cap)
      throw StateCapError("enumeration exceeded the state cap of " +
                          std::to_string(bounds.state_cap) + " nodes");
    record(trace);
    if (depth == bounds.max_steps) return;
    for (const Rule& r : spec.rules) {
      for (RuleInstance& inst :
           rule_instances(spec, r, state, bounds, fresh_used, fresh_budget)) {
        for (const Fact& f : inst.consumed)
          if (--state[f] == 0) state.erase(f);
        for (const Fact& f : inst.conclusions) ++state[f];
        bool stepped = !inst.actions.empty();
        if (stepped) trace.steps.push_back(make_step(inst.actions));
        explore(state, trace, depth + 1, fresh_used + inst.fresh_used);
        if (stepped) trace.steps.pop_back();
        for (const Fact& f : inst.conclusions)
          if (--state[f] == 0) state.erase(f);
        for (const Fact& f : inst.consumed) ++state[f];
      }
    }
  }
};

}  // namespace detail

// The set of all traces reachable from the empty state by at most
// bounds.max_steps rule applications, with pub variables ranging over the
// party pool, fresh names canonicalized by first occurrence and duplicates
// removed. Traces violating a restriction are excluded. The result is
// prefix-closed and sorted canonically.
inline std::vector<Trace> enumerate_traces(const ProtocolSpec& spec,
                                           const EnumerationBounds& bounds) {
  bounds.check();
  std::size_t per_rule = 0;
  for (const Rule& r : spec.rules)
    per_rule = std::max(per_rule, r.fresh_vars.size());
  std::size_t budget = bounds.fresh_budget
                           ? bounds.fresh_budget
                           : bounds.max_steps *
                                 std::max<std::size_t>(per_rule, 1);
  detail::EnumerationContext ctx{spec, bounds, budget, 0, {}};
  detail::State state;
  Trace trace;
  ctx.explore(state, trace, 0, 0);
  return std::vector<Trace>(ctx.traces.begin(), ctx.traces.end());
}

// Guided reachability: is `target` (with canonical fresh names) one of the
// traces of the protocol within the given bounds? Explores only branches
// whose actions reproduce the next step of the target, which keeps deep
// membership checks cheap.
inline bool reachable(const ProtocolSpec& spec, const EnumerationBounds& b,
                      const Trace& target) {
  b.check();
  Trace canon_target = canonicalize_fresh(target);
  struct Ctx {
    const ProtocolSpec& spec;
    const EnumerationBounds& b;
    const Trace& target;
    std::size_t fresh_budget;

    bool go(detail::State& state, std::size_t next_step, std::size_t depth,
            std::size_t fresh_used) {
      if (next_step == target.steps.size()) return true;
      if (depth == b.max_steps) return false;
      for (const Rule& r : spec.rules) {
        for (detail::RuleInstance& inst : detail::rule_instances(
                 spec, r, state, b, fresh_used, fresh_budget)) {
          std::size_t advance = 0;
          if (!inst.actions.empty()) {
            // The instance's step must equal the next target step up to the
            // fresh renaming fixed by the prefix produced so far.
            Trace probe;
            for (std::size_t i = 0; i < next_step; ++i)
              probe.steps.push_back(target.steps[i]);
            probe.steps.push_back(make_step(inst.actions));
            Trace canon_probe = canonicalize_fresh(probe);
            bool matches =
                canon_probe.steps.back() == target.steps[next_step];
            for (std::size_t i = 0; matches && i < next_step; ++i)
              matches = canon_probe.steps[i] == target.steps[i];
            if (!matches) continue;
            advance = 1;
          }
          for (const Fact& f : inst.consumed)
            if (--state[f] == 0) state.erase(f);
          for (const Fact& f : inst.conclusions) ++state[f];
          bool ok = go(state, next_step + advance, depth + 1,
                       fresh_used + inst.fresh_used);
          for (const Fact& f : inst.conclusions)
            if (--state[f] == 0) state.erase(f);
          for (const Fact& f : inst.consumed) ++state[f];
          if (ok) return true;
        }
      }
      return false;
    }
  };
  std::size_t per_rule = 0;
  for (const Rule& r : spec.rules)
    per_rule = std::max(per_rule, r.fresh_vars.size());
  Ctx ctx{spec, b, canon_target,
          b.fresh_budget ? b.fresh_budget
                         : b.max_steps * std::max<std::size_t>(per_rule, 1)};
  detail::State state;
  for (const auto& [name, f] : spec.restrictions)
    if (!evaluate(canon_target, Valuation{}, f, spec.theory)) return false;
  return ctx.go(state, 0, 0, 0);
}

// ---------------------------------------------------------------------------
// Bijective-renaming check (syntactic)
// ---------------------------------------------------------------------------

struct BrFinding {
  std::string rule;
  std::string message;
};

struct BrReport {
  bool ok = true;
  std::vector<BrFinding> findings;
};

// Sufficient syntactic criterion for closure of the trace set under
// bijective renaming of parties: no rule or restriction mentions a literal
// public name, and every Corrupted action carries a single pub-sorted
// variable.
inline BrReport check_br_syntactic(const ProtocolSpec& spec) {
  BrReport report;
  auto scan_fact = [&](const Rule& r, const Fact& f, const char* where) {
    std::set<Term> names;
    for (const Term& a : f.args) a.collect_names(names, Term::Kind::PubName);
    for (const Term& n : names)
      report.findings.push_back(
          {r.name, "rule '" + r.name + "' mentions public name " +
                       n.to_string() + " in " + where + " " + f.to_string()});
    if (f.symbol == kCorruptedFact) {
      bool ok_arg = f.args.size() == 1 && f.args[0].is_var() &&
                    f.args[0].sort() == Sort::Pub;
      if (!ok_arg)
        report.findings.push_back(
            {r.name, "rule '" + r.name + "': Corrupted action " +
                         f.to_string() +
                         " must carry a single pub-sorted variable"});
    }
  };
  for (const Rule& r : spec.rules) {
    for (const Fact& f : r.premises) scan_fact(r, f, "premise");
    for (const Fact& f : r.actions) scan_fact(r, f, "action");
    for (const Fact& f : r.conclusions) scan_fact(r, f, "conclusion");
  }
  for (const auto& [name, f] : spec.restrictions) {
    std::set<Term> names;
    detail::collect_formula_pub_names(f, names);
    for (const Term& n : names)
      report.findings.push_back(
          {name, "restriction '" + name + "' mentions public name " +
                     n.to_string()});
  }
  report.ok = report.findings.empty();
  return report;
}

// ---------------------------------------------------------------------------
// Protocol file parser (.msr)
// ---------------------------------------------------------------------------
//
//   functions: sig/2, verify/3, pk/1, sk/1, true/0, secret/1 [private]
//   equations: verify(sig(m, sk(i)), m, pk(sk(i))) = true
//   parties: 3            // or:  parties: 'M', 'E1', 'E2'
//   rule Name: [premises] --[actions]-> [conclusions]
//   restriction name: "formula"

inline ProtocolSpec parse_protocol(const std::string& text,
                                   const std::string& file = "<msr>") {
  ProtocolSpec spec;
  Tokenizer tz(text, file);
  FormulaParser fp(tz, spec.signature, /*lenient_functions=*/false);

  auto fact_list = [&]() {
    std::vector<Fact> facts;
    if (!tz.at_symbol("]") && !tz.at_symbol("]->")) {
      facts.push_back(fp.parse_fact());
      while (tz.accept_symbol(",")) facts.push_back(fp.parse_fact());
    }
    return facts;
  };

  while (tz.peek().type != Token::Type::End) {
    if (tz.accept_ident("functions")) {
      tz.expect_symbol(":");
      do {
        std::string name = tz.expect_name();
        tz.expect_symbol("/");
        if (tz.peek().type != Token::Type::Number)
          tz.fail("expected an arity");
        std::size_t arity = std::stoul(tz.take().text);
        bool priv = false;
        if (tz.accept_symbol("[")) {
          tz.expect_ident("private");
          tz.expect_symbol("]");
          priv = true;
        }
        spec.signature.add(FunctionSymbol{name, arity, priv});
      } while (tz.accept_symbol(","));
      continue;
    }
    if (tz.accept_ident("equations")) {
      tz.expect_symbol(":");
      do {
        Term lhs = fp.parse_term();
        tz.expect_symbol("=");
        Term rhs = fp.parse_term();
        spec.theory.add_rule(std::move(lhs), std::move(rhs));
      } while (tz.accept_symbol(","));
      continue;
    }
    if (tz.accept_ident("parties")) {
      tz.expect_symbol(":");
      if (tz.peek().type == Token::Type::Number) {
        spec.declared_pool_size = std::stoul(tz.take().text);
      } else {
        do {
          if (tz.peek().type != Token::Type::PubName)
            tz.fail("expected a quoted party name or a pool size");
          spec.declared_pool.push_back(Term::pub(tz.take().text));
        } while (tz.accept_symbol(","));
      }
      continue;
    }
    if (tz.accept_ident("rule")) {
      Rule r;
      r.name = tz.expect_name();
      tz.expect_symbol(":");
      tz.expect_symbol("[");
      r.premises = fact_list();
      if (!tz.accept_symbol("]")) tz.fail("expected ']'");
      tz.expect_symbol("--[");
      r.actions = fact_list();
      tz.expect_symbol("]->");
      tz.expect_symbol("[");
      r.conclusions = fact_list();
      if (!tz.accept_symbol("]")) tz.fail("expected ']'");
      spec.rules.push_back(std::move(r));
      continue;
    }
    if (tz.accept_ident("restriction")) {
      std::string name = tz.expect_name();
      tz.expect_symbol(":");
      const Token& t = tz.peek();
      if (t.type != Token::Type::String) tz.fail("expected a quoted formula");
      Token body = tz.take();
      FormulaPtr f = parse_formula(body.text, spec.signature, false, file,
                                   body.line, body.col + 1);
      spec.restrictions.emplace_back(std::move(name), std::move(f));
      continue;
    }
    tz.fail("expected a directive (functions, equations, parties, rule, "
            "restriction)");
  }
  spec.validate();
  return spec;
}

}  // namespace acclab
