#pragma once

// Seeded random inputs for property tests: ground terms, traces, and
// formulas in the guarded fragment.

#include <random>
#include <string>
#include <vector>

#include "acclab/formula.hpp"
#include "acclab/terms.hpp"
#include "acclab/trace.hpp"

namespace acclab::testing {

struct Gen {
  std::mt19937 rng;

  explicit Gen(std::uint32_t seed) : rng(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  bool coin(double p = 0.5) {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
  }
};

inline Term random_ground_term(Gen& g, int depth = 2) {
  if (depth == 0 || g.coin(0.45)) {
    switch (g.pick(5)) {
      case 0: return Term::pub("A1");
      case 1: return Term::pub("A2");
      case 2: return Term::pub("B");
      case 3: return Term::fresh("n1");
      default: return Term::fresh("n2");
    }
  }
  switch (g.pick(3)) {
    case 0:
      return pair_term(random_ground_term(g, depth - 1),
                       random_ground_term(g, depth - 1));
    case 1:
      return Term::app("h", {random_ground_term(g, depth - 1)});
    default:
      return Term::app("fst", {pair_term(random_ground_term(g, depth - 1),
                                         random_ground_term(g, depth - 1))});
  }
}

// Normal-form ground terms, the shape users write inside formulas.
inline Term random_ground_value(Gen& g, int depth = 1) {
  if (depth == 0 || g.coin(0.6)) {
    switch (g.pick(4)) {
      case 0: return Term::pub("A1");
      case 1: return Term::pub("A2");
      case 2: return Term::pub("B");
      default: return Term::fresh("n1");
    }
  }
  if (g.coin())
    return pair_term(random_ground_value(g, depth - 1),
                     random_ground_value(g, depth - 1));
  return Term::app("h", {random_ground_value(g, depth - 1)});
}

// Vocabulary shared by random traces and random formulas.
inline const std::vector<std::pair<std::string, std::size_t>>&
fact_vocabulary() {
  static const std::vector<std::pair<std::string, std::size_t>> kVocab{
      {"A", 1}, {"B", 2}, {"C", 1}, {kCorruptedFact, 1}};
  return kVocab;
}

inline Trace random_trace(Gen& g, const RewriteTheory& th,
                          std::size_t max_steps = 4) {
  std::vector<std::vector<Fact>> steps;
  std::size_t n = g.pick(static_cast<int>(max_steps) + 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Fact> facts;
    std::size_t m = 1 + g.pick(3);
    for (std::size_t j = 0; j < m; ++j) {
      const auto& [symbol, arity] =
          fact_vocabulary()[g.pick(static_cast<int>(fact_vocabulary().size()))];
      Fact f{symbol, {}};
      for (std::size_t a = 0; a < arity; ++a)
        f.args.push_back(th.normalize(random_ground_term(g)));
      facts.push_back(std::move(f));
    }
    steps.push_back(std::move(facts));
  }
  return make_trace(std::move(steps));
}

// One guarded quantifier block. All quantified variables occur in the guard
// action, except for an optional pair bound through a destructuring
// equality.
inline FormulaPtr random_guarded_block(Gen& g, int depth) {
  bool universal = g.coin(0.4);
  std::string suffix = std::to_string(g.pick(1000));
  Variable tp{"i" + suffix, Sort::Temp};

  const auto& [symbol, arity] =
      fact_vocabulary()[g.pick(static_cast<int>(fact_vocabulary().size()))];
  std::vector<Variable> vars;
  Fact guard{symbol, {}};
  for (std::size_t a = 0; a < arity; ++a) {
    if (g.coin(0.7)) {
      Variable v{"x" + std::to_string(a) + suffix, Sort::Msg};
      vars.push_back(v);
      guard.args.push_back(Term::var(v));
    } else {
      guard.args.push_back(random_ground_value(g, 1));
    }
  }
  vars.push_back(tp);
  FormulaPtr guard_atom = Formula::action(guard, Term::var(tp));

  std::vector<FormulaPtr> rest;
  if (!vars.empty() && g.coin(0.6)) {
    // an equality or ordering over the bound variables
    if (vars.size() >= 2 && vars[0].sort == Sort::Msg && g.coin()) {
      rest.push_back(Formula::term_eq(Term::var(vars[0]),
                                      random_ground_value(g, 1)));
    } else {
      rest.push_back(Formula::time_eq(Term::var(tp), Term::var(tp)));
    }
  }
  if (!universal && !guard.args.empty() && guard.args[0].is_var() &&
      g.coin(0.25)) {
    // destructuring: m = <p, q> binds p and q through the equality; only
    // existential blocks keep such variables guarded
    Variable p{"p" + suffix, Sort::Msg};
    Variable q{"q" + suffix, Sort::Msg};
    vars.push_back(p);
    vars.push_back(q);
    rest.push_back(Formula::term_eq(
        guard.args[0], pair_term(Term::var(p), Term::var(q))));
    rest.push_back(Formula::term_eq(Term::var(p), Term::var(p)));
  }
  if (depth > 0 && g.coin(0.5)) rest.push_back(random_guarded_block(g, depth - 1));
  if (rest.empty()) rest.push_back(Formula::truth());

  if (universal)
    return Formula::forall(vars,
                           Formula::implies(guard_atom, Formula::conj(rest)));
  return Formula::exists(vars, Formula::land(guard_atom, Formula::conj(rest)));
}

inline FormulaPtr random_guarded_formula(Gen& g, int depth = 1) {
  FormulaPtr f = random_guarded_block(g, depth);
  if (g.coin(0.3)) f = Formula::lnot(f);
  if (g.coin(0.25)) f = Formula::lor(f, random_guarded_block(g, 0));
  if (g.coin(0.25)) f = Formula::land(f, random_guarded_block(g, 0));
  return f;
}

}  // namespace acclab::testing
