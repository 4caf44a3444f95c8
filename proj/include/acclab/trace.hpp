#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "acclab/terms.hpp"

namespace acclab {

// One trace position: a set of ground facts, stored sorted and deduplicated.
using TraceStep = std::vector<Fact>;

inline TraceStep make_step(std::vector<Fact> facts) {
  std::sort(facts.begin(), facts.end());
  facts.erase(std::unique(facts.begin(), facts.end()), facts.end());
  return facts;
}

// Finite sequence of fact sets, indexed 1..|t| in the logic.
struct Trace {
  std::vector<TraceStep> steps;

  Trace() = default;
  explicit Trace(std::vector<TraceStep> s) : steps(std::move(s)) {}

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }

  // 1-based access, matching timepoint valuations.
  const TraceStep& at(std::size_t idx) const { return steps[idx - 1]; }

  friend bool operator==(const Trace& a, const Trace& b) {
    return a.steps == b.steps;
  }
  friend bool operator<(const Trace& a, const Trace& b) {
    return a.steps < b.steps;
  }

  void print(std::ostream& os) const {
    os << '[';
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (i) os << ", ";
      os << '{';
      for (std::size_t j = 0; j < steps[i].size(); ++j) {
        if (j) os << ", ";
        steps[i][j].print(os);
      }
      os << '}';
    }
    os << ']';
  }
  std::string to_string() const {
    std::ostringstream os;
    print(os);
    return os.str();
  }
};

inline std::ostream& operator<<(std::ostream& os, const Trace& t) {
  t.print(os);
  return os;
}

inline Trace make_trace(std::vector<std::vector<Fact>> steps) {
  Trace t;
  t.steps.reserve(steps.size());
  for (auto& s : steps) t.steps.push_back(make_step(std::move(s)));
  return t;
}

// The corrupted parties of a trace: arguments of Corrupted facts at any
// position.
inline std::set<Term> corrupted(const Trace& t) {
  std::set<Term> out;
  for (const TraceStep& step : t.steps)
    for (const Fact& f : step)
      if (f.symbol == kCorruptedFact && f.args.size() == 1)
        out.insert(f.args[0]);
  return out;
}

// Homomorphic renaming of public names throughout all facts. The mapping must
// be injective on its entries (a bijection extended by the identity).
inline Trace rename_parties(const Trace& t, const PartyRenaming& f) {
  std::set<Term> values;
  for (const auto& [from, to] : f) {
    if (from.kind() != Term::Kind::PubName ||
        to.kind() != Term::Kind::PubName)
      throw Error("rename_parties: mapping must relate public names");
    if (!values.insert(to).second)
      throw Error("rename_parties: mapping is not injective");
  }
  // Entries mapping onto an unmapped name that also occurs as a source are
  // fine (swaps); a target colliding with an unmoved occurrence is not
  // checked here, callers pass pool bijections.
  Trace out;
  out.steps.reserve(t.steps.size());
  for (const TraceStep& step : t.steps) {
    std::vector<Fact> facts;
    facts.reserve(step.size());
    for (const Fact& fact : step) facts.push_back(apply_renaming(f, fact));
    out.steps.push_back(make_step(std::move(facts)));
  }
  return out;
}

// Renames fresh names to ~n1, ~n2, ... in order of first occurrence, giving
// a canonical representative modulo bijective renaming of fresh names.
inline Trace canonicalize_fresh(const Trace& t) {
  std::map<std::string, std::string> renaming;
  auto canon_name = [&](const std::string& n) -> const std::string& {
    auto it = renaming.find(n);
    if (it != renaming.end()) return it->second;
    std::string fresh = "n" + std::to_string(renaming.size() + 1);
    return renaming.emplace(n, std::move(fresh)).first->second;
  };
  std::function<Term(const Term&)> canon = [&](const Term& x) -> Term {
    switch (x.kind()) {
      case Term::Kind::FreshName:
        return Term::fresh(canon_name(x.name()));
      case Term::Kind::App: {
        std::vector<Term> args;
        args.reserve(x.args().size());
        for (const Term& a : x.args()) args.push_back(canon(a));
        return Term::app(x.name(), std::move(args));
      }
      default:
        return x;
    }
  };
  Trace out;
  out.steps.reserve(t.steps.size());
  for (const TraceStep& step : t.steps) {
    std::vector<Fact> facts;
    facts.reserve(step.size());
    for (const Fact& f : step) {
      Fact g{f.symbol, {}};
      g.args.reserve(f.args.size());
      for (const Term& a : f.args) g.args.push_back(canon(a));
      facts.push_back(std::move(g));
    }
    out.steps.push_back(make_step(std::move(facts)));
  }
  return out;
}

// All subterms of all fact arguments; the candidate domain used by
// brute-force evaluation oracles.
inline std::set<Term> trace_subterms(const Trace& t) {
  std::set<Term> out;
  for (const TraceStep& step : t.steps)
    for (const Fact& f : step)
      for (const Term& a : f.args) a.collect_subterms(out);
  return out;
}

inline std::set<Term> trace_pub_names(const Trace& t) {
  std::set<Term> out;
  for (const TraceStep& step : t.steps)
    for (const Fact& f : step)
      for (const Term& a : f.args) a.collect_names(out, Term::Kind::PubName);
  return out;
}

}  // namespace acclab
