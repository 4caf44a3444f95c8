#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "acclab/accountability.hpp"
#include "acclab/conditions.hpp"

namespace acclab {

enum class AccVerdict { Holds, Violated, Inconclusive };

inline const char* acc_verdict_name(AccVerdict v) {
  switch (v) {
    case AccVerdict::Holds: return "acc_holds";
    case AccVerdict::Violated: return "acc_violated";
    case AccVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Diagnosis {
  AccVerdict verdict = AccVerdict::Holds;
  std::vector<std::string> failed;  // "name" or "name[test]"
  std::vector<std::pair<std::string, std::string>> hints;
  // Any positive verdict is relative to the explored bound and pool.
  bool finite_universe_disclaimer = true;
};

namespace detail {

inline std::string repair_hint(const std::string& cond) {
  if (cond == "suff")
    return "In every single-matched trace of this test at least one "
           "corrupted party is not among the instantiated free variables. "
           "Adding free variables and action constraints so that all parties "
           "needed for a violation are blamed may repair the test.";
  if (cond == "verif_empty")
    return "A trace violates the property although no case test matches. "
           "The witness may hint at an additional case test, or it shows "
           "the property can be violated in an unintended way.";
  if (cond == "verif_nonempty")
    return "The test matches a trace that does not violate the property. "
           "The witness may hint at revising the test so that every trace "
           "in which it holds violates the property.";
  if (cond == "min")
    return "Another test matches with a strictly smaller party set in the "
           "same trace. Replacing tau_i with tau_i & not (tau_j & "
           "[[fv(tau_j) strict-subset fv(tau_i)]]) separates the tests.";
  if (cond == "uniq")
    return "A party is blamed without having been corrupted. If the "
           "variable in question can never be corrupted, quantify it inside "
           "the test; otherwise the test and the protocol need a closer "
           "look.";
  if (cond == "single")
    return "No single-matched trace exists: either the test never holds, or "
           "it always holds with multiple instantiations (if they are "
           "permutations of each other, making the test antisymmetric may "
           "help), or another test always holds at the same time (consider "
           "merging the tests).";
  if (cond == "inj")
    return "An instantiation maps distinct free variables to the same "
           "party. Split the test into one case test per partition of its "
           "free variables.";
  if (cond == "repp")
    return "The trace set is not closed under replacing the instantiation "
           "of a single-matched trace at this bound; check the "
           "bijective-renaming findings.";
  return "";
}

}  // namespace detail

// Maps a complete condition report onto an accountability verdict with the
// per-condition repair hints. A failure of verif_empty, verif_nonempty, min
// or uniq refutes accountability; failures of only suff, single, inj or repp
// leave it open; if everything passes, the conditions are sufficient for
// accountability on the explored universe.
inline Diagnosis diagnose(const ConditionReport& report) {
  static const std::set<std::string> kViolating{"verif_empty",
                                                "verif_nonempty", "min",
                                                "uniq"};
  static const std::set<std::string> kInconclusive{"suff", "single", "inj",
                                                   "repp"};
  std::set<std::string> present;
  Diagnosis d;
  bool violated = false;
  bool open = false;
  for (const ConditionEntry& e : report.entries) {
    if (e.family != "trace-property" && e.name != "repp") continue;
    present.insert(e.name);
    if (e.status == CondStatus::Pass) continue;
    std::string label = e.test.empty() ? e.name : e.name + "[" + e.test + "]";
    d.failed.push_back(label);
    std::string hint = detail::repair_hint(e.name);
    if (!hint.empty()) d.hints.emplace_back(label, hint);
    if (kViolating.count(e.name)) violated = true;
    if (kInconclusive.count(e.name)) open = true;
  }
  std::vector<std::string> missing;
  for (const char* required : {"verif_empty", "verif_nonempty", "min", "uniq",
                               "suff", "single", "inj", "repp"})
    if (!present.count(required)) missing.push_back(required);
  if (!missing.empty()) {
    std::string msg = "diagnosis requires a complete report; missing:";
    for (const std::string& m : missing) msg += " " + m;
    throw SpecError(msg);
  }
  d.verdict = violated ? AccVerdict::Violated
              : open   ? AccVerdict::Inconclusive
                       : AccVerdict::Holds;
  return d;
}

// ---------------------------------------------------------------------------
// Injectivity splitting
// ---------------------------------------------------------------------------

namespace detail {

// Set partitions as restricted growth strings, lexicographic.
inline void enumerate_partitions(std::size_t n,
                                 std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> rgs(n, 0);
  for (;;) {
    out.push_back(rgs);
    bool advanced = false;
    for (std::size_t i = n; i-- > 1;) {
      std::size_t max_prefix = 0;
      for (std::size_t j = 0; j < i; ++j)
        max_prefix = std::max(max_prefix, rgs[j]);
      if (rgs[i] <= max_prefix) {
        ++rgs[i];
        for (std::size_t j = i + 1; j < n; ++j) rgs[j] = 0;
        advanced = true;
        break;
      }
    }
    if (!advanced) return;
  }
}

}  // namespace detail

// One case test per partition of the free variables: the variables of each
// block are merged into a single variable and representatives of distinct
// blocks are constrained to differ, so each output satisfies instance
// injectivity and every match of the input is picked up by exactly one
// output. A test with a single free variable yields only itself. The output
// size is the Bell number of |fv|.
inline std::vector<CaseTest> split_for_injectivity(const CaseTest& ct) {
  std::vector<std::vector<std::size_t>> partitions;
  detail::enumerate_partitions(ct.free_vars.size(), partitions);
  std::vector<CaseTest> out;
  out.reserve(partitions.size());
  if (partitions.size() == 1) {
    out.push_back(ct);
    return out;
  }
  std::size_t counter = 0;
  for (const std::vector<std::size_t>& rgs : partitions) {
    std::size_t blocks = 0;
    for (std::size_t b : rgs) blocks = std::max(blocks, b + 1);
    std::map<Variable, Variable> renaming;
    std::vector<Variable> representatives;
    for (std::size_t b = 0; b < blocks; ++b) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < rgs.size(); ++i)
        if (rgs[i] == b) members.push_back(i);
      if (members.size() < 2) {
        representatives.push_back(ct.free_vars[members[0]]);
        continue;
      }
      std::string name;
      for (std::size_t i : members) {
        if (!name.empty()) name += "_";
        name += ct.free_vars[i].name;
      }
      Variable target{name, Sort::Pub};
      for (std::size_t i : members) renaming[ct.free_vars[i]] = target;
      representatives.push_back(target);
    }
    std::vector<FormulaPtr> distinct;
    for (std::size_t a = 0; a < representatives.size(); ++a)
      for (std::size_t b = a + 1; b < representatives.size(); ++b)
        distinct.push_back(Formula::lnot(
            Formula::term_eq(Term::var(representatives[a]),
                             Term::var(representatives[b]))));
    FormulaPtr body = ct.body->rename_vars(renaming);
    if (!distinct.empty()) {
      if (body->kind() == Formula::Kind::Exists) {
        body = Formula::exists(
            body->vars(),
            Formula::land(body->child(), Formula::conj(distinct)));
      } else {
        body = Formula::land(body, Formula::conj(distinct));
      }
    }
    ++counter;
    out.push_back(CaseTest::make(
        ct.name + "_split" + std::to_string(counter), body));
  }
  return out;
}

}  // namespace acclab
