#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "acclab/accountability.hpp"
#include "acclab/conditions.hpp"
#include "acclab/parser.hpp"

namespace acclab {

// ---------------------------------------------------------------------------
// Accountability specifications (.acc)
// ---------------------------------------------------------------------------
//
//   test t1:
//     "Ex data #i. LeakManager($m, data) @ #i"
//   lemma acc:
//     t1, t2 accounts for
//     "not (Ex m d #i. LeakManager(m, d) @ #i)"

struct NamedFormulaText {
  std::string name;
  std::string text;  // verbatim formula source, kept for round-tripping
  FormulaPtr formula;
};

struct AccLemma {
  std::string name;
  std::vector<std::string> test_names;
  std::string property_text;
  FormulaPtr property;
};

struct AccountabilitySpec {
  std::vector<NamedFormulaText> tests;
  std::vector<AccLemma> lemmas;

  const NamedFormulaText* find_test(const std::string& name) const {
    for (const NamedFormulaText& t : tests)
      if (t.name == name) return &t;
    return nullptr;
  }

  // Case tests for one lemma, in the lemma's declaration order.
  std::vector<CaseTest> case_tests(const AccLemma& lemma,
                                   const std::set<std::string>& roots =
                                       detail::builtin_rule_roots()) const {
    std::vector<CaseTest> out;
    out.reserve(lemma.test_names.size());
    for (const std::string& name : lemma.test_names) {
      const NamedFormulaText* t = find_test(name);
      if (!t) throw SpecError("unknown case test '" + name + "'");
      out.push_back(CaseTest::make(t->name, t->formula, roots));
    }
    return out;
  }
};

// Parses an accountability specification. Unknown function symbols in
// formulas are registered with the arity of their first use, so .acc files
// can also be processed without the protocol that declares the signature.
inline AccountabilitySpec parse_accspec(const std::string& text,
                                        Signature& sig,
                                        const std::string& file = "<acc>") {
  AccountabilitySpec spec;
  Tokenizer tz(text, file);
  std::set<std::string> test_names;
  std::set<std::string> lemma_names;

  auto quoted_formula = [&](std::string* raw) {
    if (tz.peek().type != Token::Type::String)
      tz.fail("expected a quoted formula");
    Token body = tz.take();
    *raw = body.text;
    return parse_formula(body.text, sig, /*lenient_functions=*/true, file,
                         body.line, body.col + 1);
  };

  while (tz.peek().type != Token::Type::End) {
    if (tz.accept_ident("test")) {
      NamedFormulaText t;
      t.name = tz.expect_name();
      if (!test_names.insert(t.name).second)
        tz.fail("duplicate case test name '" + t.name + "'");
      tz.expect_symbol(":");
      t.formula = quoted_formula(&t.text);
      spec.tests.push_back(std::move(t));
      continue;
    }
    if (tz.accept_ident("lemma")) {
      AccLemma l;
      l.name = tz.expect_name();
      if (!lemma_names.insert(l.name).second)
        tz.fail("duplicate lemma name '" + l.name + "'");
      tz.expect_symbol(":");
      l.test_names.push_back(tz.expect_name());
      while (tz.accept_symbol(",")) l.test_names.push_back(tz.expect_name());
      if (!tz.accept_ident("accounts") && !tz.accept_ident("account"))
        tz.fail("expected 'account for' or 'accounts for'");
      tz.expect_ident("for");
      l.property = quoted_formula(&l.property_text);
      for (const std::string& name : l.test_names)
        if (!test_names.count(name))
          tz.fail("lemma '" + l.name + "' references undefined test '" +
                  name + "'");
      spec.lemmas.push_back(std::move(l));
      continue;
    }
    tz.fail("expected 'test' or 'lemma'");
  }
  if (!spec.lemmas.empty())
    for (const AccLemma& l : spec.lemmas)
      if (l.test_names.empty())
        throw SpecError("lemma '" + l.name + "' has no case tests");
  return spec;
}

// Canonical textual form; parse_accspec(print_accspec(s)) reproduces s.
inline std::string print_accspec(const AccountabilitySpec& spec) {
  std::string out;
  for (const NamedFormulaText& t : spec.tests) {
    out += "test " + t.name + ":\n  \"" + t.formula->to_string() + "\"\n\n";
  }
  for (const AccLemma& l : spec.lemmas) {
    out += "lemma " + l.name + ":\n  ";
    for (std::size_t i = 0; i < l.test_names.size(); ++i) {
      if (i) out += ", ";
      out += l.test_names[i];
    }
    out += l.test_names.size() == 1 ? " accounts for" : " account for";
    out += "\n  \"" + l.property->to_string() + "\"\n\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lemma emission
// ---------------------------------------------------------------------------

// Emits one Tamarin-style standard lemma per compiled verification
// condition, named <lemma>_<test>_<suffix>; the test name is left out for
// verif_empty, which appears once per accountability lemma. Existential
// conditions become exists-trace lemmas, universal ones all-traces.
inline std::string emit_lemmas(const AccountabilitySpec& spec,
                               const std::set<std::string>& roots =
                                   detail::builtin_rule_roots()) {
  static const char* kSuffixOrder[] = {"suff",  "verif_empty",
                                       "verif_nonempty", "min",
                                       "uniq",  "inj",
                                       "single"};
  std::string out;
  std::set<std::string> emitted_names;
  for (const AccLemma& lemma : spec.lemmas) {
    std::vector<CaseTest> tests = spec.case_tests(lemma, roots);
    std::vector<CompiledCondition> compiled =
        compile_conditions(tests, lemma.property);
    auto find = [&](const std::string& name,
                    const std::string& test) -> const CompiledCondition& {
      for (const CompiledCondition& c : compiled)
        if (c.name == name && c.test == test) return c;
      throw Error("missing compiled condition " + name);
    };
    bool empty_done = false;
    for (const CaseTest& ct : tests) {
      for (const char* suffix : kSuffixOrder) {
        if (std::string(suffix) == "verif_empty") {
          if (empty_done) continue;
          empty_done = true;
          const CompiledCondition& c = find("verif_empty", "");
          std::string name = lemma.name + "_verif_empty";
          if (!emitted_names.insert(name).second)
            throw SpecError("duplicate generated lemma name '" + name + "'");
          out += "lemma " + name + ": all-traces\n  \"" +
                 c.formula->to_string() + "\"\n\n";
          continue;
        }
        const CompiledCondition& c = find(suffix, ct.name);
        std::string name = lemma.name + "_" + ct.name + "_" + suffix;
        if (!emitted_names.insert(name).second)
          throw SpecError("duplicate generated lemma name '" + name + "'");
        out += "lemma " + name + ": " +
               (c.exists_mode ? "exists-trace" : "all-traces") + "\n  \"" +
               c.formula->to_string() + "\"\n\n";
      }
    }
  }
  return out;
}

}  // namespace acclab
