#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acclab/accspec.hpp"
#include "acclab/campaign.hpp"
#include "acclab/diagnosis.hpp"
#include "acclab/report.hpp"

namespace acclab {

// Exit codes: 0 accountability holds, 1 violated, 2 inconclusive,
// 3 input error.
enum ExitCode {
  kExitHolds = 0,
  kExitViolated = 1,
  kExitInconclusive = 2,
  kExitInputError = 3,
};

namespace cli_detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_output(const std::string& out_path, const std::string& s,
                         std::ostream& fallback) {
  if (out_path.empty()) {
    fallback << s;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw Error("cannot open output file: " + out_path);
  out << s;
}

struct CommonOptions {
  std::string msr_path;
  std::string acc_path;
  std::size_t bound = 5;
  std::optional<std::size_t> parties;
  std::vector<std::string> pool_names;
  std::string format = "text";
  std::string out_path;
  std::string relation = "ctr";
  std::size_t state_cap = 1'000'000;
};

inline EnumerationBounds make_bounds(const CommonOptions& opt,
                                     const ProtocolSpec& spec) {
  EnumerationBounds b;
  b.max_steps = opt.bound;
  b.state_cap = opt.state_cap;
  if (!opt.pool_names.empty()) {
    for (const std::string& n : opt.pool_names) b.pool.push_back(Term::pub(n));
  } else if (opt.parties) {
    b.pool = default_pool(*opt.parties);
  } else if (!spec.declared_pool.empty()) {
    b.pool = spec.declared_pool;
  } else if (spec.declared_pool_size > 0) {
    b.pool = default_pool(spec.declared_pool_size);
  } else {
    b.pool = default_pool(3);
  }
  return b;
}

inline Relation make_relation(const CommonOptions& opt, const Universe& u) {
  if (opt.relation == "ctr") return Relation::ctr();
  const std::string prefix = "file:";
  if (opt.relation.rfind(prefix, 0) != 0)
    throw Error("--relation expects 'ctr' or 'file:PATH'");
  std::string path = opt.relation.substr(prefix.size());
  std::ifstream in(path);
  if (!in) throw Error("cannot open relation file: " + path);
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t a = 0, b = 0;
  while (in >> a >> b) {
    if (a >= u.size() || b >= u.size())
      throw Error("relation file references trace index beyond the universe");
    pairs.insert({a, b});
  }
  return Relation::explicit_pairs(std::move(pairs));
}

struct LoadedProblem {
  ProtocolSpec protocol;
  AccountabilitySpec acc;
  EnumerationBounds bounds;
  std::vector<Trace> traces;
};

inline LoadedProblem load(const CommonOptions& opt, bool need_acc = true) {
  LoadedProblem p;
  p.protocol = parse_protocol(read_file(opt.msr_path), opt.msr_path);
  if (need_acc) {
    Signature sig = p.protocol.signature;
    p.acc = parse_accspec(read_file(opt.acc_path), sig, opt.acc_path);
    if (p.acc.lemmas.empty())
      throw SpecError(opt.acc_path + ": no accountability lemma defined");
  }
  p.bounds = make_bounds(opt, p.protocol);
  p.traces = enumerate_traces(p.protocol, p.bounds);
  return p;
}

inline int run_check(const CommonOptions& opt) {
  LoadedProblem p = load(opt);
  RunReport report;
  report.bound = p.bounds.max_steps;
  report.pool = p.bounds.pool;
  report.trace_count = p.traces.size();

  BrReport br = check_br_syntactic(p.protocol);
  AccVerdict worst = AccVerdict::Holds;
  bool first_lemma = true;
  RelationAxiomReport relax;
  std::vector<std::string> all_failed;
  std::vector<std::pair<std::string, std::string>> all_hints;

  for (const AccLemma& lemma : p.acc.lemmas) {
    std::vector<CaseTest> tests =
        p.acc.case_tests(lemma, rule_roots(p.protocol.theory));
    Universe u(p.traces, tests, lemma.property, p.protocol.theory);

    for (const auto& [name, sat] : check_case_test_satisfiable(u))
      if (!sat)
        throw SpecError("case test '" + name +
                        "' matches no trace of the universe (bound " +
                        std::to_string(p.bounds.max_steps) + ", pool " +
                        std::to_string(p.bounds.pool.size()) + ")");

    Relation rel = make_relation(opt, u);
    RelationMatrix rm(u, rel);
    if (first_lemma) {
      relax = check_relation_axioms(u, rm);
      first_lemma = false;
    }

    ConditionReport lemma_report = check_axioms(u, rm);
    std::vector<CompiledCondition> compiled =
        compile_conditions(tests, lemma.property);
    lemma_report.append(check_compiled(u, compiled));
    bool insi = lemma_report.all_pass("inj");
    lemma_report.append(check_repp_bruteforce(u, insi));

    ConditionEntry br_entry;
    br_entry.name = "br";
    br_entry.family = "syntactic";
    br_entry.status = br.ok ? CondStatus::Pass : CondStatus::Fail;
    for (const BrFinding& f : br.findings)
      br_entry.witnesses.push_back(f.message);
    lemma_report.entries.push_back(br_entry);

    Diagnosis d = diagnose(lemma_report);
    std::string prefix = p.acc.lemmas.size() > 1 ? lemma.name + ": " : "";
    for (const std::string& f : d.failed) all_failed.push_back(prefix + f);
    for (const auto& [c, h] : d.hints) all_hints.emplace_back(prefix + c, h);
    if (d.verdict == AccVerdict::Violated) {
      worst = AccVerdict::Violated;
    } else if (d.verdict == AccVerdict::Inconclusive &&
               worst == AccVerdict::Holds) {
      worst = AccVerdict::Inconclusive;
    }
    if (p.acc.lemmas.size() > 1)
      for (ConditionEntry& e : lemma_report.entries)
        e.detail = e.detail.empty() ? "lemma " + lemma.name : e.detail;
    report.conditions.append(lemma_report);
  }

  report.relation_axioms = relax;
  report.diagnosis.verdict = worst;
  report.diagnosis.failed = std::move(all_failed);
  report.diagnosis.hints = std::move(all_hints);
  report.collect_witnesses();

  std::string rendered = opt.format == "json"
                             ? report.to_json().dump(2) + "\n"
                             : report.to_text();
  write_output(opt.out_path, rendered, std::cout);
  switch (report.diagnosis.verdict) {
    case AccVerdict::Holds: return kExitHolds;
    case AccVerdict::Violated: return kExitViolated;
    case AccVerdict::Inconclusive: return kExitInconclusive;
  }
  return kExitInputError;
}

inline int run_emit(const CommonOptions& opt) {
  Signature sig;
  AccountabilitySpec acc =
      parse_accspec(read_file(opt.acc_path), sig, opt.acc_path);
  if (acc.lemmas.empty())
    throw SpecError(opt.acc_path + ": no accountability lemma defined");
  write_output(opt.out_path, emit_lemmas(acc), std::cout);
  return kExitHolds;
}

inline int run_apv(const CommonOptions& opt,
                   std::optional<std::size_t> trace_index) {
  LoadedProblem p = load(opt);
  const AccLemma& lemma = p.acc.lemmas.front();
  std::vector<CaseTest> tests =
      p.acc.case_tests(lemma, rule_roots(p.protocol.theory));
  Universe u(p.traces, tests, lemma.property, p.protocol.theory);
  RelationMatrix rel(u, make_relation(opt, u));

  nlohmann::json traces_json = nlohmann::json::array();
  std::string text;
  std::size_t lo = 0, hi = u.size();
  if (trace_index) {
    if (*trace_index >= u.size())
      throw Error("trace index " + std::to_string(*trace_index) +
                  " out of range (universe has " + std::to_string(u.size()) +
                  " traces)");
    lo = *trace_index;
    hi = *trace_index + 1;
  }
  for (std::size_t i = lo; i < hi; ++i) {
    Verdict vf = u.verdict(i);
    Verdict a = apv(u, rel, i);
    if (opt.format == "json") {
      nlohmann::json t;
      t["index"] = i;
      t["trace"] = u.trace(i).to_string();
      t["verdict"] = verdict_to_string(vf);
      nlohmann::json ms = nlohmann::json::array();
      for (const CtrMatch& m : u.ctr(i))
        ms.push_back({{"test", m.test}, {"instantiation", m.inst.to_string()}});
      t["ctr"] = ms;
      t["apv"] = verdict_to_string(a);
      t["violates"] = u.violates(i);
      traces_json.push_back(std::move(t));
    } else {
      text += "trace " + std::to_string(i) + ": " + u.trace(i).to_string() +
              "\n";
      text += "  violates property: " + std::string(u.violates(i) ? "yes" : "no") + "\n";
      text += "  ctr:";
      for (const CtrMatch& m : u.ctr(i))
        text += " (" + m.test + ", " + m.inst.to_string() + ")";
      text += "\n  verdict: " + verdict_to_string(vf) + "\n";
      text += "  apv:     " + verdict_to_string(a) + "\n";
    }
  }
  if (opt.format == "json") {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["universe"] = {{"bound", p.bounds.max_steps},
                     {"parties", p.bounds.pool.size()},
                     {"trace_count", u.size()}};
    j["traces"] = traces_json;
    write_output(opt.out_path, j.dump(2) + "\n", std::cout);
  } else {
    write_output(opt.out_path, text, std::cout);
  }
  return kExitHolds;
}

inline int run_oracle(const CommonOptions& opt,
                      std::optional<std::uint32_t> seed,
                      std::size_t campaign_size) {
  if (seed) {
    CampaignResult res = run_campaign(campaign_size, *seed);
    std::string text = "campaign: " + std::to_string(res.protocols) +
                       " random protocols, " +
                       std::to_string(res.discrepancies.size()) +
                       " discrepancies\n";
    for (const std::string& d : res.discrepancies) text += "  " + d + "\n";
    write_output(opt.out_path, text, std::cout);
    return res.clean() ? kExitHolds : kExitViolated;
  }
  LoadedProblem p = load(opt);
  const AccLemma& lemma = p.acc.lemmas.front();
  std::vector<CaseTest> tests =
      p.acc.case_tests(lemma, rule_roots(p.protocol.theory));
  Universe u(p.traces, tests, lemma.property, p.protocol.theory);
  for (const auto& [name, sat] : check_case_test_satisfiable(u))
    if (!sat)
      throw SpecError("case test '" + name +
                      "' matches no trace of the universe");
  RelationMatrix rel(u, make_relation(opt, u));
  AccountabilityResult res = check_accountability(u, rel);
  std::string text;
  if (res.holds) {
    text = "accountability holds on the universe (" +
           std::to_string(u.size()) + " traces, bound " +
           std::to_string(p.bounds.max_steps) + ", pool " +
           std::to_string(p.bounds.pool.size()) + ")\n";
  } else {
    text = "accountability fails; witness trace " +
           std::to_string(*res.witness) + ": " +
           u.trace(*res.witness).to_string() + "\n  verdict: " +
           verdict_to_string(res.witness_verdict) + "\n  apv:     " +
           verdict_to_string(res.witness_apv) + "\n";
  }
  write_output(opt.out_path, text, std::cout);
  return res.holds ? kExitHolds : kExitViolated;
}

}  // namespace cli_detail

// The batch tool: check / emit / apv / oracle.
inline int run(std::vector<std::string> args) {
  CLI::App app{"acclab: accountability verification workbench"};
  app.require_subcommand(1);

  cli_detail::CommonOptions opt;
  std::optional<std::size_t> trace_index;
  std::optional<std::uint32_t> seed;
  std::size_t campaign_size = 200;

  auto add_common = [&](CLI::App* cmd, bool needs_msr, bool needs_acc) {
    if (needs_msr)
      cmd->add_option("protocol", opt.msr_path, "protocol file (.msr)")
          ->required();
    if (needs_acc)
      cmd->add_option("spec", opt.acc_path, "accountability spec (.acc)")
          ->required();
    cmd->add_option("--bound", opt.bound, "max rule applications (default 5)");
    cmd->add_option("--parties", opt.parties,
                    "party pool size (default 3, pool 'A1'..'Ap')");
    cmd->add_option("--pool", opt.pool_names,
                    "explicit party pool names (overrides --parties)");
    cmd->add_option("--format", opt.format, "output format: text|json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--out", opt.out_path, "write output to FILE");
    cmd->add_option("--relation", opt.relation,
                    "counterfactual relation: ctr|file:PATH");
    cmd->add_option("--state-cap", opt.state_cap,
                    "enumeration node cap (default 1000000)");
  };

  CLI::App* check = app.add_subcommand(
      "check", "enumerate the universe and check all verification conditions");
  add_common(check, true, true);

  CLI::App* emit =
      app.add_subcommand("emit", "compile accountability lemmas to Tamarin "
                                 "standard lemmas");
  emit->add_option("spec", opt.acc_path, "accountability spec (.acc)")
      ->required();
  emit->add_option("--out", opt.out_path, "write output to FILE");

  CLI::App* apv_cmd = app.add_subcommand(
      "apv", "print verdict, ctr and a-posteriori verdict per trace");
  add_common(apv_cmd, true, true);
  apv_cmd->add_option("--trace", trace_index, "single trace index");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "direct accountability check (brute force); with --seed, run "
                "a random-protocol property campaign");
  add_common(oracle, false, false);
  oracle->add_option("protocol", opt.msr_path, "protocol file (.msr)");
  oracle->add_option("spec", opt.acc_path, "accountability spec (.acc)");
  oracle->add_option("--seed", seed, "campaign RNG seed");
  oracle->add_option("--campaign", campaign_size,
                     "campaign size (default 200)");

  try {
    std::vector<const char*> argv;
    argv.push_back("acclab");
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitHolds : kExitInputError;
  }

  try {
    if (check->parsed()) return cli_detail::run_check(opt);
    if (emit->parsed()) return cli_detail::run_emit(opt);
    if (apv_cmd->parsed()) return cli_detail::run_apv(opt, trace_index);
    if (oracle->parsed()) {
      if (!seed && (opt.msr_path.empty() || opt.acc_path.empty()))
        throw Error("oracle needs a protocol and a spec, or --seed for a "
                    "campaign");
      return cli_detail::run_oracle(opt, seed, campaign_size);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace acclab
