#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "acclab/accountability.hpp"
#include "acclab/conditions.hpp"
#include "acclab/diagnosis.hpp"
#include "acclab/protocol.hpp"

namespace acclab {

// Everything the check pipeline produces for one run; serialized to JSON
// (schema_version 1) or rendered as text with identical condition statuses.
struct RunReport {
  std::size_t bound = 0;
  std::vector<Term> pool;
  std::size_t trace_count = 0;

  ConditionReport conditions;           // axioms + trace properties + repp/br
  RelationAxiomReport relation_axioms;
  Diagnosis diagnosis;

  struct Witness {
    std::string condition;
    std::string trace;
  };
  std::vector<Witness> witnesses;

  void collect_witnesses() {
    witnesses.clear();
    for (const ConditionEntry& e : conditions.entries)
      for (const std::string& w : e.witnesses)
        witnesses.push_back({e.test.empty() ? e.name : e.name + "[" + e.test + "]", w});
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    nlohmann::json uni;
    uni["bound"] = bound;
    uni["parties"] = pool.size();
    nlohmann::json names = nlohmann::json::array();
    for (const Term& p : pool) names.push_back(p.to_string());
    uni["pool"] = names;
    uni["trace_count"] = trace_count;
    j["universe"] = uni;

    nlohmann::json conds = nlohmann::json::array();
    for (const ConditionEntry& e : conditions.entries) {
      nlohmann::json c;
      c["name"] = e.name;
      c["test"] = e.test;
      c["family"] = e.family;
      c["mode"] = e.mode;
      c["status"] = cond_status_name(e.status);
      c["witnesses"] = e.witnesses;
      c["detail"] = e.detail;
      conds.push_back(std::move(c));
    }
    j["conditions"] = conds;

    nlohmann::json rels = nlohmann::json::array();
    for (const RelationAxiomEntry& e : relation_axioms.entries) {
      nlohmann::json r;
      r["name"] = e.name;
      r["status"] = e.pass ? "pass" : "fail";
      r["counterexample"] = e.counterexample;
      rels.push_back(std::move(r));
    }
    j["relation_axioms"] = rels;

    nlohmann::json d;
    d["verdict"] = acc_verdict_name(diagnosis.verdict);
    d["failed"] = diagnosis.failed;
    nlohmann::json hints = nlohmann::json::array();
    for (const auto& [cond, text] : diagnosis.hints)
      hints.push_back({{"condition", cond}, {"hint", text}});
    d["hints"] = hints;
    d["disclaimer"] = "relative to bound " + std::to_string(bound) +
                      ", pool " + std::to_string(pool.size());
    j["diagnosis"] = d;

    nlohmann::json ws = nlohmann::json::array();
    for (const Witness& w : witnesses)
      ws.push_back({{"condition", w.condition}, {"trace", w.trace}});
    j["witnesses"] = ws;
    return j;
  }

  std::string to_text() const {
    std::string out;
    out += "universe: bound " + std::to_string(bound) + ", pool " +
           std::to_string(pool.size()) + " (";
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (i) out += ", ";
      out += pool[i].to_string();
    }
    out += "), " + std::to_string(trace_count) + " traces\n\nconditions:\n";
    for (const ConditionEntry& e : conditions.entries) {
      out += "  " + e.name;
      if (!e.test.empty()) out += "[" + e.test + "]";
      out += " (" + e.family;
      if (!e.mode.empty()) out += ", " + e.mode;
      out += "): ";
      out += cond_status_name(e.status);
      if (!e.detail.empty()) out += " -- " + e.detail;
      out += "\n";
      for (const std::string& w : e.witnesses)
        out += "      witness: " + w + "\n";
    }
    out += "\nrelation axioms:\n";
    for (const RelationAxiomEntry& e : relation_axioms.entries) {
      out += "  " + e.name + ": " + (e.pass ? "pass" : "fail");
      if (!e.pass) out += " -- " + e.counterexample;
      out += "\n";
    }
    out += "\ndiagnosis: " + std::string(acc_verdict_name(diagnosis.verdict));
    out += " (relative to bound " + std::to_string(bound) + ", pool " +
           std::to_string(pool.size()) + ")\n";
    for (const std::string& f : diagnosis.failed) out += "  failed: " + f + "\n";
    for (const auto& [cond, hint] : diagnosis.hints)
      out += "  hint (" + cond + "): " + hint + "\n";
    return out;
  }
};

}  // namespace acclab
