#pragma once

#include "pmkt/diagnostics.hpp"
#include "pmkt/io.hpp"
#include "pmkt/validate.hpp"

namespace pmkt {

// Full normative-property bundle for `pmkt report`.
inline json diagnostics_report(const Instance& inst, const BuiltProblem& built,
                               const PriceVector& p, const Assignment& x, double alpha) {
  auto P = EquilibriumProblem::build(inst, built.system, built.feasible, alpha);
  json out;
  auto cert = make_certificate(P, p, x, Tol::eq_residual);
  out["equilibrium"] = certificate_to_json(cert, SolverConfig{}, inst)["residuals"];
  out["converged"] = cert.converged;

  auto mem = membership(built.feasible, x);
  json jm;
  jm["ok"] = mem.ok;
  jm["violation"] = mem.violation;
  jm["mode"] = mem.mode;
  out["membership"] = jm;
  out["maximality_gap"] = cert.maximality_gap;

  auto pareto = pareto_test(P.util, x, built.feasible);
  json jp;
  jp["available"] = pareto.available;
  if (pareto.available) {
    jp["efficient"] = pareto.efficient;
    jp["gain"] = pareto.gain;
    jp["weakly_efficient"] = pareto.weakly_efficient;
    jp["weak_gain"] = pareto.weak_gain;
    if (pareto.dominating) {
      json dom = json::array();
      for (const auto& row : *pareto.dominating) dom.push_back(row);
      jp["dominating"] = dom;
    }
  }
  out["pareto"] = jp;

  auto part = equal_type_partition(inst, built.system);
  json jt = json::array();
  for (const auto& g : part) {
    json names = json::array();
    for (int i : g) names.push_back(inst.agents[i]);
    jt.push_back(names);
  }
  out["equal_type_classes"] = jt;

  auto envy = envy_test(P.util, x, part);
  json je;
  je["pairs"] = json::array();
  for (const auto& pr : envy.pairs) {
    json e;
    e["envious"] = inst.agents[pr.envious];
    e["envied"] = inst.agents[pr.envied];
    e["amount"] = pr.amount;
    e["equal_type"] = pr.equal_type;
    je["pairs"].push_back(e);
  }
  je["equal_type_violations"] = envy.equal_type_violations;
  out["envy"] = je;

  if (inst.endowments) {
    auto ir = ir_test(P, x, p);
    json ji;
    ji["max_gap"] = ir.max_gap;
    ji["max_plain_gap"] = ir.max_plain_gap;
    json rows = json::array();
    for (size_t i = 0; i < ir.agents.size(); ++i) {
      json r;
      r["agent"] = inst.agents[i];
      r["walras_best"] = ir.agents[i].walras_best;
      r["utility"] = ir.agents[i].utility;
      r["gap"] = ir.agents[i].gap;
      r["plain_gap"] = ir.agents[i].plain_gap;
      rows.push_back(r);
    }
    ji["agents"] = rows;
    out["individual_rationality"] = ji;
    out["avg_endowment_income"] = cert.avg_endowment_income;
    out["avg_income_below_one"] = cert.avg_endowment_income <= 1.0 + Tol::eq_residual;

    auto ev = envy_value_check(P, x, p, envy);
    json jv = json::array();
    for (const auto& v : ev) {
      json e;
      e["envious"] = inst.agents[v.envious];
      e["envied"] = inst.agents[v.envied];
      e["allocation_value_diff"] = v.allocation_value_diff;
      e["endowment_value_diff"] = v.endowment_value_diff;
      jv.push_back(e);
    }
    out["envy_value_violations"] = jv;
  }
  return out;
}

}  // namespace pmkt
