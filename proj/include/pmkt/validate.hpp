#pragma once

#include <cmath>
#include <set>
#include <string>

#include "pmkt/builder.hpp"
#include "pmkt/lcs.hpp"
#include "pmkt/model.hpp"

namespace pmkt {

// Report-valued instance validation. Hard violations make the instance
// unusable; warnings flag boundary cases (zero utility coefficients, failed
// bihierarchy on a divisible-interpretation hierarchy, ...).
inline ValidationReport validate(const Instance& inst, const BuildOptions& opt = {}) {
  ValidationReport rep;
  const int N = inst.num_agents();
  const int L = inst.num_objects();
  if (N < 1) rep.violations.push_back("agent set must be nonempty");
  if (L < 1) rep.violations.push_back("object set must be nonempty");
  {
    std::set<std::string> seen(inst.agents.begin(), inst.agents.end());
    if (static_cast<int>(seen.size()) != N) rep.violations.push_back("duplicate agent ids");
    std::set<std::string> seeno(inst.objects.begin(), inst.objects.end());
    if (static_cast<int>(seeno.size()) != L) rep.violations.push_back("duplicate object ids");
  }
  if (static_cast<int>(inst.quantities.size()) != L) {
    rep.violations.push_back("quantities must have one entry per object");
  } else {
    for (int l = 0; l < L; ++l)
      if (inst.quantities[l] <= 0)
        rep.violations.push_back("quantity must be positive (object " + inst.objects[l] + ")");
  }
  if (static_cast<int>(inst.utilities.size()) != N) {
    rep.violations.push_back("utilities must have one row per agent");
    return rep;
  }
  bool any_pos = false, any_neg = false;
  for (int i = 0; i < N; ++i) {
    if (static_cast<int>(inst.utilities[i].size()) != L) {
      rep.violations.push_back("utility row " + inst.agents[i] + " has the wrong length");
      return rep;
    }
    bool all_zero = true;
    for (int j = 0; j < L; ++j) {
      double v = inst.utilities[i][j];
      if (!std::isfinite(v)) rep.violations.push_back("utilities must be finite");
      if (v > 0) any_pos = true;
      if (v < 0) any_neg = true;
      if (v != 0) all_zero = false;
    }
    if (all_zero)
      rep.violations.push_back("agent " + inst.agents[i] + " has an all-zero utility vector");
  }
  if (any_pos && any_neg) {
    rep.violations.push_back(
        "mixed-sign utilities: use nonnegative vectors for goods or nonpositive vectors for bads");
  } else if (any_neg) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < L; ++j)
        if (inst.utilities[i][j] == 0.0)
          rep.warnings.push_back("bads mode: zero utility entry (" + inst.agents[i] + "," +
                                 inst.objects[j] + ") is not strictly decreasing");
    Rat total(0);
    for (const auto& q : inst.quantities) total += q;
    if (total >= N)
      rep.violations.push_back(
          "bads instance has no slack (required copies >= agents); the problem is pure HZ");
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < L; ++j)
        if (inst.utilities[i][j] == 0.0)
          rep.warnings.push_back("goods mode: zero utility entry (" + inst.agents[i] + "," +
                                 inst.objects[j] + ") is not strictly increasing");
  }
  if (!(inst.alpha > 0.0) || inst.alpha > 1.0)
    rep.violations.push_back("alpha must lie in (0, 1]");
  if (inst.alpha < 1.0 && !inst.endowments)
    rep.violations.push_back("alpha below 1 requires endowments");

  if (inst.endowments) {
    if (static_cast<int>(inst.endowments->size()) != N) {
      rep.violations.push_back("endowments must have one row per agent");
      return rep;
    }
    for (int i = 0; i < N; ++i) {
      if (static_cast<int>((*inst.endowments)[i].size()) != L) {
        rep.violations.push_back("endowment row " + inst.agents[i] + " has the wrong length");
        return rep;
      }
      for (double w : (*inst.endowments)[i])
        if (w < 0 || !std::isfinite(w))
          rep.violations.push_back("endowments must be nonnegative and finite");
    }
  }
  if (!rep.violations.empty()) return rep;

  BuiltProblem built;
  try {
    built = build_system(inst, opt);
  } catch (const std::exception& e) {
    rep.violations.push_back(e.what());
    return rep;
  }
  if (inst.spec.kind == ConstraintKind::Hierarchy) {
    std::vector<std::vector<Cell>> sets;
    for (const auto& h : inst.spec.hierarchy) sets.push_back(h.cells);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < L; ++j) sets.push_back({{i, j}});
    auto bh = check_bihierarchy(sets);
    if (!bh.ok)
      rep.warnings.push_back(
          "hierarchy is not a bihierarchy (crossing pair " + std::to_string(bh.witness.first) +
          "," + std::to_string(bh.witness.second) +
          "); the region is treated as a divisible feasible set");
  }
  if (inst.endowments) {
    double v = membership_violation(built.feasible, *inst.endowments);
    if (v > Tol::feasibility)
      rep.violations.push_back("endowment infeasible: not a member of the feasible set (violation " +
                               std::to_string(v) + ")");
    for (const auto& c : built.system.priced) {
      double s = 0.0;
      for (const auto& [i, l] : c.support)
        s += to_double(c.a.at(i, l)) * (*inst.endowments)[i][l];
      if (s <= 0.0)
        rep.violations.push_back("priced constraint '" + c.label +
                                 "' covers no endowment (its support holds none of omega)");
    }
  }
  return rep;
}

}  // namespace pmkt
