#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "pmkt/linprog.hpp"
#include "pmkt/model.hpp"
#include "pmkt/tolerances.hpp"

namespace pmkt {

struct BudgetSpec {
  int agent = -1;
  std::vector<double> prices;  // personalized price row p_i
  double income = 1.0;         // alpha + (1-alpha) p_i . omega_i
};

struct DemandResult {
  std::vector<double> bundle;
  double utility = 0.0;        // u_i(bundle)
  double expenditure = 0.0;    // p_i . bundle
  double best_utility = 0.0;   // V_i(p): max utility over the budget set
  double satiation = 0.0;      // v_i: max utility over X_i
  bool satiated = false;       // V_i(p) >= v_i - tol
  bool budget_feasible = true; // X_i intersects the budget set
};

// Cached per-agent consumption polytope in float form: rows lo <= a.x <= hi
// over the agent's own L cells plus forbidden upper bounds.
struct AgentPolytope {
  int L = 0;
  std::vector<std::vector<double>> row_a;
  std::vector<double> row_lo, row_hi;  // -inf/+inf as +-1e300
  std::vector<char> forbidden;         // per object
  std::vector<double> cell_hi;         // per-cell upper bound (consumption box)
  std::vector<double> cell_lo;

  static AgentPolytope build(const ConstraintSystem& sys, int i) {
    AgentPolytope ap;
    ap.L = sys.L;
    ap.forbidden.assign(sys.L, 0);
    ap.cell_hi.assign(sys.L, 1e300);
    ap.cell_lo.assign(sys.L, 0.0);
    for (int j = 0; j < sys.L; ++j) ap.forbidden[j] = sys.forbidden_mask[i][j];
    auto push = [&](std::vector<double> a, double lo, double hi) {
      // single-cell rows become variable bounds
      int nz = -1;
      for (int j = 0; j < sys.L; ++j)
        if (a[j] != 0.0) {
          if (nz >= 0 || a[j] < 0.0) {
            nz = -2;
            break;
          }
          nz = j;
        }
      if (nz >= 0) {
        if (hi < 1e299) ap.cell_hi[nz] = std::min(ap.cell_hi[nz], hi / a[nz]);
        if (lo > -1e299) ap.cell_lo[nz] = std::max(ap.cell_lo[nz], lo / a[nz]);
        return;
      }
      ap.row_a.push_back(std::move(a));
      ap.row_lo.push_back(lo);
      ap.row_hi.push_back(hi);
    };
    for (const auto& c : sys.individual[i]) {
      std::vector<double> a(sys.L);
      for (int j = 0; j < sys.L; ++j) a[j] = to_double(c.a.at(i, j));
      push(std::move(a), -1e300, to_double(c.b));
    }
    for (const auto& cr : sys.consumption[i]) {
      std::vector<double> a(sys.L);
      for (int j = 0; j < sys.L; ++j) a[j] = to_double(cr.a[j]);
      push(std::move(a), cr.lo ? to_double(*cr.lo) : -1e300, cr.hi ? to_double(*cr.hi) : 1e300);
    }
    return ap;
  }

  bool has_lower_bounds() const {
    for (double lo : row_lo)
      if (lo > 0.0) return true;
    for (double lo : cell_lo)
      if (lo > 0.0) return true;
    return false;
  }

  void add_rows(LpProblem<double>& lp, int offset = 0) const {
    const int n = lp.num_vars();
    for (size_t r = 0; r < row_a.size(); ++r) {
      std::vector<double> a(n, 0.0);
      for (int j = 0; j < L; ++j) a[offset + j] = row_a[r][j];
      if (row_hi[r] < 1e299) lp.add_row(a, LpRel::Le, row_hi[r]);
      if (row_lo[r] > -1e299) lp.add_row(std::move(a), LpRel::Ge, row_lo[r]);
    }
    for (int j = 0; j < L; ++j) {
      if (forbidden[j]) {
        lp.upper[offset + j] = 0.0;
        continue;
      }
      if (cell_hi[j] < 1e299) lp.upper[offset + j] = cell_hi[j];
      if (cell_lo[j] > 0.0) lp.lower[offset + j] = cell_lo[j];
    }
  }

  double max_violation(const std::vector<double>& x) const {
    double v = 0.0;
    for (size_t r = 0; r < row_a.size(); ++r) {
      double s = 0.0;
      for (int j = 0; j < L; ++j) s += row_a[r][j] * x[j];
      v = std::max(v, s - row_hi[r]);
      v = std::max(v, row_lo[r] - s);
    }
    for (int j = 0; j < L; ++j) {
      if (forbidden[j]) v = std::max(v, x[j]);
      if (cell_hi[j] < 1e299) v = std::max(v, x[j] - cell_hi[j]);
      v = std::max(v, cell_lo[j] - x[j]);
      v = std::max(v, -x[j]);
    }
    return v;
  }
};

struct DemandContext {
  const ConstraintSystem* sys = nullptr;
  std::vector<AgentPolytope> agents;
  std::vector<double> satiation;  // v_i per agent (for the active utility scale)

  static DemandContext build(const ConstraintSystem& sys,
                             const std::vector<std::vector<double>>& utilities) {
    DemandContext ctx;
    ctx.sys = &sys;
    for (int i = 0; i < sys.N; ++i) ctx.agents.push_back(AgentPolytope::build(sys, i));
    ctx.satiation.resize(sys.N);
    for (int i = 0; i < sys.N; ++i) {
      LpProblem<double> lp(sys.L);
      lp.sense = LpSense::Max;
      lp.c = utilities[i];
      ctx.agents[i].add_rows(lp);
      auto sol = solve_lp(lp);
      if (!sol.optimal())
        throw std::runtime_error("satiation: agent consumption set is empty or unbounded");
      ctx.satiation[i] = sol.value;
    }
    return ctx;
  }
};

// v_i = max utility over the consumption set alone.
inline double satiation_value(const DemandContext& ctx, int agent) {
  return ctx.satiation[agent];
}

inline BudgetSpec budget(int agent, const std::vector<std::vector<double>>& personalized,
                         const Instance& inst, double alpha) {
  BudgetSpec b;
  b.agent = agent;
  b.prices = personalized[agent];
  double endow_value = 0.0;
  if (inst.endowments)
    for (size_t l = 0; l < b.prices.size(); ++l)
      endow_value += b.prices[l] * (*inst.endowments)[agent][l];
  b.income = alpha + (1.0 - alpha) * endow_value;
  return b;
}

// Two-stage cheapest demand: stage 1 maximizes utility over the budget set,
// stage 2 minimizes expenditure at that utility level. If the budget cannot
// reach the consumption set (possible with consumption floors), returns the
// cheapest point of X_i flagged budget_feasible = false.
inline DemandResult cheapest_demand(const DemandContext& ctx, int agent,
                                    const std::vector<double>& utility,
                                    const BudgetSpec& b) {
  const auto& ap = ctx.agents[agent];
  const int L = ap.L;
  DemandResult res;
  res.satiation = ctx.satiation[agent];

  auto expenditure = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (int j = 0; j < L; ++j) s += b.prices[j] * x[j];
    return s;
  };
  auto utility_of = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (int j = 0; j < L; ++j) s += utility[j] * x[j];
    return s;
  };

  if (ap.has_lower_bounds()) {
    LpProblem<double> lp(L);
    lp.sense = LpSense::Min;
    lp.c = b.prices;
    ap.add_rows(lp);
    auto sol = solve_lp(lp);
    if (!sol.optimal()) throw std::runtime_error("demand: empty consumption set");
    if (sol.value > b.income + Tol::feasibility) {
      res.bundle = sol.x;
      res.budget_feasible = false;
      res.expenditure = sol.value;
      res.utility = utility_of(sol.x);
      res.best_utility = res.utility;
      return res;
    }
  }

  LpProblem<double> stage1(L);
  stage1.sense = LpSense::Max;
  stage1.c = utility;
  ap.add_rows(stage1);
  stage1.add_row(b.prices, LpRel::Le, b.income);
  auto s1 = solve_lp(stage1);
  if (!s1.optimal()) throw std::runtime_error("demand: stage-1 LP failed");
  res.best_utility = s1.value;
  res.satiated = s1.value >= res.satiation - Tol::utility;

  LpProblem<double> stage2(L);
  stage2.sense = LpSense::Min;
  stage2.c = b.prices;
  ap.add_rows(stage2);
  stage2.add_row(b.prices, LpRel::Le, b.income);
  stage2.add_row(utility, LpRel::Ge, s1.value - 1e-11);
  auto s2 = solve_lp(stage2);
  if (!s2.optimal()) {
    res.bundle = s1.x;  // numerically tight utility row; fall back to stage 1
  } else {
    res.bundle = s2.x;
  }
  res.utility = utility_of(res.bundle);
  res.expenditure = expenditure(res.bundle);
  return res;
}

// Minimum expenditure to reach a given utility level inside X_i (no budget row).
inline std::optional<double> min_expenditure_at(const DemandContext& ctx, int agent,
                                                const std::vector<double>& utility,
                                                const std::vector<double>& prices, double level) {
  const auto& ap = ctx.agents[agent];
  LpProblem<double> lp(ap.L);
  lp.sense = LpSense::Min;
  lp.c = prices;
  ap.add_rows(lp);
  lp.add_row(utility, LpRel::Ge, level - 1e-11);
  auto sol = solve_lp(lp);
  if (!sol.optimal()) return std::nullopt;
  return sol.value;
}

}  // namespace pmkt
