#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmkt/equilibrium.hpp"
#include "pmkt/lcs.hpp"
#include "pmkt/model.hpp"

namespace pmkt {

struct MembershipReport {
  bool ok = false;
  double violation = 0.0;
  std::string mode;
  std::optional<std::vector<double>> weights;  // vertex mode
};

inline MembershipReport membership(const FeasibleSet& feas, const Assignment& x) {
  MembershipReport rep;
  rep.violation = membership_violation(feas, x);
  rep.ok = rep.violation <= Tol::feasibility;
  rep.mode = feas.mode == FeasibleSet::Mode::Vertices ? "vertex-combination" : "h-form";
  if (feas.mode == FeasibleSet::Mode::Vertices && rep.ok)
    rep.weights = membership_weights(feas, x);
  return rep;
}

struct ParetoReport {
  bool available = false;
  bool efficient = false;
  double gain = 0.0;  // LP optimum of total-utility improvement
  std::optional<Assignment> dominating;
  bool weakly_efficient = false;
  double weak_gain = 0.0;  // max over y of min_i utility gain
};

namespace detail {

inline std::vector<RatMatrix> pareto_vertices(const FeasibleSet& feas, int dim_cap) {
  if (feas.mode == FeasibleSet::Mode::Vertices) return feas.vertices;
  return enumerate_vertices(feas, dim_cap);
}

}  // namespace detail

// Dominance test over C proper (vertex-combination variables): maximizes total
// utility gain subject to per-agent no-loss; x is efficient when the optimum
// stays within tolerance. The weak variant maximizes the minimum gain.
inline ParetoReport pareto_test(const std::vector<std::vector<double>>& util, const Assignment& x,
                                const FeasibleSet& feas, int dim_cap = 16) {
  ParetoReport rep;
  std::vector<RatMatrix> verts;
  try {
    verts = detail::pareto_vertices(feas, dim_cap);
  } catch (const std::exception&) {
    return rep;  // no vertex description available at this scale
  }
  if (verts.empty()) return rep;
  rep.available = true;
  const int N = feas.N, L = feas.L;
  const int K = static_cast<int>(verts.size());
  std::vector<double> ux(N, 0.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < L; ++j) ux[i] += util[i][j] * x[i][j];
  std::vector<std::vector<double>> vu(K, std::vector<double>(N, 0.0));
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < L; ++j) vu[k][i] += util[i][j] * to_double(verts[k].at(i, j));

  {
    LpProblem<double> lp(K);
    lp.sense = LpSense::Max;
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < N; ++i) lp.c[k] += vu[k][i];
    std::vector<double> ones(K, 1.0);
    lp.add_row(std::move(ones), LpRel::Eq, 1.0);
    for (int i = 0; i < N; ++i) {
      std::vector<double> row(K);
      for (int k = 0; k < K; ++k) row[k] = vu[k][i];
      lp.add_row(std::move(row), LpRel::Ge, ux[i]);
    }
    auto sol = solve_lp(lp);
    double base = 0.0;
    for (double u : ux) base += u;
    if (sol.optimal()) {
      rep.gain = sol.value - base;
      rep.efficient = rep.gain <= Tol::pareto;
      if (!rep.efficient) {
        Assignment y = zero_assignment(N, L);
        for (int k = 0; k < K; ++k) {
          if (sol.x[k] == 0.0) continue;
          for (int i = 0; i < N; ++i)
            for (int j = 0; j < L; ++j) y[i][j] += sol.x[k] * to_double(verts[k].at(i, j));
        }
        rep.dominating = std::move(y);
      }
    } else {
      // x itself is feasible, so the no-loss program cannot be infeasible
      rep.efficient = false;
    }
  }
  {
    LpProblem<double> lp(K + 1);  // lambda, t
    lp.sense = LpSense::Max;
    lp.c[K] = 1.0;
    lp.lower[K] = -1e3;
    std::vector<double> ones(K + 1, 0.0);
    for (int k = 0; k < K; ++k) ones[k] = 1.0;
    lp.add_row(std::move(ones), LpRel::Eq, 1.0);
    for (int i = 0; i < N; ++i) {
      std::vector<double> row(K + 1, 0.0);
      for (int k = 0; k < K; ++k) row[k] = vu[k][i];
      row[K] = -1.0;
      lp.add_row(std::move(row), LpRel::Ge, ux[i]);
    }
    auto sol = solve_lp(lp);
    if (sol.optimal()) {
      rep.weak_gain = sol.value;
      rep.weakly_efficient = sol.value <= Tol::pareto;
    }
  }
  return rep;
}

struct EnvyPair {
  int envious = -1;
  int envied = -1;
  double amount = 0.0;  // u_i(x_j) - u_i(x_i), normalized utility units
  bool equal_type = false;
};

struct EnvyReport {
  std::vector<EnvyPair> pairs;
  int equal_type_violations = 0;
};

inline EnvyReport envy_test(const std::vector<std::vector<double>>& util, const Assignment& x,
                            const std::vector<std::vector<int>>& partition) {
  const int N = static_cast<int>(util.size());
  const int L = N > 0 ? static_cast<int>(util[0].size()) : 0;
  std::vector<int> cls(N, -1);
  for (size_t g = 0; g < partition.size(); ++g)
    for (int i : partition[g]) cls[i] = static_cast<int>(g);
  EnvyReport rep;
  for (int i = 0; i < N; ++i) {
    double own = 0.0;
    for (int j = 0; j < L; ++j) own += util[i][j] * x[i][j];
    for (int k = 0; k < N; ++k) {
      if (k == i) continue;
      double other = 0.0;
      for (int j = 0; j < L; ++j) other += util[i][j] * x[k][j];
      if (other > own + Tol::utility) {
        EnvyPair pr{i, k, other - own, cls[i] == cls[k]};
        if (pr.equal_type) ++rep.equal_type_violations;
        rep.pairs.push_back(pr);
      }
    }
  }
  return rep;
}

struct IrAgentReport {
  double walras_best = 0.0;  // max utility affordable at the endowment's value
  double utility = 0.0;      // u_i(x_i)
  double gap = 0.0;          // walras_best - utility (Theorem 3 gap)
  double plain_gap = 0.0;    // u_i(omega_i) - u_i(x_i)
};

struct IrReport {
  std::vector<IrAgentReport> agents;
  double max_gap = -1e300;
  double max_plain_gap = -1e300;
};

inline IrReport ir_test(const EquilibriumProblem& P, const Assignment& x, const PriceVector& p) {
  if (!P.inst->endowments) throw std::invalid_argument("ir_test: instance has no endowments");
  auto personalized = personalized_prices(*P.sys, p);
  IrReport rep;
  const int N = P.sys->N, L = P.sys->L;
  for (int i = 0; i < N; ++i) {
    IrAgentReport a;
    double wbudget = 0.0;
    for (int j = 0; j < L; ++j) wbudget += personalized[i][j] * (*P.inst->endowments)[i][j];
    LpProblem<double> lp(L);
    lp.sense = LpSense::Max;
    lp.c = P.util[i];
    P.demand_ctx.agents[i].add_rows(lp);
    lp.add_row(personalized[i], LpRel::Le, wbudget);
    auto sol = solve_lp(lp);
    a.walras_best = sol.optimal() ? sol.value : 0.0;
    for (int j = 0; j < L; ++j) {
      a.utility += P.util[i][j] * x[i][j];
      a.plain_gap += P.util[i][j] * (*P.inst->endowments)[i][j];
    }
    a.plain_gap -= a.utility;
    a.gap = a.walras_best - a.utility;
    rep.max_gap = std::max(rep.max_gap, a.gap);
    rep.max_plain_gap = std::max(rep.max_plain_gap, a.plain_gap);
    rep.agents.push_back(a);
  }
  return rep;
}

struct EnvyValueViolation {
  int envious = -1, envied = -1;
  double allocation_value_diff = 0.0;  // p . (x_j - x_i)
  double endowment_value_diff = 0.0;   // p . (omega_j - omega_i)
  bool applicable = true;              // personalized price rows coincide
};

// At an equilibrium with endowments, envy of j by i forces both differences
// strictly positive. Applies to pairs facing identical personalized prices.
inline std::vector<EnvyValueViolation> envy_value_check(const EquilibriumProblem& P,
                                                        const Assignment& x, const PriceVector& p,
                                                        const EnvyReport& envy) {
  std::vector<EnvyValueViolation> out;
  if (!P.inst->endowments) return out;
  auto personalized = personalized_prices(*P.sys, p);
  const int L = P.sys->L;
  for (const auto& pr : envy.pairs) {
    EnvyValueViolation v;
    v.envious = pr.envious;
    v.envied = pr.envied;
    const auto& pi = personalized[pr.envious];
    const auto& pj = personalized[pr.envied];
    for (int j = 0; j < L; ++j)
      if (std::abs(pi[j] - pj[j]) > 1e-12) v.applicable = false;
    for (int j = 0; j < L; ++j) {
      v.allocation_value_diff += pi[j] * (x[pr.envied][j] - x[pr.envious][j]);
      v.endowment_value_diff +=
          pi[j] * ((*P.inst->endowments)[pr.envied][j] - (*P.inst->endowments)[pr.envious][j]);
    }
    if (v.applicable &&
        (v.allocation_value_diff <= Tol::utility || v.endowment_value_diff <= Tol::utility))
      out.push_back(v);
  }
  return out;
}

}  // namespace pmkt
