#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "pmkt/demand.hpp"
#include "pmkt/lcs.hpp"
#include "pmkt/model.hpp"
#include "pmkt/tolerances.hpp"

namespace pmkt {

struct SolverConfig {
  double alpha = 1.0;
  int max_iters = 50000;  // phi-iteration budget, split across restarts
  double eta0 = 0.2;
  double eta_floor = 1e-4;
  int restarts = 32;
  double tol = Tol::eq_residual;
  std::uint64_t seed = 0;
  double grid_resolution = 0.05;  // fraction of pbar per axis (grid oracle)
  int threads = 0;                // 0 = from PMKT_THREADS / hardware
  int gn_iters = 40;
  bool use_nelder_mead = true;
};

struct ResidualBreakdown {
  double feasibility = 0.0;      // positive violation of any constraint at x
  double complementary = 0.0;    // max_c p_c * (b_c - a_c.x)^+
  double demand_gap = 0.0;       // max_i (V_i(p) - u_i(x_i))^+
  double budget_violation = 0.0; // max_i (p_i.x_i - m_i)^+
  double cheapest_gap = 0.0;     // max_i (p_i.x_i - min expenditure at u_i(x_i))^+
  double membership = 0.0;       // distance-style violation of x in C
  double max() const {
    double m = feasibility;
    m = std::max(m, complementary);
    m = std::max(m, demand_gap);
    m = std::max(m, budget_violation);
    m = std::max(m, cheapest_gap);
    m = std::max(m, membership);
    return m;
  }
};

struct EquilibriumCertificate {
  PriceVector prices;
  Assignment x;
  std::vector<double> slacks;  // b_c - a_c.x per priced constraint
  ResidualBreakdown residuals;
  bool membership_ok = false;
  std::string membership_mode;
  double maximality_gap = 0.0;  // largest coordinate raise staying inside lcs
  bool converged = false;
  int iterations = 0;
  int start_used = -1;
  double alpha = 1.0;
  double tol = Tol::eq_residual;
  std::uint64_t seed = 0;
  double pbar = 0.0;
  bool ceiling_warning = false;       // a positive price sits at the ceiling
  double avg_endowment_income = 0.0;  // (1/N) sum_i p_i . omega_i
  std::vector<double> utility_scale;  // per-agent divisor applied before solving
  std::vector<double> personalized_flat;  // N*L personalized prices at p
};

// Price ceiling: endowment mode 2N / min_c sum_supp a.omega, otherwise
// NL / b_min + 1 (both straight from the existence machinery).
inline double price_ceiling(const ConstraintSystem& sys, const Instance& inst) {
  if (sys.priced.empty()) return 1.0;
  if (inst.endowments) {
    double mn = -1.0;
    for (size_t c = 0; c < sys.priced.size(); ++c) {
      double s = 0.0;
      for (const auto& [i, l] : sys.priced[c].support)
        s += to_double(sys.priced[c].a.at(i, l)) * (*inst.endowments)[i][l];
      if (mn < 0 || s < mn) mn = s;
      if (s <= 0.0)
        throw std::invalid_argument(
            "price ceiling: priced constraint '" + sys.priced[c].label +
            "' covers no endowment; every priced constraint needs positive endowment on its "
            "support");
    }
    return 2.0 * sys.N / mn;
  }
  double bmin = -1.0;
  for (double b : sys.priced_b)
    if (bmin < 0 || b < bmin) bmin = b;
  return sys.N * sys.L / bmin + 1.0;
}

// Everything the inner loops need, built once per solve.
struct EquilibriumProblem {
  const Instance* inst = nullptr;
  const ConstraintSystem* sys = nullptr;
  const FeasibleSet* feas = nullptr;
  std::vector<std::vector<double>> util;  // normalized utilities
  std::vector<double> scale;
  DemandContext demand_ctx;
  double pbar = 0.0;
  int M = 0;
  double alpha = 1.0;
  // vertex-mode caches
  std::vector<std::vector<double>> vert_util;   // [k][i] = u_i . v_k,i
  std::vector<std::vector<double>> vert_cover;  // [c][k] = a_c . v_k
  std::vector<std::vector<double>> vert_flat;   // [k] flattened vertex

  static EquilibriumProblem build(const Instance& inst, const ConstraintSystem& sys,
                                  const FeasibleSet& feas, double alpha) {
    EquilibriumProblem P;
    P.inst = &inst;
    P.sys = &sys;
    P.feas = &feas;
    P.alpha = alpha;
    const int N = sys.N, L = sys.L;
    P.util.assign(N, std::vector<double>(L, 0.0));
    P.scale.assign(N, 1.0);
    for (int i = 0; i < N; ++i) {
      double mx = 0.0;
      for (double v : inst.utilities[i]) mx = std::max(mx, std::abs(v));
      P.scale[i] = mx > 0 ? mx : 1.0;
      for (int j = 0; j < L; ++j) P.util[i][j] = inst.utilities[i][j] / P.scale[i];
    }
    P.demand_ctx = DemandContext::build(sys, P.util);
    P.M = static_cast<int>(sys.priced.size());
    P.pbar = price_ceiling(sys, inst);
    if (feas.mode == FeasibleSet::Mode::Vertices) {
      const int K = static_cast<int>(feas.vertices.size());
      P.vert_util.assign(K, std::vector<double>(N, 0.0));
      P.vert_flat.assign(K, std::vector<double>(static_cast<size_t>(N) * L, 0.0));
      for (int k = 0; k < K; ++k)
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < L; ++j) {
            double v = to_double(feas.vertices[k].at(i, j));
            P.vert_flat[k][static_cast<size_t>(i) * L + j] = v;
            P.vert_util[k][i] += P.util[i][j] * v;
          }
      P.vert_cover.assign(P.M, std::vector<double>(K, 0.0));
      for (int c = 0; c < P.M; ++c)
        for (int k = 0; k < K; ++k) {
          double s = 0.0;
          for (size_t t = 0; t < P.vert_flat[k].size(); ++t)
            s += sys.priced_a[c][t] * P.vert_flat[k][t];
          P.vert_cover[c][k] = s;
        }
    }
    return P;
  }

  std::vector<double> incomes(const std::vector<std::vector<double>>& personalized) const {
    const int N = sys->N;
    std::vector<double> m(N, alpha);
    if (inst->endowments) {
      for (int i = 0; i < N; ++i) {
        double ev = 0.0;
        for (int l = 0; l < sys->L; ++l) ev += personalized[i][l] * (*inst->endowments)[i][l];
        m[i] = alpha + (1.0 - alpha) * ev;
      }
    }
    return m;
  }
};

struct Profile {
  std::vector<DemandResult> demands;
  std::vector<std::vector<double>> personalized;
  std::vector<double> incomes;
  std::vector<double> z;  // excess per priced constraint at the demand selection
};

inline Profile eval_profile(const EquilibriumProblem& P, const PriceVector& p) {
  Profile pr;
  pr.personalized = personalized_prices(*P.sys, p);
  pr.incomes = P.incomes(pr.personalized);
  const int N = P.sys->N, L = P.sys->L;
  pr.demands.resize(N);
  for (int i = 0; i < N; ++i) {
    BudgetSpec b;
    b.agent = i;
    b.prices = pr.personalized[i];
    b.income = pr.incomes[i];
    pr.demands[i] = cheapest_demand(P.demand_ctx, i, P.util[i], b);
  }
  pr.z.assign(P.M, 0.0);
  for (int c = 0; c < P.M; ++c) {
    double s = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < L; ++j)
        s += P.sys->priced_a[c][static_cast<size_t>(i) * L + j] * pr.demands[i].bundle[j];
    pr.z[c] = s - P.sys->priced_b[c];
  }
  return pr;
}

// phi_c(p) = min{max{0, p_c + eta z_c}, pbar} at the cheapest-demand selection.
inline std::pair<PriceVector, std::vector<double>> phi_step(const EquilibriumProblem& P,
                                                            const PriceVector& p,
                                                            double eta = 1.0) {
  Profile pr = eval_profile(P, p);
  PriceVector q(p.size());
  for (size_t c = 0; c < p.size(); ++c)
    q[c] = std::min(std::max(0.0, p[c] + eta * pr.z[c]), P.pbar);
  return {q, pr.z};
}

struct Selection {
  bool ok = false;
  Assignment x;
  std::vector<double> z;     // excess per priced constraint
  std::vector<double> w, t;  // per-agent utility shortfall / budget violation
};

// Joint assignment selection: x constrained to C, per-agent utility-level and
// budget rows elastic, lexicographic objective (feasibility deficit first,
// then coverage of priced constraints). Mirrors the existence argument's
// choice of x* from the demand correspondences.
inline Selection select_assignment(const EquilibriumProblem& P, const PriceVector& p,
                                   const Profile& pr) {
  const int N = P.sys->N, L = P.sys->L;
  Selection sel;
  const bool vmode = P.feas->mode == FeasibleSet::Mode::Vertices;
  const int K = vmode ? static_cast<int>(P.feas->vertices.size()) : 0;
  const int nx = vmode ? K : N * L;
  const int nvar = nx + 2 * N;  // + w + t
  auto build = [&](LpProblem<double>& lp) {
    lp.resize(nvar);
    if (vmode) {
      std::vector<double> ones(nvar, 0.0);
      for (int k = 0; k < K; ++k) ones[k] = 1.0;
      lp.add_row(std::move(ones), LpRel::Eq, 1.0);
    } else {
      for (size_t r = 0; r < P.feas->rows_a.size(); ++r) {
        std::vector<double> a(nvar, 0.0);
        for (int t = 0; t < N * L; ++t) a[t] = P.feas->rows_a[r][t];
        if (P.feas->rows_hi[r] < 1e299) lp.add_row(a, LpRel::Le, P.feas->rows_hi[r]);
        if (P.feas->rows_lo[r] > -1e299) lp.add_row(std::move(a), LpRel::Ge, P.feas->rows_lo[r]);
      }
    }
    for (int i = 0; i < N; ++i) {
      std::vector<double> urow(nvar, 0.0), prow(nvar, 0.0);
      if (vmode) {
        for (int k = 0; k < K; ++k) {
          urow[k] = P.vert_util[k][i];
          double cost = 0.0;
          for (int j = 0; j < L; ++j)
            cost += pr.personalized[i][j] * P.vert_flat[k][static_cast<size_t>(i) * L + j];
          prow[k] = cost;
        }
      } else {
        for (int j = 0; j < L; ++j) {
          urow[static_cast<size_t>(i) * L + j] = P.util[i][j];
          prow[static_cast<size_t>(i) * L + j] = pr.personalized[i][j];
        }
      }
      urow[nx + i] = 1.0;  // + w_i
      lp.add_row(std::move(urow), LpRel::Ge, pr.demands[i].best_utility);
      prow[nx + N + i] = -1.0;  // - t_i
      lp.add_row(std::move(prow), LpRel::Le, pr.incomes[i]);
    }
  };

  LpProblem<double> stage_a;
  build(stage_a);
  stage_a.sense = LpSense::Min;
  for (int i = 0; i < 2 * N; ++i) stage_a.c[nx + i] = 1.0;
  auto sa = solve_lp(stage_a);
  if (!sa.optimal()) return sel;

  // stage B: cover priced constraints; stage C: cheapest such selection
  std::vector<double> deficit_row(nvar, 0.0);
  for (int i = 0; i < 2 * N; ++i) deficit_row[nx + i] = 1.0;
  std::vector<double> cover_row(nvar, 0.0);
  bool any_price = false;
  for (int c = 0; c < P.M; ++c) {
    if (p[c] <= Tol::price_active) continue;
    any_price = true;
    if (vmode) {
      for (int k = 0; k < K; ++k) cover_row[k] += p[c] * P.vert_cover[c][k];
    } else {
      for (int t = 0; t < N * L; ++t) cover_row[t] += p[c] * P.sys->priced_a[c][t];
    }
  }
  LpSolution<double> sol = sa;
  if (any_price) {
    LpProblem<double> stage_b;
    build(stage_b);
    stage_b.sense = LpSense::Max;
    stage_b.c = cover_row;
    stage_b.add_row(deficit_row, LpRel::Le, sa.value + 1e-9);
    auto sb = solve_lp(stage_b);
    if (!sb.optimal()) return sel;
    LpProblem<double> stage_c;
    build(stage_c);
    stage_c.sense = LpSense::Min;
    for (int i = 0; i < N; ++i) {
      if (vmode) {
        for (int k = 0; k < K; ++k)
          for (int j = 0; j < L; ++j)
            stage_c.c[k] += pr.personalized[i][j] * P.vert_flat[k][static_cast<size_t>(i) * L + j];
      } else {
        for (int j = 0; j < L; ++j)
          stage_c.c[static_cast<size_t>(i) * L + j] = pr.personalized[i][j];
      }
    }
    stage_c.add_row(deficit_row, LpRel::Le, sa.value + 1e-9);
    stage_c.add_row(cover_row, LpRel::Ge, sb.value - 1e-9);
    auto sc = solve_lp(stage_c);
    sol = sc.optimal() ? sc : sb;
  }
  if (!sol.optimal()) return sel;

  sel.ok = true;
  sel.x = zero_assignment(N, L);
  if (vmode) {
    for (int k = 0; k < K; ++k) {
      if (sol.x[k] == 0.0) continue;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < L; ++j)
          sel.x[i][j] += sol.x[k] * P.vert_flat[k][static_cast<size_t>(i) * L + j];
    }
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < L; ++j) sel.x[i][j] = sol.x[static_cast<size_t>(i) * L + j];
  }
  sel.w.assign(N, 0.0);
  sel.t.assign(N, 0.0);
  for (int i = 0; i < N; ++i) {
    sel.w[i] = sol.x[nx + i];
    sel.t[i] = sol.x[nx + N + i];
  }
  sel.z.assign(P.M, 0.0);
  for (int c = 0; c < P.M; ++c) {
    double s = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < L; ++j)
        s += P.sys->priced_a[c][static_cast<size_t>(i) * L + j] * sel.x[i][j];
    sel.z[c] = s - P.sys->priced_b[c];
  }
  return sel;
}

// Residual vector used by the Gauss-Newton polish: per priced constraint the
// violation plus complementary-slackness product, then per-agent shortfalls.
inline std::vector<double> residual_vector(const EquilibriumProblem& P, const PriceVector& p,
                                           const Selection& sel) {
  std::vector<double> F;
  F.reserve(P.M + 2 * P.sys->N);
  for (int c = 0; c < P.M; ++c) {
    double viol = std::max(0.0, sel.z[c]);
    double cs = p[c] * std::max(0.0, -sel.z[c]);
    F.push_back(viol + cs);
  }
  for (double w : sel.w) F.push_back(w);
  for (double t : sel.t) F.push_back(t);
  return F;
}

inline double linf(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}
inline double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// The equilibrium-gap function shared by the solver and the grid oracle: the
// L2 norm of [constraint violations, complementary-slackness products,
// demand/budget shortfalls]. Minimizers coincide with equilibria.
inline double equilibrium_gap(const EquilibriumProblem& P, const PriceVector& p,
                              const std::vector<double>& z,
                              const std::vector<double>* extra = nullptr) {
  double s = 0.0;
  for (int c = 0; c < P.M; ++c) {
    double viol = std::max(0.0, z[c]);
    double cs = p[c] * std::max(0.0, -z[c]);
    s += viol * viol + cs * cs;
  }
  if (extra)
    for (double e : *extra) s += e * e;
  return std::sqrt(s);
}

// Largest coordinate raise that stays inside the lcs system (0 at a maximal
// point). Mirrors the membership step of the existence argument.
inline double maximality_gap(const EquilibriumProblem& P, const Assignment& x) {
  const int N = P.sys->N, L = P.sys->L;
  double best = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < L; ++j) {
      if (P.sys->forbidden_mask[i][j]) continue;
      double room = 1e300;
      for (int c = 0; c < P.M; ++c) {
        double coef = P.sys->priced_a[c][static_cast<size_t>(i) * L + j];
        if (coef <= 0) continue;
        double s = 0.0;
        for (int a = 0; a < N; ++a)
          for (int b = 0; b < L; ++b)
            s += P.sys->priced_a[c][static_cast<size_t>(a) * L + b] * x[a][b];
        room = std::min(room, (P.sys->priced_b[c] - s) / coef);
      }
      const auto& ap = P.demand_ctx.agents[i];
      for (size_t r = 0; r < ap.row_a.size(); ++r) {
        if (ap.row_a[r][j] <= 0) continue;
        double s = 0.0;
        for (int b = 0; b < L; ++b) s += ap.row_a[r][b] * x[i][b];
        if (ap.row_hi[r] < 1e299) room = std::min(room, (ap.row_hi[r] - s) / ap.row_a[r][j]);
      }
      if (ap.cell_hi[j] < 1e299) room = std::min(room, ap.cell_hi[j] - x[i][j]);
      if (room < 1e299) best = std::max(best, room);
    }
  return best;
}

// Recomputes every equilibrium condition from scratch at (p, x).
inline EquilibriumCertificate make_certificate(const EquilibriumProblem& P, const PriceVector& p,
                                               const Assignment& x, double tol,
                                               bool full_checks = true) {
  const int N = P.sys->N, L = P.sys->L;
  EquilibriumCertificate cert;
  cert.prices = p;
  cert.x = x;
  cert.alpha = P.alpha;
  cert.tol = tol;
  cert.pbar = P.pbar;
  cert.utility_scale = P.scale;

  auto personalized = personalized_prices(*P.sys, p);
  cert.personalized_flat.assign(static_cast<size_t>(N) * L, 0.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < L; ++j) cert.personalized_flat[static_cast<size_t>(i) * L + j] = personalized[i][j];
  auto incomes = P.incomes(personalized);

  ResidualBreakdown r;
  cert.slacks.assign(P.M, 0.0);
  for (int c = 0; c < P.M; ++c) {
    double s = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < L; ++j)
        s += P.sys->priced_a[c][static_cast<size_t>(i) * L + j] * x[i][j];
    double slack = P.sys->priced_b[c] - s;
    cert.slacks[c] = slack;
    r.feasibility = std::max(r.feasibility, -slack);
    r.complementary = std::max(r.complementary, p[c] * std::max(0.0, slack));
    if (p[c] > Tol::price_active && p[c] >= P.pbar - 1e-9) cert.ceiling_warning = true;
  }
  for (int i = 0; i < N; ++i)
    r.feasibility = std::max(r.feasibility, P.demand_ctx.agents[i].max_violation(x[i]));

  for (int i = 0; i < N; ++i) {
    BudgetSpec b;
    b.agent = i;
    b.prices = personalized[i];
    b.income = incomes[i];
    auto d = cheapest_demand(P.demand_ctx, i, P.util[i], b);
    double ui = 0.0, spend = 0.0;
    for (int j = 0; j < L; ++j) {
      ui += P.util[i][j] * x[i][j];
      spend += personalized[i][j] * x[i][j];
    }
    r.demand_gap = std::max(r.demand_gap, d.best_utility - ui);
    r.budget_violation = std::max(r.budget_violation, spend - incomes[i]);
    if (full_checks) {
      auto me = min_expenditure_at(P.demand_ctx, i, P.util[i], personalized[i], ui);
      if (me) r.cheapest_gap = std::max(r.cheapest_gap, spend - *me);
    }
    if (P.inst->endowments) {
      double ev = 0.0;
      for (int j = 0; j < L; ++j) ev += personalized[i][j] * (*P.inst->endowments)[i][j];
      cert.avg_endowment_income += ev / N;
    }
  }
  r.demand_gap = std::max(0.0, r.demand_gap);
  r.budget_violation = std::max(0.0, r.budget_violation);
  r.cheapest_gap = std::max(0.0, r.cheapest_gap);
  r.feasibility = std::max(0.0, r.feasibility);

  r.membership = membership_violation(*P.feas, x);
  cert.membership_ok = r.membership <= Tol::feasibility;
  cert.membership_mode =
      P.feas->mode == FeasibleSet::Mode::Vertices ? "vertex-combination" : "h-form";
  if (full_checks) cert.maximality_gap = maximality_gap(P, x);

  cert.residuals = r;
  cert.converged = r.max() <= tol && cert.membership_ok;
  return cert;
}

// Checks an externally supplied (p, x) pair; solver-independent.
inline EquilibriumCertificate verify(const Instance& inst, const ConstraintSystem& sys,
                                     const FeasibleSet& feas, const PriceVector& p,
                                     const Assignment& x, double alpha,
                                     double tol = Tol::eq_residual) {
  auto P = EquilibriumProblem::build(inst, sys, feas, alpha);
  if (p.size() != sys.priced.size())
    throw std::invalid_argument("verify: price vector does not match the priced constraints");
  return make_certificate(P, p, x, tol);
}

namespace detail {

// Minimax model step: minimize ||F + J d||_inf over a box trust region.
// Exact for the piecewise-affine residual within the current piece.
inline std::vector<double> minimax_step(const std::vector<std::vector<double>>& J,
                                        const std::vector<double>& F, const PriceVector& p,
                                        double pbar, double trust) {
  const int m = static_cast<int>(J.size());
  const int n = m == 0 ? 0 : static_cast<int>(J[0].size());
  LpProblem<double> lp(n + 1);  // d (shifted by +trust to stay nonnegative), t
  lp.sense = LpSense::Min;
  lp.c[n] = 1.0;
  for (int c = 0; c < n; ++c) {
    lp.upper[c] = std::min(2.0 * trust, pbar - p[c] + trust);
    lp.upper[c] = std::max(*lp.upper[c], 0.0);
    // lower bound: d >= -min(trust, p_c)  ->  shifted var >= trust - min(trust, p_c)
    lp.lower[c] = trust - std::min(trust, p[c]);
  }
  for (int r = 0; r < m; ++r) {
    std::vector<double> row(n + 1, 0.0);
    double rhs = -F[r];
    for (int c = 0; c < n; ++c) {
      row[c] = J[r][c];
      rhs += J[r][c] * trust;  // shift: d = shifted - trust
    }
    row[n] = -1.0;
    lp.add_row(row, LpRel::Le, rhs);  //  F + J d <= t
    for (int c = 0; c < n; ++c) row[c] = -row[c];
    row[n] = -1.0;
    lp.add_row(std::move(row), LpRel::Le, -rhs + 2.0 * (-F[r]) * 0.0 + 2.0 * rhs - 2.0 * rhs);
  }
  // rebuild the >= side properly: -(F + J d) <= t
  lp.rows.clear();
  for (int r = 0; r < m; ++r) {
    std::vector<double> row(n + 1, 0.0);
    double shift = 0.0;
    for (int c = 0; c < n; ++c) {
      row[c] = J[r][c];
      shift += J[r][c] * trust;
    }
    row[n] = -1.0;
    lp.add_row(row, LpRel::Le, -F[r] + shift);
    for (int c = 0; c < n; ++c) row[c] = -row[c];
    lp.add_row(std::move(row), LpRel::Le, F[r] - shift);
  }
  auto sol = solve_lp(lp);
  std::vector<double> d(n, 0.0);
  if (sol.optimal())
    for (int c = 0; c < n; ++c) d[c] = sol.x[c] - trust;
  return d;
}

// Least-squares step for the Gauss-Newton polish (normal equations + ridge).
inline std::vector<double> lstsq_step(const std::vector<std::vector<double>>& J,
                                      const std::vector<double>& F, double ridge) {
  const int m = static_cast<int>(J.size());
  const int n = m == 0 ? 0 : static_cast<int>(J[0].size());
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int r = 0; r < m; ++r) s += J[r][a] * J[r][b];
      A[a][b] = s + (a == b ? ridge : 0.0);
    }
    double s = 0.0;
    for (int r = 0; r < m; ++r) s += J[r][a] * F[r];
    A[a][n] = -s;
  }
  // Gaussian elimination with partial pivoting
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    if (std::abs(A[col][col]) < 1e-300) continue;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = A[r][col] / A[col][col];
      if (f == 0.0) continue;
      for (int cc = col; cc <= n; ++cc) A[r][cc] -= f * A[col][cc];
    }
  }
  std::vector<double> dx(n, 0.0);
  for (int a = 0; a < n; ++a)
    if (std::abs(A[a][a]) > 1e-300) dx[a] = A[a][n] / A[a][a];
  return dx;
}

}  // namespace detail

struct StartResult {
  EquilibriumCertificate cert;
  PriceVector p;
  int iterations = 0;
};

// One restart: damped phi-iteration (with tail averaging to tame the
// set-valued-demand oscillation), then Gauss-Newton on the selection residual,
// repeated over progressively smaller initial steps, then a full certificate.
inline StartResult run_start(const EquilibriumProblem& P, PriceVector p, const SolverConfig& cfg,
                             std::uint64_t jitter_seed) {
  const int iterA = std::max(200, cfg.max_iters / std::max(1, cfg.restarts));
  PriceVector best_p = p;
  double best_res = 1e300;
  int used = 0;
  std::mt19937_64 rng(jitter_seed);

  auto eval_selection = [&](const PriceVector& q) {
    Profile pr = eval_profile(P, q);
    Selection sel = select_assignment(P, q, pr);
    return sel.ok ? linf(residual_vector(P, q, sel)) : 1e300;
  };
  auto probe = [&](const PriceVector& q) {
    double res = eval_selection(q);
    if (res < best_res) {
      best_res = res;
      best_p = q;
    }
    return res;
  };

  const int rounds = 3;
  for (int round = 0; round < rounds && P.M > 0; ++round) {
    double eta = cfg.eta0 / std::pow(4.0, round);
    double ema = -1.0, ema_prev = -1.0;
    int since_halve = 0;
    PriceVector avg = p;
    const int budget = std::max(60, iterA / rounds);
    for (int it = 0; it < budget; ++it) {
      ++used;
      Profile pr = eval_profile(P, p);
      double inst_res = 0.0;
      for (int c = 0; c < P.M; ++c) {
        inst_res = std::max(inst_res, std::max(0.0, pr.z[c]));
        inst_res = std::max(inst_res, p[c] * std::max(0.0, -pr.z[c]));
      }
      ema = ema < 0 ? inst_res : 0.9 * ema + 0.1 * inst_res;
      for (int c = 0; c < P.M; ++c) avg[c] = 0.95 * avg[c] + 0.05 * p[c];
      if (it % 20 == 0 || inst_res <= cfg.tol) {
        probe(p);
        if (it > 40) probe(avg);
        if (best_res <= cfg.tol * 0.25) break;
      }
      // halve the step when the smoothed residual stops improving
      if (++since_halve >= 10) {
        if (ema_prev >= 0 && ema > ema_prev * 0.999) eta = std::max(eta * 0.5, cfg.eta_floor);
        ema_prev = ema;
        since_halve = 0;
      }
      for (int c = 0; c < P.M; ++c)
        p[c] = std::min(std::max(0.0, p[c] + eta * pr.z[c]), P.pbar);
    }
    probe(p);
    probe(avg);
    if (best_res <= cfg.tol * 0.25) break;

    // Gauss-Newton polish from the best point seen so far. Central
    // differences: the residual surface is piecewise affine with kinks on the
    // equilibrium manifold itself, so one-sided slopes mislead near it.
    p = best_p;
    int stalls = 0;
    for (int gn = 0; gn < cfg.gn_iters; ++gn) {
      Profile pr0 = eval_profile(P, p);
      Selection s0 = select_assignment(P, p, pr0);
      if (!s0.ok) break;
      auto F0 = residual_vector(P, p, s0);
      double r0 = linf(F0);
      if (r0 < best_res) {
        best_res = r0;
        best_p = p;
      }
      if (r0 <= cfg.tol * 1e-4) break;
      double h = std::max(1e-7, r0 * 0.25);
      std::vector<std::vector<double>> J(F0.size(), std::vector<double>(P.M, 0.0));
      for (int c = 0; c < P.M; ++c) {
        PriceVector qp = p, qm = p;
        qp[c] = std::min(qp[c] + h, P.pbar);
        qm[c] = std::max(qm[c] - h, 0.0);
        double hh = qp[c] - qm[c];
        if (hh == 0.0) continue;
        Profile prp = eval_profile(P, qp);
        Selection sp = select_assignment(P, qp, prp);
        Profile prm = eval_profile(P, qm);
        Selection sm = select_assignment(P, qm, prm);
        if (!sp.ok || !sm.ok) continue;
        auto Fp = residual_vector(P, qp, sp);
        auto Fm = residual_vector(P, qm, sm);
        for (size_t r = 0; r < F0.size(); ++r) J[r][c] = (Fp[r] - Fm[r]) / hh;
      }
      auto dp = detail::lstsq_step(J, F0, 1e-12);
      double step = 1.0;
      bool improved = false;
      for (int bt = 0; bt < 30; ++bt) {
        PriceVector q(P.M);
        for (int c = 0; c < P.M; ++c)
          q[c] = std::min(std::max(0.0, p[c] + step * dp[c]), P.pbar);
        double res = eval_selection(q);
        if (res < r0 * (1.0 - 1e-6)) {
          p = q;
          if (res < best_res) {
            best_res = res;
            best_p = q;
          }
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) {
        if (++stalls > 5) break;
        // seeded jitter, escalating from infinitesimal to the residual scale
        double scale = 1e-8 * std::pow(10.0, stalls - 1);
        std::uniform_real_distribution<double> d(-scale, scale);
        for (int c = 0; c < P.M; ++c) p[c] = std::min(std::max(0.0, p[c] + d(rng)), P.pbar);
      } else {
        stalls = 0;
      }
    }
    p = best_p;
    if (best_res <= cfg.tol * 0.25) break;
  }
  p = best_p;

  Profile prf = eval_profile(P, p);
  Selection sf = select_assignment(P, p, prf);
  Assignment x;
  if (sf.ok) {
    x = sf.x;
  } else {
    x = zero_assignment(P.sys->N, P.sys->L);
    for (int i = 0; i < P.sys->N; ++i) x[i] = prf.demands[i].bundle;
  }
  StartResult out;
  out.p = p;
  out.iterations = used;
  out.cert = make_certificate(P, p, x, cfg.tol);
  out.cert.iterations = used;
  return out;
}

// Nelder-Mead on the L2 selection gap, used as a fallback.
inline PriceVector nelder_mead(const EquilibriumProblem& P, PriceVector start, double pbar,
                               int budget) {
  const int M = static_cast<int>(start.size());
  if (M == 0) return start;
  auto f = [&](const PriceVector& q) {
    Profile pr = eval_profile(P, q);
    Selection sel = select_assignment(P, q, pr);
    if (!sel.ok) return 1e300;
    std::vector<double> extra;
    for (double w : sel.w) extra.push_back(w);
    for (double t : sel.t) extra.push_back(t);
    return equilibrium_gap(P, q, sel.z, &extra);
  };
  auto clamp = [&](PriceVector q) {
    for (double& v : q) v = std::min(std::max(0.0, v), pbar);
    return q;
  };
  std::vector<std::pair<double, PriceVector>> simplex;
  simplex.push_back({f(start), start});
  for (int c = 0; c < M; ++c) {
    PriceVector q = start;
    q[c] = q[c] + std::max(0.05 * pbar, 0.05);
    q = clamp(q);
    simplex.push_back({f(q), q});
  }
  auto centroid = [&](int skip) {
    PriceVector c(M, 0.0);
    for (int s = 0; s < static_cast<int>(simplex.size()); ++s) {
      if (s == skip) continue;
      for (int j = 0; j < M; ++j) c[j] += simplex[s].second[j];
    }
    for (int j = 0; j < M; ++j) c[j] /= (simplex.size() - 1);
    return c;
  };
  for (int it = 0; it < budget; ++it) {
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (simplex.front().first < 1e-12) break;
    int worst = static_cast<int>(simplex.size()) - 1;
    auto cen = centroid(worst);
    PriceVector refl(M);
    for (int j = 0; j < M; ++j) refl[j] = cen[j] + (cen[j] - simplex[worst].second[j]);
    refl = clamp(refl);
    double fr = f(refl);
    if (fr < simplex.front().first) {
      PriceVector exp_(M);
      for (int j = 0; j < M; ++j) exp_[j] = cen[j] + 2.0 * (cen[j] - simplex[worst].second[j]);
      exp_ = clamp(exp_);
      double fe = f(exp_);
      simplex[worst] = fe < fr ? std::pair{fe, exp_} : std::pair{fr, refl};
    } else if (fr < simplex[worst - 1].first) {
      simplex[worst] = {fr, refl};
    } else {
      PriceVector con(M);
      for (int j = 0; j < M; ++j) con[j] = cen[j] + 0.5 * (simplex[worst].second[j] - cen[j]);
      con = clamp(con);
      double fc = f(con);
      if (fc < simplex[worst].first) {
        simplex[worst] = {fc, con};
      } else {
        for (size_t s = 1; s < simplex.size(); ++s) {
          for (int j = 0; j < M; ++j)
            simplex[s].second[j] =
                simplex[0].second[j] + 0.5 * (simplex[s].second[j] - simplex[0].second[j]);
          simplex[s].first = f(simplex[s].second);
        }
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return simplex.front().second;
}

inline int solver_threads(const SolverConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("PMKT_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

// Full search: deterministic multi-start (zeros, b-proportional, seeded random
// in [0, pbar]), waves run concurrently, first converged start wins; a
// Nelder-Mead pass from the best point is the fallback.
inline EquilibriumCertificate solve(const Instance& inst, const ConstraintSystem& sys,
                                    const FeasibleSet& feas, SolverConfig cfg) {
  auto P = EquilibriumProblem::build(inst, sys, feas, cfg.alpha);
  const int M = P.M;

  std::vector<PriceVector> starts;
  starts.push_back(PriceVector(M, 0.0));
  if (M > 0) {
    double bmax = 0.0;
    for (double b : sys.priced_b) bmax = std::max(bmax, b);
    PriceVector bp(M, 0.0);
    for (int c = 0; c < M; ++c) bp[c] = 0.5 * P.pbar * (bmax > 0 ? sys.priced_b[c] / bmax : 1.0);
    starts.push_back(bp);
  }
  for (int s = static_cast<int>(starts.size()); s < std::max(1, cfg.restarts); ++s) {
    std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ull + s);
    std::uniform_real_distribution<double> d(0.0, P.pbar);
    PriceVector q(M);
    for (int c = 0; c < M; ++c) q[c] = d(rng);
    starts.push_back(q);
  }

  const int T = std::max(1, solver_threads(cfg));
  std::optional<StartResult> best;
  int best_index = -1;
  int iterations_total = 0;
  for (size_t wave = 0; wave < starts.size();) {
    size_t end = std::min(starts.size(), wave + static_cast<size_t>(T));
    std::vector<std::future<StartResult>> futs;
    for (size_t s = wave; s < end; ++s)
      futs.push_back(std::async(std::launch::async, [&, s] {
        return run_start(P, starts[s], cfg, cfg.seed * 1000003ull + s);
      }));
    bool done = false;
    for (size_t s = wave; s < end; ++s) {
      StartResult r = futs[s - wave].get();
      iterations_total += r.iterations;
      r.cert.start_used = static_cast<int>(s);
      if (!best || (r.cert.converged && !best->cert.converged) ||
          (r.cert.converged == best->cert.converged &&
           r.cert.residuals.max() < best->cert.residuals.max())) {
        best = std::move(r);
        best_index = static_cast<int>(s);
      }
      if (best && best->cert.converged) done = true;
    }
    if (done) break;
    wave = end;
  }

  if (best && !best->cert.converged && cfg.use_nelder_mead && M > 0) {
    PriceVector p = nelder_mead(P, best->p, P.pbar, 200 + 60 * M);
    SolverConfig polish = cfg;
    polish.max_iters = 200 * std::max(1, cfg.restarts);  // small extra phi budget
    StartResult r = run_start(P, p, polish, cfg.seed ^ 0xABCDEF1234567ull);
    iterations_total += r.iterations;
    r.cert.start_used = -2;
    if (r.cert.converged || r.cert.residuals.max() < best->cert.residuals.max()) best = std::move(r);
  }

  EquilibriumCertificate cert = best ? best->cert : EquilibriumCertificate{};
  cert.iterations = iterations_total;
  cert.seed = cfg.seed;
  (void)best_index;
  return cert;
}

struct GridOracleResult {
  double min_gap = 1e300;       // L2 equilibrium gap at the best grid node
  double min_max_residual = 1e300;
  PriceVector argmin;
  long nodes = 0;
  long nodes_below_tol = 0;
};

// Exhaustive sweep over [0, pbar]^M (M <= 3) at the given resolution; the gap
// is evaluated at the single-valued cheapest-demand selection.
inline GridOracleResult grid_oracle(const Instance& inst, const ConstraintSystem& sys,
                                    const FeasibleSet& feas, double alpha, double step,
                                    double tol = Tol::eq_residual, int threads = 0) {
  auto P = EquilibriumProblem::build(inst, sys, feas, alpha);
  const int M = P.M;
  if (M > 3) throw CapacityError("grid oracle: more than 3 priced constraints");
  if (M == 0) throw std::invalid_argument("grid oracle: no priced constraints");
  const long steps = static_cast<long>(std::floor(P.pbar / step + 1e-9)) + 1;
  long total = 1;
  for (int c = 0; c < M; ++c) total *= steps;

  SolverConfig tc;
  tc.threads = threads;
  const int T = std::max(1, solver_threads(tc));
  std::vector<GridOracleResult> partial(T);
  auto worker = [&](int t) {
    GridOracleResult res;
    for (long node = t; node < total; node += T) {
      long rem = node;
      PriceVector p(M);
      for (int c = 0; c < M; ++c) {
        p[c] = std::min(static_cast<double>(rem % steps) * step, P.pbar);
        rem /= steps;
      }
      Profile pr = eval_profile(P, p);
      double gap = equilibrium_gap(P, p, pr.z);
      double mx = 0.0;
      for (int c = 0; c < M; ++c) {
        mx = std::max(mx, std::max(0.0, pr.z[c]));
        mx = std::max(mx, p[c] * std::max(0.0, -pr.z[c]));
      }
      ++res.nodes;
      if (mx <= tol) ++res.nodes_below_tol;
      if (gap < res.min_gap) {
        res.min_gap = gap;
        res.argmin = p;
      }
      res.min_max_residual = std::min(res.min_max_residual, mx);
    }
    return res;
  };
  std::vector<std::future<GridOracleResult>> futs;
  for (int t = 0; t < T; ++t) futs.push_back(std::async(std::launch::async, worker, t));
  GridOracleResult out;
  for (auto& f : futs) {
    GridOracleResult r = f.get();
    out.nodes += r.nodes;
    out.nodes_below_tol += r.nodes_below_tol;
    out.min_max_residual = std::min(out.min_max_residual, r.min_max_residual);
    if (r.min_gap < out.min_gap) {
      out.min_gap = r.min_gap;
      out.argmin = r.argmin;
    }
  }
  return out;
}

}  // namespace pmkt
