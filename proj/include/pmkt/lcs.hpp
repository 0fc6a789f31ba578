#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmkt/double_description.hpp"
#include "pmkt/linprog.hpp"
#include "pmkt/model.hpp"

namespace pmkt {

struct VPolytope {
  int N = 0, L = 0;
  std::vector<RatMatrix> vertices;
};

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string cell_name(const Instance* inst, int i, int j) {
  if (!inst) return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
  return "(" + inst->agents[i] + "," + inst->objects[j] + ")";
}

// Canonical comparison: by support size, then support cells, then coefficients, then b.
inline bool constraint_less(const LinearConstraint& x, const LinearConstraint& y) {
  if (x.support.size() != y.support.size()) return x.support.size() < y.support.size();
  if (x.support != y.support) return x.support < y.support;
  if (x.a.v != y.a.v) return x.a.v < y.a.v;
  return x.b < y.b;
}

inline bool constraint_equal(const LinearConstraint& x, const LinearConstraint& y) {
  return x.a.v == y.a.v && x.b == y.b;
}

namespace detail {

// max a.x subject to the other constraints and x >= 0 (exact). Returns true if
// the candidate is implied (max <= b, including infeasible "others" never happens
// since 0 is feasible).
inline bool implied_by(const LinearConstraint& cand, const std::vector<LinearConstraint>& others,
                       int N, int L) {
  const int n = N * L;
  LpProblem<Rat> lp(n);
  lp.sense = LpSense::Max;
  for (size_t k = 0; k < cand.a.v.size(); ++k) lp.c[k] = cand.a.v[k];
  for (const auto& o : others) {
    std::vector<Rat> row(o.a.v.begin(), o.a.v.end());
    lp.add_row(std::move(row), LpRel::Le, o.b);
  }
  auto sol = solve_lp(lp);
  if (sol.status == LpStatus::Unbounded) return false;
  return sol.optimal() && sol.value <= cand.b;
}

}  // namespace detail

// Removes constraints implied by the rest of the system plus x >= 0.
// Deterministic: candidates are visited in canonical order.
inline std::vector<LinearConstraint> remove_redundant(std::vector<LinearConstraint> W, int N,
                                                      int L) {
  std::sort(W.begin(), W.end(), constraint_less);
  W.erase(std::unique(W.begin(), W.end(), constraint_equal), W.end());
  // cheap cellwise dominance: drop (a,b) if some (a',b') has a' >= a and b' <= b
  std::vector<char> dead(W.size(), 0);
  for (size_t i = 0; i < W.size(); ++i) {
    for (size_t j = 0; j < W.size(); ++j) {
      if (i == j || dead[i] || dead[j]) continue;
      bool dom = W[j].b <= W[i].b;
      for (size_t k = 0; dom && k < W[i].a.v.size(); ++k)
        if (W[j].a.v[k] < W[i].a.v[k]) dom = false;
      if (dom && !(constraint_equal(W[i], W[j]))) dead[i] = 1;
    }
  }
  std::vector<LinearConstraint> kept;
  for (size_t i = 0; i < W.size(); ++i)
    if (!dead[i]) kept.push_back(W[i]);
  // LP-based pass
  for (size_t i = kept.size(); i-- > 0;) {
    std::vector<LinearConstraint> others;
    for (size_t j = 0; j < kept.size(); ++j)
      if (j != i) others.push_back(kept[j]);
    if (detail::implied_by(kept[i], others, N, L)) kept.erase(kept.begin() + i);
  }
  std::sort(kept.begin(), kept.end(), constraint_less);
  return kept;
}

// Facet description of lcs(C) from the vertex description of C: double
// description on the generators (points = vertices, rays = negative units),
// then canonical scaling and redundancy removal (relative to x >= 0).
inline std::vector<LinearConstraint> lcs_facets(const VPolytope& poly, int dim_cap = 16,
                                                bool prune = true) {
  const int N = poly.N, L = poly.L;
  const int n = N * L;
  if (poly.vertices.empty()) throw std::invalid_argument("lcs_facets: empty vertex set");
  if (n > dim_cap)
    throw CapacityError(
        "lcs_facets: dimension " + std::to_string(n) + " exceeds the cap " +
        std::to_string(dim_cap) + "; use a structured constraint_spec for large instances");

  std::vector<std::vector<Rat>> rows;
  rows.reserve(poly.vertices.size() + n);
  for (const auto& v : poly.vertices) {
    std::vector<Rat> r(n + 1);
    r[0] = 1;
    for (int k = 0; k < n; ++k) {
      r[k + 1] = v.v[k];
      if (v.v[k] < 0) throw std::invalid_argument("lcs_facets: negative vertex entry");
    }
    rows.push_back(std::move(r));
  }
  for (int j = 0; j < n; ++j) {
    std::vector<Rat> r(n + 1, Rat(0));
    r[j + 1] = -1;
    rows.push_back(std::move(r));
  }
  auto rays = DoubleDescription::extreme_rays(rows);

  std::vector<LinearConstraint> W;
  for (const auto& y : rays) {
    LinearConstraint c;
    c.b = -y[0];
    c.a = RatMatrix(N, L);
    bool zero = true;
    for (int k = 0; k < n; ++k) {
      c.a.v[k] = y[k + 1];
      if (y[k + 1] != 0) zero = false;
      if (y[k + 1] < 0) throw std::runtime_error("lcs_facets: negative facet coefficient");
    }
    if (zero) continue;  // 0.x <= b, trivial
    if (c.b < 0) throw std::runtime_error("lcs_facets: negative right-hand side");
    c.normalize();
    c.rebuild_support();
    W.push_back(std::move(c));
  }
  if (prune) W = remove_redundant(std::move(W), N, L);
  std::sort(W.begin(), W.end(), constraint_less);
  return W;
}

// Merge all b = 0 inequalities into the single forbidden constraint (cellwise
// max), fold single-agent constraints into Omega^i, and keep the rest priced.
inline ConstraintSystem classify(std::vector<LinearConstraint> W, int N, int L,
                                 std::vector<std::vector<ConsumptionRow>> consumption = {}) {
  ConstraintSystem sys;
  sys.N = N;
  sys.L = L;
  sys.forbidden.a = RatMatrix(N, L);
  sys.forbidden.b = 0;
  sys.forbidden.label = "forbidden";
  sys.individual.assign(N, {});
  sys.consumption = consumption.empty()
                        ? std::vector<std::vector<ConsumptionRow>>(N)
                        : std::move(consumption);

  std::vector<LinearConstraint> rest;
  for (auto& c : W) {
    if (c.b == 0) {
      for (size_t k = 0; k < c.a.v.size(); ++k)
        if (c.a.v[k] > sys.forbidden.a.v[k]) sys.forbidden.a.v[k] = c.a.v[k];
    } else {
      rest.push_back(std::move(c));
    }
  }
  sys.forbidden.rebuild_support();

  for (auto& c : rest) {
    int who = -1;
    if (c.single_agent(&who))
      sys.individual[who].push_back(std::move(c));
    else
      sys.priced.push_back(std::move(c));
  }
  std::sort(sys.priced.begin(), sys.priced.end(), constraint_less);
  for (auto& v : sys.individual) std::sort(v.begin(), v.end(), constraint_less);
  sys.build_caches();
  return sys;
}

// Flattens a classified system back to one inequality list (for idempotence
// checks and serialization).
inline std::vector<LinearConstraint> flatten(const ConstraintSystem& sys) {
  std::vector<LinearConstraint> W;
  if (!sys.forbidden.support.empty()) W.push_back(sys.forbidden);
  for (const auto& per : sys.individual)
    for (const auto& c : per) W.push_back(c);
  for (const auto& c : sys.priced) W.push_back(c);
  return W;
}

// Exact membership of a rational point in conv(vertices); optionally dominated
// membership (exists x' in hull with y <= x').
inline bool member_exact(const RatMatrix& y, const std::vector<RatMatrix>& vertices,
                         bool dominated = false) {
  if (vertices.empty()) return false;
  const int n = static_cast<int>(y.v.size());
  const int K = static_cast<int>(vertices.size());
  LpProblem<Rat> lp(K);
  lp.sense = LpSense::Max;  // feasibility only
  {
    std::vector<Rat> ones(K, Rat(1));
    lp.add_row(ones, LpRel::Eq, Rat(1));
  }
  for (int k = 0; k < n; ++k) {
    std::vector<Rat> row(K);
    for (int v = 0; v < K; ++v) row[v] = vertices[v].v[k];
    lp.add_row(row, dominated ? LpRel::Ge : LpRel::Eq, y.v[k]);
  }
  auto sol = solve_lp(lp);
  return sol.optimal();
}

// Violation magnitude of x against the feasible-set representation: 0 when x
// lies in C up to LP accuracy. Vertex mode solves the convex-combination LP
// with L1 deviation; H-form mode evaluates the rows.
inline double membership_violation(const FeasibleSet& feas, const Assignment& x) {
  const int N = feas.N, L = feas.L;
  if (feas.mode == FeasibleSet::Mode::HForm) {
    double v = 0.0;
    for (size_t r = 0; r < feas.rows_a.size(); ++r) {
      double s = 0.0;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < L; ++j)
          s += feas.rows_a[r][static_cast<size_t>(i) * L + j] * x[i][j];
      v = std::max(v, s - feas.rows_hi[r]);
      v = std::max(v, feas.rows_lo[r] - s);
    }
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < L; ++j) v = std::max(v, -x[i][j]);
    return std::max(0.0, v);
  }
  const int K = static_cast<int>(feas.vertices.size());
  const int n = N * L;
  LpProblem<double> lp(K + 2 * n);
  lp.sense = LpSense::Min;
  for (int d = 0; d < 2 * n; ++d) lp.c[K + d] = 1.0;
  {
    std::vector<double> ones(K + 2 * n, 0.0);
    for (int k = 0; k < K; ++k) ones[k] = 1.0;
    lp.add_row(std::move(ones), LpRel::Eq, 1.0);
  }
  for (int t = 0; t < n; ++t) {
    std::vector<double> row(K + 2 * n, 0.0);
    for (int k = 0; k < K; ++k) row[k] = to_double(feas.vertices[k].v[t]);
    row[K + t] = 1.0;
    row[K + n + t] = -1.0;
    lp.add_row(std::move(row), LpRel::Eq, x[t / L][t % L]);
  }
  auto sol = solve_lp(lp);
  if (!sol.optimal()) return 1e300;
  return sol.value;
}

// Convex weights exhibiting x as a combination of vertices (vertex mode).
inline std::optional<std::vector<double>> membership_weights(const FeasibleSet& feas,
                                                             const Assignment& x,
                                                             double tol = 1e-7) {
  if (feas.mode != FeasibleSet::Mode::Vertices) return std::nullopt;
  const int N = feas.N, L = feas.L;
  const int K = static_cast<int>(feas.vertices.size());
  const int n = N * L;
  LpProblem<double> lp(K + 2 * n);
  lp.sense = LpSense::Min;
  for (int d = 0; d < 2 * n; ++d) lp.c[K + d] = 1.0;
  {
    std::vector<double> ones(K + 2 * n, 0.0);
    for (int k = 0; k < K; ++k) ones[k] = 1.0;
    lp.add_row(std::move(ones), LpRel::Eq, 1.0);
  }
  for (int t = 0; t < n; ++t) {
    std::vector<double> row(K + 2 * n, 0.0);
    for (int k = 0; k < K; ++k) row[k] = to_double(feas.vertices[k].v[t]);
    row[K + t] = 1.0;
    row[K + n + t] = -1.0;
    lp.add_row(std::move(row), LpRel::Eq, x[t / L][t % L]);
  }
  auto sol = solve_lp(lp);
  if (!sol.optimal() || sol.value > tol) return std::nullopt;
  return std::vector<double>(sol.x.begin(), sol.x.begin() + K);
}

// Vertex enumeration of {x >= 0 : lo <= a.x <= hi rows} via double description
// on the homogenization. Throws CapacityError past the dimension cap and
// std::runtime_error if the region is unbounded.
inline std::vector<RatMatrix> enumerate_vertices(const FeasibleSet& hform, int dim_cap = 16) {
  if (hform.mode != FeasibleSet::Mode::HForm)
    throw std::invalid_argument("enumerate_vertices expects an H-form feasible set");
  const int n = hform.N * hform.L;
  if (n > dim_cap) throw CapacityError("enumerate_vertices: dimension exceeds cap");
  std::vector<std::vector<Rat>> rows;
  for (const auto& r : hform.rows) {
    if (r.hi) {
      std::vector<Rat> row(n + 1);
      for (int k = 0; k < n; ++k) row[k] = r.a[k];
      row[n] = -*r.hi;
      rows.push_back(std::move(row));
    }
    if (r.lo) {
      std::vector<Rat> row(n + 1);
      for (int k = 0; k < n; ++k) row[k] = -r.a[k];
      row[n] = *r.lo;
      rows.push_back(std::move(row));
    }
  }
  for (int k = 0; k < n; ++k) {
    std::vector<Rat> row(n + 1, Rat(0));
    row[k] = -1;
    rows.push_back(std::move(row));
  }
  {
    std::vector<Rat> row(n + 1, Rat(0));
    row[n] = -1;
    rows.push_back(std::move(row));
  }
  auto rays = DoubleDescription::extreme_rays(rows);
  std::vector<RatMatrix> verts;
  for (const auto& y : rays) {
    if (y[n] == 0) {
      bool zero = true;
      for (int k = 0; k < n; ++k)
        if (y[k] != 0) zero = false;
      if (zero) continue;
      throw std::runtime_error("enumerate_vertices: region is unbounded");
    }
    RatMatrix v(hform.N, hform.L);
    for (int k = 0; k < n; ++k) v.v[k] = y[k] / y[n];
    verts.push_back(std::move(v));
  }
  std::sort(verts.begin(), verts.end(), [](const RatMatrix& a, const RatMatrix& b) { return a.v < b.v; });
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  return verts;
}

}  // namespace pmkt
