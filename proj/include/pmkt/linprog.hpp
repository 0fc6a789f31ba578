#pragma once

#include <algorithm>
#include <cassert>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pmkt/rational.hpp"

namespace pmkt {

template <class T>
struct LpTraits {
  static T eps() { return T(0); }
};
template <>
struct LpTraits<double> {
  static double eps() { return 1e-9; }
};

enum class LpSense { Min, Max };
enum class LpRel { Le, Eq, Ge };
enum class LpStatus { Optimal, Infeasible, Unbounded };

template <class T>
struct LpRow {
  std::vector<T> a;
  T rhs{};
  LpRel rel = LpRel::Le;
};

template <class T>
struct LpProblem {
  LpSense sense = LpSense::Max;
  std::vector<T> c;
  std::vector<LpRow<T>> rows;
  std::vector<T> lower;                 // per-var lower bound, default 0
  std::vector<std::optional<T>> upper;  // per-var upper bound, default none

  explicit LpProblem(int nvars = 0) { resize(nvars); }
  void resize(int nvars) {
    c.assign(nvars, T(0));
    lower.assign(nvars, T(0));
    upper.assign(nvars, std::nullopt);
  }
  int num_vars() const { return static_cast<int>(c.size()); }
  void add_row(std::vector<T> a, LpRel rel, T rhs) {
    rows.push_back(LpRow<T>{std::move(a), std::move(rhs), rel});
  }
};

template <class T>
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<T> x;
  T value{};
  std::vector<T> dual;  // one per user row; value == dual.rhs for pure x>=0 problems
  bool optimal() const { return status == LpStatus::Optimal; }
};

// Dense two-phase primal simplex with Bland's rule. Deterministic: entering
// variable is the smallest index with negative reduced cost, ratio ties break
// toward the smallest basis index. Exact when T is Rat (eps = 0).
template <class T>
class SimplexSolver {
 public:
  LpSolution<T> solve(const LpProblem<T>& p) {
    const T eps = LpTraits<T>::eps();
    const int n = p.num_vars();
    LpSolution<T> out;

    // Shift variables by lower bounds, append upper-bound rows.
    std::vector<LpRow<T>> rows = p.rows;
    for (int j = 0; j < n; ++j) {
      if (p.upper[j]) {
        LpRow<T> r;
        r.a.assign(n, T(0));
        r.a[j] = T(1);
        r.rhs = *p.upper[j];
        r.rel = LpRel::Le;
        rows.push_back(std::move(r));
      }
    }
    const int m = static_cast<int>(rows.size());
    std::vector<T> shift = p.lower;
    std::vector<T> rhs(m);
    std::vector<int> flip(m, 1);
    for (int i = 0; i < m; ++i) {
      T b = rows[i].rhs;
      for (int j = 0; j < n; ++j) b -= rows[i].a[j] * shift[j];
      rhs[i] = b;
    }
    // Minimization internally.
    std::vector<T> cost(n);
    for (int j = 0; j < n; ++j) cost[j] = (p.sense == LpSense::Max) ? -p.c[j] : p.c[j];

    // Column layout: [structural n][slack/surplus per row][artificial per row as needed]
    std::vector<LpRel> rel(m);
    for (int i = 0; i < m; ++i) {
      rel[i] = rows[i].rel;
      if (rhs[i] < T(0)) {
        rhs[i] = -rhs[i];
        flip[i] = -1;
        for (auto& v : rows[i].a) v = -v;
        if (rel[i] == LpRel::Le)
          rel[i] = LpRel::Ge;
        else if (rel[i] == LpRel::Ge)
          rel[i] = LpRel::Le;
      }
    }
    std::vector<int> slack_col(m, -1), art_col(m, -1);
    int K = n;
    for (int i = 0; i < m; ++i)
      if (rel[i] != LpRel::Eq) slack_col[i] = K++;
    n_art_begin_ = K;
    for (int i = 0; i < m; ++i)
      if (rel[i] != LpRel::Le) art_col[i] = K++;

    tab_.assign(m, std::vector<T>(K + 1, T(0)));
    basis_.assign(m, -1);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) tab_[i][j] = rows[i].a[j];
      if (slack_col[i] >= 0) tab_[i][slack_col[i]] = (rel[i] == LpRel::Le) ? T(1) : T(-1);
      if (art_col[i] >= 0) tab_[i][art_col[i]] = T(1);
      tab_[i][K] = rhs[i];
      basis_[i] = (rel[i] == LpRel::Le) ? slack_col[i] : art_col[i];
    }

    // Phase 1 if artificials exist.
    if (n_art_begin_ < K) {
      std::vector<T> c1(K, T(0));
      for (int j = n_art_begin_; j < K; ++j) c1[j] = T(1);
      T v = run(c1, n_art_begin_, eps);
      if (v > eps) {
        out.status = LpStatus::Infeasible;
        return out;
      }
      // Pivot artificials out of the basis; drop redundant rows.
      for (int i = static_cast<int>(tab_.size()) - 1; i >= 0; --i) {
        if (basis_[i] < n_art_begin_) continue;
        int piv = -1;
        for (int j = 0; j < n_art_begin_; ++j)
          if (abs_(tab_[i][j]) > eps) {
            piv = j;
            break;
          }
        if (piv >= 0) {
          pivot(i, piv);
        } else {
          tab_.erase(tab_.begin() + i);
          basis_.erase(basis_.begin() + i);
        }
      }
    }

    // Phase 2 on real costs; artificial columns barred from entering.
    std::vector<T> c2(K, T(0));
    for (int j = 0; j < n; ++j) c2[j] = cost[j];
    T v = run(c2, n_art_begin_, eps, /*allow_unbounded=*/true);
    if (unbounded_) {
      out.status = LpStatus::Unbounded;
      return out;
    }

    out.status = LpStatus::Optimal;
    out.x.assign(n, T(0));
    for (size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] < n) out.x[basis_[i]] = tab_[i].back();
    for (int j = 0; j < n; ++j) out.x[j] += shift[j];
    out.value = T(0);
    for (int j = 0; j < n; ++j) out.value += p.c[j] * out.x[j];

    // Row duals from reduced costs of each row's unit column.
    out.dual.assign(p.rows.size(), T(0));
    std::vector<T> red(K + 1, T(0));
    reduced_costs(c2, red);
    for (size_t i = 0; i < p.rows.size(); ++i) {
      int uc = slack_col[i] >= 0 ? slack_col[i] : art_col[i];
      if (uc < 0) continue;
      T y = -red[uc];  // c_uc = 0 for slack; for artificial phase-2 cost 0 as well
      if (slack_col[i] >= 0 && rel[i] == LpRel::Ge) y = -y;
      if (flip[i] < 0) y = -y;
      out.dual[i] = (p.sense == LpSense::Max) ? -y : y;
    }
    return out;
  }

 private:
  std::vector<std::vector<T>> tab_;
  std::vector<int> basis_;
  int n_art_begin_ = 0;
  bool unbounded_ = false;

  static T abs_(const T& v) { return v < T(0) ? -v : v; }

  void reduced_costs(const std::vector<T>& c, std::vector<T>& red) const {
    const int K = static_cast<int>(tab_.empty() ? red.size() - 1 : tab_[0].size() - 1);
    for (int j = 0; j <= K; ++j) {
      T r = (j < static_cast<int>(c.size())) ? c[j] : T(0);
      for (size_t i = 0; i < tab_.size(); ++i) {
        const int bj = basis_[i];
        const T cb = (bj < static_cast<int>(c.size())) ? c[bj] : T(0);
        if (cb != T(0)) r -= cb * tab_[i][j];
      }
      red[j] = r;
    }
  }

  void pivot(int pr, int pc) {
    const T pv = tab_[pr][pc];
    const int W = static_cast<int>(tab_[pr].size());
    for (int j = 0; j < W; ++j) tab_[pr][j] /= pv;
    for (size_t i = 0; i < tab_.size(); ++i) {
      if (static_cast<int>(i) == pr) continue;
      const T f = tab_[i][pc];
      if (f == T(0)) continue;
      for (int j = 0; j < W; ++j) tab_[i][j] -= f * tab_[pr][j];
    }
    basis_[pr] = pc;
  }

  // Runs Bland's-rule simplex for min c'y over current tableau.
  // Columns with index >= art_begin never enter when barred (phase 2).
  T run(const std::vector<T>& c, int art_begin, const T& eps, bool allow_unbounded = false) {
    unbounded_ = false;
    const int K = static_cast<int>(tab_.empty() ? 0 : tab_[0].size() - 1);
    std::vector<T> red(K + 1, T(0));
    reduced_costs(c, red);
    bool phase1 = false;
    for (int j = art_begin; j < K && j < static_cast<int>(c.size()); ++j)
      if (c[j] != T(0)) phase1 = true;
    for (;;) {
      int enter = -1;
      const int lim = phase1 ? K : art_begin;
      for (int j = 0; j < lim; ++j)
        if (red[j] < -eps) {
          enter = j;
          break;
        }
      if (enter < 0) break;
      int leave = -1;
      T best{};
      for (size_t i = 0; i < tab_.size(); ++i) {
        if (tab_[i][enter] > eps) {
          T ratio = tab_[i].back() / tab_[i][enter];
          if (leave < 0 || ratio < best ||
              (ratio == best && basis_[i] < basis_[leave])) {
            leave = static_cast<int>(i);
            best = ratio;
          }
        }
      }
      if (leave < 0) {
        if (allow_unbounded) {
          unbounded_ = true;
          return T(0);
        }
        throw std::runtime_error("simplex: unexpected unbounded subproblem");
      }
      pivot(leave, enter);
      const T f = red[enter];
      if (f != T(0))
        for (int j = 0; j <= K; ++j) red[j] -= f * tab_[leave][j];
    }
    T v = T(0);
    for (size_t i = 0; i < tab_.size(); ++i) {
      const int bj = basis_[i];
      const T cb = (bj < static_cast<int>(c.size())) ? c[bj] : T(0);
      v += cb * tab_[i].back();
    }
    return v;
  }
};

template <class T>
LpSolution<T> solve_lp(const LpProblem<T>& p) {
  SimplexSolver<T> s;
  return s.solve(p);
}

}  // namespace pmkt
