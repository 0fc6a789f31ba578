#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pmkt/linprog.hpp"
#include "pmkt/rational.hpp"
#include "pmkt/tolerances.hpp"

namespace pmkt {

using Cell = std::pair<int, int>;  // (agent, object)

// Dense N x L rational matrix, row-major.
struct RatMatrix {
  int n = 0, l = 0;
  std::vector<Rat> v;
  RatMatrix() = default;
  RatMatrix(int n_, int l_) : n(n_), l(l_), v(static_cast<size_t>(n_) * l_, Rat(0)) {}
  Rat& at(int i, int j) { return v[static_cast<size_t>(i) * l + j]; }
  const Rat& at(int i, int j) const { return v[static_cast<size_t>(i) * l + j]; }
  bool operator==(const RatMatrix& o) const { return n == o.n && l == o.l && v == o.v; }
};

using Assignment = std::vector<std::vector<double>>;  // N rows of length L
using PriceVector = std::vector<double>;

inline Assignment zero_assignment(int n, int l) {
  return Assignment(n, std::vector<double>(l, 0.0));
}

// One inequality a.x <= b with a >= 0, b >= 0 over assignment cells.
struct LinearConstraint {
  RatMatrix a;
  Rat b;
  std::vector<Cell> support;
  std::string label;

  void rebuild_support() {
    support.clear();
    for (int i = 0; i < a.n; ++i)
      for (int j = 0; j < a.l; ++j)
        if (a.at(i, j) != 0) support.push_back({i, j});
  }
  bool single_agent(int* who = nullptr) const {
    int agent = -1;
    for (const auto& [i, j] : support) {
      if (agent == -1) agent = i;
      if (i != agent) return false;
    }
    if (who) *who = agent;
    return agent != -1;
  }
  // Canonical scale: largest coefficient exactly 1.
  void normalize() {
    Rat mx(0);
    for (const auto& x : a.v)
      if (x > mx) mx = x;
    if (mx == 0 || mx == 1) return;
    for (auto& x : a.v) x /= mx;
    b /= mx;
  }
};

// A row of an agent's consumption polytope: lo <= a.x_i <= hi over the agent's
// own L cells. Individual Omega constraints become (lo = -inf, hi = b).
struct ConsumptionRow {
  std::vector<Rat> a;
  std::optional<Rat> lo;
  std::optional<Rat> hi;
  std::string label;
};

// Classified system: the unique (a0, 0), per-agent individual constraints
// folded into consumption sets, and the priced constraints (canonical order).
struct ConstraintSystem {
  int N = 0, L = 0;
  LinearConstraint forbidden;                          // (a0, 0); may be trivial
  std::vector<std::vector<LinearConstraint>> individual;  // per agent
  std::vector<LinearConstraint> priced;                // Omega*
  std::vector<std::vector<ConsumptionRow>> consumption;   // extra X_i rows (may have lo)

  // float mirrors, built once
  std::vector<std::vector<double>> priced_a;  // per constraint, flattened N*L
  std::vector<double> priced_b;
  std::vector<std::vector<char>> forbidden_mask;  // N x L

  void build_caches() {
    priced_a.clear();
    priced_b.clear();
    for (const auto& c : priced) {
      std::vector<double> row(static_cast<size_t>(N) * L, 0.0);
      for (size_t k = 0; k < c.a.v.size(); ++k) row[k] = to_double(c.a.v[k]);
      priced_a.push_back(std::move(row));
      priced_b.push_back(to_double(c.b));
    }
    forbidden_mask.assign(N, std::vector<char>(L, 0));
    if (forbidden.a.n == N)
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < L; ++j) forbidden_mask[i][j] = forbidden.a.at(i, j) != 0 ? 1 : 0;
  }

  const Rat& fa(int i, int j) const { return forbidden.a.at(i, j); }
};

enum class ConstraintKind {
  Hz,
  Hierarchy,
  Regional,
  SchoolChoice,
  Roommates,
  Coalitions,
  Bundles,
  Vertices,
  Explicit,
};

struct HierarchyEntry {
  std::vector<Cell> cells;
  Rat floor{0};
  Rat ceiling{0};
};

struct ExplicitRow {
  RatMatrix a;
  Rat b;
};

struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::Hz;
  // hierarchy
  std::vector<HierarchyEntry> hierarchy;
  // regional
  std::vector<std::vector<int>> regions;  // object indices per region
  std::vector<Rat> region_floors, region_ceilings;
  // school choice
  std::vector<int> minority_agents;
  std::vector<Rat> m_floors, m_ceilings, M_floors, M_ceilings;
  // bundles
  std::vector<std::string> items;
  std::vector<int> item_quantities;
  std::vector<std::vector<int>> bundles;  // item indices per bundle
  // vertices
  std::vector<RatMatrix> vertices;
  // explicit
  std::vector<ExplicitRow> explicit_rows;
  std::vector<std::vector<ConsumptionRow>> explicit_consumption;  // optional, per agent
  bool full_families = false;  // roommates: emit full F family beyond n<=4
};

struct Instance {
  std::vector<std::string> agents;
  std::vector<std::string> objects;
  std::vector<Rat> quantities;
  std::vector<std::vector<double>> utilities;
  std::optional<std::vector<std::vector<double>>> endowments;
  double alpha = 1.0;
  ConstraintSpec spec;

  // bads bookkeeping: set by bads_dual so reports can reconstruct primal utilities
  bool is_dual_of_bads = false;
  std::vector<double> bads_utility_constant;  // sum_l v_il of the primal bads instance

  int num_agents() const { return static_cast<int>(agents.size()); }
  int num_objects() const { return static_cast<int>(objects.size()); }
  double quantity_d(int l) const { return to_double(quantities[l]); }

  bool goods_mode() const {
    for (const auto& row : utilities)
      for (double v : row)
        if (v < 0.0) return false;
    return true;
  }
  bool bads_mode() const {
    bool any_neg = false;
    for (const auto& row : utilities)
      for (double v : row) {
        if (v > 0.0) return false;
        if (v < 0.0) any_neg = true;
      }
    return any_neg;
  }
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  bool ok() const { return violations.empty(); }
};

// Representation of the feasible set C itself (not its lower contour set).
// Vertices mode: convex hull of explicit assignments. HForm mode: two-sided
// rows over flattened cells (supply, regional windows, consumption rows, ...).
struct FeasibleSet {
  enum class Mode { Vertices, HForm };
  struct HRow {
    std::vector<Rat> a;  // length N*L
    std::optional<Rat> lo, hi;
    std::string label;
  };
  Mode mode = Mode::HForm;
  int N = 0, L = 0;
  std::vector<RatMatrix> vertices;
  std::vector<HRow> rows;

  // float mirrors
  std::vector<std::vector<double>> rows_a;
  std::vector<double> rows_lo, rows_hi;  // +-inf encoded as huge
  void build_caches() {
    rows_a.clear();
    rows_lo.clear();
    rows_hi.clear();
    for (const auto& r : rows) {
      std::vector<double> a(r.a.size());
      for (size_t k = 0; k < r.a.size(); ++k) a[k] = to_double(r.a[k]);
      rows_a.push_back(std::move(a));
      rows_lo.push_back(r.lo ? to_double(*r.lo) : -1e300);
      rows_hi.push_back(r.hi ? to_double(*r.hi) : 1e300);
    }
  }
};

// p_{i,l} = sum over priced constraints of a_{i,l} * p_c.
inline std::vector<std::vector<double>> personalized_prices(const ConstraintSystem& sys,
                                                            const PriceVector& p) {
  if (p.size() != sys.priced.size())
    throw std::invalid_argument("price vector length does not match priced constraints");
  std::vector<std::vector<double>> out(sys.N, std::vector<double>(sys.L, 0.0));
  for (size_t c = 0; c < p.size(); ++c) {
    if (p[c] == 0.0) continue;
    const auto& row = sys.priced_a[c];
    for (int i = 0; i < sys.N; ++i)
      for (int j = 0; j < sys.L; ++j) out[i][j] += p[c] * row[static_cast<size_t>(i) * sys.L + j];
  }
  return out;
}

// Groups agents with identical consumption sets, identical coefficient rows in
// every priced constraint, and identical endowments when present.
inline std::vector<std::vector<int>> equal_type_partition(const Instance& inst,
                                                          const ConstraintSystem& sys) {
  const int N = sys.N;
  auto key_of = [&](int i) {
    std::string key;
    // forbidden cells
    for (int j = 0; j < sys.L; ++j) key += sys.fa(i, j) != 0 ? "F" : ".";
    key += "|";
    // individual rows, canonically sorted
    std::vector<std::string> rows;
    for (const auto& c : sys.individual[i]) {
      std::string r = "b=" + to_string(c.b) + ":";
      for (int j = 0; j < sys.L; ++j) r += to_string(c.a.at(i, j)) + ",";
      rows.push_back(r);
    }
    for (const auto& cr : sys.consumption[i]) {
      std::string r = "c";
      r += cr.lo ? to_string(*cr.lo) : std::string("-");
      r += "<=";
      for (const auto& x : cr.a) r += to_string(x) + ",";
      r += "<=";
      r += cr.hi ? to_string(*cr.hi) : std::string("-");
      rows.push_back(r);
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& r : rows) key += r + ";";
    key += "|";
    for (const auto& c : sys.priced) {
      for (int j = 0; j < sys.L; ++j) key += to_string(c.a.at(i, j)) + ",";
      key += ";";
    }
    if (inst.endowments) {
      key += "|w:";
      for (double w : (*inst.endowments)[i]) key += std::to_string(w) + ",";
    }
    return key;
  };
  std::map<std::string, std::vector<int>> groups;
  for (int i = 0; i < N; ++i) groups[key_of(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [k, g] : groups) out.push_back(g);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pmkt
