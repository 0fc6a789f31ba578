#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "pmkt/lcs.hpp"
#include "pmkt/matching.hpp"
#include "pmkt/model.hpp"

namespace pmkt {

// ---------------------------------------------------------------------------
// Bihierarchy check (Budish-Che-Kojima-Milgrom condition).
// Two cell sets cross if they overlap without nesting. H is a bihierarchy iff
// the crossing graph is bipartite; the 2-coloring gives the two hierarchies.
// ---------------------------------------------------------------------------
struct BihierarchyResult {
  bool ok = false;
  std::pair<int, int> witness{-1, -1};  // indices of a crossing pair on failure
  std::vector<int> color;               // 0/1 per constraint when ok
};

inline BihierarchyResult check_bihierarchy(const std::vector<std::vector<Cell>>& sets) {
  const int m = static_cast<int>(sets.size());
  std::vector<std::vector<char>> member(m);
  std::vector<std::set<Cell>> as_set;
  as_set.reserve(m);
  for (const auto& s : sets) as_set.emplace_back(s.begin(), s.end());
  auto crossing = [&](int x, int y) {
    bool overlap = false, x_in_y = true, y_in_x = true;
    for (const auto& c : as_set[x]) {
      if (as_set[y].count(c))
        overlap = true;
      else
        x_in_y = false;
    }
    for (const auto& c : as_set[y])
      if (!as_set[x].count(c)) y_in_x = false;
    return overlap && !x_in_y && !y_in_x;
  };
  std::vector<std::vector<int>> conflict(m);
  for (int x = 0; x < m; ++x)
    for (int y = x + 1; y < m; ++y)
      if (crossing(x, y)) {
        conflict[x].push_back(y);
        conflict[y].push_back(x);
      }
  BihierarchyResult res;
  res.color.assign(m, -1);
  for (int s = 0; s < m; ++s) {
    if (res.color[s] >= 0) continue;
    res.color[s] = 0;
    std::vector<int> q{s};
    for (size_t h = 0; h < q.size(); ++h) {
      int v = q[h];
      for (int w : conflict[v]) {
        if (res.color[w] < 0) {
          res.color[w] = 1 - res.color[v];
          q.push_back(w);
        } else if (res.color[w] == res.color[v]) {
          res.ok = false;
          res.witness = {std::min(v, w), std::max(v, w)};
          return res;
        }
      }
    }
  }
  res.ok = true;
  return res;
}

// ---------------------------------------------------------------------------
// Regional floors-to-ceilings recursion (doctors to hospitals).
// ---------------------------------------------------------------------------
struct RegionalSpecChecked {
  std::vector<std::vector<int>> regions;  // object indices
  std::vector<Rat> floors, ceilings;
  int K() const { return static_cast<int>(regions.size()); }
};

// Derived ceiling for every nonempty union of regions, keyed by bitmask.
inline std::vector<Rat> regional_ceilings(const RegionalSpecChecked& spec, int N, int cap = 12) {
  const int K = spec.K();
  if (K > cap) throw CapacityError("regional: number of regions exceeds cap");
  const int full = (1 << K) - 1;
  std::vector<Rat> q(full + 1, Rat(0));
  Rat floor_total(0);
  for (const auto& f : spec.floors) floor_total += f;
  auto outside_floor = [&](int mask) {
    Rat s(0);
    for (int k = 0; k < K; ++k)
      if (!(mask & (1 << k))) s += spec.floors[k];
    return s;
  };
  for (int k = 0; k < K; ++k) {
    int mask = 1 << k;
    q[mask] = std::min(spec.ceilings[k], Rat(N) - outside_floor(mask));
  }
  std::vector<int> masks;
  for (int mask = 1; mask <= full; ++mask)
    if (mask & (mask - 1)) masks.push_back(mask);
  std::sort(masks.begin(), masks.end(), [](int a, int b) {
    int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  for (int mask : masks) {
    Rat best = Rat(N) - outside_floor(mask);
    for (int k = 0; k < K; ++k)
      if (mask & (1 << k)) {
        Rat cand = q[mask ^ (1 << k)] + q[1 << k];
        if (cand < best) best = cand;
      }
    q[mask] = best;
  }
  return q;
}

namespace detail {

inline LinearConstraint unit_sum_constraint(int N, int L, const std::vector<Cell>& cells, Rat b,
                                            std::string label) {
  LinearConstraint c;
  c.a = RatMatrix(N, L);
  for (const auto& [i, j] : cells) c.a.at(i, j) = 1;
  c.b = std::move(b);
  c.label = std::move(label);
  c.rebuild_support();
  return c;
}

inline std::vector<Cell> row_cells(int i, int L) {
  std::vector<Cell> cs;
  for (int j = 0; j < L; ++j) cs.push_back({i, j});
  return cs;
}

inline std::vector<Cell> col_cells(int j, int N) {
  std::vector<Cell> cs;
  for (int i = 0; i < N; ++i) cs.push_back({i, j});
  return cs;
}

}  // namespace detail

// Inequality list for the regional model: unit-demand rows, supply columns,
// and one ceiling per region union with the derived quota.
inline std::vector<LinearConstraint> regional_system_rows(const RegionalSpecChecked& spec, int N,
                                                          const std::vector<Rat>& quantities,
                                                          int cap = 12) {
  const int L = static_cast<int>(quantities.size());
  auto derived = regional_ceilings(spec, N, cap);
  std::vector<LinearConstraint> W;
  for (int i = 0; i < N; ++i)
    W.push_back(detail::unit_sum_constraint(N, L, detail::row_cells(i, L), Rat(1),
                                            "row:" + std::to_string(i)));
  for (int j = 0; j < L; ++j)
    W.push_back(detail::unit_sum_constraint(N, L, detail::col_cells(j, N), quantities[j],
                                            "supply:" + std::to_string(j)));
  const int K = spec.K();
  for (int mask = 1; mask < (1 << K); ++mask) {
    std::vector<Cell> cells;
    std::string lbl = "region:";
    for (int k = 0; k < K; ++k)
      if (mask & (1 << k)) {
        for (int j : spec.regions[k])
          for (int i = 0; i < N; ++i) cells.push_back({i, j});
        lbl += std::to_string(k) + "+";
      }
    lbl.pop_back();
    W.push_back(detail::unit_sum_constraint(N, L, cells, derived[mask], lbl));
  }
  return W;
}

// ---------------------------------------------------------------------------
// Controlled school choice (two types) recursion and system.
// ---------------------------------------------------------------------------
struct SchoolSpecChecked {
  std::vector<char> is_minority;  // per agent
  std::vector<Rat> m_floors, m_ceilings, M_floors, M_ceilings;  // per school
};

inline std::vector<Rat> school_type_ceilings(const std::vector<Rat>& floors,
                                             const std::vector<Rat>& ceilings,
                                             const std::vector<Rat>& other_floors,
                                             const std::vector<Rat>& quantities, int type_count,
                                             int cap = 12) {
  const int L = static_cast<int>(quantities.size());
  if (L > cap) throw CapacityError("school choice: object count exceeds cap");
  const int full = (1 << L) - 1;
  std::vector<Rat> q(full + 1, Rat(0));
  auto outside_floor = [&](int mask) {
    Rat s(0);
    for (int l = 0; l < L; ++l)
      if (!(mask & (1 << l))) s += floors[l];
    return s;
  };
  for (int l = 0; l < L; ++l) {
    int mask = 1 << l;
    Rat room = quantities[l] - other_floors[l];
    Rat pop = Rat(type_count) - outside_floor(mask);
    q[mask] = std::min(std::min(ceilings[l], room), pop);
  }
  std::vector<int> masks;
  for (int mask = 1; mask <= full; ++mask)
    if (mask & (mask - 1)) masks.push_back(mask);
  std::sort(masks.begin(), masks.end(), [](int a, int b) {
    int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  for (int mask : masks) {
    Rat best = Rat(type_count) - outside_floor(mask);
    for (int l = 0; l < L; ++l)
      if (mask & (1 << l)) {
        Rat cand = q[mask ^ (1 << l)] + q[1 << l];
        if (cand < best) best = cand;
      }
    q[mask] = best;
  }
  return q;
}

inline std::vector<LinearConstraint> school_choice_system_rows(const SchoolSpecChecked& spec,
                                                               const std::vector<Rat>& quantities,
                                                               int cap = 12) {
  const int N = static_cast<int>(spec.is_minority.size());
  const int L = static_cast<int>(quantities.size());
  int Nm = 0;
  for (char c : spec.is_minority) Nm += c ? 1 : 0;
  const int NM = N - Nm;
  auto qm = school_type_ceilings(spec.m_floors, spec.m_ceilings, spec.M_floors, quantities, Nm, cap);
  auto qM = school_type_ceilings(spec.M_floors, spec.M_ceilings, spec.m_floors, quantities, NM, cap);

  std::vector<LinearConstraint> W;
  for (int i = 0; i < N; ++i)
    W.push_back(detail::unit_sum_constraint(N, L, detail::row_cells(i, L), Rat(1),
                                            "row:" + std::to_string(i)));
  for (int j = 0; j < L; ++j)
    W.push_back(detail::unit_sum_constraint(N, L, detail::col_cells(j, N), quantities[j],
                                            "supply:" + std::to_string(j)));
  for (int mask = 1; mask < (1 << L); ++mask) {
    for (int type = 0; type < 2; ++type) {
      std::vector<Cell> cells;
      for (int i = 0; i < N; ++i) {
        if ((spec.is_minority[i] != 0) != (type == 0)) continue;
        for (int l = 0; l < L; ++l)
          if (mask & (1 << l)) cells.push_back({i, l});
      }
      if (cells.empty()) continue;
      std::string lbl = (type == 0 ? "type:m:" : "type:M:") + std::to_string(mask);
      W.push_back(detail::unit_sum_constraint(N, L, cells, type == 0 ? qm[mask] : qM[mask], lbl));
    }
  }
  return W;
}

// ---------------------------------------------------------------------------
// Roommates (Proposition 3 families).
// ---------------------------------------------------------------------------
struct RoommateFamilies {
  // F: oriented pair sets (no loops, one orientation per pair), with k_F
  std::vector<std::pair<std::vector<Cell>, int>> f_families;
  // J: per agent, (i,i) plus one orientation per partner
  std::vector<std::vector<Cell>> j_families;
};

inline RoommateFamilies roommate_families(int n, bool full, int cap = 6) {
  if (n > cap) throw CapacityError("roommates: agent count exceeds cap");
  RoommateFamilies fam;
  // J families
  for (int i = 0; i < n; ++i) {
    std::vector<int> others;
    for (int j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    const int m = static_cast<int>(others.size());
    for (int mask = 0; mask < (1 << m); ++mask) {
      std::vector<Cell> cells{{i, i}};
      for (int t = 0; t < m; ++t) {
        int j = others[t];
        cells.push_back((mask & (1 << t)) ? Cell{j, i} : Cell{i, j});
      }
      fam.j_families.push_back(cells);
    }
  }
  // F families
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
  const int P = static_cast<int>(pairs.size());
  auto kf = [&](const std::vector<Cell>& cells) {
    std::vector<std::pair<int, int>> edges;
    for (const auto& [i, j] : cells) edges.push_back({i, j});
    return max_matching(n, edges);
  };
  if (full || n <= 4) {
    // all 3^P - 1 oriented pair subsets
    std::vector<int> state(P, 0);
    for (;;) {
      int t = 0;
      while (t < P && state[t] == 2) state[t++] = 0;
      if (t == P) break;
      ++state[t];
      std::vector<Cell> cells;
      for (int e = 0; e < P; ++e) {
        if (state[e] == 1) cells.push_back({pairs[e].first, pairs[e].second});
        if (state[e] == 2) cells.push_back({pairs[e].second, pairs[e].first});
      }
      if (cells.empty()) continue;
      fam.f_families.push_back({cells, kf(cells)});
    }
  } else {
    // all orientations of all odd cliques (Edmonds' odd-set inequalities)
    for (int mask = 1; mask < (1 << n); ++mask) {
      int sz = __builtin_popcount(mask);
      if (sz < 3 || sz % 2 == 0) continue;
      std::vector<int> verts;
      for (int v = 0; v < n; ++v)
        if (mask & (1 << v)) verts.push_back(v);
      std::vector<std::pair<int, int>> cedges;
      for (size_t a = 0; a < verts.size(); ++a)
        for (size_t b = a + 1; b < verts.size(); ++b) cedges.push_back({verts[a], verts[b]});
      const int E = static_cast<int>(cedges.size());
      for (int om = 0; om < (1 << E); ++om) {
        std::vector<Cell> cells;
        for (int e = 0; e < E; ++e)
          cells.push_back((om & (1 << e)) ? Cell{cedges[e].second, cedges[e].first}
                                          : Cell{cedges[e].first, cedges[e].second});
        fam.f_families.push_back({cells, sz / 2});
      }
    }
  }
  return fam;
}

// All perfect matchings with self-loops allowed (the deterministic roommate
// assignments): symmetric 0/1 matrices with unit row and column sums.
inline std::vector<RatMatrix> roommate_matchings(int n) {
  std::vector<RatMatrix> out;
  std::vector<int> mate(n, -1);
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      RatMatrix m(n, n);
      for (int v = 0; v < n; ++v) m.at(v, mate[v]) = 1;
      out.push_back(m);
      return;
    }
    if (mate[i] >= 0) {
      rec(i + 1);
      return;
    }
    mate[i] = i;
    rec(i + 1);
    mate[i] = -1;
    for (int j = i + 1; j < n; ++j) {
      if (mate[j] >= 0) continue;
      mate[i] = j;
      mate[j] = i;
      rec(i + 1);
      mate[i] = mate[j] = -1;
    }
  };
  rec(0);
  return out;
}

namespace detail {

// Keep only facets of D = conv(vertices) - R_+^{NL}: the lifted tight set
// (vertices with a.v = b, unit rays off the support) must have rank NL.
inline bool is_facet_of_down_hull(const LinearConstraint& c,
                                  const std::vector<RatMatrix>& vertices, int n_cells) {
  std::vector<std::vector<Rat>> tight;
  for (const auto& v : vertices) {
    Rat s(0);
    for (int k = 0; k < n_cells; ++k) s += c.a.v[k] * v.v[k];
    if (s == c.b) {
      std::vector<Rat> row(n_cells + 1);
      row[0] = 1;
      for (int k = 0; k < n_cells; ++k) row[k + 1] = v.v[k];
      tight.push_back(std::move(row));
    }
  }
  if (tight.empty()) return false;
  for (int k = 0; k < n_cells; ++k) {
    if (c.a.v[k] != 0) continue;
    std::vector<Rat> row(n_cells + 1, Rat(0));
    row[k + 1] = -1;
    tight.push_back(std::move(row));
  }
  // rank via Gaussian elimination
  int rank = 0;
  const int dim = n_cells + 1;
  std::vector<int> pivots;
  for (auto& row : tight) {
    for (size_t k = 0; k < pivots.size(); ++k) {
      int pc = pivots[k];
      if (row[pc] != 0) {
        Rat f = row[pc] / tight[k][pc];
        for (int j = 0; j < dim; ++j) row[j] -= f * tight[k][j];
      }
    }
    int pc = -1;
    for (int j = 0; j < dim; ++j)
      if (row[j] != 0) {
        pc = j;
        break;
      }
    if (pc < 0) continue;
    std::swap(tight[rank], row);
    pivots.push_back(pc);
    ++rank;
    if (rank == n_cells) return true;
  }
  return rank >= n_cells;
}

}  // namespace detail

// Full Prop 3 inequality list, pruned to irredundant members for n <= 4 (the
// facet prescreen needs the matching vertices; past that only duplicates go).
inline std::vector<LinearConstraint> roommate_system_rows(int n, bool full_families = false,
                                                          bool prune = true, int cap = 6) {
  auto fam = roommate_families(n, full_families, cap);
  std::vector<LinearConstraint> W;
  for (const auto& J : fam.j_families)
    W.push_back(detail::unit_sum_constraint(n, n, J, Rat(1), "J"));
  for (const auto& [F, kf] : fam.f_families)
    W.push_back(detail::unit_sum_constraint(n, n, F, Rat(kf), "F"));
  std::sort(W.begin(), W.end(), constraint_less);
  W.erase(std::unique(W.begin(), W.end(), constraint_equal), W.end());
  if (prune && n <= 4) {
    auto verts = roommate_matchings(n);
    std::vector<LinearConstraint> facets;
    for (auto& c : W)
      if (detail::is_facet_of_down_hull(c, verts, n * n)) facets.push_back(std::move(c));
    W = remove_redundant(std::move(facets), n, n);
  }
  return W;
}

// ---------------------------------------------------------------------------
// Bads -> dual goods transform (labor-supply trick).
// ---------------------------------------------------------------------------
inline Instance bads_dual(const Instance& bads) {
  if (!bads.bads_mode())
    throw std::invalid_argument("bads_dual: utilities must be nonpositive with some negative entry");
  const int N = bads.num_agents();
  const int L = bads.num_objects();
  Rat total(0);
  for (const auto& q : bads.quantities) total += q;
  if (total >= N)
    throw std::invalid_argument(
        "bads_dual: no slack (sum of required copies >= number of agents); the problem is pure HZ, "
        "solve it directly");
  Instance dual;
  dual.agents = bads.agents;
  for (const auto& o : bads.objects) dual.objects.push_back(o + "~");
  for (const auto& q : bads.quantities) dual.quantities.push_back(Rat(N) - q);
  dual.utilities.assign(N, std::vector<double>(L, 0.0));
  dual.bads_utility_constant.assign(N, 0.0);
  for (int i = 0; i < N; ++i)
    for (int l = 0; l < L; ++l) {
      dual.utilities[i][l] = -bads.utilities[i][l];
      dual.bads_utility_constant[i] += bads.utilities[i][l];
    }
  dual.alpha = 1.0;
  dual.is_dual_of_bads = true;
  dual.spec.kind = ConstraintKind::Explicit;
  // supply columns are the priced constraints
  for (int l = 0; l < L; ++l) {
    ExplicitRow row;
    row.a = RatMatrix(N, L);
    for (int i = 0; i < N; ++i) row.a.at(i, l) = 1;
    row.b = dual.quantities[l];
    dual.spec.explicit_rows.push_back(std::move(row));
  }
  // consumption space: x in [0,1]^L with sum in [L-1, L]
  dual.spec.explicit_consumption.assign(N, {});
  for (int i = 0; i < N; ++i) {
    ConsumptionRow window;
    window.a.assign(L, Rat(1));
    window.lo = Rat(L - 1);
    window.hi = Rat(L);
    window.label = "dual-window";
    dual.spec.explicit_consumption[i].push_back(window);
    for (int l = 0; l < L; ++l) {
      ConsumptionRow box;
      box.a.assign(L, Rat(0));
      box.a[l] = 1;
      box.hi = Rat(1);
      box.label = "box:" + dual.objects[l];
      dual.spec.explicit_consumption[i].push_back(box);
    }
  }
  return dual;
}

// Maps a dual-side assignment back to the primal bads assignment x = 1 - x~.
inline Assignment bads_primal_assignment(const Assignment& dual_x) {
  Assignment x = dual_x;
  for (auto& row : x)
    for (auto& v : row) v = 1.0 - v;
  return x;
}

}  // namespace pmkt
