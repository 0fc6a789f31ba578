#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pmkt/rational.hpp"

namespace pmkt {

// Extreme rays of the polyhedral cone {y in R^d : row . y <= 0 for all rows}.
// Incremental double description with the combinatorial adjacency test.
// Requires the rows to span R^d (pointed dual cone); throws otherwise.
class DoubleDescription {
 public:
  static std::vector<std::vector<Rat>> extreme_rays(const std::vector<std::vector<Rat>>& rows) {
    if (rows.empty()) throw std::invalid_argument("double description: no rows");
    const int d = static_cast<int>(rows[0].size());

    // Pick d linearly independent rows by Gaussian elimination.
    std::vector<int> chosen;
    std::vector<int> pivot_col;
    std::vector<std::vector<Rat>> elim;  // reduced copies of chosen rows
    for (int r = 0; r < static_cast<int>(rows.size()) && static_cast<int>(chosen.size()) < d; ++r) {
      std::vector<Rat> v = rows[r];
      for (size_t k = 0; k < elim.size(); ++k) {
        int pc = pivot_col[k];
        if (v[pc] != 0) {
          Rat f = v[pc] / elim[k][pc];
          for (int j = 0; j < d; ++j) v[j] -= f * elim[k][j];
        }
      }
      int pc = -1;
      for (int j = 0; j < d; ++j)
        if (v[j] != 0) {
          pc = j;
          break;
        }
      if (pc < 0) continue;
      pivot_col.push_back(pc);
      elim.push_back(std::move(v));
      chosen.push_back(r);
    }
    if (static_cast<int>(chosen.size()) < d)
      throw std::invalid_argument("double description: rows do not span the space");

    // Initial rays: columns of -B^{-1} for the chosen basis B.
    std::vector<std::vector<Rat>> binv = invert(rows, chosen, d);
    std::vector<Ray> rays;
    for (int j = 0; j < d; ++j) {
      Ray r;
      r.v.resize(d);
      for (int i = 0; i < d; ++i) r.v[i] = -binv[i][j];
      normalize(r.v);
      rays.push_back(std::move(r));
    }

    // Tight sets over processed rows; process chosen rows first.
    std::vector<int> order = chosen;
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
      bool skip = false;
      for (int c : chosen)
        if (c == r) skip = true;
      if (!skip) order.push_back(r);
    }
    const size_t words = (rows.size() + 63) / 64;
    for (auto& r : rays) r.tight.assign(words, 0);
    size_t processed = 0;
    auto mark_tight = [&](Ray& r, size_t row_pos) {
      r.tight[row_pos / 64] |= (uint64_t(1) << (row_pos % 64));
    };
    // chosen rows: each initial ray is tight at all but one
    for (size_t k = 0; k < order.size(); ++k) {
      const auto& a = rows[order[k]];
      if (k < static_cast<size_t>(d)) {
        for (auto& r : rays) {
          Rat s = dot(a, r.v);
          if (s == 0) mark_tight(r, k);
        }
        ++processed;
        continue;
      }
      // split rays by sign of a . r
      std::vector<Rat> s(rays.size());
      bool any_pos = false;
      for (size_t t = 0; t < rays.size(); ++t) {
        s[t] = dot(a, rays[t].v);
        if (s[t] > 0) any_pos = true;
      }
      if (!any_pos) {
        for (size_t t = 0; t < rays.size(); ++t)
          if (s[t] == 0) mark_tight(rays[t], k);
        ++processed;
        continue;
      }
      std::vector<Ray> next;
      for (size_t t = 0; t < rays.size(); ++t)
        if (s[t] <= 0) {
          Ray r = rays[t];
          if (s[t] == 0) mark_tight(r, k);
          next.push_back(std::move(r));
        }
      for (size_t tp = 0; tp < rays.size(); ++tp) {
        if (!(s[tp] > 0)) continue;
        for (size_t tm = 0; tm < rays.size(); ++tm) {
          if (!(s[tm] < 0)) continue;
          if (!adjacent(rays, tp, tm, processed)) continue;
          Ray nr;
          nr.v.resize(d);
          for (int j = 0; j < d; ++j) nr.v[j] = s[tp] * rays[tm].v[j] - s[tm] * rays[tp].v[j];
          normalize(nr.v);
          nr.tight.assign(words, 0);
          for (size_t w = 0; w < words; ++w)
            nr.tight[w] = rays[tp].tight[w] & rays[tm].tight[w];
          mark_tight(nr, k);
          next.push_back(std::move(nr));
        }
      }
      rays = std::move(next);
      ++processed;
    }

    std::vector<std::vector<Rat>> out;
    out.reserve(rays.size());
    for (auto& r : rays) out.push_back(std::move(r.v));
    return out;
  }

 private:
  struct Ray {
    std::vector<Rat> v;
    std::vector<uint64_t> tight;
  };

  static Rat dot(const std::vector<Rat>& a, const std::vector<Rat>& b) {
    Rat s(0);
    for (size_t i = 0; i < a.size(); ++i)
      if (a[i] != 0 && b[i] != 0) s += a[i] * b[i];
    return s;
  }

  static void normalize(std::vector<Rat>& v) {
    Rat mx(0);
    for (const auto& x : v) {
      Rat ax = x < 0 ? -x : x;
      if (ax > mx) mx = ax;
    }
    if (mx == 0 || mx == 1) return;
    for (auto& x : v) x /= mx;
  }

  // r1, r2 adjacent iff no third ray's tight set contains tight(r1) & tight(r2).
  static bool adjacent(const std::vector<Ray>& rays, size_t t1, size_t t2, size_t processed) {
    const auto& a = rays[t1].tight;
    const auto& b = rays[t2].tight;
    const size_t words = a.size();
    std::vector<uint64_t> common(words);
    for (size_t w = 0; w < words; ++w) common[w] = a[w] & b[w];
    (void)processed;
    for (size_t t = 0; t < rays.size(); ++t) {
      if (t == t1 || t == t2) continue;
      bool contains = true;
      for (size_t w = 0; w < words; ++w)
        if ((common[w] & ~rays[t].tight[w]) != 0) {
          contains = false;
          break;
        }
      if (contains) return false;
    }
    return true;
  }

  // Inverse of the d x d matrix formed by rows[chosen].
  static std::vector<std::vector<Rat>> invert(const std::vector<std::vector<Rat>>& rows,
                                              const std::vector<int>& chosen, int d) {
    std::vector<std::vector<Rat>> m(d, std::vector<Rat>(2 * d, Rat(0)));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) m[i][j] = rows[chosen[i]][j];
      m[i][d + i] = 1;
    }
    for (int col = 0; col < d; ++col) {
      int piv = -1;
      for (int i = col; i < d; ++i)
        if (m[i][col] != 0) {
          piv = i;
          break;
        }
      if (piv < 0) throw std::runtime_error("double description: singular basis");
      std::swap(m[col], m[piv]);
      Rat pv = m[col][col];
      for (int j = 0; j < 2 * d; ++j) m[col][j] /= pv;
      for (int i = 0; i < d; ++i) {
        if (i == col || m[i][col] == 0) continue;
        Rat f = m[i][col];
        for (int j = 0; j < 2 * d; ++j) m[i][j] -= f * m[col][j];
      }
    }
    std::vector<std::vector<Rat>> inv(d, std::vector<Rat>(d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) inv[i][j] = m[i][d + j];
    return inv;
  }
};

}  // namespace pmkt
