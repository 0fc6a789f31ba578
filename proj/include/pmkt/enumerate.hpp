#pragma once

#include <functional>
#include <vector>

#include "pmkt/lcs.hpp"
#include "pmkt/model.hpp"
#include "pmkt/structured.hpp"

namespace pmkt {

// Deterministic (integral) assignment enumerators for the structured kinds.
// Used to build VPolytopes for cross-checks, membership, and Pareto tests.

// Each agent takes one object or nothing; integral column capacities.
inline std::vector<RatMatrix> enumerate_hz(int N, const std::vector<Rat>& q) {
  const int L = static_cast<int>(q.size());
  std::vector<RatMatrix> out;
  std::vector<int> pick(N, -1);  // -1 = nothing
  std::vector<Rat> used(L, Rat(0));
  std::function<void(int)> rec = [&](int i) {
    if (i == N) {
      RatMatrix m(N, L);
      for (int v = 0; v < N; ++v)
        if (pick[v] >= 0) m.at(v, pick[v]) = 1;
      out.push_back(m);
      return;
    }
    pick[i] = -1;
    rec(i + 1);
    for (int l = 0; l < L; ++l) {
      if (used[l] + 1 > q[l]) continue;
      pick[i] = l;
      used[l] += 1;
      rec(i + 1);
      used[l] -= 1;
      pick[i] = -1;
    }
  };
  rec(0);
  return out;
}

inline std::vector<RatMatrix> enumerate_regional(const RegionalSpecChecked& spec, int N,
                                                 const std::vector<Rat>& q) {
  auto all = enumerate_hz(N, q);
  std::vector<RatMatrix> out;
  const int K = spec.K();
  for (const auto& m : all) {
    bool ok = true;
    for (int k = 0; k < K && ok; ++k) {
      Rat s(0);
      for (int j : spec.regions[k])
        for (int i = 0; i < N; ++i) s += m.at(i, j);
      if (s < spec.floors[k] || s > spec.ceilings[k]) ok = false;
    }
    if (ok) out.push_back(m);
  }
  return out;
}

inline std::vector<RatMatrix> enumerate_school(const SchoolSpecChecked& spec, int N,
                                               const std::vector<Rat>& q) {
  auto all = enumerate_hz(N, q);
  const int L = static_cast<int>(q.size());
  std::vector<RatMatrix> out;
  for (const auto& m : all) {
    bool ok = true;
    for (int l = 0; l < L && ok; ++l) {
      Rat sm(0), sM(0);
      for (int i = 0; i < N; ++i)
        (spec.is_minority[i] ? sm : sM) += m.at(i, l);
      if (sm < spec.m_floors[l] || sm > spec.m_ceilings[l]) ok = false;
      if (sM < spec.M_floors[l] || sM > spec.M_ceilings[l]) ok = false;
    }
    if (ok) out.push_back(m);
  }
  return out;
}

// Set partitions: objects are the nonempty agent subsets in bitmask order.
inline std::vector<RatMatrix> enumerate_coalitions(int N, int cap = 6) {
  if (N > cap) throw CapacityError("coalitions: agent count exceeds cap");
  const int L = (1 << N) - 1;
  std::vector<RatMatrix> out;
  std::vector<int> block_of(N, -1);
  std::vector<int> blocks;  // bitmasks
  std::function<void(int)> rec = [&](int i) {
    if (i == N) {
      RatMatrix m(N, L);
      for (int v = 0; v < N; ++v) m.at(v, blocks[block_of[v]] - 1) = 1;
      out.push_back(m);
      return;
    }
    for (size_t b = 0; b < blocks.size(); ++b) {
      blocks[b] |= (1 << i);
      block_of[i] = static_cast<int>(b);
      rec(i + 1);
      blocks[b] &= ~(1 << i);
    }
    blocks.push_back(1 << i);
    block_of[i] = static_cast<int>(blocks.size()) - 1;
    rec(i + 1);
    blocks.pop_back();
    block_of[i] = -1;
  };
  rec(0);
  return out;
}

// Bundles over items with integral quantities; each agent takes at most one
// bundle, and assigned bundles must fit within item quantities.
inline std::vector<RatMatrix> enumerate_bundles(int N, const std::vector<int>& item_quantities,
                                                const std::vector<std::vector<int>>& bundles) {
  const int L = static_cast<int>(bundles.size());
  std::vector<RatMatrix> out;
  std::vector<int> pick(N, -1);
  std::vector<int> used(item_quantities.size(), 0);
  std::function<void(int)> rec = [&](int i) {
    if (i == N) {
      RatMatrix m(N, L);
      for (int v = 0; v < N; ++v)
        if (pick[v] >= 0) m.at(v, pick[v]) = 1;
      out.push_back(m);
      return;
    }
    pick[i] = -1;
    rec(i + 1);
    for (int b = 0; b < L; ++b) {
      bool fits = true;
      for (int it : bundles[b])
        if (used[it] + 1 > item_quantities[it]) fits = false;
      if (!fits) continue;
      for (int it : bundles[b]) ++used[it];
      pick[i] = b;
      rec(i + 1);
      pick[i] = -1;
      for (int it : bundles[b]) --used[it];
    }
  };
  rec(0);
  return out;
}

}  // namespace pmkt
