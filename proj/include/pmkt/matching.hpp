#pragma once

#include <vector>

namespace pmkt {

// Maximum matching in a general graph: augmenting paths with blossom
// contraction, O(V^3). Vertices 0..n-1, edges as (u, v) pairs.
class BlossomMatching {
 public:
  explicit BlossomMatching(int n) : n_(n), adj_(n) {}

  void add_edge(int u, int v) {
    if (u == v) return;
    adj_[u].push_back(v);
    adj_[v].push_back(u);
  }

  int solve() {
    match_.assign(n_, -1);
    int res = 0;
    for (int u = 0; u < n_; ++u)
      if (match_[u] < 0 && augment(u)) ++res;
    return res;
  }

  const std::vector<int>& mate() const { return match_; }

 private:
  int n_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> match_, parent_, base_;
  std::vector<char> used_, blossom_;

  int lca(int a, int b) {
    std::vector<char> seen(n_, 0);
    for (;;) {
      a = base_[a];
      seen[a] = 1;
      if (match_[a] < 0) break;
      a = parent_[match_[a]];
    }
    for (;;) {
      b = base_[b];
      if (seen[b]) return b;
      b = parent_[match_[b]];
    }
  }

  void mark_path(int v, int b, int child, std::vector<int>& q) {
    while (base_[v] != b) {
      blossom_[base_[v]] = 1;
      blossom_[base_[match_[v]]] = 1;
      parent_[v] = child;
      child = match_[v];
      if (!used_[match_[v]]) {
        used_[match_[v]] = 1;
        q.push_back(match_[v]);
      }
      v = parent_[match_[v]];
    }
  }

  bool augment(int root) {
    used_.assign(n_, 0);
    parent_.assign(n_, -1);
    base_.resize(n_);
    for (int i = 0; i < n_; ++i) base_[i] = i;
    std::vector<int> q{root};
    used_[root] = 1;
    for (size_t head = 0; head < q.size(); ++head) {
      int v = q[head];
      for (int to : adj_[v]) {
        if (base_[v] == base_[to] || match_[v] == to) continue;
        if (to == root || (match_[to] >= 0 && parent_[match_[to]] >= 0)) {
          int curbase = lca(v, to);
          blossom_.assign(n_, 0);
          mark_path(v, curbase, to, q);
          mark_path(to, curbase, v, q);
          for (int i = 0; i < n_; ++i)
            if (blossom_[base_[i]]) {
              base_[i] = curbase;
              if (!used_[i]) {
                used_[i] = 1;
                q.push_back(i);
              }
            }
        } else if (parent_[to] < 0) {
          parent_[to] = v;
          if (match_[to] < 0) {
            // augment along the path
            int u = to;
            while (u >= 0) {
              int pv = parent_[u], ppv = match_[pv];
              match_[u] = pv;
              match_[pv] = u;
              u = ppv;
            }
            return true;
          }
          used_[match_[to]] = 1;
          q.push_back(match_[to]);
        }
      }
    }
    return false;
  }
};

inline int max_matching(int n, const std::vector<std::pair<int, int>>& edges) {
  BlossomMatching bm(n);
  for (auto [u, v] : edges) bm.add_edge(u, v);
  return bm.solve();
}

// Exhaustive oracle for small edge sets (test reference).
inline int max_matching_bruteforce(int n, const std::vector<std::pair<int, int>>& edges) {
  const int m = static_cast<int>(edges.size());
  int best = 0;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<char> used(n, 0);
    bool ok = true;
    int cnt = 0;
    for (int e = 0; e < m && ok; ++e) {
      if (!(mask & (1u << e))) continue;
      auto [u, v] = edges[e];
      if (used[u] || used[v] || u == v) ok = false;
      used[u] = used[v] = 1;
      ++cnt;
    }
    if (ok && cnt > best) best = cnt;
  }
  return best;
}

}  // namespace pmkt
