#include <functional>
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pmkt/linprog.hpp"

using namespace pmkt;

namespace {

// Brute-force oracle: enumerate all basic solutions of {Ax <= b, x >= 0} by
// intersecting n constraint hyperplanes (rows or coordinate planes).
double vertex_oracle_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                         const std::vector<double>& c) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  std::vector<std::vector<double>> rows = A;
  std::vector<double> rhs = b;
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = -1.0;
    rows.push_back(e);
    rhs.push_back(0.0);
  }
  const int R = static_cast<int>(rows.size());
  double best = -1e300;
  std::vector<int> idx(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      // solve the n x n system
      std::vector<std::vector<double>> M(n, std::vector<double>(n + 1));
      for (int r = 0; r < n; ++r) {
        for (int j = 0; j < n; ++j) M[r][j] = rows[idx[r]][j];
        M[r][n] = rhs[idx[r]];
      }
      for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
          if (std::abs(M[r][col]) > 1e-9) {
            piv = r;
            break;
          }
        if (piv < 0) return;
        std::swap(M[col], M[piv]);
        for (int r = 0; r < n; ++r) {
          if (r == col) continue;
          double f = M[r][col] / M[col][col];
          for (int j = col; j <= n; ++j) M[r][j] -= f * M[col][j];
        }
      }
      std::vector<double> x(n);
      for (int j = 0; j < n; ++j) x[j] = M[j][n] / M[j][j];
      for (int r = 0; r < R; ++r) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += rows[r][j] * x[j];
        if (s > rhs[r] + 1e-6) return;
      }
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += c[j] * x[j];
      best = std::max(best, v);
      return;
    }
    for (int r = start; r < R; ++r) {
      idx[depth] = r;
      rec(r + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("box maximum") {
  LpProblem<double> lp(2);
  lp.sense = LpSense::Max;
  lp.c = {1.0, 1.0};
  lp.add_row({1.0, 0.0}, LpRel::Le, 1.0);
  lp.add_row({0.0, 1.0}, LpRel::Le, 1.0);
  auto s = solve_lp(lp);
  REQUIRE(s.optimal());
  CHECK(s.value == doctest::Approx(2.0));
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.x[1] == doctest::Approx(1.0));
}

TEST_CASE("empty feasible set reported infeasible") {
  LpProblem<double> lp(2);
  lp.sense = LpSense::Max;
  lp.c = {1.0, 1.0};
  lp.add_row({1.0, 0.0}, LpRel::Le, -1.0);
  auto s = solve_lp(lp);
  CHECK(s.status == LpStatus::Infeasible);
}

TEST_CASE("unbounded detected") {
  LpProblem<double> lp(1);
  lp.sense = LpSense::Max;
  lp.c = {1.0};
  auto s = solve_lp(lp);
  CHECK(s.status == LpStatus::Unbounded);
}

TEST_CASE("equality rows and duals") {
  // max 3x + 2y s.t. x + y = 4, x <= 3
  LpProblem<double> lp(2);
  lp.sense = LpSense::Max;
  lp.c = {3.0, 2.0};
  lp.add_row({1.0, 1.0}, LpRel::Eq, 4.0);
  lp.add_row({1.0, 0.0}, LpRel::Le, 3.0);
  auto s = solve_lp(lp);
  REQUIRE(s.optimal());
  CHECK(s.value == doctest::Approx(11.0));
  CHECK(s.x[0] == doctest::Approx(3.0));
  // strong duality: value = 4*y1 + 3*y2
  CHECK(4.0 * s.dual[0] + 3.0 * s.dual[1] == doctest::Approx(11.0));
}

TEST_CASE("exact rational mode") {
  LpProblem<Rat> lp(2);
  lp.sense = LpSense::Max;
  lp.c = {Rat(1), Rat(1)};
  lp.add_row({Rat(1), Rat(3)}, LpRel::Le, Rat(2));
  lp.add_row({Rat(3), Rat(1)}, LpRel::Le, Rat(2));
  auto s = solve_lp(lp);
  REQUIRE(s.optimal());
  CHECK(s.value == Rat(1));  // x = y = 1/2
  CHECK(s.x[0] == Rat(1, 2));
}

TEST_CASE("exact mode is scale invariant") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coef(0, 5);
  for (int trial = 0; trial < 25; ++trial) {
    LpProblem<Rat> lp(3);
    lp.sense = LpSense::Max;
    for (auto& v : lp.c) v = Rat(coef(rng) + 1);
    for (int r = 0; r < 4; ++r) {
      std::vector<Rat> row(3);
      for (auto& v : row) v = Rat(coef(rng));
      lp.add_row(std::move(row), LpRel::Le, Rat(coef(rng) + 1));
    }
    auto base = solve_lp(lp);
    LpProblem<Rat> scaled = lp;
    for (auto& v : scaled.rows[1].a) v *= Rat(7, 3);
    scaled.rows[1].rhs *= Rat(7, 3);
    auto s2 = solve_lp(scaled);
    REQUIRE(base.status == s2.status);
    if (base.optimal()) CHECK(base.x == s2.x);
  }
}

TEST_CASE("random problems match the vertex-enumeration oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 5, m = 8;
    std::vector<std::vector<double>> A(m, std::vector<double>(n));
    std::vector<double> b(m), c(n);
    for (auto& row : A)
      for (auto& v : row) v = U(rng);
    for (auto& v : b) v = 0.5 + U(rng);
    for (auto& v : c) v = U(rng);
    LpProblem<double> lp(n);
    lp.sense = LpSense::Max;
    lp.c = c;
    for (int r = 0; r < m; ++r) lp.add_row(A[r], LpRel::Le, b[r]);
    auto s = solve_lp(lp);
    REQUIRE(s.optimal());
    double oracle = vertex_oracle_max(A, b, c);
    CHECK(s.value == doctest::Approx(oracle).epsilon(1e-6));
    // weak duality: c.x <= y.b within tolerance
    double yb = 0.0;
    for (int r = 0; r < m; ++r) yb += s.dual[r] * b[r];
    CHECK(s.value <= yb + 1e-8);
    CHECK(std::abs(s.value - yb) < 1e-8);  // strong duality at optimum
    ++solved;
  }
  CHECK(solved == 60);
}

TEST_CASE("determinism: identical problems give identical solutions") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  LpProblem<double> lp(6);
  lp.sense = LpSense::Max;
  for (auto& v : lp.c) v = U(rng);
  for (int r = 0; r < 7; ++r) {
    std::vector<double> row(6);
    for (auto& v : row) v = U(rng);
    lp.add_row(std::move(row), LpRel::Le, 1.0 + U(rng));
  }
  auto a = solve_lp(lp);
  auto b = solve_lp(lp);
  REQUIRE(a.optimal());
  CHECK(a.x == b.x);
  CHECK(a.value == b.value);
}

TEST_CASE("variable bounds") {
  LpProblem<double> lp(2);
  lp.sense = LpSense::Min;
  lp.c = {1.0, -1.0};
  lp.lower[0] = 0.5;
  lp.upper[1] = 2.0;
  lp.add_row({1.0, 1.0}, LpRel::Le, 5.0);
  auto s = solve_lp(lp);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(0.5));
  CHECK(s.x[1] == doctest::Approx(2.0));
}
