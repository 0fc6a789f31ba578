#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pmkt/builder.hpp"
#include "pmkt/enumerate.hpp"
#include "pmkt/lcs.hpp"
#include "pmkt/matching.hpp"
#include "pmkt/structured.hpp"

using namespace pmkt;

namespace {

bool regions_equal(const std::vector<LinearConstraint>& A, const std::vector<LinearConstraint>& B,
                   int N, int L) {
  auto implied = [&](const LinearConstraint& c, const std::vector<LinearConstraint>& sys) {
    LpProblem<Rat> lp(N * L);
    lp.sense = LpSense::Max;
    for (size_t k = 0; k < c.a.v.size(); ++k) lp.c[k] = c.a.v[k];
    for (const auto& o : sys)
      lp.add_row(std::vector<Rat>(o.a.v.begin(), o.a.v.end()), LpRel::Le, o.b);
    auto sol = solve_lp(lp);
    return sol.optimal() && sol.value <= c.b;
  };
  for (const auto& c : A)
    if (!implied(c, B)) return false;
  for (const auto& c : B)
    if (!implied(c, A)) return false;
  return true;
}

std::vector<Cell> cells(std::initializer_list<Cell> cs) { return cs; }

}  // namespace

TEST_CASE("bihierarchy: rows and columns") {
  std::vector<std::vector<Cell>> sets;
  for (int i = 0; i < 2; ++i) sets.push_back(cells({{i, 0}, {i, 1}}));
  for (int l = 0; l < 2; ++l) sets.push_back(cells({{0, l}, {1, l}}));
  CHECK(check_bihierarchy(sets).ok);
}

TEST_CASE("bihierarchy: regional sup-column sets stay laminar") {
  // rows + columns + region {all agents} x {o1, o2}
  std::vector<std::vector<Cell>> sets;
  for (int i = 0; i < 2; ++i) sets.push_back(cells({{i, 0}, {i, 1}, {i, 2}}));
  for (int l = 0; l < 3; ++l) sets.push_back(cells({{0, l}, {1, l}}));
  sets.push_back(cells({{0, 0}, {1, 0}, {0, 1}, {1, 1}}));
  CHECK(check_bihierarchy(sets).ok);
}

TEST_CASE("bihierarchy: crossing same-family sets fail with a witness") {
  // allocative base + two overlapping sub-row sets of the same row
  std::vector<std::vector<Cell>> sets;
  for (int i = 0; i < 2; ++i) sets.push_back(cells({{i, 0}, {i, 1}, {i, 2}}));
  for (int l = 0; l < 3; ++l) sets.push_back(cells({{0, l}, {1, l}}));
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < 3; ++l) sets.push_back(cells({{i, l}}));
  sets.push_back(cells({{0, 0}, {0, 1}}));
  sets.push_back(cells({{0, 1}, {0, 2}}));
  auto res = check_bihierarchy(sets);
  CHECK(!res.ok);
  CHECK(res.witness.first >= 0);
}

TEST_CASE("regional ceilings: worked two-region example") {
  RegionalSpecChecked spec;
  spec.regions = {{0}, {1}};
  spec.floors = {Rat(1), Rat(1)};
  spec.ceilings = {Rat(3), Rat(3)};
  auto q = regional_ceilings(spec, 3);
  CHECK(q[0b01] == Rat(2));  // min{3, 3-1}
  CHECK(q[0b10] == Rat(2));
  CHECK(q[0b11] == Rat(3));  // min{2+2, 3-0}
}

TEST_CASE("regional ceilings: zero floors never trigger the population term") {
  RegionalSpecChecked spec;
  spec.regions = {{0}, {1}, {2}};
  spec.floors = {Rat(0), Rat(0), Rat(0)};
  spec.ceilings = {Rat(1), Rat(2), Rat(1)};
  auto q = regional_ceilings(spec, 100);
  CHECK(q[0b011] == Rat(3));
  CHECK(q[0b111] == Rat(4));
}

TEST_CASE("regional ceilings satisfy the distributional claim") {
  // q_R >= floor(R_x) + q_{R \ R_x} for every union and member
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    RegionalSpecChecked spec;
    spec.regions = {{0}, {1}, {2}};
    int N = 6;
    Rat fsum(0);
    for (int k = 0; k < 3; ++k) {
      int f = d(rng) % 2, c = f + d(rng);
      spec.floors.push_back(Rat(f));
      spec.ceilings.push_back(Rat(c));
      fsum += f;
    }
    if (fsum > N) continue;
    auto q = regional_ceilings(spec, N);
    for (int mask = 1; mask < 8; ++mask) {
      if (!(mask & (mask - 1))) continue;
      for (int x = 0; x < 3; ++x) {
        if (!(mask & (1 << x))) continue;
        CHECK(q[mask] >= spec.floors[x] + q[mask ^ (1 << x)]);
      }
      // monotone: never exceeds the naive sum of member ceilings
      Rat naive(0);
      for (int x = 0; x < 3; ++x)
        if (mask & (1 << x)) naive += spec.ceilings[x];
      CHECK(q[mask] <= naive);
    }
  }
}

TEST_CASE("regional system equals brute-force lcs on a 3x3 two-region instance") {
  RegionalSpecChecked spec;
  spec.regions = {{0}, {1, 2}};
  spec.floors = {Rat(1), Rat(1)};
  spec.ceilings = {Rat(2), Rat(2)};
  std::vector<Rat> q = {Rat(1), Rat(1), Rat(1)};
  auto W = regional_system_rows(spec, 3, q);
  auto verts = enumerate_regional(spec, 3, q);
  REQUIRE(!verts.empty());
  auto dd = lcs_facets(VPolytope{3, 3, verts});
  CHECK(regions_equal(W, dd, 3, 3));
}

TEST_CASE("school choice recursion: worked one-school example") {
  SchoolSpecChecked spec;
  spec.is_minority = {1, 0};
  spec.m_floors = {Rat(1)};
  spec.m_ceilings = {Rat(2)};
  spec.M_floors = {Rat(1)};
  spec.M_ceilings = {Rat(2)};
  std::vector<Rat> q = {Rat(2)};
  auto qm = school_type_ceilings(spec.m_floors, spec.m_ceilings, spec.M_floors, q, 1);
  CHECK(qm[1] == Rat(1));  // min{2, 2-1, 1-0}
}

TEST_CASE("school choice: zero floors reduce to sums and populations") {
  SchoolSpecChecked spec;
  spec.is_minority = {1, 1, 0};
  spec.m_floors = {Rat(0), Rat(0)};
  spec.m_ceilings = {Rat(2), Rat(1)};
  spec.M_floors = {Rat(0), Rat(0)};
  spec.M_ceilings = {Rat(1), Rat(1)};
  std::vector<Rat> q = {Rat(2), Rat(2)};
  auto qm = school_type_ceilings(spec.m_floors, spec.m_ceilings, spec.M_floors, q, 2);
  CHECK(qm[0b11] == Rat(2));  // capped by the minority population
}

TEST_CASE("school choice system equals brute-force lcs on 2 schools, 2+2 students") {
  SchoolSpecChecked spec;
  spec.is_minority = {1, 1, 0, 0};
  spec.m_floors = {Rat(1), Rat(0)};
  spec.m_ceilings = {Rat(1), Rat(2)};
  spec.M_floors = {Rat(0), Rat(1)};
  spec.M_ceilings = {Rat(2), Rat(1)};
  std::vector<Rat> q = {Rat(2), Rat(2)};
  auto W = school_choice_system_rows(spec, q);
  auto verts = enumerate_school(spec, 4, q);
  REQUIRE(!verts.empty());
  auto dd = lcs_facets(VPolytope{4, 2, verts});
  CHECK(regions_equal(W, dd, 4, 2));
}

TEST_CASE("maximum matching: paths, odd cycles, random graphs") {
  CHECK(max_matching(4, {{0, 1}, {1, 2}, {2, 3}}) == 2);
  CHECK(max_matching(3, {{0, 1}, {1, 2}, {2, 0}}) == 1);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> nv(2, 8);
    int n = nv(rng);
    std::vector<std::pair<int, int>> edges;
    std::uniform_int_distribution<int> v(0, n - 1);
    std::uniform_int_distribution<int> ne(0, 12);
    int m = ne(rng);
    for (int e = 0; e < m; ++e) {
      int a = v(rng), b = v(rng);
      if (a != b) edges.push_back({a, b});
    }
    CHECK(max_matching(n, edges) == max_matching_bruteforce(n, edges));
  }
}

TEST_CASE("roommates n=2 reduces to the one-pair box") {
  auto W = roommate_system_rows(2);
  auto verts = roommate_matchings(2);
  CHECK(verts.size() == 2);
  auto dd = lcs_facets(VPolytope{2, 2, verts});
  CHECK(regions_equal(W, dd, 2, 2));
}

TEST_CASE("roommates n=4 equals brute-force lcs over all matchings") {
  auto W = roommate_system_rows(4);
  auto verts = roommate_matchings(4);
  CHECK(verts.size() == 10);
  auto dd = lcs_facets(VPolytope{4, 4, verts});
  CHECK(regions_equal(W, dd, 4, 4));
}

TEST_CASE("roommates polytope accepts exactly the Edmonds-feasible matrices") {
  // on n=3: symmetric matrices in the region must be dominated combinations of
  // matchings, and conversely
  auto W = roommate_system_rows(3);
  auto verts = roommate_matchings(3);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> num(0, 6);
  for (int trial = 0; trial < 40; ++trial) {
    RatMatrix y(3, 3);
    for (int i = 0; i < 3; ++i) {
      y.at(i, i) = Rat(num(rng), 6);
      for (int j = i + 1; j < 3; ++j) {
        Rat v(num(rng), 6);
        y.at(i, j) = v;
        y.at(j, i) = v;
      }
    }
    bool in_region = true;
    for (const auto& c : W) {
      Rat s(0);
      for (size_t k = 0; k < y.v.size(); ++k) s += c.a.v[k] * y.v[k];
      if (s > c.b) in_region = false;
    }
    bool dominated = member_exact(y, verts, /*dominated=*/true);
    CHECK(in_region == dominated);
  }
}

TEST_CASE("bads dual: supplies, signs, conservation") {
  Instance bads;
  bads.agents = {"a", "b"};
  bads.objects = {"t"};
  bads.quantities = {Rat(1)};
  bads.utilities = {{-3.0}, {-1.0}};
  auto dual = bads_dual(bads);
  CHECK(dual.quantities[0] == Rat(1));  // N - q = 2 - 1
  CHECK(dual.utilities[0][0] == 3.0);
  CHECK(dual.utilities[1][0] == 1.0);
  CHECK(dual.is_dual_of_bads);
  // monotone flip: v = (-3,-1) -> (3,1)
  Instance bads2;
  bads2.agents = {"a"};
  bads2.objects = {"t", "u"};
  bads2.quantities = {Rat(0, 1) + Rat(1, 2), Rat(1, 4)};
  bads2.utilities = {{-3.0, -1.0}};
  auto dual2 = bads_dual(bads2);
  CHECK(dual2.utilities[0][0] == 3.0);
  CHECK(dual2.utilities[0][1] == 1.0);
}

TEST_CASE("bads dual rejects instances with no slack") {
  Instance bads;
  bads.agents = {"a", "b"};
  bads.objects = {"t", "u"};
  bads.quantities = {Rat(1), Rat(1)};
  bads.utilities = {{-1.0, -2.0}, {-2.0, -1.0}};
  CHECK_THROWS_WITH_AS(bads_dual(bads), doctest::Contains("pure HZ"), std::invalid_argument);
}

TEST_CASE("coalition enumeration counts Bell numbers") {
  CHECK(enumerate_coalitions(3).size() == 5);
  CHECK(enumerate_coalitions(4).size() == 15);
}

TEST_CASE("bundle enumeration: overlapping bundles exclude each other") {
  // items a,b,c single copies; bundles ab, ac, bc; any two bundles clash
  auto verts = enumerate_bundles(3, {1, 1, 1}, {{0, 1}, {0, 2}, {1, 2}});
  for (const auto& v : verts) {
    Rat total(0);
    for (const auto& x : v.v) total += x;
    CHECK(total <= 1);  // at most one bundle assigned in any deterministic outcome
  }
  // the half-half-half matrix is not in the hull
  RatMatrix half(3, 3);
  half.at(0, 0) = Rat(1, 2);
  half.at(1, 1) = Rat(1, 2);
  half.at(2, 2) = Rat(1, 2);
  CHECK(!member_exact(half, verts));
}
