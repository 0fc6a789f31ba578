#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pmkt/lcs.hpp"
#include "pmkt/linprog.hpp"

using namespace pmkt;

TEST_CASE("lp box maximum") {
  LpProblem<double> lp(2);
  lp.sense = LpSense::Max;
  lp.c = {1.0, 1.0};
  lp.add_row({1.0, 0.0}, LpRel::Le, 1.0);
  lp.add_row({0.0, 1.0}, LpRel::Le, 1.0);
  auto s = solve_lp(lp);
  CHECK(s.optimal());
  CHECK(s.value == doctest::Approx(2.0));
  CHECK(s.x[0] == doctest::Approx(1.0));
}

TEST_CASE("lp infeasible") {
  LpProblem<double> lp(2);
  lp.sense = LpSense::Max;
  lp.c = {1.0, 0.0};
  lp.add_row({1.0, 0.0}, LpRel::Le, -1.0);
  auto s = solve_lp(lp);
  CHECK(s.status == LpStatus::Infeasible);
}

TEST_CASE("unit square lcs") {
  VPolytope poly;
  poly.N = 1;
  poly.L = 2;
  for (auto [x, y] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) {
    RatMatrix m(1, 2);
    m.v[0] = x;
    m.v[1] = y;
    poly.vertices.push_back(m);
  }
  auto W = lcs_facets(poly);
  CHECK(W.size() == 2);
  for (auto& c : W) CHECK(c.b == Rat(1));
}
