#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pmkt/builder.hpp"
#include "pmkt/equilibrium.hpp"

using namespace pmkt;

namespace {

Instance hz_example1(double alpha = 1.0) {
  Instance inst;
  inst.agents = {"1", "2", "3"};
  inst.objects = {"a", "b"};
  inst.quantities = {Rat(1), Rat(2)};
  inst.utilities = {{100.0, 1.0}, {100.0, 1.0}, {1.0, 100.0}};
  inst.endowments = std::vector<std::vector<double>>(3, {1.0 / 3.0, 2.0 / 3.0});
  inst.alpha = alpha;
  inst.spec.kind = ConstraintKind::Hz;
  return inst;
}

Instance roommates3() {
  Instance inst;
  inst.agents = {"1", "2", "3"};
  inst.objects = {"1", "2", "3"};
  inst.quantities = {Rat(1), Rat(1), Rat(1)};
  inst.utilities = {{0.0, 1.0, 2.0}, {2.0, 0.0, 1.0}, {1.0, 2.0, 0.0}};
  inst.spec.kind = ConstraintKind::Roommates;
  return inst;
}

Assignment claim2_assignment() {
  return {{0.5, 0.5}, {0.5, 0.5}, {0.0, 1.0}};
}

int find_cycle(const ConstraintSystem& sys, std::vector<Cell> want) {
  std::sort(want.begin(), want.end());
  for (size_t c = 0; c < sys.priced.size(); ++c) {
    auto s = sys.priced[c].support;
    std::sort(s.begin(), s.end());
    if (s == want && sys.priced[c].b == 1) return static_cast<int>(c);
  }
  return -1;
}

}  // namespace

TEST_CASE("price ceiling formulas") {
  // no endowments: NL/b_min + 1 = 6/1 + 1
  auto inst = hz_example1();
  inst.endowments.reset();
  auto built = build_system(inst);
  CHECK(price_ceiling(built.system, inst) == doctest::Approx(7.0));
  // endowment mode: 2N / min_c a.omega = 6 / 1
  auto inst2 = hz_example1();
  auto built2 = build_system(inst2);
  CHECK(price_ceiling(built2.system, inst2) == doctest::Approx(6.0));
  // no-endowment ceiling ignores endowment scaling entirely
  auto inst3 = hz_example1();
  inst3.endowments.reset();
  inst3.quantities = {Rat(1), Rat(2)};
  auto built3 = build_system(inst3);
  CHECK(price_ceiling(built3.system, inst3) == doctest::Approx(7.0));
}

TEST_CASE("phi step clamps and fixed points") {
  auto inst = hz_example1();
  auto built = build_system(inst);
  auto P = EquilibriumProblem::build(inst, built.system, built.feasible, 0.5);
  // at the claim prices the market clears: phi leaves p unchanged
  double pa = 6.0 * 0.5 / 2.0;
  PriceVector p = {pa, 0.0};
  auto [p2, z] = phi_step(P, p, 1.0);
  CHECK(p2[0] == doctest::Approx(pa).epsilon(1e-9));
  CHECK(p2[1] == doctest::Approx(0.0));
  CHECK(std::abs(z[0]) < 1e-9);
  CHECK(z[1] <= 1e-9);  // column b clears or has excess supply at p_b = 0
  // clamp at zero: negative excess cannot push a price below 0
  PriceVector q = {0.0, 0.0};
  auto [q2, zq] = phi_step(P, q, 1.0);
  CHECK(q2[1] == 0.0);
  // clamp at the ceiling
  PriceVector r = {P.pbar, P.pbar};
  auto [r2, zr] = phi_step(P, r, 1.0);
  CHECK(r2[0] <= P.pbar);
  CHECK(r2[1] <= P.pbar);
}

TEST_CASE("verify accepts the paper's roommate equilibrium") {
  auto inst = roommates3();
  auto built = build_system(inst);
  int cyc1 = find_cycle(built.system, {{1, 0}, {0, 2}, {2, 1}});
  int cyc2 = find_cycle(built.system, {{0, 1}, {1, 2}, {2, 0}});
  REQUIRE(cyc1 >= 0);
  REQUIRE(cyc2 >= 0);
  PriceVector p(built.system.priced.size(), 0.0);
  p[cyc1] = 2.0;
  p[cyc2] = 1.0;
  Assignment x(3, std::vector<double>(3, 1.0 / 3.0));
  auto cert = verify(inst, built.system, built.feasible, p, x, 1.0);
  CHECK(cert.residuals.max() <= 1e-9);
  CHECK(cert.membership_ok);
  CHECK(cert.converged);
}

TEST_CASE("verify accepts the HZ Example 1 closed form at several alphas") {
  for (double alpha : {0.1, 0.5, 1.0}) {
    auto inst = hz_example1(alpha);
    auto built = build_system(inst);
    PriceVector p = {6.0 * alpha / (1.0 + 2.0 * alpha), 0.0};
    auto cert = verify(inst, built.system, built.feasible, p, claim2_assignment(), alpha);
    INFO("alpha = ", alpha);
    CHECK(cert.residuals.max() <= 1e-9);
    CHECK(cert.membership_ok);
    // Prop 4: average endogenous income stays below one
    CHECK(cert.avg_endowment_income <= 1.0 + 1e-9);
  }
}

TEST_CASE("verify flags a perturbed assignment") {
  auto inst = hz_example1(0.5);
  auto built = build_system(inst);
  PriceVector p = {1.5, 0.0};
  Assignment x = claim2_assignment();
  x[0] = {0.6, 0.4};
  auto cert = verify(inst, built.system, built.feasible, p, x, 0.5);
  CHECK(cert.residuals.max() > 1e-6);
  CHECK(!cert.converged);
}

TEST_CASE("solve recovers the roommates equilibrium") {
  auto inst = roommates3();
  auto built = build_system(inst);
  SolverConfig cfg;
  cfg.seed = 7;
  auto cert = solve(inst, built.system, built.feasible, cfg);
  REQUIRE(cert.converged);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(cert.x[i][j] == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
  // personalized prices proportional to the worked example's matrix
  const double want[3][3] = {{0, 1, 2}, {2, 0, 1}, {1, 2, 0}};
  double scale = cert.personalized_flat[1];  // agent 1's price on object 2
  REQUIRE(scale > 1e-6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(cert.personalized_flat[i * 3 + j] / scale ==
            doctest::Approx(want[i][j]).epsilon(1e-3));
  // both 3-cycle constraints binding
  int cyc1 = find_cycle(built.system, {{1, 0}, {0, 2}, {2, 1}});
  int cyc2 = find_cycle(built.system, {{0, 1}, {1, 2}, {2, 0}});
  CHECK(std::abs(cert.slacks[cyc1]) <= 1e-6);
  CHECK(std::abs(cert.slacks[cyc2]) <= 1e-6);
}

TEST_CASE("solve matches the HZ Example 1 allocation") {
  for (double alpha : {0.5, 1.0}) {
    auto inst = hz_example1(alpha);
    auto built = build_system(inst);
    SolverConfig cfg;
    cfg.alpha = alpha;
    cfg.seed = 3;
    auto cert = solve(inst, built.system, built.feasible, cfg);
    INFO("alpha = ", alpha);
    REQUIRE(cert.converged);
    auto want = claim2_assignment();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) CHECK(cert.x[i][j] == doctest::Approx(want[i][j]).epsilon(1e-4));
  }
}

TEST_CASE("degenerate single-agent market") {
  Instance inst;
  inst.agents = {"solo"};
  inst.objects = {"o"};
  inst.quantities = {Rat(1)};
  inst.utilities = {{1.0}};
  inst.spec.kind = ConstraintKind::Hz;
  auto built = build_system(inst);
  CHECK(built.system.priced.empty());  // the supply constraint is individual
  SolverConfig cfg;
  auto cert = solve(inst, built.system, built.feasible, cfg);
  REQUIRE(cert.converged);
  CHECK(cert.x[0][0] == doctest::Approx(1.0));
  CHECK(cert.prices.empty());
}

TEST_CASE("grid oracle brackets the solver on a small market") {
  // two agents, one object in short supply: a single priced constraint
  Instance inst;
  inst.agents = {"1", "2"};
  inst.objects = {"o"};
  inst.quantities = {Rat(1)};
  inst.utilities = {{1.0}, {1.0}};
  inst.spec.kind = ConstraintKind::Hz;
  auto built = build_system(inst);
  SolverConfig cfg;
  auto cert = solve(inst, built.system, built.feasible, cfg);
  REQUIRE(cert.converged);
  auto grid = grid_oracle(inst, built.system, built.feasible, 1.0, 0.01);
  CHECK(grid.min_gap < 1e-2);
  CHECK(std::abs(grid.argmin[0] - cert.prices[0]) <= 0.01 + 1e-9);
}

TEST_CASE("determinism: identical configs give identical certificates") {
  auto inst = roommates3();
  auto built = build_system(inst);
  SolverConfig cfg;
  cfg.seed = 42;
  auto a = solve(inst, built.system, built.feasible, cfg);
  auto b = solve(inst, built.system, built.feasible, cfg);
  CHECK(a.prices == b.prices);
  CHECK(a.x == b.x);
  CHECK(a.converged == b.converged);
  CHECK(a.iterations == b.iterations);
}
