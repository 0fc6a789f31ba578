#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include "pmkt/builder.hpp"
#include "pmkt/model.hpp"
#include "pmkt/validate.hpp"

using namespace pmkt;

namespace {

Instance hz_example1() {
  Instance inst;
  inst.agents = {"1", "2", "3"};
  inst.objects = {"a", "b"};
  inst.quantities = {Rat(1), Rat(2)};
  inst.utilities = {{100.0, 1.0}, {100.0, 1.0}, {1.0, 100.0}};
  inst.endowments = std::vector<std::vector<double>>(3, {1.0 / 3.0, 2.0 / 3.0});
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

}  // namespace

TEST_CASE("personalized prices reproduce the roommates example") {
  auto inst = roommates3();
  auto built = build_system(inst);
  const auto& sys = built.system;
  // find the two 3-cycle constraints
  auto is_cycle = [&](const LinearConstraint& c, std::vector<Cell> want) {
    if (c.support.size() != want.size()) return false;
    std::sort(want.begin(), want.end());
    auto s = c.support;
    std::sort(s.begin(), s.end());
    return s == want;
  };
  int cyc1 = -1, cyc2 = -1;
  for (size_t c = 0; c < sys.priced.size(); ++c) {
    if (is_cycle(sys.priced[c], {{1, 0}, {0, 2}, {2, 1}})) cyc1 = static_cast<int>(c);
    if (is_cycle(sys.priced[c], {{0, 1}, {1, 2}, {2, 0}})) cyc2 = static_cast<int>(c);
  }
  REQUIRE(cyc1 >= 0);
  REQUIRE(cyc2 >= 0);
  PriceVector p(sys.priced.size(), 0.0);
  p[cyc1] = 2.0;
  p[cyc2] = 1.0;
  auto pers = personalized_prices(sys, p);
  CHECK(pers[0] == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(pers[1] == std::vector<double>{2.0, 0.0, 1.0});
  CHECK(pers[2] == std::vector<double>{1.0, 2.0, 0.0});

  // linearity in p
  PriceVector p2 = p;
  for (auto& v : p2) v *= 3.0;
  auto pers2 = personalized_prices(sys, p2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(pers2[i][j] == doctest::Approx(3.0 * pers[i][j]));

  // zero prices give the zero matrix
  auto pers0 = personalized_prices(sys, PriceVector(sys.priced.size(), 0.0));
  for (const auto& row : pers0)
    for (double v : row) CHECK(v == 0.0);
}

TEST_CASE("single supply constraint: personalized price equals object price") {
  Instance inst = hz_example1();
  inst.endowments.reset();
  auto built = build_system(inst);
  PriceVector p(built.system.priced.size(), 0.0);
  REQUIRE(p.size() == 2);
  p[0] = 1.25;
  auto pers = personalized_prices(built.system, p);
  for (int i = 0; i < 3; ++i) CHECK(pers[i][0] + pers[i][1] == doctest::Approx(1.25));
}

TEST_CASE("equal types: HZ Example 1 is one class") {
  auto inst = hz_example1();
  auto built = build_system(inst);
  auto part = equal_type_partition(inst, built.system);
  REQUIRE(part.size() == 1);
  CHECK(part[0].size() == 3);
}

TEST_CASE("equal types: minority and majority split") {
  Instance inst;
  inst.agents = {"m1", "m2", "M1", "M2"};
  inst.objects = {"s1", "s2"};
  inst.quantities = {Rat(2), Rat(2)};
  inst.utilities = {{1.0, 2.0}, {1.0, 2.0}, {2.0, 1.0}, {2.0, 1.0}};
  inst.spec.kind = ConstraintKind::SchoolChoice;
  inst.spec.minority_agents = {0, 1};
  inst.spec.m_floors = {Rat(0), Rat(0)};
  inst.spec.m_ceilings = {Rat(1), Rat(2)};
  inst.spec.M_floors = {Rat(0), Rat(0)};
  inst.spec.M_ceilings = {Rat(2), Rat(1)};
  auto built = build_system(inst);
  auto part = equal_type_partition(inst, built.system);
  // type constraints carry distinct coefficient rows across types
  REQUIRE(part.size() == 2);
  CHECK(part[0].size() == 2);
  CHECK(part[1].size() == 2);
}

TEST_CASE("equal types: regional doctors are anonymous") {
  Instance inst;
  inst.agents = {"d1", "d2", "d3"};
  inst.objects = {"h1", "h2"};
  inst.quantities = {Rat(2), Rat(2)};
  inst.utilities = {{2.0, 1.0}, {1.0, 2.0}, {2.0, 2.0}};
  inst.spec.kind = ConstraintKind::Regional;
  inst.spec.regions = {{0}, {1}};
  inst.spec.region_floors = {Rat(1), Rat(1)};
  inst.spec.region_ceilings = {Rat(3), Rat(3)};
  auto built = build_system(inst);
  auto part = equal_type_partition(inst, built.system);
  REQUIRE(part.size() == 1);
  CHECK(part[0].size() == 3);
}

TEST_CASE("validate accepts the worked examples") {
  CHECK(validate(hz_example1()).ok());
  auto rep = validate(roommates3());
  CHECK(rep.ok());
  CHECK(!rep.warnings.empty());  // zero diagonal utilities get flagged
}

TEST_CASE("validate rejects the corpus mutants") {
  {
    auto inst = hz_example1();
    inst.quantities[0] = Rat(0);
    auto rep = validate(inst);
    REQUIRE(!rep.ok());
    bool found = false;
    for (const auto& v : rep.violations)
      if (v.find("quantity must be positive") != std::string::npos) found = true;
    CHECK(found);
  }
  {
    auto inst = hz_example1();
    (*inst.endowments)[0] = {2.0, 2.0};  // exceeds supply
    auto rep = validate(inst);
    REQUIRE(!rep.ok());
    bool found = false;
    for (const auto& v : rep.violations)
      if (v.find("endowment infeasible") != std::string::npos) found = true;
    CHECK(found);
  }
  {
    Instance inst;
    inst.objects = {"a"};
    inst.quantities = {Rat(1)};
    inst.spec.kind = ConstraintKind::Hz;
    auto rep = validate(inst);
    CHECK(!rep.ok());
  }
  {
    auto inst = hz_example1();
    inst.utilities[0][0] = -5.0;  // mixed signs
    CHECK(!validate(inst).ok());
  }
  {
    auto inst = hz_example1();
    inst.alpha = 0.0;
    CHECK(!validate(inst).ok());
  }
}

TEST_CASE("equal-type agents face identical personalized rows at any prices") {
  auto inst = hz_example1();
  auto built = build_system(inst);
  auto part = equal_type_partition(inst, built.system);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    PriceVector p(built.system.priced.size());
    for (auto& v : p) v = U(rng);
    auto pers = personalized_prices(built.system, p);
    for (const auto& group : part)
      for (size_t k = 1; k < group.size(); ++k) CHECK(pers[group[k]] == pers[group[0]]);
  }
}
