#pragma once

#include <string>
#include <vector>

#include "pmkt/enumerate.hpp"
#include "pmkt/lcs.hpp"
#include "pmkt/model.hpp"
#include "pmkt/structured.hpp"

namespace pmkt {

struct BuildOptions {
  int dim_cap = 16;
  int region_cap = 12;
  int roommate_cap = 6;
  int coalition_cap = 6;
  bool prune = true;
};

struct BuiltProblem {
  ConstraintSystem system;
  FeasibleSet feasible;
};

namespace detail {

// Z_i: the consumption-space box each agent draws from. Probability-share
// kinds use [0,1] per cell; vertex-described sets use the per-cell hull bound.
inline void add_consumption_box(ConstraintSystem& sys, const std::vector<RatMatrix>* vertices) {
  for (int i = 0; i < sys.N; ++i) {
    for (int j = 0; j < sys.L; ++j) {
      Rat cap(1);
      if (vertices) {
        cap = 0;
        for (const auto& v : *vertices)
          if (v.at(i, j) > cap) cap = v.at(i, j);
      }
      ConsumptionRow box;
      box.a.assign(sys.L, Rat(0));
      box.a[j] = 1;
      box.hi = cap;
      box.label = "space";
      sys.consumption[i].push_back(std::move(box));
    }
  }
}

inline FeasibleSet hform_from_rows(int N, int L, std::vector<FeasibleSet::HRow> rows) {
  FeasibleSet f;
  f.mode = FeasibleSet::Mode::HForm;
  f.N = N;
  f.L = L;
  f.rows = std::move(rows);
  f.build_caches();
  return f;
}

inline FeasibleSet::HRow sum_row(int N, int L, const std::vector<Cell>& cells,
                                 std::optional<Rat> lo, std::optional<Rat> hi, std::string label) {
  FeasibleSet::HRow r;
  r.a.assign(static_cast<size_t>(N) * L, Rat(0));
  for (const auto& [i, j] : cells) r.a[static_cast<size_t>(i) * L + j] = 1;
  r.lo = std::move(lo);
  r.hi = std::move(hi);
  r.label = std::move(label);
  return r;
}

inline RegionalSpecChecked check_regional(const Instance& inst) {
  RegionalSpecChecked spec;
  spec.regions = inst.spec.regions;
  spec.floors = inst.spec.region_floors;
  spec.ceilings = inst.spec.region_ceilings;
  const int K = spec.K();
  if (K == 0) throw std::invalid_argument("regional: no regions given");
  std::vector<char> seen(inst.num_objects(), 0);
  for (const auto& r : spec.regions)
    for (int j : r) {
      if (j < 0 || j >= inst.num_objects() || seen[j])
        throw std::invalid_argument("regional: regions must partition the objects");
      seen[j] = 1;
    }
  for (char s : seen)
    if (!s) throw std::invalid_argument("regional: regions must cover all objects");
  Rat floor_sum(0);
  for (int k = 0; k < K; ++k) {
    if (spec.floors[k] > spec.ceilings[k])
      throw std::invalid_argument("regional: floor exceeds ceiling");
    Rat capacity(0);
    for (int j : spec.regions[k]) capacity += inst.quantities[j];
    if (spec.floors[k] > capacity)
      throw std::invalid_argument("regional: floor exceeds region capacity");
    floor_sum += spec.floors[k];
  }
  if (floor_sum > inst.num_agents())
    throw std::invalid_argument("regional: floors exceed the number of agents");
  return spec;
}

inline SchoolSpecChecked check_school(const Instance& inst) {
  SchoolSpecChecked spec;
  spec.is_minority.assign(inst.num_agents(), 0);
  for (int i : inst.spec.minority_agents) {
    if (i < 0 || i >= inst.num_agents())
      throw std::invalid_argument("school_choice: bad minority agent index");
    spec.is_minority[i] = 1;
  }
  spec.m_floors = inst.spec.m_floors;
  spec.m_ceilings = inst.spec.m_ceilings;
  spec.M_floors = inst.spec.M_floors;
  spec.M_ceilings = inst.spec.M_ceilings;
  const int L = inst.num_objects();
  for (const auto* v : {&spec.m_floors, &spec.m_ceilings, &spec.M_floors, &spec.M_ceilings})
    if (static_cast<int>(v->size()) != L)
      throw std::invalid_argument("school_choice: quota vectors must have one entry per school");
  for (int l = 0; l < L; ++l) {
    if (spec.m_floors[l] + spec.M_floors[l] > inst.quantities[l])
      throw std::invalid_argument("school_choice: type floors exceed school capacity");
    if (spec.m_floors[l] > spec.m_ceilings[l] || spec.M_floors[l] > spec.M_ceilings[l])
      throw std::invalid_argument("school_choice: floor exceeds ceiling");
  }
  return spec;
}

}  // namespace detail

inline BuiltProblem build_system(const Instance& inst, const BuildOptions& opt = {}) {
  const int N = inst.num_agents();
  const int L = inst.num_objects();
  BuiltProblem out;
  std::vector<std::vector<ConsumptionRow>> consumption;

  switch (inst.spec.kind) {
    case ConstraintKind::Hz: {
      std::vector<LinearConstraint> W;
      for (int i = 0; i < N; ++i)
        W.push_back(detail::unit_sum_constraint(N, L, detail::row_cells(i, L), Rat(1),
                                                "row:" + inst.agents[i]));
      for (int j = 0; j < L; ++j)
        W.push_back(detail::unit_sum_constraint(N, L, detail::col_cells(j, N), inst.quantities[j],
                                                "supply:" + inst.objects[j]));
      out.system = classify(std::move(W), N, L);
      std::vector<FeasibleSet::HRow> rows;
      for (int i = 0; i < N; ++i)
        rows.push_back(detail::sum_row(N, L, detail::row_cells(i, L), std::nullopt, Rat(1),
                                       "row:" + inst.agents[i]));
      for (int j = 0; j < L; ++j) {
        // with endowments the market reallocates the entire aggregate endowment
        std::optional<Rat> lo =
            inst.endowments ? std::optional<Rat>(inst.quantities[j]) : std::nullopt;
        rows.push_back(detail::sum_row(N, L, detail::col_cells(j, N), lo, inst.quantities[j],
                                       "supply:" + inst.objects[j]));
      }
      out.feasible = detail::hform_from_rows(N, L, std::move(rows));
      break;
    }
    case ConstraintKind::Hierarchy: {
      std::vector<LinearConstraint> W;
      for (size_t e = 0; e < inst.spec.hierarchy.size(); ++e) {
        const auto& h = inst.spec.hierarchy[e];
        if (h.floor != 0)
          throw std::invalid_argument(
              "hierarchy: nonzero floors are only supported through the regional or "
              "school_choice kinds (or explicit vertices)");
        W.push_back(detail::unit_sum_constraint(N, L, h.cells, h.ceiling,
                                                "hier:" + std::to_string(e)));
      }
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < L; ++j)
          W.push_back(detail::unit_sum_constraint(N, L, {{i, j}}, Rat(1), "cell"));
      if (opt.prune) W = remove_redundant(std::move(W), N, L);
      std::vector<FeasibleSet::HRow> rows;
      for (const auto& c : W) {
        FeasibleSet::HRow r;
        r.a = c.a.v;
        r.hi = c.b;
        r.label = c.label;
        rows.push_back(std::move(r));
      }
      out.system = classify(std::move(W), N, L);
      out.feasible = detail::hform_from_rows(N, L, std::move(rows));
      break;
    }
    case ConstraintKind::Regional: {
      auto spec = detail::check_regional(inst);
      auto W = regional_system_rows(spec, N, inst.quantities, opt.region_cap);
      out.system = classify(std::move(W), N, L);
      std::vector<FeasibleSet::HRow> rows;
      for (int i = 0; i < N; ++i)
        rows.push_back(detail::sum_row(N, L, detail::row_cells(i, L), std::nullopt, Rat(1), "row"));
      for (int j = 0; j < L; ++j)
        rows.push_back(detail::sum_row(N, L, detail::col_cells(j, N), std::nullopt,
                                       inst.quantities[j], "supply:" + inst.objects[j]));
      for (int k = 0; k < spec.K(); ++k) {
        std::vector<Cell> cells;
        for (int j : spec.regions[k])
          for (int i = 0; i < N; ++i) cells.push_back({i, j});
        rows.push_back(detail::sum_row(N, L, cells, spec.floors[k], spec.ceilings[k],
                                       "region:" + std::to_string(k)));
      }
      out.feasible = detail::hform_from_rows(N, L, std::move(rows));
      break;
    }
    case ConstraintKind::SchoolChoice: {
      auto spec = detail::check_school(inst);
      auto W = school_choice_system_rows(spec, inst.quantities, opt.region_cap);
      out.system = classify(std::move(W), N, L);
      std::vector<FeasibleSet::HRow> rows;
      for (int i = 0; i < N; ++i)
        rows.push_back(detail::sum_row(N, L, detail::row_cells(i, L), std::nullopt, Rat(1), "row"));
      for (int j = 0; j < L; ++j)
        rows.push_back(detail::sum_row(N, L, detail::col_cells(j, N), std::nullopt,
                                       inst.quantities[j], "supply:" + inst.objects[j]));
      for (int l = 0; l < L; ++l) {
        std::vector<Cell> mc, Mc;
        for (int i = 0; i < N; ++i)
          (spec.is_minority[i] ? mc : Mc).push_back({i, l});
        if (!mc.empty())
          rows.push_back(detail::sum_row(N, L, mc, spec.m_floors[l], spec.m_ceilings[l],
                                         "type:m:" + inst.objects[l]));
        if (!Mc.empty())
          rows.push_back(detail::sum_row(N, L, Mc, spec.M_floors[l], spec.M_ceilings[l],
                                         "type:M:" + inst.objects[l]));
      }
      out.feasible = detail::hform_from_rows(N, L, std::move(rows));
      break;
    }
    case ConstraintKind::Roommates: {
      if (L != N) throw std::invalid_argument("roommates: objects must be the agents themselves");
      auto W = roommate_system_rows(N, inst.spec.full_families, opt.prune, opt.roommate_cap);
      out.system = classify(std::move(W), N, L);
      out.feasible.mode = FeasibleSet::Mode::Vertices;
      out.feasible.N = N;
      out.feasible.L = L;
      out.feasible.vertices = roommate_matchings(N);
      out.feasible.build_caches();
      break;
    }
    case ConstraintKind::Coalitions: {
      auto verts = enumerate_coalitions(N, opt.coalition_cap);
      if (!verts.empty() && verts[0].l != L)
        throw std::invalid_argument(
            "coalitions: objects must list the nonempty agent subsets in bitmask order (" +
            std::to_string((1 << N) - 1) + " of them)");
      VPolytope poly{N, L, verts};
      auto W = lcs_facets(poly, opt.dim_cap, opt.prune);
      out.system = classify(std::move(W), N, L);
      out.feasible.mode = FeasibleSet::Mode::Vertices;
      out.feasible.N = N;
      out.feasible.L = L;
      out.feasible.vertices = std::move(verts);
      out.feasible.build_caches();
      break;
    }
    case ConstraintKind::Bundles: {
      auto verts = enumerate_bundles(N, inst.spec.item_quantities, inst.spec.bundles);
      VPolytope poly{N, L, verts};
      auto W = lcs_facets(poly, opt.dim_cap, opt.prune);
      out.system = classify(std::move(W), N, L);
      out.feasible.mode = FeasibleSet::Mode::Vertices;
      out.feasible.N = N;
      out.feasible.L = L;
      out.feasible.vertices = std::move(verts);
      out.feasible.build_caches();
      break;
    }
    case ConstraintKind::Vertices: {
      VPolytope poly{N, L, inst.spec.vertices};
      auto W = lcs_facets(poly, opt.dim_cap, opt.prune);
      out.system = classify(std::move(W), N, L);
      out.feasible.mode = FeasibleSet::Mode::Vertices;
      out.feasible.N = N;
      out.feasible.L = L;
      out.feasible.vertices = inst.spec.vertices;
      out.feasible.build_caches();
      break;
    }
    case ConstraintKind::Explicit: {
      std::vector<LinearConstraint> W;
      for (size_t e = 0; e < inst.spec.explicit_rows.size(); ++e) {
        const auto& row = inst.spec.explicit_rows[e];
        LinearConstraint c;
        c.a = row.a;
        c.b = row.b;
        c.label = "explicit:" + std::to_string(e);
        for (const auto& v : c.a.v)
          if (v < 0) throw std::invalid_argument("explicit: coefficients must be nonnegative");
        if (c.b < 0) throw std::invalid_argument("explicit: right-hand sides must be nonnegative");
        c.rebuild_support();
        W.push_back(std::move(c));
      }
      consumption = inst.spec.explicit_consumption;
      if (!consumption.empty() && static_cast<int>(consumption.size()) != N)
        throw std::invalid_argument("explicit: consumption rows must cover every agent");
      std::vector<FeasibleSet::HRow> rows;
      for (const auto& c : W) {
        FeasibleSet::HRow r;
        r.a = c.a.v;
        r.hi = c.b;
        r.label = c.label;
        rows.push_back(std::move(r));
      }
      for (int i = 0; i < static_cast<int>(consumption.size()); ++i)
        for (const auto& cr : consumption[i]) {
          FeasibleSet::HRow r;
          r.a.assign(static_cast<size_t>(N) * L, Rat(0));
          for (int j = 0; j < L; ++j) r.a[static_cast<size_t>(i) * L + j] = cr.a[j];
          r.lo = cr.lo;
          r.hi = cr.hi;
          r.label = cr.label;
          rows.push_back(std::move(r));
        }
      out.system = classify(std::move(W), N, L, consumption);
      out.feasible = detail::hform_from_rows(N, L, std::move(rows));
      break;
    }
  }
  if (inst.spec.kind != ConstraintKind::Explicit) {
    const std::vector<RatMatrix>* verts =
        out.feasible.mode == FeasibleSet::Mode::Vertices ? &out.feasible.vertices : nullptr;
    detail::add_consumption_box(out.system, verts);
    out.system.build_caches();
  }
  return out;
}

}  // namespace pmkt
