#pragma once

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "pmkt/builder.hpp"
#include "pmkt/equilibrium.hpp"
#include "pmkt/model.hpp"

namespace pmkt {

using json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace io_detail {

inline Rat rat_of(const json& v, const std::string& where) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rat(v.get<long long>());
    if (v.is_number_float()) return rat_from_double(v.get<double>());
  } catch (const std::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  throw ParseError(where + ": expected a number or a rational string");
}

inline double double_of(const json& v, const std::string& where) {
  if (v.is_string()) return to_double(parse_rational(v.get<std::string>()));
  if (v.is_number()) return v.get<double>();
  throw ParseError(where + ": expected a number");
}

inline int index_of(const json& v, const std::vector<std::string>& names,
                    const std::string& where) {
  if (v.is_number_integer()) {
    int k = v.get<int>();
    if (k < 0 || k >= static_cast<int>(names.size()))
      throw ParseError(where + ": index out of range");
    return k;
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    for (size_t k = 0; k < names.size(); ++k)
      if (names[k] == s) return static_cast<int>(k);
    throw ParseError(where + ": unknown id '" + s + "'");
  }
  throw ParseError(where + ": expected an id or an index");
}

inline RatMatrix rat_matrix_of(const json& v, int N, int L, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != N)
    throw ParseError(where + ": expected an " + std::to_string(N) + "-row matrix");
  RatMatrix m(N, L);
  for (int i = 0; i < N; ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != L)
      throw ParseError(where + ": row " + std::to_string(i) + " has the wrong length");
    for (int j = 0; j < L; ++j) m.at(i, j) = rat_of(v[i][j], where);
  }
  return m;
}

inline json rat_matrix_json(const RatMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.n; ++i) {
    json row = json::array();
    for (int j = 0; j < m.l; ++j) row.push_back(to_string(m.at(i, j)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace io_detail

inline Instance instance_from_json(const json& j) {
  using namespace io_detail;
  Instance inst;
  if (!j.is_object()) throw ParseError("instance: top level must be an object");
  for (const auto& key : {"agents", "objects", "quantities", "utilities", "constraints"})
    if (!j.contains(key)) throw ParseError(std::string("instance: missing key '") + key + "'");
  for (const auto& a : j.at("agents")) inst.agents.push_back(a.get<std::string>());
  for (const auto& o : j.at("objects")) inst.objects.push_back(o.get<std::string>());
  const int N = inst.num_agents(), L = inst.num_objects();
  for (size_t l = 0; l < j.at("quantities").size(); ++l)
    inst.quantities.push_back(rat_of(j.at("quantities")[l], "quantities"));
  for (const auto& row : j.at("utilities")) {
    std::vector<double> r;
    for (const auto& v : row) r.push_back(double_of(v, "utilities"));
    inst.utilities.push_back(std::move(r));
  }
  if (j.contains("endowments") && !j.at("endowments").is_null()) {
    std::vector<std::vector<double>> om;
    for (const auto& row : j.at("endowments")) {
      std::vector<double> r;
      for (const auto& v : row) r.push_back(double_of(v, "endowments"));
      om.push_back(std::move(r));
    }
    inst.endowments = std::move(om);
  }
  if (j.contains("alpha")) inst.alpha = double_of(j.at("alpha"), "alpha");

  const json& c = j.at("constraints");
  const std::string kind = c.at("kind").get<std::string>();
  auto& spec = inst.spec;
  if (kind == "hz") {
    spec.kind = ConstraintKind::Hz;
  } else if (kind == "hierarchy") {
    spec.kind = ConstraintKind::Hierarchy;
    for (const auto& e : c.at("constraints")) {
      HierarchyEntry h;
      for (const auto& cell : e.at("cells"))
        h.cells.push_back({index_of(cell[0], inst.agents, "hierarchy cell"),
                           index_of(cell[1], inst.objects, "hierarchy cell")});
      h.floor = e.contains("floor") ? rat_of(e.at("floor"), "hierarchy floor") : Rat(0);
      h.ceiling = rat_of(e.at("ceiling"), "hierarchy ceiling");
      spec.hierarchy.push_back(std::move(h));
    }
  } else if (kind == "regional") {
    spec.kind = ConstraintKind::Regional;
    for (const auto& region : c.at("regions")) {
      std::vector<int> r;
      for (const auto& o : region) r.push_back(index_of(o, inst.objects, "regional region"));
      spec.regions.push_back(std::move(r));
    }
    for (const auto& v : c.at("floors")) spec.region_floors.push_back(rat_of(v, "regional floor"));
    for (const auto& v : c.at("ceilings"))
      spec.region_ceilings.push_back(rat_of(v, "regional ceiling"));
  } else if (kind == "school_choice") {
    spec.kind = ConstraintKind::SchoolChoice;
    for (const auto& a : c.at("minority_agents"))
      spec.minority_agents.push_back(index_of(a, inst.agents, "minority agent"));
    for (const auto& v : c.at("minority_floors")) spec.m_floors.push_back(rat_of(v, "quota"));
    for (const auto& v : c.at("minority_ceilings")) spec.m_ceilings.push_back(rat_of(v, "quota"));
    for (const auto& v : c.at("majority_floors")) spec.M_floors.push_back(rat_of(v, "quota"));
    for (const auto& v : c.at("majority_ceilings")) spec.M_ceilings.push_back(rat_of(v, "quota"));
  } else if (kind == "roommates") {
    spec.kind = ConstraintKind::Roommates;
    if (c.contains("full_families")) spec.full_families = c.at("full_families").get<bool>();
  } else if (kind == "coalitions") {
    spec.kind = ConstraintKind::Coalitions;
  } else if (kind == "bundles") {
    spec.kind = ConstraintKind::Bundles;
    for (const auto& it : c.at("items")) spec.items.push_back(it.get<std::string>());
    for (const auto& q : c.at("item_quantities")) spec.item_quantities.push_back(q.get<int>());
    for (const auto& b : c.at("bundles")) {
      std::vector<int> bb;
      for (const auto& it : b) bb.push_back(index_of(it, spec.items, "bundle item"));
      spec.bundles.push_back(std::move(bb));
    }
  } else if (kind == "vertices") {
    spec.kind = ConstraintKind::Vertices;
    for (const auto& m : c.at("assignments"))
      spec.vertices.push_back(rat_matrix_of(m, N, L, "vertices assignment"));
  } else if (kind == "explicit") {
    spec.kind = ConstraintKind::Explicit;
    for (const auto& e : c.at("inequalities")) {
      ExplicitRow row;
      row.a = rat_matrix_of(e.at("a"), N, L, "explicit inequality");
      row.b = rat_of(e.at("b"), "explicit b");
      spec.explicit_rows.push_back(std::move(row));
    }
    if (c.contains("consumption")) {
      spec.explicit_consumption.assign(N, {});
      const auto& cons = c.at("consumption");
      if (static_cast<int>(cons.size()) != N)
        throw ParseError("explicit consumption: one entry per agent expected");
      for (int i = 0; i < N; ++i)
        for (const auto& e : cons[i]) {
          ConsumptionRow r;
          for (const auto& v : e.at("a")) r.a.push_back(rat_of(v, "consumption row"));
          if (static_cast<int>(r.a.size()) != L)
            throw ParseError("consumption row: wrong length");
          if (e.contains("lo") && !e.at("lo").is_null()) r.lo = rat_of(e.at("lo"), "consumption lo");
          if (e.contains("hi") && !e.at("hi").is_null()) r.hi = rat_of(e.at("hi"), "consumption hi");
          if (e.contains("label")) r.label = e.at("label").get<std::string>();
          spec.explicit_consumption[i].push_back(std::move(r));
        }
    }
  } else {
    throw ParseError("constraints: unknown kind '" + kind + "'");
  }
  if (j.contains("bads_utility_constant")) {
    inst.is_dual_of_bads = true;
    for (const auto& v : j.at("bads_utility_constant"))
      inst.bads_utility_constant.push_back(double_of(v, "bads_utility_constant"));
  }
  return inst;
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return instance_from_json(j);
}

inline json constraint_json(const LinearConstraint& c) {
  json out;
  out["label"] = c.label;
  out["a"] = io_detail::rat_matrix_json(c.a);
  out["b"] = to_string(c.b);
  return out;
}

inline json system_to_json(const ConstraintSystem& sys, const FeasibleSet& feas,
                           const Instance& inst) {
  json out;
  out["agents"] = inst.agents;
  out["objects"] = inst.objects;
  out["forbidden"] = constraint_json(sys.forbidden);
  json indiv = json::array();
  for (const auto& per : sys.individual) {
    json rows = json::array();
    for (const auto& c : per) rows.push_back(constraint_json(c));
    indiv.push_back(rows);
  }
  out["individual"] = indiv;
  json priced = json::array();
  for (const auto& c : sys.priced) priced.push_back(constraint_json(c));
  out["priced"] = priced;
  json cons = json::array();
  for (const auto& per : sys.consumption) {
    json rows = json::array();
    for (const auto& r : per) {
      json e;
      e["label"] = r.label;
      json a = json::array();
      for (const auto& v : r.a) a.push_back(to_string(v));
      e["a"] = a;
      e["lo"] = r.lo ? json(to_string(*r.lo)) : json(nullptr);
      e["hi"] = r.hi ? json(to_string(*r.hi)) : json(nullptr);
      rows.push_back(e);
    }
    cons.push_back(rows);
  }
  out["consumption"] = cons;
  json f;
  if (feas.mode == FeasibleSet::Mode::Vertices) {
    f["mode"] = "vertices";
    json vs = json::array();
    for (const auto& v : feas.vertices) vs.push_back(io_detail::rat_matrix_json(v));
    f["vertices"] = vs;
  } else {
    f["mode"] = "hform";
    json rows = json::array();
    for (const auto& r : feas.rows) {
      json e;
      e["label"] = r.label;
      json a = json::array();
      for (const auto& v : r.a) a.push_back(to_string(v));
      e["a"] = a;
      e["lo"] = r.lo ? json(to_string(*r.lo)) : json(nullptr);
      e["hi"] = r.hi ? json(to_string(*r.hi)) : json(nullptr);
      rows.push_back(e);
    }
    f["rows"] = rows;
  }
  out["feasible"] = f;
  return out;
}

inline LinearConstraint constraint_from_json(const json& j, int N, int L) {
  LinearConstraint c;
  c.a = io_detail::rat_matrix_of(j.at("a"), N, L, "system constraint");
  c.b = io_detail::rat_of(j.at("b"), "system constraint b");
  if (j.contains("label")) c.label = j.at("label").get<std::string>();
  c.rebuild_support();
  return c;
}

inline BuiltProblem system_from_json(const json& j) {
  using namespace io_detail;
  BuiltProblem out;
  const int N = static_cast<int>(j.at("agents").size());
  const int L = static_cast<int>(j.at("objects").size());
  auto& sys = out.system;
  sys.N = N;
  sys.L = L;
  sys.forbidden = constraint_from_json(j.at("forbidden"), N, L);
  for (const auto& per : j.at("individual")) {
    std::vector<LinearConstraint> rows;
    for (const auto& c : per) rows.push_back(constraint_from_json(c, N, L));
    sys.individual.push_back(std::move(rows));
  }
  for (const auto& c : j.at("priced")) sys.priced.push_back(constraint_from_json(c, N, L));
  for (const auto& per : j.at("consumption")) {
    std::vector<ConsumptionRow> rows;
    for (const auto& e : per) {
      ConsumptionRow r;
      for (const auto& v : e.at("a")) r.a.push_back(rat_of(v, "consumption"));
      if (!e.at("lo").is_null()) r.lo = rat_of(e.at("lo"), "consumption lo");
      if (!e.at("hi").is_null()) r.hi = rat_of(e.at("hi"), "consumption hi");
      if (e.contains("label")) r.label = e.at("label").get<std::string>();
      rows.push_back(std::move(r));
    }
    sys.consumption.push_back(std::move(rows));
  }
  sys.build_caches();
  auto& feas = out.feasible;
  feas.N = N;
  feas.L = L;
  const json& f = j.at("feasible");
  if (f.at("mode") == "vertices") {
    feas.mode = FeasibleSet::Mode::Vertices;
    for (const auto& v : f.at("vertices"))
      feas.vertices.push_back(rat_matrix_of(v, N, L, "feasible vertex"));
  } else {
    feas.mode = FeasibleSet::Mode::HForm;
    for (const auto& e : f.at("rows")) {
      FeasibleSet::HRow r;
      for (const auto& v : e.at("a")) r.a.push_back(rat_of(v, "feasible row"));
      if (!e.at("lo").is_null()) r.lo = rat_of(e.at("lo"), "feasible lo");
      if (!e.at("hi").is_null()) r.hi = rat_of(e.at("hi"), "feasible hi");
      if (e.contains("label")) r.label = e.at("label").get<std::string>();
      feas.rows.push_back(std::move(r));
    }
  }
  feas.build_caches();
  return out;
}

inline json certificate_to_json(const EquilibriumCertificate& cert, const SolverConfig& cfg,
                                const Instance& inst) {
  json out;
  json config;
  config["alpha"] = cert.alpha;
  config["seed"] = cert.seed;
  config["tol"] = cert.tol;
  config["max_iters"] = cfg.max_iters;
  config["restarts"] = cfg.restarts;
  config["eta0"] = cfg.eta0;
  config["eta_floor"] = cfg.eta_floor;
  config["pbar"] = cert.pbar;
  config["utility_scale"] = cert.utility_scale;
  out["config"] = config;
  out["converged"] = cert.converged;
  out["iterations"] = cert.iterations;
  out["start_used"] = cert.start_used;
  out["prices"] = cert.prices;
  json x = json::array();
  for (const auto& row : cert.x) x.push_back(row);
  out["assignment"] = x;
  json pers = json::array();
  const int L = inst.num_objects();
  for (int i = 0; i < inst.num_agents(); ++i) {
    std::vector<double> row(cert.personalized_flat.begin() + static_cast<size_t>(i) * L,
                            cert.personalized_flat.begin() + static_cast<size_t>(i + 1) * L);
    pers.push_back(row);
  }
  out["personalized_prices"] = pers;
  out["slacks"] = cert.slacks;
  json res;
  res["feasibility"] = cert.residuals.feasibility;
  res["complementary_slackness"] = cert.residuals.complementary;
  res["demand_optimality"] = cert.residuals.demand_gap;
  res["budget_violation"] = cert.residuals.budget_violation;
  res["cheapest_bundle_gap"] = cert.residuals.cheapest_gap;
  res["membership"] = cert.residuals.membership;
  res["max"] = cert.residuals.max();
  out["residuals"] = res;
  json mem;
  mem["ok"] = cert.membership_ok;
  mem["mode"] = cert.membership_mode;
  out["membership"] = mem;
  out["maximality_gap"] = cert.maximality_gap;
  out["ceiling_warning"] = cert.ceiling_warning;
  if (inst.endowments) out["avg_endowment_income"] = cert.avg_endowment_income;
  return out;
}

inline std::pair<PriceVector, Assignment> certificate_from_json(const json& j) {
  PriceVector p;
  for (const auto& v : j.at("prices")) p.push_back(v.get<double>());
  Assignment x;
  for (const auto& row : j.at("assignment")) {
    std::vector<double> r;
    for (const auto& v : row) r.push_back(io_detail::double_of(v, "assignment"));
    x.push_back(std::move(r));
  }
  return {p, x};
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace pmkt
