// pmkt: constrained pseudo-market equilibrium solver CLI.
//
// Subcommands: preprocess, solve, verify, report, corpus.
// Exit codes: 0 success, 1 validation/input error, 2 non-convergence,
// 3 certificate failure.

#include <CLI11.hpp>
#include <filesystem>
#include <future>
#include <iostream>

#include "pmkt/io.hpp"
#include "pmkt/report.hpp"
#include "pmkt/structured.hpp"
#include "pmkt/validate.hpp"

namespace fs = std::filesystem;
using namespace pmkt;

namespace {

struct Loaded {
  Instance instance;      // instance as solved (bads instances swap to the dual)
  Instance original;      // as written in the file
  BuiltProblem built;
  bool bads = false;
};

int print_validation(const ValidationReport& rep) {
  for (const auto& v : rep.violations) std::cerr << "violation: " << v << "\n";
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  return rep.ok() ? 0 : 1;
}

Loaded load_and_build(const std::string& path, const std::string& system_path,
                      const BuildOptions& opt) {
  Loaded out;
  out.original = load_instance(path);
  auto rep = validate(out.original, opt);
  if (print_validation(rep) != 0) throw ParseError("instance failed validation: " + path);
  out.bads = out.original.bads_mode();
  out.instance = out.bads ? bads_dual(out.original) : out.original;
  if (!system_path.empty())
    out.built = system_from_json(load_json(system_path));
  else
    out.built = build_system(out.instance, opt);
  return out;
}

SolverConfig config_from(double alpha, std::uint64_t seed, double tol, int max_iters, int starts,
                         int threads) {
  SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.seed = seed;
  cfg.tol = tol;
  cfg.max_iters = max_iters;
  cfg.restarts = starts;
  cfg.threads = threads;
  return cfg;
}

json solve_to_json(const Loaded& loaded, const SolverConfig& cfg) {
  auto cert = solve(loaded.instance, loaded.built.system, loaded.built.feasible, cfg);
  json j = certificate_to_json(cert, cfg, loaded.instance);
  if (loaded.bads) {
    j["bads_dual"] = true;
    json primal = json::array();
    for (const auto& row : bads_primal_assignment(cert.x)) primal.push_back(row);
    j["primal_assignment"] = primal;
  }
  return j;
}

int exit_code_for(const json& cert) {
  return cert.at("converged").get<bool>() ? 0 : 2;
}

void print_cert_summary(const std::string& name, const json& cert) {
  const auto& res = cert.at("residuals");
  std::cout << name << ": " << (cert.at("converged").get<bool>() ? "converged" : "NOT CONVERGED")
            << "  max residual " << res.at("max").get<double>() << "  iterations "
            << cert.at("iterations").get<int>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constrained pseudo-market equilibrium toolkit"};
  app.require_subcommand(1);

  std::string instance_path, out_path, cert_path, system_path, dir = "instances";
  double alpha = -1.0, tol = Tol::eq_residual;
  std::uint64_t seed = 0;
  int max_iters = 50000, starts = 32, threads = 0, dim_cap = 16;
  bool no_prune = false, full_families = false;

  auto add_build_flags = [&](CLI::App* cmd) {
    cmd->add_option("--dim-cap", dim_cap, "facet-enumeration dimension cap");
    cmd->add_flag("--no-prune", no_prune, "keep redundant inequalities");
    cmd->add_flag("--full-families", full_families,
                  "roommates: emit the full pair-set family past n = 4");
  };

  auto* pre = app.add_subcommand("preprocess", "derive and classify the constraint system");
  pre->add_option("instance", instance_path)->required();
  pre->add_option("-o,--out", out_path, "output path (default: stdout)");
  add_build_flags(pre);

  auto* sol = app.add_subcommand("solve", "search for an equilibrium certificate");
  sol->add_option("instance", instance_path)->required();
  sol->add_option("-o,--out", out_path);
  sol->add_option("--system", system_path, "use a preprocessed system file");
  sol->add_option("--alpha", alpha, "slack parameter (defaults to the instance's)");
  sol->add_option("--seed", seed);
  sol->add_option("--tol", tol);
  sol->add_option("--max-iters", max_iters);
  sol->add_option("--starts", starts);
  sol->add_option("--threads", threads);
  add_build_flags(sol);

  auto* ver = app.add_subcommand("verify", "check a certificate independently");
  ver->add_option("instance", instance_path)->required();
  ver->add_option("--cert", cert_path)->required();
  ver->add_option("--system", system_path);
  ver->add_option("--alpha", alpha);
  ver->add_option("--tol", tol);
  add_build_flags(ver);

  auto* rpt = app.add_subcommand("report", "normative diagnostics for a certificate");
  rpt->add_option("instance", instance_path)->required();
  rpt->add_option("--cert", cert_path)->required();
  rpt->add_option("-o,--out", out_path);
  rpt->add_option("--system", system_path);
  rpt->add_option("--alpha", alpha);
  add_build_flags(rpt);

  auto* cor = app.add_subcommand("corpus", "run every instance in a directory");
  cor->add_option("--dir", dir);
  cor->add_option("-o,--out", out_path, "certificate output directory");
  cor->add_option("--seed", seed);
  cor->add_option("--tol", tol);
  cor->add_option("--max-iters", max_iters);
  cor->add_option("--starts", starts);
  cor->add_option("--threads", threads);

  CLI11_PARSE(app, argc, argv);

  BuildOptions opt;
  opt.dim_cap = dim_cap;
  opt.prune = !no_prune;

  try {
    if (*pre) {
      Instance inst = load_instance(instance_path);
      inst.spec.full_families = full_families || inst.spec.full_families;
      auto rep = validate(inst, opt);
      if (print_validation(rep) != 0) return 1;
      Instance solved = inst.bads_mode() ? bads_dual(inst) : inst;
      auto built = build_system(solved, opt);
      json j = system_to_json(built.system, built.feasible, solved);
      if (out_path.empty())
        std::cout << j.dump(2) << "\n";
      else
        write_json(out_path, j);
      return 0;
    }

    if (*sol) {
      Loaded loaded = load_and_build(instance_path, system_path, opt);
      double a = alpha >= 0 ? alpha : loaded.instance.alpha;
      auto cfg = config_from(a, seed, tol, max_iters, starts, threads);
      json cert = solve_to_json(loaded, cfg);
      print_cert_summary(fs::path(instance_path).stem().string(), cert);
      if (!out_path.empty()) write_json(out_path, cert);
      return exit_code_for(cert);
    }

    if (*ver) {
      Loaded loaded = load_and_build(instance_path, system_path, opt);
      json jc = load_json(cert_path);
      auto [p, x] = certificate_from_json(jc);
      double a = alpha >= 0
                     ? alpha
                     : (jc.contains("config") ? jc.at("config").at("alpha").get<double>()
                                              : loaded.instance.alpha);
      auto cert =
          verify(loaded.instance, loaded.built.system, loaded.built.feasible, p, x, a, tol);
      std::cout << "max residual " << cert.residuals.max() << "  membership "
                << (cert.membership_ok ? "ok" : "FAILED") << "\n";
      return cert.converged ? 0 : 3;
    }

    if (*rpt) {
      Loaded loaded = load_and_build(instance_path, system_path, opt);
      json jc = load_json(cert_path);
      auto [p, x] = certificate_from_json(jc);
      double a = alpha >= 0
                     ? alpha
                     : (jc.contains("config") ? jc.at("config").at("alpha").get<double>()
                                              : loaded.instance.alpha);
      json rep = diagnostics_report(loaded.instance, loaded.built, p, x, a);
      if (loaded.bads) {
        json primal = json::array();
        for (const auto& row : bads_primal_assignment(x)) primal.push_back(row);
        rep["primal_assignment"] = primal;
      }
      std::cout << rep.dump(2) << "\n";
      if (!out_path.empty()) write_json(out_path, rep);
      bool ok = rep.at("converged").get<bool>();
      return ok ? 0 : 3;
    }

    if (*cor) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        if (name.size() > 5 && name.substr(name.size() - 5) == ".json" &&
            name.find(".cert.") == std::string::npos)
          files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      if (!out_path.empty()) fs::create_directories(out_path);
      int worst = 0;
      SolverConfig tcfg;
      tcfg.threads = threads;
      const int T = std::max(1, solver_threads(tcfg));
      for (size_t base = 0; base < files.size(); base += T) {
        size_t end = std::min(files.size(), base + static_cast<size_t>(T));
        std::vector<std::future<std::pair<std::string, json>>> futs;
        for (size_t f = base; f < end; ++f) {
          futs.push_back(std::async(std::launch::async, [&, f]() {
            Loaded loaded = load_and_build(files[f].string(), "", opt);
            auto cfg = config_from(loaded.instance.alpha, seed, tol, max_iters, starts, 1);
            return std::make_pair(files[f].stem().string(), solve_to_json(loaded, cfg));
          }));
        }
        for (auto& fut : futs) {
          auto [name, cert] = fut.get();
          print_cert_summary(name, cert);
          if (!out_path.empty()) write_json((fs::path(out_path) / (name + ".cert.json")).string(), cert);
          worst = std::max(worst, exit_code_for(cert));
        }
      }
      return worst;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
