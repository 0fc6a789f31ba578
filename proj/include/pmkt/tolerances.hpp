#pragma once

namespace pmkt {

// All float-side tolerances live here so every module agrees on them.
// Utility-scale tolerances assume utilities rescaled to max-abs 1 per agent.
struct Tol {
  static constexpr double lp_feas = 1e-9;        // simplex feasibility (float mode)
  static constexpr double lp_opt = 1e-9;         // simplex reduced-cost threshold
  static constexpr double feasibility = 1e-7;    // assignment/constraint feasibility
  static constexpr double utility = 1e-9;        // utility comparisons (normalized scale)
  static constexpr double cheapest = 1e-7;       // expenditure-minimality slack
  static constexpr double pareto = 1e-7;         // Pareto dominance LP threshold
  static constexpr double eq_residual = 1e-6;    // default equilibrium residual target
  static constexpr double price_active = 1e-7;   // price treated as positive
};

}  // namespace pmkt
