#pragma once

#include <span>
#include <vector>

#include "qvipower/game.hpp"
#include "qvipower/waterfill.hpp"

namespace qvipower::oracle {

/// Brute-force reference implementations. Each deliberately avoids the code
/// path of the operation it is used to check, so test expectations can be
/// regenerated independently (also exposed by the `oracle` CLI subcommand).

/// Water level by bisection on the water height (checks level_for_budget).
WaterfillResult bisect_level(const EffectiveNoise& noise, double target, double tol = 1e-12);

/// Dense search over the simplex {x >= 0, 1^T x = mass}; N == 2 only
/// (checks project_simplex).
std::vector<double> grid_project_simplex(std::span<const double> z, double mass, double step);

/// Grid-search best response for player k, N == 2 only. Rate mode searches the
/// budget-tight segment 1^T p = P_k; EE mode searches the full triangle
/// 1^T p <= P_k. Returns the best grid point.
std::vector<double> grid_best_response(const GameInstance& inst, int k, const PowerProfile& p,
                                       bool energy_efficient, int steps);

/// Golden-section search on total radiated power for the unconstrained EE
/// optimum (checks the Dinkelbach solver). The rate-optimal split for a given
/// total is waterfilling, so only the 1-D total remains to search.
struct ScalarEeOptimum {
  double nu = 0.0;           ///< best EE value found
  double total_power = 0.0;  ///< maximizing total radiated power
  std::vector<double> power;
};

ScalarEeOptimum golden_section_ee(const EffectiveNoise& noise, double circuit, double total_hi,
                                  double tol = 1e-10);

}  // namespace qvipower::oracle
