#pragma once

#include <optional>
#include <vector>

#include "qvipower/game.hpp"
#include "qvipower/waterfill.hpp"

namespace qvipower {

/// Characterization of a player's unconstrained energy-efficiency optimum.
struct DinkelbachResult {
  double nu_star = 0.0;         ///< optimal EE value (nats per power unit)
  std::vector<double> z_star;   ///< maximizer with the budget constraint ignored
  double t_star = 0.0;          ///< inverse total dissipation 1/(Psi + 1^T z_star)
  int iterations = 0;
  std::vector<double> nu_history;  ///< nu after each update, for diagnostics
};

struct DinkelbachOptions {
  double eps = 1e-6;  ///< stopping tolerance on the fractional residual
  int max_iterations = 200;
  /// Optional starting value; default is the EE of the uniform allocation
  /// (P/N per subchannel), which is strictly positive and cheap.
  std::optional<double> nu0;
};

/// Dinkelbach iteration for max_{z >= 0} rate(z) / (circuit + 1^T z) against a
/// fixed effective noise. The budget enters only through the default nu0 seed.
/// At return |rate(z*) - nu* (circuit + 1^T z*)| < eps and z* is the
/// waterfilling at level nu*. Throws NonConvergence past the iteration cap.
DinkelbachResult dinkelbach(const EffectiveNoise& noise, double circuit, double budget,
                            const DinkelbachOptions& opt = {});

/// Convenience wrapper deriving player k's effective noise from a full profile
/// (own row ignored).
DinkelbachResult dinkelbach(const GameInstance& inst, int k, const PowerProfile& p,
                            const DinkelbachOptions& opt = {});

/// EE best response: waterfilling with the level chosen so that
/// 1^T p_k = min{P_k, 1/t* - Psi_k}. When the unconstrained optimum fits the
/// budget this is z_star itself; otherwise it degenerates to the rate best
/// response.
std::vector<double> best_response_ee(const GameInstance& inst, int k, const PowerProfile& p,
                                     const DinkelbachOptions& opt = {});
std::vector<double> best_response_ee(const EffectiveNoise& noise, double circuit, double budget,
                                     const DinkelbachOptions& opt = {});

/// Coupling constraint of the quasi-variational formulation:
///   g_k(p) = 1^T p_k - (1/t*_k(p_{-k}) - Psi_k).
double g_constraint(const GameInstance& inst, int k, const PowerProfile& p,
                    const DinkelbachOptions& opt = {});

}  // namespace qvipower
