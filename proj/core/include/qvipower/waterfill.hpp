#pragma once

#include <span>
#include <vector>

#include "qvipower/game.hpp"

namespace qvipower {

/// Effective noise seen by one player:
///   zeta_k(n) = xi_k(n) + sum_{i != k} D_{k,i}(n) p_i(n),
/// strictly positive with +inf marking subchannels that can never carry power.
struct EffectiveNoise {
  std::vector<double> zeta;
};

EffectiveNoise effective_noise(const DerivedCoefficients& dc, int k, const PowerProfile& p);

struct WaterfillResult {
  std::vector<double> power;
  double level = 0.0;          ///< multiplier; power(n) = [1/level - zeta(n)]^+
  bool active_budget = false;  ///< whether the power total was pinned to the target
};

/// power(n) = [1/level - zeta(n)]^+. Throws InvalidLevel for level <= 0.
std::vector<double> waterfill(const EffectiveNoise& noise, double level);

/// Exact water level such that 1^T power == target, found by the sort-based
/// active-set method (no iteration, deterministic). target == 0 returns zero
/// power with level 1/min(zeta). Throws EmptySupport when every zeta entry is
/// the +inf sentinel.
WaterfillResult level_for_budget(const EffectiveNoise& noise, double target);

/// Algorithm step shared by the priced waterfilling sweeps: waterfill at
/// `price` if that respects the budget, otherwise at the exact budget level
/// (which is then >= price and the returned active_budget is true).
WaterfillResult waterfill_priced(const EffectiveNoise& noise, double price, double budget);

/// Euclidean projection of z onto {x >= 0, 1^T x = mass}. Entries of z equal
/// to -inf are never active.
std::vector<double> project_simplex(std::span<const double> z, double mass);

/// Rate-game best response: budget waterfilling against the interference in p
/// (player k's own row is ignored). Coincides with the Euclidean projection of
/// -zeta_k onto the budget simplex.
std::vector<double> best_response_rate(const GameInstance& inst, const DerivedCoefficients& dc,
                                       int k, const PowerProfile& p);
std::vector<double> best_response_rate(const GameInstance& inst, int k, const PowerProfile& p);

/// Rate of player k against a fixed effective noise: sum_n log(1 + own(n)/zeta(n)).
double rate_on(const EffectiveNoise& noise, std::span<const double> own);

}  // namespace qvipower
