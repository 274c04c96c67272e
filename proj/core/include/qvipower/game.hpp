#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qvipower/errors.hpp"

namespace qvipower {

enum class Role { Rate, Ee };

/// Full datum of the heterogeneous power-allocation game: K transmit-receive
/// pairs sharing N parallel Gaussian subchannels. Gains are stored as
/// magnitude-squared channel coefficients; complex baseband values never
/// enter the solvers.
struct GameInstance {
  int K = 0;  ///< player count
  int N = 0;  ///< subchannel count

  /// |H_{k,i}(n)|^2 for receiver k, transmitter i, subchannel n; layout (k*K + i)*N + n.
  std::vector<double> gain2;
  /// sigma_k^2(n), strictly positive; layout k*N + n.
  std::vector<double> noise2;
  /// Total transmit power P_k per player (normalized power units).
  std::vector<double> budget;
  /// RF circuitry power Psi_k per player, strictly positive.
  std::vector<double> circuit;
  /// Per-player objective: spectral efficiency (Rate) or energy efficiency (Ee).
  std::vector<Role> role;

  double gain(int k, int i, int n) const {
    return gain2[(static_cast<std::size_t>(k) * K + i) * N + n];
  }
  double& gain(int k, int i, int n) {
    return gain2[(static_cast<std::size_t>(k) * K + i) * N + n];
  }
  double noise(int k, int n) const { return noise2[static_cast<std::size_t>(k) * N + n]; }
  double& noise(int k, int n) { return noise2[static_cast<std::size_t>(k) * N + n]; }

  std::vector<int> players_with(Role r) const;
  int count_role(Role r) const;

  /// Throws InvalidInstance (naming the offending field) or DegenerateChannel
  /// when a player has zero direct gain on every subchannel.
  void validate() const;

  /// Convenience builder with all arrays sized and zeroed, roles Rate.
  static GameInstance zeros(int K, int N);
};

/// Stacked power allocation p in R_+^{K*N}; the game state.
struct PowerProfile {
  int K = 0;
  int N = 0;
  std::vector<double> data;  ///< layout k*N + n

  static PowerProfile zeros(int K, int N);
  /// p_k = (P_k / N) * 1, the uniform allocation used as solver start and
  /// EE-gain baseline.
  static PowerProfile uniform(const GameInstance& inst);

  std::span<double> player(int k) {
    return {data.data() + static_cast<std::size_t>(k) * N, static_cast<std::size_t>(N)};
  }
  std::span<const double> player(int k) const {
    return {data.data() + static_cast<std::size_t>(k) * N, static_cast<std::size_t>(N)};
  }
  void set_player(int k, std::span<const double> values);

  double total(int k) const;

  /// Membership in P: elementwise nonnegative and per-player budgets met.
  bool feasible(const GameInstance& inst, double tol = 1e-9) const;
};

/// Normalized channel coefficients:
///   xi_k(n)   = sigma_k^2(n) / |H_{k,k}(n)|^2
///   D_{k,i}(n) = |H_{k,i}(n)|^2 / |H_{k,k}(n)|^2   (D_{k,k} == 1 exactly)
/// Subchannels with zero direct gain get xi = +inf; they can never carry
/// useful power and the off-diagonal D entries there are set to zero.
struct DerivedCoefficients {
  int K = 0;
  int N = 0;
  std::vector<double> xi;  ///< layout k*N + n
  std::vector<double> D;   ///< layout (k*K + i)*N + n

  double xi_at(int k, int n) const { return xi[static_cast<std::size_t>(k) * N + n]; }
  double D_at(int k, int i, int n) const {
    return D[(static_cast<std::size_t>(k) * K + i) * N + n];
  }
};

DerivedCoefficients derive_coefficients(const GameInstance& inst);

/// Achievable rate of link k in nats, interference treated as noise:
/// sum_n log(1 + SINR_k(n)).
double rate(const GameInstance& inst, int k, const PowerProfile& p);

/// Rate divided by total dissipated power Psi_k + 1^T p_k.
double energy_efficiency(const GameInstance& inst, int k, const PowerProfile& p);

/// Stacked negated rate gradient F(p), entry (k,n) equal to
/// -(xi_k(n) + sum_i D_{k,i}(n) p_i(n))^{-1}; layout k*N + n.
std::vector<double> mapping_F(const GameInstance& inst, const DerivedCoefficients& dc,
                              const PowerProfile& p);
std::vector<double> mapping_F(const GameInstance& inst, const PowerProfile& p);

/// Interference budget factors entering the uniqueness analysis:
///   varsigma_{k,i}(n)    = (sigma_i^2(n) + sum_l |H_{i,l}(n)|^2 P_l) / sigma_k^2(n)
///   varsigma_tilde_k(n)  = xi_k(n) + sum_i D_{k,i}(n) P_i  (sum includes i = k)
struct SigmaFactors {
  int K = 0;
  int N = 0;
  std::vector<double> varsigma;        ///< layout (k*K + i)*N + n
  std::vector<double> varsigma_tilde;  ///< layout k*N + n

  double at(int k, int i, int n) const {
    return varsigma[(static_cast<std::size_t>(k) * K + i) * N + n];
  }
  double tilde(int k, int n) const {
    return varsigma_tilde[static_cast<std::size_t>(k) * N + n];
  }
};

SigmaFactors sigma_factors(const GameInstance& inst);

}  // namespace qvipower
