#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "qvipower/dinkelbach.hpp"
#include "qvipower/game.hpp"

namespace qvipower {

enum class StepRule {
  FixedTwoKappa,     ///< tau = 2 kappa throughout
  AdaptiveTwoKappa,  ///< tau = 2 kappa, halved when the merit rises 3 outer iterations in a row
};

struct SolverConfig {
  double outer_eps = 1e-6;      ///< NCP complementarity / SPA [g]^+ tolerance
  double inner_eps = 1e-9;      ///< per-sweep max power change for the inner VI loops
  double dinkelbach_eps = 1e-6;
  /// Slack allowed on Phi >= 0 at NCP termination; keeps the literal
  /// complementarity test from accepting gamma = 0 while the coupling
  /// constraint is still violated.
  double phi_feasibility_tol = 1e-4;
  int max_outer_ncp = 500;
  int max_outer_spa = 60;
  int max_sweeps = 10000;  ///< cap on inner waterfilling sweeps
  int dinkelbach_max_iterations = 200;
  double rho0 = 1.0;        ///< first penalty weight
  double rho_growth = 5.0;  ///< penalty growth factor, > 1
  double alpha = 0.0;       ///< constant (bounded) multiplier-estimate sequence
  StepRule step_rule = StepRule::AdaptiveTwoKappa;
  std::optional<double> tau_override;  ///< fixed outer step instead of 2 kappa
  bool record_profiles = true;         ///< keep a profile snapshot per outer iteration
  std::uint64_t seed = 0;              ///< recorded with outputs; the solvers are deterministic
};

struct TraceRow {
  int iteration = 0;
  int player = 0;
  double sum_power = 0.0;
  double rate = 0.0;
  double ee = 0.0;
  double price = 0.0;     ///< gamma_k (NCP) or [alpha + rho g_k]^+ (SPA)
  double phi = 0.0;       ///< Phi_k (NCP) or g_k (SPA)
  double residual = 0.0;  ///< outer merit at this iteration
};

struct SolverTrace {
  std::vector<TraceRow> rows;
  std::vector<PowerProfile> profiles;  ///< one per outer iteration when recorded
  bool converged = false;
  int iterations = 0;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
};

struct SolveResult {
  PowerProfile profile;
  SolverTrace trace;
};

struct IwfpResult {
  PowerProfile profile;
  int sweeps = 0;
  bool converged = false;
};

/// Sequential iterative waterfilling with pricing: Gauss-Seidel sweeps where
/// player k waterfills at level chi_k + gamma_k, chi_k > 0 only when needed to
/// meet the budget. Solves the gamma-penalized VI on P when it converges.
/// Prices on rate players are forced to zero.
IwfpResult iwfp(const GameInstance& inst, const std::vector<double>& gamma,
                const PowerProfile& start, const SolverConfig& cfg = {});

/// Distributed two-layer solver: inner IWFP, outer projected price update
/// gamma <- [gamma - tau Phi(gamma)]^+ with tau = 2 kappa by default.
/// Termination requires the complementarity measure max_k |gamma_k Phi_k| to
/// fall below outer_eps with Phi >= -phi_feasibility_tol. Non-convergence is
/// reported through the trace flag, never thrown.
SolveResult ncp_solve(const GameInstance& inst, const SolverConfig& cfg = {});

/// Centralized sequential penalty approach: solves a sequence of penalized VIs
/// on P with growing rho; each inner subproblem is solved by Gauss-Seidel
/// best-response sweeps with an exact per-player 1-D root find.
SolveResult spa_solve(const GameInstance& inst, const SolverConfig& cfg = {});

/// Fixed-point diagnostic: max_k || p_k - BR_k(p_{-k}) ||_inf with the best
/// response matching each player's role.
double ne_residual(const GameInstance& inst, const PowerProfile& p, double dinkelbach_eps = 1e-10);

/// || a - b ||_inf / max(||a||_inf, ||b||_inf), zero-safe.
double rel_inf_distance(const PowerProfile& a, const PowerProfile& b);

}  // namespace qvipower
