#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qvipower/game.hpp"

namespace qvipower {

/// Certificates and operator constants for the uniqueness analysis of the
/// heterogeneous game. Gamma and kappa are meaningful when B is positive
/// definite (beta > 0); they are still populated otherwise so reports stay
/// inspectable.
struct UniquenessReport {
  Eigen::MatrixXd A;  ///< [A]_{k,i} = max_n |H_{k,i}|^2 |H_{k,k}|^2 / sigma_k^4
  Eigen::MatrixXd B;  ///< unit diagonal, off-diagonal -max_n {|H_{k,i}|^2/|H_{i,i}|^2 varsigma_{k,i}}
  double lambda_min_Bsym = 0.0;  ///< min eigenvalue of (B + B^T)/2
  double L = 0.0;                ///< Lipschitz modulus sqrt(lambda_max(A^T A))
  double beta = 0.0;             ///< strong monotonicity constant of F
  double Gamma = 0.0;            ///< condition number of F; equals L/beta when beta > 0
  double kappa = 0.0;            ///< co-coercivity step-size constant beta/(1 + Gamma^-2)
  double delta_hat = 0.0;        ///< sampled Lipschitz estimate of the total-power map Omega
  bool B_positive_definite = false;
  /// B positive definite and delta_hat < 1/Gamma. A heuristic certificate when
  /// energy-efficient players are present: delta_hat is a sampled lower bound,
  /// not a proof.
  bool uniqueness_certified = false;
  bool dd_row_ok = false;  ///< row diagonal-dominance test with weights w
  bool dd_col_ok = false;  ///< column diagonal-dominance test with weights w
};

Eigen::MatrixXd build_A(const GameInstance& inst);
Eigen::MatrixXd build_B(const GameInstance& inst);

struct AnalyzeOptions {
  int sample_count = 200;  ///< feasible profile pairs sampled for delta_hat
  std::uint64_t seed = 0;
  /// Positive weight vector for the dominance tests; empty means all ones.
  std::vector<double> weights;
  double dinkelbach_eps = 1e-8;
  double pd_tol = 1e-12;  ///< positive-definiteness threshold on lambda_min
};

/// Populates the full report. delta_hat is the max of
/// ||Omega(p) - Omega(p')|| / ||p - p'|| over sampled feasible pairs, with
/// Omega_k = P_k for rate players and the unconstrained EE radiated power for
/// EE players (zero spread when there are no EE players).
UniquenessReport analyze(const GameInstance& inst, const AnalyzeOptions& opt = {});

/// Eigenvalue-based constants only (no Omega sampling); what the solvers need
/// to pick the outer step size.
struct OperatorConstants {
  double lambda_min_Bsym = 0.0;
  double L = 0.0;
  double beta = 0.0;
  double Gamma = 0.0;
  double kappa = 0.0;
  double max_sigma_tilde_sq = 0.0;
};

OperatorConstants operator_constants(const GameInstance& inst);

}  // namespace qvipower
