#include "qvipower/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "qvipower/dinkelbach.hpp"
#include "qvipower/rng.hpp"
#include "qvipower/waterfill.hpp"

namespace qvipower {

namespace {

/// max_k max_n varsigma_tilde_k(n)^2 over usable subchannels.
double max_sigma_tilde_sq(const SigmaFactors& sf) {
  double m = 0.0;
  for (double v : sf.varsigma_tilde)
    if (std::isfinite(v)) m = std::max(m, v * v);
  return m;
}

/// Total-power map Omega: budget for rate players, unconstrained EE radiated
/// power for EE players.
Eigen::VectorXd omega_map(const GameInstance& inst, const DerivedCoefficients& dc,
                          const std::vector<int>& ee_players, const PowerProfile& p,
                          double dinkelbach_eps) {
  Eigen::VectorXd w(inst.K);
  for (int k = 0; k < inst.K; ++k) w(k) = inst.budget[static_cast<std::size_t>(k)];
  DinkelbachOptions opt;
  opt.eps = dinkelbach_eps;
  for (int k : ee_players) {
    const DinkelbachResult dk =
        dinkelbach(effective_noise(dc, k, p), inst.circuit[static_cast<std::size_t>(k)],
                   inst.budget[static_cast<std::size_t>(k)], opt);
    w(k) = 1.0 / dk.t_star - inst.circuit[static_cast<std::size_t>(k)];
  }
  return w;
}

/// Uniform draw on the budget simplex scaled by a U(0,1) mass, per player.
PowerProfile sample_feasible(const GameInstance& inst, Rng& rng) {
  PowerProfile p = PowerProfile::zeros(inst.K, inst.N);
  for (int k = 0; k < inst.K; ++k) {
    auto row = p.player(k);
    double total = 0.0;
    for (double& v : row) {
      v = rng.exponential();
      total += v;
    }
    const double mass = rng.uniform01() * inst.budget[static_cast<std::size_t>(k)];
    for (double& v : row) v *= mass / total;
  }
  return p;
}

}  // namespace

Eigen::MatrixXd build_A(const GameInstance& inst) {
  inst.validate();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(inst.K, inst.K);
  for (int k = 0; k < inst.K; ++k)
    for (int i = 0; i < inst.K; ++i) {
      double m = 0.0;
      for (int n = 0; n < inst.N; ++n) {
        const double s2 = inst.noise(k, n);
        m = std::max(m, inst.gain(k, i, n) * inst.gain(k, k, n) / (s2 * s2));
      }
      A(k, i) = m;
    }
  return A;
}

Eigen::MatrixXd build_B(const GameInstance& inst) {
  inst.validate();
  const SigmaFactors sf = sigma_factors(inst);
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(inst.K, inst.K);
  for (int k = 0; k < inst.K; ++k)
    for (int i = 0; i < inst.K; ++i) {
      if (i == k) continue;
      double m = 0.0;
      for (int n = 0; n < inst.N; ++n) {
        const double direct_i = inst.gain(i, i, n);
        if (direct_i <= 0.0) continue;  // player i never uses this subchannel
        m = std::max(m, inst.gain(k, i, n) / direct_i * sf.at(k, i, n));
      }
      B(k, i) = -m;
    }
  return B;
}

OperatorConstants operator_constants(const GameInstance& inst) {
  OperatorConstants oc;
  const Eigen::MatrixXd A = build_A(inst);
  const Eigen::MatrixXd B = build_B(inst);
  const Eigen::MatrixXd Bsym = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esB(Bsym);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esA(A.transpose() * A);
  oc.lambda_min_Bsym = esB.eigenvalues().minCoeff();
  oc.L = std::sqrt(std::max(0.0, esA.eigenvalues().maxCoeff()));
  oc.max_sigma_tilde_sq = max_sigma_tilde_sq(sigma_factors(inst));
  oc.beta = oc.lambda_min_Bsym / oc.max_sigma_tilde_sq;
  oc.Gamma = oc.L * oc.max_sigma_tilde_sq / oc.lambda_min_Bsym;
  oc.kappa = oc.beta / (1.0 + 1.0 / (oc.Gamma * oc.Gamma));
  return oc;
}

UniquenessReport analyze(const GameInstance& inst, const AnalyzeOptions& opt) {
  inst.validate();
  UniquenessReport rep;
  rep.A = build_A(inst);
  rep.B = build_B(inst);

  const OperatorConstants oc = operator_constants(inst);
  rep.lambda_min_Bsym = oc.lambda_min_Bsym;
  rep.L = oc.L;
  rep.beta = oc.beta;
  rep.Gamma = oc.Gamma;
  rep.kappa = oc.kappa;
  rep.B_positive_definite = oc.lambda_min_Bsym > opt.pd_tol;

  // Weighted diagonal-dominance tests; either direction implies B PD.
  std::vector<double> w = opt.weights;
  if (w.empty()) w.assign(static_cast<std::size_t>(inst.K), 1.0);
  if (w.size() != static_cast<std::size_t>(inst.K))
    throw InvalidInstance("weights", "must have K entries");
  for (double v : w)
    if (!(v > 0.0)) throw InvalidInstance("weights", "must be strictly positive");
  rep.dd_row_ok = true;
  rep.dd_col_ok = true;
  for (int k = 0; k < inst.K; ++k) {
    double row = 0.0;
    double col = 0.0;
    for (int i = 0; i < inst.K; ++i) {
      if (i == k) continue;
      row += w[static_cast<std::size_t>(i)] * (-rep.B(k, i));
      col += w[static_cast<std::size_t>(i)] * (-rep.B(i, k));
    }
    if (row / w[static_cast<std::size_t>(k)] >= 1.0) rep.dd_row_ok = false;
    if (col / w[static_cast<std::size_t>(k)] >= 1.0) rep.dd_col_ok = false;
  }

  // Sampled Lipschitz estimate of Omega. Rate players contribute nothing, so
  // an all-rate game has delta_hat = 0 and certification reduces to B PD.
  const std::vector<int> ee_players = inst.players_with(Role::Ee);
  rep.delta_hat = 0.0;
  if (!ee_players.empty() && opt.sample_count > 0) {
    const DerivedCoefficients dc = derive_coefficients(inst);
    Rng rng(substream_seed(opt.seed, 0x616e616cULL));
    for (int s = 0; s < opt.sample_count; ++s) {
      const PowerProfile p = sample_feasible(inst, rng);
      const PowerProfile q = sample_feasible(inst, rng);
      double dist_sq = 0.0;
      for (std::size_t j = 0; j < p.data.size(); ++j) {
        const double d = p.data[j] - q.data[j];
        dist_sq += d * d;
      }
      const double dist = std::sqrt(dist_sq);
      if (dist < 1e-12) continue;
      const Eigen::VectorXd wp = omega_map(inst, dc, ee_players, p, opt.dinkelbach_eps);
      const Eigen::VectorXd wq = omega_map(inst, dc, ee_players, q, opt.dinkelbach_eps);
      rep.delta_hat = std::max(rep.delta_hat, (wp - wq).norm() / dist);
    }
  }

  const double inv_gamma = rep.B_positive_definite ? 1.0 / rep.Gamma : 0.0;
  rep.uniqueness_certified = rep.B_positive_definite &&
                             (ee_players.empty() || rep.delta_hat < inv_gamma);
  return rep;
}

}  // namespace qvipower
