#include "qvipower/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qvipower/analysis.hpp"
#include "qvipower/log.hpp"
#include "qvipower/waterfill.hpp"

namespace qvipower {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Presorted view of a fixed effective noise for repeated exact water-level
/// queries level(s): the multiplier whose waterfilling carries total power s.
class LevelQuery {
 public:
  explicit LevelQuery(const EffectiveNoise& noise) {
    for (double z : noise.zeta)
      if (std::isfinite(z)) sorted_.push_back(z);
    if (sorted_.empty()) throw EmptySupport("every effective-noise entry is infinite");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double level(double total) const {
    if (total <= 0.0) return 1.0 / sorted_.front();
    double prefix = 0.0;
    double height = 0.0;
    for (std::size_t m = 1; m <= sorted_.size(); ++m) {
      prefix += sorted_[m - 1];
      const double h = (total + prefix) / static_cast<double>(m);
      if (h > sorted_[m - 1]) height = h;
    }
    return 1.0 / height;
  }

 private:
  std::vector<double> sorted_;
};

/// Penalized best response of an EE player at penalty weight rho: the total
/// power s solves level(s) = [alpha + rho (s - radiated_target)]^+ unless the
/// budget binds first. level(s) is strictly decreasing and the price term
/// nondecreasing, so the root is unique and bisection is exact.
std::vector<double> spa_ee_update(const EffectiveNoise& zeta, double budget, double rho,
                                  double alpha, double radiated_target) {
  const LevelQuery lq(zeta);
  const auto residual = [&](double s) {
    return lq.level(s) - std::max(0.0, alpha + rho * (s - radiated_target));
  };
  double s_star = budget;
  if (residual(budget) < 0.0) {
    if (residual(0.0) <= 0.0) {
      s_star = 0.0;
    } else {
      double lo = 0.0;
      double hi = budget;
      const double tol = 1e-15 * std::max(1.0, budget);
      for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) > 0.0 ? lo : hi) = mid;
      }
      s_star = 0.5 * (lo + hi);
    }
  }
  return level_for_budget(zeta, s_star).power;
}

IwfpResult iwfp_impl(const GameInstance& inst, const DerivedCoefficients& dc,
                     const std::vector<double>& gamma_in, const PowerProfile& start,
                     const SolverConfig& cfg) {
  std::vector<double> gamma = gamma_in;
  for (int k = 0; k < inst.K; ++k)
    if (inst.role[static_cast<std::size_t>(k)] == Role::Rate) gamma[static_cast<std::size_t>(k)] = 0.0;

  IwfpResult res;
  res.profile = start;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    double delta = 0.0;
    for (int k = 0; k < inst.K; ++k) {
      const EffectiveNoise zeta = effective_noise(dc, k, res.profile);
      const WaterfillResult wf = waterfill_priced(zeta, gamma[static_cast<std::size_t>(k)],
                                                  inst.budget[static_cast<std::size_t>(k)]);
      auto row = res.profile.player(k);
      for (int n = 0; n < inst.N; ++n)
        delta = std::max(delta, std::abs(wf.power[static_cast<std::size_t>(n)] -
                                         row[static_cast<std::size_t>(n)]));
      res.profile.set_player(k, wf.power);
    }
    res.sweeps = sweep;
    if (delta < cfg.inner_eps) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

void record_iteration(SolverTrace& trace, const GameInstance& inst, const PowerProfile& p,
                      int iter, const std::vector<double>& price, const std::vector<double>& phi,
                      double residual, bool record_profile) {
  for (int k = 0; k < inst.K; ++k) {
    TraceRow row;
    row.iteration = iter;
    row.player = k;
    row.sum_power = p.total(k);
    row.rate = rate(inst, k, p);
    row.ee = energy_efficiency(inst, k, p);
    row.price = price[static_cast<std::size_t>(k)];
    row.phi = phi[static_cast<std::size_t>(k)];
    row.residual = residual;
    trace.rows.push_back(row);
  }
  if (record_profile) trace.profiles.push_back(p);
}

void validate_config(const SolverConfig& cfg) {
  if (!(cfg.outer_eps > 0.0)) throw InvalidInstance("outer_eps", "must be positive");
  if (!(cfg.inner_eps > 0.0)) throw InvalidInstance("inner_eps", "must be positive");
  if (!(cfg.dinkelbach_eps > 0.0)) throw InvalidInstance("dinkelbach_eps", "must be positive");
  if (!(cfg.rho_growth > 1.0))
    throw InvalidInstance("rho_growth", "penalty growth factor must exceed 1");
}

}  // namespace

IwfpResult iwfp(const GameInstance& inst, const std::vector<double>& gamma,
                const PowerProfile& start, const SolverConfig& cfg) {
  inst.validate();
  validate_config(cfg);
  if (gamma.size() != static_cast<std::size_t>(inst.K))
    throw InvalidInstance("gamma", "must have K entries");
  for (double g : gamma)
    if (!(g >= 0.0)) throw InvalidInstance("gamma", "prices must be nonnegative");
  return iwfp_impl(inst, derive_coefficients(inst), gamma, start, cfg);
}

SolveResult ncp_solve(const GameInstance& inst, const SolverConfig& cfg) {
  inst.validate();
  validate_config(cfg);
  const DerivedCoefficients dc = derive_coefficients(inst);
  const std::vector<int> ee_players = inst.players_with(Role::Ee);

  // Stability-scale step estimate: price sensitivities go like (active
  // subchannels) / level^2, so level^2 / (2N) at the budget water level of
  // the uniform start keeps the projected price update stable.
  double stability_tau = 1.0;
  {
    const PowerProfile start = PowerProfile::uniform(inst);
    double level_min = std::numeric_limits<double>::infinity();
    for (int k : ee_players)
      level_min = std::min(level_min,
                           level_for_budget(effective_noise(dc, k, start),
                                            inst.budget[static_cast<std::size_t>(k)])
                               .level);
    if (std::isfinite(level_min)) stability_tau = level_min * level_min / (2.0 * inst.N);
  }

  double tau;
  if (cfg.tau_override) {
    tau = *cfg.tau_override;
  } else {
    const OperatorConstants oc = operator_constants(inst);
    if (oc.kappa > 0.0) {
      tau = 2.0 * oc.kappa;
    } else {
      // B is not positive definite, so the co-coercivity constant is
      // unavailable; start from the stability estimate instead.
      tau = stability_tau;
      log_debug("ncp_solve: B not positive definite, fallback outer step used");
    }
  }
  const double tau_cap = std::max(tau, stability_tau);

  const DinkelbachOptions dopt{cfg.dinkelbach_eps, cfg.dinkelbach_max_iterations, {}};
  SolveResult out;
  out.profile = PowerProfile::uniform(inst);
  std::vector<double> gamma(static_cast<std::size_t>(inst.K), 0.0);
  std::vector<double> phi(static_cast<std::size_t>(inst.K), 0.0);

  const double tau_floor = tau * 1e-6;
  double prev_merit = kInf;
  int rising = 0;
  int plateau = 0;
  for (int j = 0; j < cfg.max_outer_ncp; ++j) {
    const IwfpResult inner = iwfp_impl(inst, dc, gamma, out.profile, cfg);
    out.profile = inner.profile;

    std::fill(phi.begin(), phi.end(), 0.0);
    for (int k : ee_players) {
      const DinkelbachResult dk =
          dinkelbach(effective_noise(dc, k, out.profile),
                     inst.circuit[static_cast<std::size_t>(k)],
                     inst.budget[static_cast<std::size_t>(k)], dopt);
      phi[static_cast<std::size_t>(k)] =
          (1.0 / dk.t_star - inst.circuit[static_cast<std::size_t>(k)]) - out.profile.total(k);
    }

    double complementarity = 0.0;
    double infeasibility = 0.0;
    double natural_residual = 0.0;  // ||gamma - [gamma - Phi]^+||_inf
    for (int k : ee_players) {
      const double gk = gamma[static_cast<std::size_t>(k)];
      const double pk = phi[static_cast<std::size_t>(k)];
      complementarity = std::max(complementarity, std::abs(gk * pk));
      infeasibility = std::max(infeasibility, -pk);
      natural_residual = std::max(natural_residual, std::abs(gk - std::max(0.0, gk - pk)));
    }
    infeasibility = std::max(0.0, infeasibility);
    const double merit = std::max(complementarity, infeasibility);

    record_iteration(out.trace, inst, out.profile, j, gamma, phi, merit, cfg.record_profiles);
    out.trace.iterations = j + 1;
    out.trace.final_residual = merit;

    if (!inner.converged) {
      log_info("ncp_solve: inner waterfilling hit the sweep cap, flagging non-convergence");
      return out;
    }
    if (complementarity <= cfg.outer_eps && infeasibility <= cfg.phi_feasibility_tol) {
      out.trace.converged = true;
      return out;
    }

    if (cfg.step_rule == StepRule::AdaptiveTwoKappa) {
      // Track the fixed-point residual, not the complementarity measure: the
      // latter grows while prices ramp up from zero even when all is well.
      // Hysteresis keeps transient drift from cascading the step to zero;
      // only a genuinely growing residual (divergent oscillation) counts.
      if (natural_residual > prev_merit * 1.001) {
        if (++rising >= 3) {
          if (tau > tau_floor) tau *= 0.5;
          rising = 0;
          log_debug("ncp_solve: outer residual rising, halving step");
        }
        plateau = 0;
      } else {
        rising = 0;
        // A long plateau means the step is far too small for visible progress
        // (budget-bound price ramp, or a worst-case kappa orders of magnitude
        // below the actual sensitivity); grow back toward the stability scale.
        if (natural_residual > prev_merit * 0.999 && tau < tau_cap) {
          if (++plateau >= 200) {
            tau = std::min(tau * 2.0, tau_cap);
            plateau = 0;
          }
        } else {
          plateau = 0;
        }
      }
      prev_merit = natural_residual;
    }

    for (int k : ee_players)
      gamma[static_cast<std::size_t>(k)] =
          std::max(0.0, gamma[static_cast<std::size_t>(k)] -
                            tau * phi[static_cast<std::size_t>(k)]);
  }
  return out;
}

SolveResult spa_solve(const GameInstance& inst, const SolverConfig& cfg) {
  inst.validate();
  validate_config(cfg);
  const DerivedCoefficients dc = derive_coefficients(inst);
  const std::vector<int> ee_players = inst.players_with(Role::Ee);
  const DinkelbachOptions dopt{cfg.dinkelbach_eps, cfg.dinkelbach_max_iterations, {}};

  SolveResult out;
  out.profile = PowerProfile::uniform(inst);
  std::vector<double> g(static_cast<std::size_t>(inst.K), 0.0);
  std::vector<double> lambda(static_cast<std::size_t>(inst.K), 0.0);

  double rho = cfg.rho0;
  for (int j = 0; j < cfg.max_outer_spa; ++j) {
    bool inner_ok = false;
    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
      double delta = 0.0;
      for (int k = 0; k < inst.K; ++k) {
        const EffectiveNoise zeta = effective_noise(dc, k, out.profile);
        std::vector<double> next;
        if (inst.role[static_cast<std::size_t>(k)] == Role::Rate) {
          next = level_for_budget(zeta, inst.budget[static_cast<std::size_t>(k)]).power;
        } else {
          const DinkelbachResult dk =
              dinkelbach(zeta, inst.circuit[static_cast<std::size_t>(k)],
                         inst.budget[static_cast<std::size_t>(k)], dopt);
          const double radiated =
              std::max(0.0, 1.0 / dk.t_star - inst.circuit[static_cast<std::size_t>(k)]);
          next = spa_ee_update(zeta, inst.budget[static_cast<std::size_t>(k)], rho, cfg.alpha,
                               radiated);
        }
        auto row = out.profile.player(k);
        for (int n = 0; n < inst.N; ++n)
          delta = std::max(delta, std::abs(next[static_cast<std::size_t>(n)] -
                                           row[static_cast<std::size_t>(n)]));
        out.profile.set_player(k, next);
      }
      if (delta < cfg.inner_eps) {
        inner_ok = true;
        break;
      }
    }

    std::fill(g.begin(), g.end(), 0.0);
    std::fill(lambda.begin(), lambda.end(), 0.0);
    double gplus = 0.0;
    for (int k : ee_players) {
      const DinkelbachResult dk =
          dinkelbach(effective_noise(dc, k, out.profile),
                     inst.circuit[static_cast<std::size_t>(k)],
                     inst.budget[static_cast<std::size_t>(k)], dopt);
      g[static_cast<std::size_t>(k)] =
          out.profile.total(k) -
          std::max(0.0, 1.0 / dk.t_star - inst.circuit[static_cast<std::size_t>(k)]);
      lambda[static_cast<std::size_t>(k)] =
          std::max(0.0, cfg.alpha + rho * g[static_cast<std::size_t>(k)]);
      gplus = std::max(gplus, std::max(0.0, g[static_cast<std::size_t>(k)]));
    }

    record_iteration(out.trace, inst, out.profile, j, lambda, g, gplus, cfg.record_profiles);
    out.trace.iterations = j + 1;
    out.trace.final_residual = gplus;

    if (!inner_ok) {
      log_info("spa_solve: inner sweeps hit the cap, flagging non-convergence");
      return out;
    }
    if (gplus < cfg.outer_eps) {
      out.trace.converged = true;
      return out;
    }
    rho *= cfg.rho_growth;
  }
  return out;
}

double ne_residual(const GameInstance& inst, const PowerProfile& p, double dinkelbach_eps) {
  inst.validate();
  const DerivedCoefficients dc = derive_coefficients(inst);
  double worst = 0.0;
  for (int k = 0; k < inst.K; ++k) {
    const EffectiveNoise zeta = effective_noise(dc, k, p);
    std::vector<double> br;
    if (inst.role[static_cast<std::size_t>(k)] == Role::Rate) {
      br = level_for_budget(zeta, inst.budget[static_cast<std::size_t>(k)]).power;
    } else {
      br = best_response_ee(zeta, inst.circuit[static_cast<std::size_t>(k)],
                            inst.budget[static_cast<std::size_t>(k)],
                            DinkelbachOptions{dinkelbach_eps, 200, {}});
    }
    const auto row = p.player(k);
    for (int n = 0; n < inst.N; ++n)
      worst = std::max(worst, std::abs(row[static_cast<std::size_t>(n)] -
                                       br[static_cast<std::size_t>(n)]));
  }
  return worst;
}

double rel_inf_distance(const PowerProfile& a, const PowerProfile& b) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t j = 0; j < a.data.size(); ++j) {
    diff = std::max(diff, std::abs(a.data[j] - b.data[j]));
    scale = std::max({scale, std::abs(a.data[j]), std::abs(b.data[j])});
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace qvipower
