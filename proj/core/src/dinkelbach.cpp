#include "qvipower/dinkelbach.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qvipower {

namespace {

double uniform_ee(const EffectiveNoise& noise, double circuit, double budget) {
  const double share = budget / static_cast<double>(noise.zeta.size());
  double r = 0.0;
  for (double z : noise.zeta)
    if (std::isfinite(z)) r += std::log1p(share / z);
  return r / (circuit + budget);
}

}  // namespace

DinkelbachResult dinkelbach(const EffectiveNoise& noise, double circuit, double budget,
                            const DinkelbachOptions& opt) {
  if (!(opt.eps > 0.0)) throw std::invalid_argument("dinkelbach eps must be positive");
  bool any_finite = false;
  for (double z : noise.zeta)
    if (std::isfinite(z)) any_finite = true;
  if (!any_finite) throw DegenerateChannel("dinkelbach: no usable subchannel");

  const double nu_uniform = uniform_ee(noise, circuit, budget);
  double nu = opt.nu0.value_or(nu_uniform);
  if (!(nu > 0.0)) throw std::invalid_argument("dinkelbach starting value must be positive");

  DinkelbachResult res;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    std::vector<double> z = waterfill(noise, nu);
    const double total = std::accumulate(z.begin(), z.end(), 0.0);
    if (total == 0.0) {
      // Overshot past the optimum far enough that the waterfilling is empty;
      // restart below it. From below the iteration is monotone, so this can
      // happen at most once per run.
      nu = nu_uniform;
      res.nu_history.push_back(nu);
      continue;
    }
    const double num = rate_on(noise, z);
    const double den = circuit + total;
    const double residual = num - nu * den;
    const double nu_next = num / den;
    res.nu_history.push_back(nu_next);
    if (std::abs(residual) < opt.eps) {
      res.nu_star = nu_next;
      res.z_star = waterfill(noise, nu_next);
      res.t_star =
          1.0 / (circuit + std::accumulate(res.z_star.begin(), res.z_star.end(), 0.0));
      res.iterations = it;
      return res;
    }
    nu = nu_next;
  }
  throw NonConvergence("dinkelbach: no convergence within " +
                       std::to_string(opt.max_iterations) + " iterations");
}

DinkelbachResult dinkelbach(const GameInstance& inst, int k, const PowerProfile& p,
                            const DinkelbachOptions& opt) {
  const DerivedCoefficients dc = derive_coefficients(inst);
  return dinkelbach(effective_noise(dc, k, p), inst.circuit[static_cast<std::size_t>(k)],
                    inst.budget[static_cast<std::size_t>(k)], opt);
}

std::vector<double> best_response_ee(const EffectiveNoise& noise, double circuit, double budget,
                                     const DinkelbachOptions& opt) {
  const DinkelbachResult dk = dinkelbach(noise, circuit, budget, opt);
  const double radiated = std::max(0.0, 1.0 / dk.t_star - circuit);
  if (radiated <= budget) return dk.z_star;  // budget slack: the EE optimum itself
  return level_for_budget(noise, budget).power;
}

std::vector<double> best_response_ee(const GameInstance& inst, int k, const PowerProfile& p,
                                     const DinkelbachOptions& opt) {
  const DerivedCoefficients dc = derive_coefficients(inst);
  return best_response_ee(effective_noise(dc, k, p), inst.circuit[static_cast<std::size_t>(k)],
                          inst.budget[static_cast<std::size_t>(k)], opt);
}

double g_constraint(const GameInstance& inst, int k, const PowerProfile& p,
                    const DinkelbachOptions& opt) {
  const DinkelbachResult dk = dinkelbach(inst, k, p, opt);
  return p.total(k) - (1.0 / dk.t_star - inst.circuit[static_cast<std::size_t>(k)]);
}

}  // namespace qvipower
