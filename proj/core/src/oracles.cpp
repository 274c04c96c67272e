#include "qvipower/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qvipower::oracle {

WaterfillResult bisect_level(const EffectiveNoise& noise, double target, double tol) {
  if (!(target >= 0.0)) throw std::invalid_argument("target must be nonnegative");
  double zmin = std::numeric_limits<double>::infinity();
  for (double z : noise.zeta)
    if (std::isfinite(z)) zmin = std::min(zmin, z);
  if (!std::isfinite(zmin)) throw EmptySupport("every effective-noise entry is infinite");

  const auto total_at = [&](double height) {
    double s = 0.0;
    for (double z : noise.zeta)
      if (std::isfinite(z)) s += std::max(0.0, height - z);
    return s;
  };

  double lo = zmin;          // total 0
  double hi = zmin + target; // total >= target
  for (int it = 0; it < 200 && hi - lo > tol * 0.01; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total_at(mid) < target ? lo : hi) = mid;
  }
  const double height = 0.5 * (lo + hi);

  WaterfillResult res;
  res.power.assign(noise.zeta.size(), 0.0);
  for (std::size_t n = 0; n < noise.zeta.size(); ++n)
    if (std::isfinite(noise.zeta[n])) res.power[n] = std::max(0.0, height - noise.zeta[n]);
  res.level = 1.0 / height;
  res.active_budget = target > 0.0;
  return res;
}

std::vector<double> grid_project_simplex(std::span<const double> z, double mass, double step) {
  if (z.size() != 2) throw std::invalid_argument("grid projection supports N == 2 only");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  double best_t = 0.0;
  double best_obj = std::numeric_limits<double>::infinity();
  const long steps = std::lround(mass / step);
  for (long i = 0; i <= steps; ++i) {
    const double t = std::min(mass, static_cast<double>(i) * step);
    const double d0 = t - z[0];
    const double d1 = (mass - t) - z[1];
    const double obj = d0 * d0 + d1 * d1;
    if (obj < best_obj) {
      best_obj = obj;
      best_t = t;
    }
  }
  return {best_t, mass - best_t};
}

std::vector<double> grid_best_response(const GameInstance& inst, int k, const PowerProfile& p,
                                       bool energy_efficient, int steps) {
  if (inst.N != 2) throw std::invalid_argument("grid best response supports N == 2 only");
  if (steps < 2) throw std::invalid_argument("steps must be at least 2");
  const double budget = inst.budget[static_cast<std::size_t>(k)];

  PowerProfile probe = p;
  double best_obj = -std::numeric_limits<double>::infinity();
  std::vector<double> best{0.0, 0.0};
  const auto consider = [&](double a, double b) {
    const double own[2] = {a, b};
    probe.set_player(k, own);
    const double obj = energy_efficient ? energy_efficiency(inst, k, probe) : rate(inst, k, probe);
    if (obj > best_obj) {
      best_obj = obj;
      best = {a, b};
    }
  };

  if (energy_efficient) {
    for (int i = 0; i <= steps; ++i) {
      const double total = budget * static_cast<double>(i) / steps;
      for (int jj = 0; jj <= steps; ++jj) {
        const double a = total * static_cast<double>(jj) / steps;
        consider(a, total - a);
      }
    }
  } else {
    for (int i = 0; i <= steps; ++i) {
      const double a = budget * static_cast<double>(i) / steps;
      consider(a, budget - a);
    }
  }
  return best;
}

ScalarEeOptimum golden_section_ee(const EffectiveNoise& noise, double circuit, double total_hi,
                                  double tol) {
  const auto ee_at = [&](double total) {
    const std::vector<double> split = level_for_budget(noise, total).power;
    return rate_on(noise, split) / (circuit + total);
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = total_hi;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = ee_at(x1);
  double f2 = ee_at(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = ee_at(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = ee_at(x1);
    }
  }
  ScalarEeOptimum res;
  res.total_power = 0.5 * (lo + hi);
  res.power = level_for_budget(noise, res.total_power).power;
  res.nu = rate_on(noise, res.power) / (circuit + res.total_power);
  return res;
}

}  // namespace qvipower::oracle
