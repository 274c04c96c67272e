#include "qvipower/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qvipower {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

EffectiveNoise effective_noise(const DerivedCoefficients& dc, int k, const PowerProfile& p) {
  EffectiveNoise out;
  out.zeta.resize(static_cast<std::size_t>(dc.N));
  for (int n = 0; n < dc.N; ++n) {
    double z = dc.xi_at(k, n);
    for (int i = 0; i < dc.K; ++i)
      if (i != k) z += dc.D_at(k, i, n) * p.player(i)[static_cast<std::size_t>(n)];
    out.zeta[static_cast<std::size_t>(n)] = z;
  }
  return out;
}

std::vector<double> waterfill(const EffectiveNoise& noise, double level) {
  if (!(level > 0.0) || !std::isfinite(level))
    throw InvalidLevel("water level must be strictly positive");
  const double height = 1.0 / level;
  std::vector<double> power(noise.zeta.size(), 0.0);
  for (std::size_t n = 0; n < noise.zeta.size(); ++n)
    power[n] = std::max(0.0, height - noise.zeta[n]);
  return power;
}

WaterfillResult level_for_budget(const EffectiveNoise& noise, double target) {
  if (!(target >= 0.0)) throw std::invalid_argument("power target must be nonnegative");
  const std::size_t n_sub = noise.zeta.size();

  std::vector<std::size_t> finite;
  finite.reserve(n_sub);
  for (std::size_t n = 0; n < n_sub; ++n)
    if (std::isfinite(noise.zeta[n])) finite.push_back(n);
  if (finite.empty()) throw EmptySupport("every effective-noise entry is infinite");

  WaterfillResult res;
  res.power.assign(n_sub, 0.0);

  if (target == 0.0) {
    double zmin = kInf;
    for (std::size_t n : finite) zmin = std::min(zmin, noise.zeta[n]);
    res.level = 1.0 / zmin;
    res.active_budget = false;
    return res;
  }

  std::sort(finite.begin(), finite.end(),
            [&](std::size_t a, std::size_t b) { return noise.zeta[a] < noise.zeta[b]; });

  // Largest active set m with water height (target + sum of the m smallest
  // zeta) / m strictly above the m-th smallest zeta.
  double prefix = 0.0;
  double height = 0.0;
  for (std::size_t m = 1; m <= finite.size(); ++m) {
    prefix += noise.zeta[finite[m - 1]];
    const double h = (target + prefix) / static_cast<double>(m);
    if (h > noise.zeta[finite[m - 1]]) height = h;
  }

  for (std::size_t n : finite) res.power[n] = std::max(0.0, height - noise.zeta[n]);
  res.level = 1.0 / height;
  res.active_budget = true;
  return res;
}

WaterfillResult waterfill_priced(const EffectiveNoise& noise, double price, double budget) {
  if (price > 0.0) {
    std::vector<double> unconstrained = waterfill(noise, price);
    const double total = std::accumulate(unconstrained.begin(), unconstrained.end(), 0.0);
    if (total < budget) {
      WaterfillResult res;
      res.power = std::move(unconstrained);
      res.level = price;
      res.active_budget = false;
      return res;
    }
  }
  return level_for_budget(noise, budget);
}

std::vector<double> project_simplex(std::span<const double> z, double mass) {
  if (!(mass >= 0.0)) throw std::invalid_argument("simplex mass must be nonnegative");
  std::vector<double> x(z.size(), 0.0);
  if (mass == 0.0) return x;

  std::vector<double> u;
  u.reserve(z.size());
  for (double v : z)
    if (std::isfinite(v)) u.push_back(v);
  if (u.empty()) throw std::invalid_argument("projection needs at least one finite coordinate");
  std::sort(u.begin(), u.end(), std::greater<>());

  // Michelot pivot: largest prefix whose shifted entries stay positive.
  double css = 0.0;
  double css_at_rho = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 1; j <= u.size(); ++j) {
    css += u[j - 1];
    if (u[j - 1] + (mass - css) / static_cast<double>(j) > 0.0) {
      rho = j;
      css_at_rho = css;
    }
  }
  const double theta = (css_at_rho - mass) / static_cast<double>(rho);
  for (std::size_t n = 0; n < z.size(); ++n)
    if (std::isfinite(z[n])) x[n] = std::max(z[n] - theta, 0.0);
  return x;
}

std::vector<double> best_response_rate(const GameInstance& inst, const DerivedCoefficients& dc,
                                       int k, const PowerProfile& p) {
  return level_for_budget(effective_noise(dc, k, p), inst.budget[static_cast<std::size_t>(k)])
      .power;
}

std::vector<double> best_response_rate(const GameInstance& inst, int k, const PowerProfile& p) {
  return best_response_rate(inst, derive_coefficients(inst), k, p);
}

double rate_on(const EffectiveNoise& noise, std::span<const double> own) {
  double sum = 0.0;
  for (std::size_t n = 0; n < noise.zeta.size(); ++n)
    if (std::isfinite(noise.zeta[n])) sum += std::log1p(own[n] / noise.zeta[n]);
  return sum;
}

}  // namespace qvipower
