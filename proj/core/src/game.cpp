#include "qvipower/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qvipower {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string entry_tag(int k, int n) {
  return " (player " + std::to_string(k) + ", subchannel " + std::to_string(n) + ")";
}
}  // namespace

std::vector<int> GameInstance::players_with(Role r) const {
  std::vector<int> out;
  for (int k = 0; k < K; ++k)
    if (role[static_cast<std::size_t>(k)] == r) out.push_back(k);
  return out;
}

int GameInstance::count_role(Role r) const {
  return static_cast<int>(std::count(role.begin(), role.end(), r));
}

GameInstance GameInstance::zeros(int K, int N) {
  GameInstance inst;
  inst.K = K;
  inst.N = N;
  inst.gain2.assign(static_cast<std::size_t>(K) * K * N, 0.0);
  inst.noise2.assign(static_cast<std::size_t>(K) * N, 0.0);
  inst.budget.assign(static_cast<std::size_t>(K), 0.0);
  inst.circuit.assign(static_cast<std::size_t>(K), 0.0);
  inst.role.assign(static_cast<std::size_t>(K), Role::Rate);
  return inst;
}

void GameInstance::validate() const {
  if (K < 1) throw InvalidInstance("K", "must be a positive integer");
  if (N < 1) throw InvalidInstance("N", "must be a positive integer");
  if (gain2.size() != static_cast<std::size_t>(K) * K * N)
    throw InvalidInstance("gain2", "must have K*K*N entries");
  if (noise2.size() != static_cast<std::size_t>(K) * N)
    throw InvalidInstance("noise2", "must have K*N entries");
  if (budget.size() != static_cast<std::size_t>(K))
    throw InvalidInstance("budget", "must have K entries");
  if (circuit.size() != static_cast<std::size_t>(K))
    throw InvalidInstance("circuit", "must have K entries");
  if (role.size() != static_cast<std::size_t>(K))
    throw InvalidInstance("role", "must have K entries");

  for (double g : gain2)
    if (!(g >= 0.0) || !std::isfinite(g))
      throw InvalidInstance("gain2", "entries must be finite and nonnegative");
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n)
      if (!(noise(k, n) > 0.0) || !std::isfinite(noise(k, n)))
        throw InvalidInstance("noise2", "entries must be strictly positive" + entry_tag(k, n));
  for (int k = 0; k < K; ++k) {
    if (!(budget[static_cast<std::size_t>(k)] > 0.0) ||
        !std::isfinite(budget[static_cast<std::size_t>(k)]))
      throw InvalidInstance("budget", "entries must be strictly positive (player " +
                                          std::to_string(k) + ")");
    if (!(circuit[static_cast<std::size_t>(k)] > 0.0) ||
        !std::isfinite(circuit[static_cast<std::size_t>(k)]))
      throw InvalidInstance("circuit", "entries must be strictly positive (player " +
                                           std::to_string(k) + ")");
  }
  for (int k = 0; k < K; ++k) {
    bool any_direct = false;
    for (int n = 0; n < N; ++n)
      if (gain(k, k, n) > 0.0) {
        any_direct = true;
        break;
      }
    if (!any_direct)
      throw DegenerateChannel("player " + std::to_string(k) +
                              " has zero direct gain on every subchannel");
  }
}

PowerProfile PowerProfile::zeros(int K, int N) {
  PowerProfile p;
  p.K = K;
  p.N = N;
  p.data.assign(static_cast<std::size_t>(K) * N, 0.0);
  return p;
}

PowerProfile PowerProfile::uniform(const GameInstance& inst) {
  PowerProfile p = zeros(inst.K, inst.N);
  for (int k = 0; k < inst.K; ++k) {
    const double share = inst.budget[static_cast<std::size_t>(k)] / inst.N;
    for (double& v : p.player(k)) v = share;
  }
  return p;
}

void PowerProfile::set_player(int k, std::span<const double> values) {
  std::copy(values.begin(), values.end(), player(k).begin());
}

double PowerProfile::total(int k) const {
  double s = 0.0;
  for (double v : player(k)) s += v;
  return s;
}

bool PowerProfile::feasible(const GameInstance& inst, double tol) const {
  for (double v : data)
    if (v < -tol) return false;
  for (int k = 0; k < K; ++k)
    if (total(k) > inst.budget[static_cast<std::size_t>(k)] + tol) return false;
  return true;
}

DerivedCoefficients derive_coefficients(const GameInstance& inst) {
  inst.validate();
  DerivedCoefficients dc;
  dc.K = inst.K;
  dc.N = inst.N;
  dc.xi.assign(static_cast<std::size_t>(inst.K) * inst.N, 0.0);
  dc.D.assign(static_cast<std::size_t>(inst.K) * inst.K * inst.N, 0.0);
  for (int k = 0; k < inst.K; ++k) {
    for (int n = 0; n < inst.N; ++n) {
      const double direct = inst.gain(k, k, n);
      if (direct > 0.0) {
        dc.xi[static_cast<std::size_t>(k) * inst.N + n] = inst.noise(k, n) / direct;
        for (int i = 0; i < inst.K; ++i)
          dc.D[(static_cast<std::size_t>(k) * inst.K + i) * inst.N + n] =
              (i == k) ? 1.0 : inst.gain(k, i, n) / direct;
      } else {
        // Dead subchannel: xi sentinel, cross ratios irrelevant (never active).
        dc.xi[static_cast<std::size_t>(k) * inst.N + n] = kInf;
        dc.D[(static_cast<std::size_t>(k) * inst.K + k) * inst.N + n] = 1.0;
      }
    }
  }
  return dc;
}

double rate(const GameInstance& inst, int k, const PowerProfile& p) {
  double sum = 0.0;
  for (int n = 0; n < inst.N; ++n) {
    const double direct = inst.gain(k, k, n);
    if (direct <= 0.0) continue;
    double denom = inst.noise(k, n);
    for (int i = 0; i < inst.K; ++i)
      if (i != k) denom += inst.gain(k, i, n) * p.player(i)[static_cast<std::size_t>(n)];
    sum += std::log1p(direct * p.player(k)[static_cast<std::size_t>(n)] / denom);
  }
  return sum;
}

double energy_efficiency(const GameInstance& inst, int k, const PowerProfile& p) {
  return rate(inst, k, p) / (inst.circuit[static_cast<std::size_t>(k)] + p.total(k));
}

std::vector<double> mapping_F(const GameInstance& inst, const DerivedCoefficients& dc,
                              const PowerProfile& p) {
  std::vector<double> F(static_cast<std::size_t>(inst.K) * inst.N, 0.0);
  for (int k = 0; k < inst.K; ++k) {
    for (int n = 0; n < inst.N; ++n) {
      double denom = dc.xi_at(k, n);
      for (int i = 0; i < inst.K; ++i)
        denom += dc.D_at(k, i, n) * p.player(i)[static_cast<std::size_t>(n)];
      F[static_cast<std::size_t>(k) * inst.N + n] = -1.0 / denom + 0.0;
    }
  }
  return F;
}

std::vector<double> mapping_F(const GameInstance& inst, const PowerProfile& p) {
  return mapping_F(inst, derive_coefficients(inst), p);
}

SigmaFactors sigma_factors(const GameInstance& inst) {
  inst.validate();
  SigmaFactors sf;
  sf.K = inst.K;
  sf.N = inst.N;
  sf.varsigma.assign(static_cast<std::size_t>(inst.K) * inst.K * inst.N, 0.0);
  sf.varsigma_tilde.assign(static_cast<std::size_t>(inst.K) * inst.N, 0.0);
  const DerivedCoefficients dc = derive_coefficients(inst);
  for (int k = 0; k < inst.K; ++k) {
    for (int i = 0; i < inst.K; ++i) {
      for (int n = 0; n < inst.N; ++n) {
        double received = inst.noise(i, n);
        for (int l = 0; l < inst.K; ++l)
          received += inst.gain(i, l, n) * inst.budget[static_cast<std::size_t>(l)];
        sf.varsigma[(static_cast<std::size_t>(k) * inst.K + i) * inst.N + n] =
            received / inst.noise(k, n);
      }
    }
    for (int n = 0; n < inst.N; ++n) {
      double v = dc.xi_at(k, n);
      for (int i = 0; i < inst.K; ++i)
        v += dc.D_at(k, i, n) * inst.budget[static_cast<std::size_t>(i)];
      sf.varsigma_tilde[static_cast<std::size_t>(k) * inst.N + n] = v;
    }
  }
  return sf;
}

}  // namespace qvipower
