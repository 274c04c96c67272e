#include "qvipower/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <thread>

#include <json.hpp>

#include "qvipower/json_io.hpp"
#include "qvipower/log.hpp"
#include "qvipower/rng.hpp"

namespace qvipower {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

const char* role_name(Role r) { return r == Role::Rate ? "RATE" : "EE"; }

void append_u64(std::uint64_t& h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffULL;
    h *= 0x100000001b3ULL;  // FNV-1a
  }
}

void append_doubles(std::uint64_t& h, const std::vector<double>& v) {
  for (double d : v) append_u64(h, std::bit_cast<std::uint64_t>(d));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

void ExperimentSpec::validate() const {
  if (K < 1) throw InvalidInstance("K", "must be a positive integer");
  if (N < 1) throw InvalidInstance("N", "must be a positive integer");
  if (roles.size() != static_cast<std::size_t>(K))
    throw InvalidInstance("roles", "must have K entries");
  if (snr_db.size() != static_cast<std::size_t>(K) * N)
    throw InvalidInstance("snr_db", "must have K*N entries (scalar inputs are broadcast)");
  if (sir_grid_db.empty()) throw InvalidInstance("sir_grid_db", "must be nonempty");
  if (!std::is_sorted(sir_grid_db.begin(), sir_grid_db.end()))
    throw InvalidInstance("sir_grid_db", "must be sorted ascending");
  if (trials < 1) throw InvalidInstance("trials", "must be at least 1");
  if (budget.size() != static_cast<std::size_t>(K))
    throw InvalidInstance("budget", "must have K entries");
  if (circuit.size() != static_cast<std::size_t>(K))
    throw InvalidInstance("circuit", "must have K entries");
  for (double p : budget)
    if (!(p > 0.0)) throw InvalidInstance("budget", "entries must be strictly positive");
  for (double c : circuit)
    if (!(c > 0.0)) throw InvalidInstance("circuit", "entries must be strictly positive");
  if (!(agreement_tol > 0.0)) throw InvalidInstance("agreement_tol", "must be positive");
  if (jobs < 1) throw InvalidInstance("jobs", "must be at least 1");
}

ExperimentSpec ExperimentSpec::section_vi_default() {
  ExperimentSpec spec;
  spec.K = 8;
  spec.N = 16;
  spec.roles.assign(8, Role::Rate);
  for (int k = 0; k < 4; ++k) spec.roles[static_cast<std::size_t>(k)] = Role::Ee;
  spec.snr_db.assign(static_cast<std::size_t>(spec.K) * spec.N, 0.0);
  spec.sir_grid_db = {0.0, 3.0, 6.0, 10.0, 15.0, 20.0};
  spec.trials = 50;
  spec.budget.assign(8, static_cast<double>(spec.N));
  spec.circuit.assign(8, 1.0);
  spec.seed = 1;
  spec.ncp.dinkelbach_eps = 1e-6;
  spec.spa.dinkelbach_eps = 1e-6;
  // The outer price loop moves in steps of 2*kappa, which is small on
  // heavy-tailed channels; the default cap of 500 cuts convergent runs short.
  spec.ncp.max_outer_ncp = 60000;
  return spec;
}

GameInstance sample_channel(const ExperimentSpec& spec, double sir_db, std::uint64_t trial_seed) {
  spec.validate();
  GameInstance inst = GameInstance::zeros(spec.K, spec.N);
  inst.role = spec.roles;
  inst.budget = spec.budget;
  inst.circuit = spec.circuit;

  double cross_scale = 0.0;
  if (spec.K > 1) {
    if (std::isinf(sir_db)) {
      cross_scale = 0.0;
    } else {
      const double sir_lin = std::pow(10.0, sir_db / 10.0);
      cross_scale = 1.0 / (static_cast<double>(spec.K - 1) * sir_lin);
    }
  }

  Rng rng(trial_seed);
  // Fixed (k, i, n) draw order: the fading realization is independent of the
  // SIR point, which only rescales cross-gain variances.
  for (int k = 0; k < spec.K; ++k)
    for (int i = 0; i < spec.K; ++i)
      for (int n = 0; n < spec.N; ++n) {
        const double e = rng.exponential();
        inst.gain(k, i, n) = (i == k) ? e : cross_scale * e;
      }
  for (int k = 0; k < spec.K; ++k)
    for (int n = 0; n < spec.N; ++n)
      inst.noise(k, n) = std::pow(10.0, -spec.snr_at(k, n) / 10.0);
  return inst;
}

std::string instance_digest(const GameInstance& inst) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  append_u64(h, static_cast<std::uint64_t>(inst.K));
  append_u64(h, static_cast<std::uint64_t>(inst.N));
  append_doubles(h, inst.gain2);
  append_doubles(h, inst.noise2);
  append_doubles(h, inst.budget);
  append_doubles(h, inst.circuit);
  for (Role r : inst.role) append_u64(h, r == Role::Ee ? 1 : 0);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

TrialRecord run_trial(const ExperimentSpec& spec, int sir_index, int trial) {
  TrialRecord rec;
  rec.sir_index = sir_index;
  rec.trial = trial;
  rec.seed = substream_seed(spec.seed, static_cast<std::uint64_t>(sir_index) + 1,
                            static_cast<std::uint64_t>(trial) + 1);
  try {
    const double sir_db = spec.sir_grid_db[static_cast<std::size_t>(sir_index)];
    const GameInstance inst = sample_channel(spec, sir_db, rec.seed);
    rec.instance_digest = instance_digest(inst);

    SolverConfig spa_cfg = spec.spa;
    spa_cfg.record_profiles = false;
    SolverConfig ncp_cfg = spec.ncp;
    ncp_cfg.record_profiles = false;

    const SolveResult spa = spa_solve(inst, spa_cfg);
    const SolveResult ncp = ncp_solve(inst, ncp_cfg);
    rec.spa_converged = spa.trace.converged;
    rec.spa_iterations = spa.trace.iterations;
    rec.ncp_converged = ncp.trace.converged;
    rec.ncp_iterations = ncp.trace.iterations;
    rec.spa_profile = spa.profile;
    rec.ncp_profile = ncp.profile;
    if (rec.ncp_converged && rec.spa_converged)
      rec.agreement = rel_inf_distance(ncp.profile, spa.profile);
    rec.counted_converged =
        rec.ncp_converged && rec.spa_converged && *rec.agreement <= spec.agreement_tol;

    const PowerProfile& eval = rec.ncp_converged ? ncp.profile : spa.profile;
    const PowerProfile base = PowerProfile::uniform(inst);
    rec.final_rate.resize(static_cast<std::size_t>(inst.K));
    rec.final_ee.resize(static_cast<std::size_t>(inst.K));
    rec.ee_gain_percent.resize(static_cast<std::size_t>(inst.K));
    for (int k = 0; k < inst.K; ++k) {
      rec.final_rate[static_cast<std::size_t>(k)] = rate(inst, k, eval);
      rec.final_ee[static_cast<std::size_t>(k)] = energy_efficiency(inst, k, eval);
      const double base_ee = energy_efficiency(inst, k, base);
      rec.ee_gain_percent[static_cast<std::size_t>(k)] =
          base_ee > 0.0
              ? 100.0 * (rec.final_ee[static_cast<std::size_t>(k)] - base_ee) / base_ee
              : 0.0;
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

ConvergenceResult run_convergence_probability(const ExperimentSpec& spec) {
  spec.validate();
  const int n_sir = static_cast<int>(spec.sir_grid_db.size());
  const std::size_t n_tasks = static_cast<std::size_t>(n_sir) * spec.trials;

  ConvergenceResult result;
  result.records.resize(n_tasks);

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= n_tasks) break;
      const int si = static_cast<int>(idx) / spec.trials;
      const int trial = static_cast<int>(idx) % spec.trials;
      result.records[idx] = run_trial(spec, si, trial);
    }
  };

  const int jobs = std::max(1, spec.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (int si = 0; si < n_sir; ++si) {
    ConvergenceRow row;
    row.sir_db = spec.sir_grid_db[static_cast<std::size_t>(si)];
    row.trials = spec.trials;
    std::vector<double> agreements;
    for (int t = 0; t < spec.trials; ++t) {
      const TrialRecord& rec =
          result.records[static_cast<std::size_t>(si) * spec.trials + t];
      if (rec.counted_converged) ++row.converged;
      if (rec.agreement) agreements.push_back(*rec.agreement);
    }
    row.p_c = static_cast<double>(row.converged) / spec.trials;
    row.mean_agreement = mean_of(agreements);
    result.rows.push_back(row);
  }
  return result;
}

DynamicsResult run_dynamics(const ExperimentSpec& spec, double sir_db) {
  spec.validate();
  DynamicsResult dyn;
  dyn.sir_db = sir_db;
  dyn.roles = spec.roles;

  SolverConfig cfg = spec.ncp;
  cfg.record_profiles = false;  // the per-iteration rows carry everything emitted

  for (int trial = 0; trial < spec.trials; ++trial) {
    dyn.trial = trial;
    dyn.seed = substream_seed(spec.seed, std::bit_cast<std::uint64_t>(sir_db) ^ 0xd1a17ULL,
                              static_cast<std::uint64_t>(trial) + 1);
    const GameInstance inst = sample_channel(spec, sir_db, dyn.seed);
    const SolveResult ncp = ncp_solve(inst, cfg);
    dyn.converged = ncp.trace.converged;
    dyn.trace = ncp.trace;

    const PowerProfile base = PowerProfile::uniform(inst);
    const int K = inst.K;
    dyn.baseline_rate.assign(static_cast<std::size_t>(K), 0.0);
    dyn.baseline_ee.assign(static_cast<std::size_t>(K), 0.0);
    dyn.final_rate.assign(static_cast<std::size_t>(K), 0.0);
    dyn.final_ee.assign(static_cast<std::size_t>(K), 0.0);
    dyn.ee_gain_percent.assign(static_cast<std::size_t>(K), 0.0);
    for (int k = 0; k < K; ++k) {
      dyn.baseline_rate[static_cast<std::size_t>(k)] = rate(inst, k, base);
      dyn.baseline_ee[static_cast<std::size_t>(k)] = energy_efficiency(inst, k, base);
      dyn.final_rate[static_cast<std::size_t>(k)] = rate(inst, k, ncp.profile);
      dyn.final_ee[static_cast<std::size_t>(k)] = energy_efficiency(inst, k, ncp.profile);
      const double b = dyn.baseline_ee[static_cast<std::size_t>(k)];
      dyn.ee_gain_percent[static_cast<std::size_t>(k)] =
          b > 0.0 ? 100.0 * (dyn.final_ee[static_cast<std::size_t>(k)] - b) / b : 0.0;
    }
    if (dyn.converged) break;
    log_info("run_dynamics: trial " + std::to_string(trial) + " did not converge, retrying");
  }
  return dyn;
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceRow>& rows) {
  std::string text = "sir_db,trials,converged,p_c,mean_agreement\n";
  for (const ConvergenceRow& r : rows) {
    text += fmt(r.sir_db) + "," + std::to_string(r.trials) + "," + std::to_string(r.converged) +
            "," + fmt(r.p_c) + "," + fmt(r.mean_agreement) + "\n";
  }
  write_text_atomic(path, text);
}

void write_dynamics_csv(const std::filesystem::path& path, const DynamicsResult& dyn) {
  std::string text = "iter,player,role,rate,ee,gamma\n";
  for (const TraceRow& row : dyn.trace.rows) {
    text += std::to_string(row.iteration) + "," + std::to_string(row.player) + "," +
            role_name(dyn.roles[static_cast<std::size_t>(row.player)]) + "," + fmt(row.rate) +
            "," + fmt(row.ee) + "," + fmt(row.price) + "\n";
  }
  write_text_atomic(path, text);
}

void write_plot_data(const std::filesystem::path& dir, const ConvergenceResult& conv,
                     const DynamicsResult* dyn) {
  std::string text;
  for (const ConvergenceRow& r : conv.rows) text += fmt(r.sir_db) + " " + fmt(r.p_c) + "\n";
  write_text_atomic(dir / "convergence.dat", text);

  if (dyn == nullptr) return;
  const int K = static_cast<int>(dyn->roles.size());
  for (int k = 0; k < K; ++k) {
    std::string ee_text;
    std::string se_text;
    for (const TraceRow& row : dyn->trace.rows) {
      if (row.player != k) continue;
      ee_text += std::to_string(row.iteration) + " " + fmt(row.ee) + "\n";
      se_text += std::to_string(row.iteration) + " " + fmt(row.rate) + "\n";
    }
    write_text_atomic(dir / ("ee_player" + std::to_string(k) + ".dat"), ee_text);
    write_text_atomic(dir / ("se_player" + std::to_string(k) + ".dat"), se_text);
  }
}

void write_experiment_summary(const std::filesystem::path& path, const ExperimentSpec& spec,
                              const ConvergenceResult& conv, const DynamicsResult* dyn) {
  nlohmann::json j;
  j["spec"] = nlohmann::json::parse(experiment_spec_to_json(spec));
  j["convergence"] = nlohmann::json::array();
  for (const ConvergenceRow& r : conv.rows) {
    nlohmann::json row;
    row["sir_db"] = r.sir_db;
    row["trials"] = r.trials;
    row["converged"] = r.converged;
    row["p_c"] = r.p_c;
    if (std::isfinite(r.mean_agreement)) row["mean_agreement"] = r.mean_agreement;
    j["convergence"].push_back(row);
  }
  j["trials"] = nlohmann::json::array();
  for (const TrialRecord& rec : conv.records) {
    nlohmann::json row;
    row["sir_db"] = spec.sir_grid_db[static_cast<std::size_t>(rec.sir_index)];
    row["trial"] = rec.trial;
    row["seed"] = rec.seed;
    row["instance_digest"] = rec.instance_digest;
    row["ncp_converged"] = rec.ncp_converged;
    row["ncp_iterations"] = rec.ncp_iterations;
    row["spa_converged"] = rec.spa_converged;
    row["spa_iterations"] = rec.spa_iterations;
    if (rec.agreement) row["agreement"] = *rec.agreement;
    row["counted_converged"] = rec.counted_converged;
    row["ee_gain_percent"] = rec.ee_gain_percent;
    if (!rec.error.empty()) row["error"] = rec.error;
    j["trials"].push_back(row);
  }
  if (dyn != nullptr) {
    nlohmann::json d;
    d["sir_db"] = dyn->sir_db;
    d["trial"] = dyn->trial;
    d["seed"] = dyn->seed;
    d["converged"] = dyn->converged;
    d["iterations"] = dyn->trace.iterations;
    d["baseline_rate"] = dyn->baseline_rate;
    d["baseline_ee"] = dyn->baseline_ee;
    d["final_rate"] = dyn->final_rate;
    d["final_ee"] = dyn->final_ee;
    d["ee_gain_percent"] = dyn->ee_gain_percent;
    j["dynamics"] = d;
  }
  write_text_atomic(path, j.dump(2) + "\n");
}

void run_experiment_to_dir(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::filesystem::create_directories(out_dir);
  const ConvergenceResult conv = run_convergence_probability(spec);
  write_convergence_csv(out_dir / "convergence.csv", conv.rows);

  std::optional<DynamicsResult> dyn;
  if (spec.dynamics_sir_db) {
    dyn = run_dynamics(spec, *spec.dynamics_sir_db);
    write_dynamics_csv(out_dir / "dynamics.csv", *dyn);
  }
  write_plot_data(out_dir, conv, dyn ? &*dyn : nullptr);
  write_experiment_summary(out_dir / "summary.json", spec, conv, dyn ? &*dyn : nullptr);
}

}  // namespace qvipower
