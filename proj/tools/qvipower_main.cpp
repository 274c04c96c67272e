#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qvipower/analysis.hpp"
#include "qvipower/dinkelbach.hpp"
#include "qvipower/errors.hpp"
#include "qvipower/experiment.hpp"
#include "qvipower/json_io.hpp"
#include "qvipower/log.hpp"
#include "qvipower/oracles.hpp"
#include "qvipower/solvers.hpp"
#include "qvipower/waterfill.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNonConvergence = 2;

using qvipower::EffectiveNoise;
using qvipower::GameInstance;
using qvipower::PowerProfile;
using qvipower::SolveResult;
using qvipower::SolverConfig;

std::vector<double> parse_list(const std::string& csv, const char* name) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw qvipower::InvalidInstance(name, "cannot parse \"" + item + "\" as a number");
    }
  }
  if (out.empty()) throw qvipower::InvalidInstance(name, "empty list");
  return out;
}

struct SolveArgs {
  std::string instance_path;
  std::string solver = "both";
  std::string out_dir = ".";
  std::optional<double> eps;
  std::optional<double> inner_eps;
  std::optional<double> dinkelbach_eps;
  std::optional<int> max_iter;
  std::optional<double> tau;
  std::string step_rule;
  std::uint64_t seed = 0;
};

nlohmann::json profile_json(const PowerProfile& p) {
  auto rows = nlohmann::json::array();
  for (int k = 0; k < p.K; ++k) {
    auto row = nlohmann::json::array();
    for (double v : p.player(k)) row.push_back(v);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json solver_result_json(const GameInstance& inst, const SolveResult& res) {
  nlohmann::json j;
  j["converged"] = res.trace.converged;
  j["iterations"] = res.trace.iterations;
  j["final_residual"] = res.trace.final_residual;
  j["profile"] = profile_json(res.profile);
  auto rates = nlohmann::json::array();
  auto ees = nlohmann::json::array();
  auto totals = nlohmann::json::array();
  for (int k = 0; k < inst.K; ++k) {
    rates.push_back(qvipower::rate(inst, k, res.profile));
    ees.push_back(qvipower::energy_efficiency(inst, k, res.profile));
    totals.push_back(res.profile.total(k));
  }
  j["rate"] = rates;
  j["ee"] = ees;
  j["total_power"] = totals;
  j["ne_residual"] = qvipower::ne_residual(inst, res.profile);
  return j;
}

int cmd_solve(const SolveArgs& args) {
  const GameInstance inst = qvipower::load_instance(args.instance_path);

  SolverConfig cfg;
  cfg.seed = args.seed;
  if (args.eps) cfg.outer_eps = *args.eps;
  if (args.inner_eps) cfg.inner_eps = *args.inner_eps;
  if (args.dinkelbach_eps) cfg.dinkelbach_eps = *args.dinkelbach_eps;
  if (args.max_iter) {
    cfg.max_outer_ncp = *args.max_iter;
    cfg.max_outer_spa = *args.max_iter;
  }
  if (args.tau) cfg.tau_override = *args.tau;
  if (args.step_rule == "fixed") cfg.step_rule = qvipower::StepRule::FixedTwoKappa;
  if (args.step_rule == "adaptive") cfg.step_rule = qvipower::StepRule::AdaptiveTwoKappa;

  const std::filesystem::path out_dir(args.out_dir);
  std::filesystem::create_directories(out_dir);

  nlohmann::json summary;
  summary["instance"] = args.instance_path;
  summary["seed"] = cfg.seed;
  bool all_converged = true;

  std::optional<SolveResult> spa;
  std::optional<SolveResult> ncp;
  if (args.solver == "spa" || args.solver == "both") {
    spa = qvipower::spa_solve(inst, cfg);
    qvipower::save_trace_csv(spa->trace, out_dir / "trace_spa.csv");
    summary["spa"] = solver_result_json(inst, *spa);
    all_converged = all_converged && spa->trace.converged;
  }
  if (args.solver == "ncp" || args.solver == "both") {
    ncp = qvipower::ncp_solve(inst, cfg);
    qvipower::save_trace_csv(ncp->trace, out_dir / "trace_ncp.csv");
    summary["ncp"] = solver_result_json(inst, *ncp);
    all_converged = all_converged && ncp->trace.converged;
  }
  if (spa && ncp)
    summary["agreement_distance"] = qvipower::rel_inf_distance(ncp->profile, spa->profile);

  qvipower::write_text_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << std::endl;
  return all_converged ? kExitOk : kExitNonConvergence;
}

int cmd_analyze(const std::string& instance_path, const std::string& out_path, int samples,
                std::uint64_t seed, const std::string& weights_csv) {
  const GameInstance inst = qvipower::load_instance(instance_path);
  qvipower::AnalyzeOptions opt;
  opt.sample_count = samples;
  opt.seed = seed;
  if (!weights_csv.empty()) opt.weights = parse_list(weights_csv, "weights");
  const qvipower::UniquenessReport rep = qvipower::analyze(inst, opt);
  const std::string text = qvipower::report_to_json(rep);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    qvipower::write_text_atomic(out_path, text);
  }
  return kExitOk;
}

int cmd_experiment(const std::string& spec_path, const std::string& out_dir,
                   std::optional<int> jobs, std::optional<std::uint64_t> seed) {
  qvipower::ExperimentSpec spec = qvipower::load_experiment_spec(spec_path);
  if (jobs) spec.jobs = *jobs;
  if (seed) spec.seed = *seed;
  spec.validate();
  qvipower::run_experiment_to_dir(spec, out_dir.empty() ? spec.out_dir : out_dir);
  return kExitOk;
}

void print_vector(const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) std::printf(i ? " %.12g" : "%.12g", v[i]);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nash-equilibrium solvers for heterogeneous rate/energy-efficiency "
               "power allocation games on parallel Gaussian interference channels"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Run the SPA and/or NCP solver on an instance");
  solve->add_option("--instance", solve_args.instance_path, "Instance JSON file")
      ->required();
  solve->add_option("--solver", solve_args.solver, "Solver selection")
      ->check(CLI::IsMember({"spa", "ncp", "both"}));
  solve->add_option("--out", solve_args.out_dir, "Output directory");
  double eps = 0, ieps = 0, deps = 0, tau = 0;
  int max_iter = 0;
  solve->add_option("--eps", eps, "Outer tolerance")->each([&](const std::string&) {
    solve_args.eps = eps;
  });
  solve->add_option("--inner-eps", ieps, "Inner sweep tolerance")->each([&](const std::string&) {
    solve_args.inner_eps = ieps;
  });
  solve->add_option("--dinkelbach-eps", deps, "Dinkelbach tolerance")
      ->each([&](const std::string&) { solve_args.dinkelbach_eps = deps; });
  solve->add_option("--max-iter", max_iter, "Outer iteration cap")
      ->each([&](const std::string&) { solve_args.max_iter = max_iter; });
  solve->add_option("--tau", tau, "Fixed NCP outer step instead of 2*kappa")
      ->each([&](const std::string&) { solve_args.tau = tau; });
  solve->add_option("--step-rule", solve_args.step_rule, "NCP step rule")
      ->check(CLI::IsMember({"fixed", "adaptive"}));
  solve->add_option("--seed", solve_args.seed, "Seed recorded with outputs");

  std::string an_instance, an_out, an_weights;
  int an_samples = 200;
  std::uint64_t an_seed = 0;
  auto* analyze = app.add_subcommand("analyze", "Write the uniqueness-certificate report");
  analyze->add_option("--instance", an_instance, "Instance JSON file")->required();
  analyze->add_option("--out", an_out, "Report path (stdout when omitted)");
  analyze->add_option("--samples", an_samples, "Profile pairs sampled for delta_hat");
  analyze->add_option("--seed", an_seed, "Sampling seed");
  analyze->add_option("--weights", an_weights, "Comma-separated positive weights for the dominance tests");

  std::string ex_spec, ex_out;
  int ex_jobs = 0;
  std::uint64_t ex_seed = 0;
  bool ex_seed_set = false, ex_jobs_set = false;
  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo sweep from a spec file");
  experiment->add_option("--spec", ex_spec, "Experiment spec JSON file")->required();
  experiment->add_option("--out", ex_out, "Output directory (default: the spec's out_dir)");
  experiment->add_option("--jobs", ex_jobs, "Worker threads (overrides the spec)")
      ->each([&](const std::string&) { ex_jobs_set = true; });
  experiment->add_option("--seed", ex_seed, "Master seed (overrides the spec)")
      ->each([&](const std::string&) { ex_seed_set = true; });

  auto* oracle = app.add_subcommand(
      "oracle", "Brute-force reference oracles (regenerate derived expected values)");
  oracle->require_subcommand(1);

  std::string wb_zeta;
  double wb_target = 0.0;
  auto* wb = oracle->add_subcommand("waterfill-bisect", "Water level by bisection");
  wb->add_option("--zeta", wb_zeta, "Comma-separated effective noise")->required();
  wb->add_option("--target", wb_target, "Power target")->required();

  std::string pg_z;
  double pg_mass = 0.0, pg_step = 1e-4;
  auto* pg = oracle->add_subcommand("project-grid", "Simplex projection by dense grid (N=2)");
  pg->add_option("--z", pg_z, "Comma-separated point to project")->required();
  pg->add_option("--mass", pg_mass, "Simplex mass")->required();
  pg->add_option("--step", pg_step, "Grid step");

  std::string br_instance;
  int br_player = 0, br_steps = 2000;
  bool br_ee = false;
  auto* br = oracle->add_subcommand("best-response-grid", "Grid-search best response (N=2)");
  br->add_option("--instance", br_instance, "Instance JSON file")->required();
  br->add_option("--player", br_player, "Player index")->required();
  br->add_flag("--ee", br_ee, "Maximize energy efficiency instead of rate");
  br->add_option("--steps", br_steps, "Grid steps per dimension");

  std::string ge_zeta;
  double ge_circuit = 1.0, ge_hi = 100.0;
  auto* ge = oracle->add_subcommand("golden-ee", "Unconstrained EE optimum by golden section");
  ge->add_option("--zeta", ge_zeta, "Comma-separated effective noise")->required();
  ge->add_option("--circuit", ge_circuit, "Circuit power");
  ge->add_option("--hi", ge_hi, "Upper bound on total radiated power");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_args);
    if (analyze->parsed()) return cmd_analyze(an_instance, an_out, an_samples, an_seed, an_weights);
    if (experiment->parsed())
      return cmd_experiment(ex_spec, ex_out,
                            ex_jobs_set ? std::optional<int>(ex_jobs) : std::nullopt,
                            ex_seed_set ? std::optional<std::uint64_t>(ex_seed) : std::nullopt);
    if (wb->parsed()) {
      const EffectiveNoise noise{parse_list(wb_zeta, "zeta")};
      const auto res = qvipower::oracle::bisect_level(noise, wb_target);
      std::printf("level %.12g\n", res.level);
      print_vector(res.power);
      return kExitOk;
    }
    if (pg->parsed()) {
      const auto z = parse_list(pg_z, "z");
      print_vector(qvipower::oracle::grid_project_simplex(z, pg_mass, pg_step));
      return kExitOk;
    }
    if (br->parsed()) {
      const GameInstance inst = qvipower::load_instance(br_instance);
      if (br_player < 0 || br_player >= inst.K)
        throw qvipower::InvalidInstance("player", "index out of range");
      const PowerProfile p = PowerProfile::uniform(inst);
      print_vector(qvipower::oracle::grid_best_response(inst, br_player, p, br_ee, br_steps));
      return kExitOk;
    }
    if (ge->parsed()) {
      const EffectiveNoise noise{parse_list(ge_zeta, "zeta")};
      const auto res = qvipower::oracle::golden_section_ee(noise, ge_circuit, ge_hi);
      std::printf("nu %.12g\ntotal %.12g\n", res.nu, res.total_power);
      print_vector(res.power);
      return kExitOk;
    }
  } catch (const qvipower::NonConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
