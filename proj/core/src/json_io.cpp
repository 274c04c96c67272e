#include "qvipower/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qvipower {

namespace {

using nlohmann::json;

const json& require_field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw InvalidInstance(name, "missing required field");
  return *it;
}

template <typename T>
T field_as(const json& j, const char* name) {
  try {
    return require_field(j, name).get<T>();
  } catch (const json::exception& e) {
    throw InvalidInstance(name, std::string("unreadable: ") + e.what());
  }
}

Role role_from_string(const std::string& s) {
  if (s == "RATE") return Role::Rate;
  if (s == "EE") return Role::Ee;
  throw InvalidInstance("role", "entries must be \"RATE\" or \"EE\", got \"" + s + "\"");
}

/// Accepts a scalar (broadcast) or a K-vector.
std::vector<double> per_player(const json& j, const char* name, int K) {
  const json& f = require_field(j, name);
  std::vector<double> out;
  try {
    if (f.is_number()) {
      out.assign(static_cast<std::size_t>(K), f.get<double>());
    } else {
      out = f.get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw InvalidInstance(name, std::string("unreadable: ") + e.what());
  }
  return out;
}

json solver_config_to_json(const SolverConfig& cfg) {
  json j;
  j["outer_eps"] = cfg.outer_eps;
  j["inner_eps"] = cfg.inner_eps;
  j["dinkelbach_eps"] = cfg.dinkelbach_eps;
  j["phi_feasibility_tol"] = cfg.phi_feasibility_tol;
  j["max_outer_ncp"] = cfg.max_outer_ncp;
  j["max_outer_spa"] = cfg.max_outer_spa;
  j["max_sweeps"] = cfg.max_sweeps;
  j["rho0"] = cfg.rho0;
  j["rho_growth"] = cfg.rho_growth;
  j["alpha"] = cfg.alpha;
  j["step_rule"] = cfg.step_rule == StepRule::FixedTwoKappa ? "fixed" : "adaptive";
  if (cfg.tau_override) j["tau"] = *cfg.tau_override;
  return j;
}

void solver_config_from_json(const json& j, const char* name, SolverConfig& cfg) {
  if (!j.contains(name)) return;
  const json& s = j.at(name);
  if (!s.is_object()) throw InvalidInstance(name, "must be an object");
  if (s.contains("outer_eps")) cfg.outer_eps = s.at("outer_eps").get<double>();
  if (s.contains("inner_eps")) cfg.inner_eps = s.at("inner_eps").get<double>();
  if (s.contains("dinkelbach_eps")) cfg.dinkelbach_eps = s.at("dinkelbach_eps").get<double>();
  if (s.contains("phi_feasibility_tol"))
    cfg.phi_feasibility_tol = s.at("phi_feasibility_tol").get<double>();
  if (s.contains("max_outer_ncp")) cfg.max_outer_ncp = s.at("max_outer_ncp").get<int>();
  if (s.contains("max_outer_spa")) cfg.max_outer_spa = s.at("max_outer_spa").get<int>();
  if (s.contains("max_sweeps")) cfg.max_sweeps = s.at("max_sweeps").get<int>();
  if (s.contains("rho0")) cfg.rho0 = s.at("rho0").get<double>();
  if (s.contains("rho_growth")) cfg.rho_growth = s.at("rho_growth").get<double>();
  if (s.contains("alpha")) cfg.alpha = s.at("alpha").get<double>();
  if (s.contains("step_rule")) {
    const std::string rule = s.at("step_rule").get<std::string>();
    if (rule == "fixed") cfg.step_rule = StepRule::FixedTwoKappa;
    else if (rule == "adaptive") cfg.step_rule = StepRule::AdaptiveTwoKappa;
    else throw InvalidInstance(name, "step_rule must be \"fixed\" or \"adaptive\"");
  }
  if (s.contains("tau")) cfg.tau_override = s.at("tau").get<double>();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

GameInstance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInstance("document", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInstance("document", "top level must be an object");

  GameInstance inst;
  inst.K = field_as<int>(j, "K");
  inst.N = field_as<int>(j, "N");
  if (inst.K < 1) throw InvalidInstance("K", "must be a positive integer");
  if (inst.N < 1) throw InvalidInstance("N", "must be a positive integer");

  const auto gains = field_as<std::vector<std::vector<std::vector<double>>>>(j, "gain2");
  if (gains.size() != static_cast<std::size_t>(inst.K))
    throw InvalidInstance("gain2", "must have K outer entries (k, i, n order)");
  inst.gain2.reserve(static_cast<std::size_t>(inst.K) * inst.K * inst.N);
  for (const auto& per_k : gains) {
    if (per_k.size() != static_cast<std::size_t>(inst.K))
      throw InvalidInstance("gain2", "each receiver block must have K transmitter rows");
    for (const auto& per_i : per_k) {
      if (per_i.size() != static_cast<std::size_t>(inst.N))
        throw InvalidInstance("gain2", "each row must have N entries");
      inst.gain2.insert(inst.gain2.end(), per_i.begin(), per_i.end());
    }
  }

  const auto noises = field_as<std::vector<std::vector<double>>>(j, "noise2");
  if (noises.size() != static_cast<std::size_t>(inst.K))
    throw InvalidInstance("noise2", "must have K rows");
  for (const auto& per_k : noises) {
    if (per_k.size() != static_cast<std::size_t>(inst.N))
      throw InvalidInstance("noise2", "each row must have N entries");
    inst.noise2.insert(inst.noise2.end(), per_k.begin(), per_k.end());
  }

  inst.budget = field_as<std::vector<double>>(j, "budget");
  inst.circuit = field_as<std::vector<double>>(j, "circuit");
  const auto roles = field_as<std::vector<std::string>>(j, "role");
  if (roles.size() != static_cast<std::size_t>(inst.K))
    throw InvalidInstance("role", "must have K entries");
  for (const std::string& r : roles) inst.role.push_back(role_from_string(r));

  inst.validate();
  return inst;
}

std::string instance_to_json(const GameInstance& inst, int indent) {
  json j;
  j["K"] = inst.K;
  j["N"] = inst.N;
  auto gains = json::array();
  for (int k = 0; k < inst.K; ++k) {
    auto per_k = json::array();
    for (int i = 0; i < inst.K; ++i) {
      auto per_i = json::array();
      for (int n = 0; n < inst.N; ++n) per_i.push_back(inst.gain(k, i, n));
      per_k.push_back(per_i);
    }
    gains.push_back(per_k);
  }
  j["gain2"] = gains;
  auto noises = json::array();
  for (int k = 0; k < inst.K; ++k) {
    auto per_k = json::array();
    for (int n = 0; n < inst.N; ++n) per_k.push_back(inst.noise(k, n));
    noises.push_back(per_k);
  }
  j["noise2"] = noises;
  j["budget"] = inst.budget;
  j["circuit"] = inst.circuit;
  auto roles = json::array();
  for (Role r : inst.role) roles.push_back(r == Role::Rate ? "RATE" : "EE");
  j["role"] = roles;
  return j.dump(indent) + "\n";
}

GameInstance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_text(path));
}

void save_instance(const GameInstance& inst, const std::filesystem::path& path) {
  write_text_atomic(path, instance_to_json(inst));
}

std::string report_to_json(const UniquenessReport& report, int indent) {
  json j;
  auto matrix = [](const Eigen::MatrixXd& m) {
    auto rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      auto row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    return rows;
  };
  j["A"] = matrix(report.A);
  j["B"] = matrix(report.B);
  j["lambda_min_Bsym"] = report.lambda_min_Bsym;
  j["L"] = report.L;
  j["beta"] = report.beta;
  j["Gamma"] = report.Gamma;
  j["kappa"] = report.kappa;
  j["delta_hat"] = report.delta_hat;
  j["B_positive_definite"] = report.B_positive_definite;
  j["uniqueness_certified"] = report.uniqueness_certified;
  j["dd_row_ok"] = report.dd_row_ok;
  j["dd_col_ok"] = report.dd_col_ok;
  return j.dump(indent) + "\n";
}

ExperimentSpec experiment_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInstance("document", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInstance("document", "top level must be an object");

  ExperimentSpec spec;
  spec.K = field_as<int>(j, "K");
  spec.N = field_as<int>(j, "N");
  if (spec.K < 1) throw InvalidInstance("K", "must be a positive integer");
  if (spec.N < 1) throw InvalidInstance("N", "must be a positive integer");

  const auto roles = field_as<std::vector<std::string>>(j, "roles");
  for (const std::string& r : roles) spec.roles.push_back(role_from_string(r));

  const json& snr = require_field(j, "snr_db");
  try {
    if (snr.is_number()) {
      spec.snr_db.assign(static_cast<std::size_t>(spec.K) * spec.N, snr.get<double>());
    } else {
      const auto rows = snr.get<std::vector<std::vector<double>>>();
      for (const auto& row : rows) spec.snr_db.insert(spec.snr_db.end(), row.begin(), row.end());
    }
  } catch (const json::exception& e) {
    throw InvalidInstance("snr_db", std::string("unreadable: ") + e.what());
  }

  spec.sir_grid_db = field_as<std::vector<double>>(j, "sir_grid_db");
  spec.trials = field_as<int>(j, "trials");
  spec.budget = per_player(j, "budget", spec.K);
  spec.circuit = per_player(j, "circuit", spec.K);
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("agreement_tol")) spec.agreement_tol = j.at("agreement_tol").get<double>();
  if (j.contains("dynamics_sir_db")) spec.dynamics_sir_db = j.at("dynamics_sir_db").get<double>();
  if (j.contains("jobs")) spec.jobs = j.at("jobs").get<int>();
  if (j.contains("out_dir")) spec.out_dir = j.at("out_dir").get<std::string>();
  solver_config_from_json(j, "ncp", spec.ncp);
  solver_config_from_json(j, "spa", spec.spa);

  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  return experiment_spec_from_json(read_text(path));
}

std::string experiment_spec_to_json(const ExperimentSpec& spec, int indent) {
  json j;
  j["K"] = spec.K;
  j["N"] = spec.N;
  auto roles = json::array();
  for (Role r : spec.roles) roles.push_back(r == Role::Rate ? "RATE" : "EE");
  j["roles"] = roles;
  auto snr = json::array();
  for (int k = 0; k < spec.K; ++k) {
    auto row = json::array();
    for (int n = 0; n < spec.N; ++n) row.push_back(spec.snr_at(k, n));
    snr.push_back(row);
  }
  j["snr_db"] = snr;
  j["sir_grid_db"] = spec.sir_grid_db;
  j["trials"] = spec.trials;
  j["budget"] = spec.budget;
  j["circuit"] = spec.circuit;
  j["seed"] = spec.seed;
  j["agreement_tol"] = spec.agreement_tol;
  if (spec.dynamics_sir_db) j["dynamics_sir_db"] = *spec.dynamics_sir_db;
  j["out_dir"] = spec.out_dir;
  // jobs is execution machinery, not part of the experiment's identity, and is
  // deliberately left out so summaries from parallel and serial runs match.
  j["ncp"] = solver_config_to_json(spec.ncp);
  j["spa"] = solver_config_to_json(spec.spa);
  return j.dump(indent) + "\n";
}

std::string trace_to_csv(const SolverTrace& trace) {
  std::string text = "iter,k,sum_power_k,rate_k,ee_k,gamma_k,phi_k,residual\n";
  for (const TraceRow& row : trace.rows) {
    text += std::to_string(row.iteration) + "," + std::to_string(row.player) + "," +
            fmt(row.sum_power) + "," + fmt(row.rate) + "," + fmt(row.ee) + "," + fmt(row.price) +
            "," + fmt(row.phi) + "," + fmt(row.residual) + "\n";
  }
  return text;
}

void save_trace_csv(const SolverTrace& trace, const std::filesystem::path& path) {
  write_text_atomic(path, trace_to_csv(trace));
}

std::string trace_summary_json(const SolverTrace& trace, int indent) {
  json j;
  j["converged"] = trace.converged;
  j["iterations"] = trace.iterations;
  j["final_residual"] = trace.final_residual;
  return j.dump(indent) + "\n";
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInstance(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qvipower
