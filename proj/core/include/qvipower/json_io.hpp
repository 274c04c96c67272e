#pragma once

#include <filesystem>
#include <string>

#include "qvipower/analysis.hpp"
#include "qvipower/experiment.hpp"
#include "qvipower/game.hpp"
#include "qvipower/solvers.hpp"

namespace qvipower {

/// GameInstance wire format (field names are part of the contract):
/// {"K":int, "N":int, "gain2":[[[...]]] in (k,i,n) order, "noise2":[[...]],
///  "budget":[...], "circuit":[...], "role":["RATE"|"EE",...]}
GameInstance instance_from_json(const std::string& text);
std::string instance_to_json(const GameInstance& inst, int indent = 2);
GameInstance load_instance(const std::filesystem::path& path);
void save_instance(const GameInstance& inst, const std::filesystem::path& path);

std::string report_to_json(const UniquenessReport& report, int indent = 2);

ExperimentSpec experiment_spec_from_json(const std::string& text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
std::string experiment_spec_to_json(const ExperimentSpec& spec, int indent = 2);

/// Trace CSV: one row per (outer iteration, player) with columns
/// iter,k,sum_power_k,rate_k,ee_k,gamma_k,phi_k,residual.
std::string trace_to_csv(const SolverTrace& trace);
void save_trace_csv(const SolverTrace& trace, const std::filesystem::path& path);

/// {"converged":bool, "iterations":int, "final_residual":float}
std::string trace_summary_json(const SolverTrace& trace, int indent = 2);

/// Writes text via a temporary file in the same directory plus rename, so an
/// interrupted run never leaves a truncated file behind.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace qvipower
