#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qvipower/json_io.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(QVIPOWER_CLI_BIN) + " " + args + " > " + out.string() +
                          " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qvipower_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kAnalyticEe =
    R"({"K":1,"N":1,"gain2":[[[1.0]]],"noise2":[[1.0]],"budget":[10.0],"circuit":[1.0],"role":["EE"]})";

const char* kUnitRate =
    R"({"K":1,"N":1,"gain2":[[[1.0]]],"noise2":[[1.0]],"budget":[1.0],"circuit":[1.0],"role":["RATE"]})";

}  // namespace

TEST_CASE("solve --solver ncp reports the analytic EE optimum") {
  const fs::path dir = fresh_dir("solve_ncp");
  write_file(dir / "inst.json", kAnalyticEe);
  const RunResult r = run_cli("solve --instance " + (dir / "inst.json").string() +
                                  " --solver ncp --out " + (dir / "out").string(),
                              dir);
  CHECK(r.exit_code == 0);
  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  const double p = summary["ncp"]["profile"][0][0].get<double>();
  CHECK(std::abs(p - (std::exp(1.0) - 1.0)) < 1e-4);
  CHECK(summary["ncp"]["converged"].get<bool>());
  CHECK(fs::exists(dir / "out" / "trace_ncp.csv"));
  fs::remove_all(dir);
}

TEST_CASE("solve rejects instances with zero noise, naming the field") {
  const fs::path dir = fresh_dir("solve_bad");
  write_file(dir / "bad.json",
             R"({"K":1,"N":1,"gain2":[[[1.0]]],"noise2":[[0.0]],"budget":[1.0],"circuit":[1.0],"role":["RATE"]})");
  const RunResult r =
      run_cli("solve --instance " + (dir / "bad.json").string() + " --solver spa", dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("noise2") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("solve --solver both reports cross-solver agreement on a certified instance") {
  const fs::path dir = fresh_dir("solve_both");
  const qvipower::GameInstance inst = qvitest::mild_mixed_instance(9001, 2, 2, 0.01, 3.0);
  qvipower::save_instance(inst, dir / "inst.json");
  const RunResult r = run_cli("solve --instance " + (dir / "inst.json").string() +
                                  " --solver both --out " + (dir / "out").string(),
                              dir);
  CHECK(r.exit_code == 0);
  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["agreement_distance"].get<double>() < 1e-3);
  CHECK(fs::exists(dir / "out" / "trace_spa.csv"));
  CHECK(fs::exists(dir / "out" / "trace_ncp.csv"));
  fs::remove_all(dir);
}

TEST_CASE("analyze emits the hand-evaluated constants") {
  const fs::path dir = fresh_dir("analyze");
  write_file(dir / "unit.json", kUnitRate);
  const RunResult r = run_cli("analyze --instance " + (dir / "unit.json").string(), dir);
  CHECK(r.exit_code == 0);
  const json rep = json::parse(r.out);
  CHECK(rep["Gamma"].get<double>() == doctest::Approx(4.0));
  CHECK(rep["kappa"].get<double>() == doctest::Approx(4.0 / 17.0));
  CHECK(rep["delta_hat"].get<double>() == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("analyze flags the indefinite strong-coupling pair") {
  const fs::path dir = fresh_dir("analyze_pd");
  qvipower::GameInstance inst = qvipower::GameInstance::zeros(2, 1);
  for (int k = 0; k < 2; ++k) {
    inst.gain(k, k, 0) = 1.0;
    inst.gain(k, 1 - k, 0) = 0.5;
    inst.noise(k, 0) = 1.0;
    inst.budget[static_cast<std::size_t>(k)] = 1.0;
    inst.circuit[static_cast<std::size_t>(k)] = 1.0;
  }
  inst.role = {qvipower::Role::Rate, qvipower::Role::Ee};
  qvipower::save_instance(inst, dir / "pair.json");
  const RunResult r = run_cli("analyze --instance " + (dir / "pair.json").string(), dir);
  CHECK(r.exit_code == 0);
  const json rep = json::parse(r.out);
  CHECK_FALSE(rep["B_positive_definite"].get<bool>());
  CHECK_FALSE(rep["uniqueness_certified"].get<bool>());
  fs::remove_all(dir);
}

TEST_CASE("analyze accepts a custom weight vector") {
  const fs::path dir = fresh_dir("analyze_w");
  write_file(dir / "unit.json", kUnitRate);
  const RunResult r = run_cli(
      "analyze --instance " + (dir / "unit.json").string() + " --weights 1", dir);
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out)["dd_row_ok"].get<bool>());
  const RunResult bad = run_cli(
      "analyze --instance " + (dir / "unit.json").string() + " --weights 1,2", dir);
  CHECK(bad.exit_code == 1);  // wrong length for K=1
  fs::remove_all(dir);
}

TEST_CASE("experiment runs are byte-identical across invocations and job counts") {
  const fs::path dir = fresh_dir("experiment");
  write_file(dir / "spec.json", R"({
    "K": 2, "N": 2,
    "roles": ["EE", "RATE"],
    "snr_db": 0.0,
    "sir_grid_db": [12.0, 20.0],
    "trials": 2,
    "budget": 2.0,
    "circuit": 1.0,
    "seed": 31,
    "ncp": {"max_outer_ncp": 3000}
  })");
  const RunResult a = run_cli("experiment --spec " + (dir / "spec.json").string() + " --out " +
                                  (dir / "a").string() + " --jobs 1",
                              dir);
  const RunResult b = run_cli("experiment --spec " + (dir / "spec.json").string() + " --out " +
                                  (dir / "b").string() + " --jobs 3",
                              dir);
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(slurp(dir / "a" / "convergence.csv") == slurp(dir / "b" / "convergence.csv"));
  CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json"));
  const std::string csv = slurp(dir / "a" / "convergence.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + one row per SIR
  fs::remove_all(dir);
}

TEST_CASE("experiment rejects an empty SIR grid") {
  const fs::path dir = fresh_dir("experiment_bad");
  write_file(dir / "spec.json", R"({
    "K": 1, "N": 1, "roles": ["RATE"], "snr_db": 0.0,
    "sir_grid_db": [], "trials": 1, "budget": 1.0, "circuit": 1.0
  })");
  const RunResult r =
      run_cli("experiment --spec " + (dir / "spec.json").string(), dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("sir_grid_db") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("oracle subcommands emit reference values") {
  const fs::path dir = fresh_dir("oracle");
  RunResult r = run_cli("oracle waterfill-bisect --zeta 0.1,0.3 --target 1", dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("level") != std::string::npos);

  r = run_cli("oracle project-grid --z 0.8,0.4 --mass 1", dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("0.7") != std::string::npos);

  r = run_cli("oracle golden-ee --zeta 1 --circuit 1 --hi 50", dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("nu 0.3678") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("solver non-convergence exits with code 2") {
  const fs::path dir = fresh_dir("solve_noconv");
  write_file(dir / "inst.json", kAnalyticEe);
  // One outer iteration is nowhere near the price fixed point.
  const RunResult r = run_cli("solve --instance " + (dir / "inst.json").string() +
                                  " --solver ncp --max-iter 1 --out " + (dir / "out").string(),
                              dir);
  CHECK(r.exit_code == 2);
  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK_FALSE(summary["ncp"]["converged"].get<bool>());
  fs::remove_all(dir);
}

TEST_CASE("malformed JSON exits with the input-error code") {
  const fs::path dir = fresh_dir("badjson");
  write_file(dir / "broken.json", "{not json");
  const RunResult r =
      run_cli("solve --instance " + (dir / "broken.json").string(), dir);
  CHECK(r.exit_code == 1);
  fs::remove_all(dir);
}

TEST_CASE("usage errors follow the exit-code contract") {
  const fs::path dir = fresh_dir("usage");
  CHECK(run_cli("", dir).exit_code == 1);               // missing subcommand
  CHECK(run_cli("solve --nope x", dir).exit_code == 1); // unknown flag
  CHECK(run_cli("--help", dir).exit_code == 0);
  CHECK(run_cli("solve --instance missing.json", dir).exit_code == 1);
  fs::remove_all(dir);
}
