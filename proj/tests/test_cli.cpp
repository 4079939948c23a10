#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdio>
#include <string>
#include <sys/wait.h>

namespace {

using Json = nlohmann::ordered_json;

struct CliRun {
  int exit_code;
  std::string output;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(ORTHOCLONE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, std::move(out)};
}

}  // namespace

TEST_CASE("cli rejects invalid configuration with exit code 2", "[cli]") {
  REQUIRE(run_cli("states --p 1.2 --r 0.6").exit_code == 2);
  REQUIRE(run_cli("states --p 0.7 --q 0.4 --r 0.6").exit_code == 2);
  REQUIRE(run_cli("states --p 0.7 --r 0.6 --s 0.7").exit_code == 2);
  REQUIRE(run_cli("states --p 0.7 --r 0.6 --frobnicate").exit_code == 2);
  REQUIRE(run_cli("states --p 0.7").exit_code == 2);
  REQUIRE(run_cli("").exit_code == 2);
  REQUIRE(run_cli("open-clone --p 0.7 --r 0.6 --prior 1.5").exit_code == 2);
  REQUIRE(run_cli("open-clone --p 0.7 --r 0.6 --which 3").exit_code == 2);
  REQUIRE(run_cli("open-clone --p 0.7 --r 0.6 --mode medium").exit_code == 2);
  REQUIRE(run_cli("search --p 0.7 --r 0.6 --restarts 0").exit_code == 2);
  REQUIRE(run_cli("search --p 0.7 --r 0.6 --success-threshold 1e-10").exit_code == 2);
  REQUIRE(run_cli("search --p 0.7 --r 0.6 --blank 0.5,0.6").exit_code == 2);
  REQUIRE(run_cli("obstruction --p 0.7 --r 0.6 --task shred").exit_code == 2);
}

TEST_CASE("cli report envelope", "[cli]") {
  auto run = run_cli("demo-pure");
  REQUIRE(run.exit_code == 0);
  const Json report = Json::parse(run.output);

  REQUIRE(report["command"] == "demo-pure");
  REQUIRE(report.contains("inputs"));
  REQUIRE(report.contains("results"));
  REQUIRE(report.contains("artifact_version"));
  REQUIRE(report.contains("timestamp"));
  REQUIRE(report["conventions"]["fidelity"] == "uhlmann_squared");
  REQUIRE(report["conventions"]["entropy_unit"] == "bits");

  const Json& results = report["results"];
  REQUIRE(results["clone_fidelity"][0].get<double>() == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(results["clone_fidelity"][1].get<double>() == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(results["delete_fidelity"][0].get<double>() == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(results["round_trip_identity_distance"].get<double>() <= 1e-10);
}

TEST_CASE("cli states report carries matrices, spectra, and entropies", "[cli]") {
  auto run = run_cli("states --p 0.7 --r 0.6");
  REQUIRE(run.exit_code == 0);
  const Json report = Json::parse(run.output);

  REQUIRE(report["inputs"]["p"].get<double>() == 0.7);
  REQUIRE(report["inputs"]["q"].get<double>() == Catch::Approx(0.3).margin(1e-12));
  const Json& rho0 = report["results"]["rho0"];
  REQUIRE(rho0["matrix"].size() == 4);
  REQUIRE(rho0["matrix"][0][0][0].get<double>() == Catch::Approx(0.7).margin(1e-12));
  REQUIRE(rho0["spectrum"][0].get<double>() == Catch::Approx(0.7).margin(1e-12));
  REQUIRE(rho0["entropy_bits"].get<double>() ==
          Catch::Approx(0.8812908992306926).margin(1e-9));
  REQUIRE(report["results"]["rho1"]["entropy_bits"].get<double>() ==
          Catch::Approx(0.9709505944546686).margin(1e-9));
}

TEST_CASE("cli obstruction and feasibility reports", "[cli]") {
  auto blocked = run_cli("obstruction --p 0.7 --r 0.6 --blank rho0 --task clone");
  REQUIRE(blocked.exit_code == 0);
  const Json rep = Json::parse(blocked.output);
  REQUIRE(rep["results"]["blocked"] == true);
  REQUIRE(rep["results"]["per_input"][0]["matched"] == true);
  REQUIRE(rep["results"]["per_input"][1]["matched"] == false);
  REQUIRE(rep["results"]["per_input"][1]["max_pairwise_gap"].get<double>() ==
          Catch::Approx(0.06).margin(1e-9));

  auto infeasible = run_cli("feasibility --p 0.7 --r 0.6");
  REQUIRE(infeasible.exit_code == 0);
  const Json inf = Json::parse(infeasible.output);
  REQUIRE(inf["results"]["feasible"] == false);
  REQUIRE(inf["results"]["witness_spectrum"].is_null());

  auto feasible = run_cli("feasibility --p 0.7 --r 0.3");
  const Json fea = Json::parse(feasible.output);
  REQUIRE(fea["results"]["feasible"] == true);
  REQUIRE(fea["results"]["witness_spectrum"][0].get<double>() ==
          Catch::Approx(0.7).margin(1e-12));
}

TEST_CASE("cli open-clone report", "[cli]") {
  auto run = run_cli("open-clone --p 0.7 --r 0.6 --which 0 --mode coarse --prior 0.5");
  REQUIRE(run.exit_code == 0);
  const Json report = Json::parse(run.output);
  const Json& results = report["results"];
  REQUIRE(results["fidelity"].get<double>() == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(results["record"][0]["label"] == "P0");
  REQUIRE(results["record"][0]["p"].get<double>() == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(results["record"][1]["p"].get<double>() == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(results["holevo_bits"].get<double>() == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("cli search payloads are byte-identical across runs", "[cli]") {
  const std::string flags = "search --p 0.7 --r 0.6 --restarts 3 --max-iters 40 --seed 7";
  auto first = run_cli(flags);
  auto second = run_cli(flags);
  auto parallel = run_cli(flags + " --parallel 3");
  REQUIRE(first.exit_code == 0);
  REQUIRE(second.exit_code == 0);

  const Json a = Json::parse(first.output);
  const Json b = Json::parse(second.output);
  const Json c = Json::parse(parallel.output);
  REQUIRE(a["results"].dump() == b["results"].dump());
  REQUIRE(a["inputs"].dump() == b["inputs"].dump());
  // the same restarts run on several threads merge to the same payload
  REQUIRE(a["results"].dump() == c["results"].dump());

  REQUIRE(a["results"]["config"]["master_seed"].get<std::uint64_t>() == 7);
  REQUIRE(a["results"]["best_objective"].get<double>() > 1e-9);
  REQUIRE(a["results"]["verdict"] == "not_found");
}
