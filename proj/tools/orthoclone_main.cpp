// Command-line harness: each subcommand runs one experiment from the library
// and emits a single JSON report on stdout (or to --out). Exit codes: 0 on
// success, 2 for invalid flags or config, 3 for numeric failures.

#include <orthoclone/serialize.hpp>
#include <orthoclone/version.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using orthoclone::Json;

std::string iso_utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open output file " + path);
  f << text;
}

void emit_report(const std::string& command, Json inputs, Json results,
                 const std::string& out_path) {
  Json report{{"command", command},
              {"inputs", std::move(inputs)},
              {"results", std::move(results)},
              {"conventions",
               Json{{"fidelity", "uhlmann_squared"}, {"entropy_unit", "bits"}}},
              {"artifact_version", orthoclone::kArtifactVersion},
              {"timestamp", iso_utc_now()}};
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
}

void check_unit_interval(double value, const char* flag) {
  if (!(value >= 0.0) || !(value <= 1.0)) {
    throw std::invalid_argument(std::string(flag) + " must lie in [0, 1]");
  }
}

struct PairFlags {
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0;
};

void add_pair_flags(CLI::App* cmd, PairFlags& f) {
  cmd->add_option("--p", f.p, "weight of |0><0| in the first state")->required();
  cmd->add_option("--q", f.q, "weight of |2><2| in the first state (default 1 - p)");
  cmd->add_option("--r", f.r, "weight of |1><1| in the second state")->required();
  cmd->add_option("--s", f.s, "weight of |3><3| in the second state (default 1 - r)");
}

// fills q and s from normalization when omitted and enforces p+q=1, r+s=1
orthoclone::OrthoPair resolve_pair(const CLI::App* cmd, PairFlags& f) {
  check_unit_interval(f.p, "--p");
  check_unit_interval(f.r, "--r");
  if (cmd->count("--q") > 0) {
    check_unit_interval(f.q, "--q");
    if (std::abs(f.p + f.q - 1.0) > 1e-12) {
      throw std::invalid_argument("--p and --q must satisfy p + q = 1");
    }
  }
  f.q = 1.0 - f.p;
  if (cmd->count("--s") > 0) {
    check_unit_interval(f.s, "--s");
    if (std::abs(f.r + f.s - 1.0) > 1e-12) {
      throw std::invalid_argument("--r and --s must satisfy r + s = 1");
    }
  }
  f.s = 1.0 - f.r;
  return orthoclone::make_orthogonal_pair(f.p, f.r);
}

Json pair_echo(const PairFlags& f) {
  return Json{{"p", f.p}, {"q", f.q}, {"r", f.r}, {"s", f.s}};
}

orthoclone::DensityMatrix resolve_blank(const std::string& spec,
                                        const orthoclone::OrthoPair& pair) {
  if (spec == "rho0") return pair.rho0;
  if (spec == "maximally-mixed") return orthoclone::DensityMatrix::maximally_mixed(4);

  std::vector<double> weights;
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      size_t used = 0;
      const double w = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      weights.push_back(w);
    } catch (const std::exception&) {
      throw std::invalid_argument(
          "--blank must be rho0, maximally-mixed, or a comma-separated spectrum");
    }
  }
  if (weights.empty() || weights.size() > 4) {
    throw std::invalid_argument("--blank spectrum needs between 1 and 4 entries");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !(w <= 1.0)) {
      throw std::invalid_argument("--blank spectrum entries must lie in [0, 1]");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("--blank spectrum must sum to 1");
  }
  weights.resize(4, 0.0);
  return orthoclone::DensityMatrix::diagonal(weights);
}

orthoclone::Task resolve_task(const std::string& name) {
  return name == "delete" ? orthoclone::Task::Delete : orthoclone::Task::Clone;
}

Json state_summary(const orthoclone::DensityMatrix& rho) {
  return Json{{"matrix", orthoclone::to_json(rho)},
              {"spectrum", orthoclone::to_json(orthoclone::spectrum(rho))},
              {"entropy_bits", orthoclone::von_neumann_entropy(rho)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orthogonal mixed-state cloning experiments"};
  app.require_subcommand(1);

  std::string out_path;

  // states
  auto* states_cmd = app.add_subcommand("states", "construct the orthogonal pair");
  PairFlags states_pair;
  add_pair_flags(states_cmd, states_pair);

  // obstruction
  auto* obstruction_cmd =
      app.add_subcommand("obstruction", "spectral certificate against closed cloning");
  PairFlags obstruction_pair;
  add_pair_flags(obstruction_cmd, obstruction_pair);
  std::string obstruction_blank = "rho0";
  obstruction_cmd->add_option("--blank", obstruction_blank,
                              "blank state: rho0, maximally-mixed, or a spectrum");
  std::string obstruction_task = "clone";
  obstruction_cmd->add_option("--task", obstruction_task, "task to certify")
      ->check(CLI::IsMember({"clone", "delete"}));

  // feasibility
  auto* feasibility_cmd =
      app.add_subcommand("feasibility", "search for any blank spectrum that works");
  PairFlags feasibility_pair;
  add_pair_flags(feasibility_cmd, feasibility_pair);
  std::string feasibility_task = "clone";
  feasibility_cmd->add_option("--task", feasibility_task, "task to check")
      ->check(CLI::IsMember({"clone", "delete"}));

  // open-clone
  auto* open_cmd = app.add_subcommand("open-clone", "measure-and-reprepare cloning");
  PairFlags open_pair;
  add_pair_flags(open_cmd, open_pair);
  int which = 0;
  open_cmd->add_option("--which", which, "input state index")->check(CLI::Range(0, 1));
  std::string mode = "coarse";
  open_cmd->add_option("--mode", mode, "measurement granularity")
      ->check(CLI::IsMember({"coarse", "fine"}));
  double prior = 0.5;
  open_cmd->add_option("--prior", prior, "prior probability of input 0");

  // search
  auto* search_cmd = app.add_subcommand("search", "minimize over the unitary group");
  PairFlags search_pair;
  add_pair_flags(search_cmd, search_pair);
  std::string search_blank = "rho0";
  search_cmd->add_option("--blank", search_blank,
                         "blank state: rho0, maximally-mixed, or a spectrum");
  std::string search_task = "clone";
  search_cmd->add_option("--task", search_task, "objective to minimize")
      ->check(CLI::IsMember({"clone", "delete"}));
  orthoclone::SearchConfig search_cfg;
  search_cmd->add_option("--restarts", search_cfg.restarts, "independent restarts");
  search_cmd->add_option("--max-iters", search_cfg.max_iters, "iterations per restart");
  search_cmd->add_option("--seed", search_cfg.master_seed, "master seed");
  search_cmd->add_option("--success-threshold", search_cfg.success_threshold,
                         "objective level that counts as found");
  search_cmd->add_option("--grad-tol", search_cfg.grad_tol, "gradient stopping tolerance");
  search_cmd->add_option("--step-tol", search_cfg.step_tol, "step stopping tolerance");
  int parallel = 1;
  search_cmd->add_option("--parallel", parallel, "worker threads for restarts");
  std::string csv_path;
  search_cmd->add_option("--csv", csv_path, "also write the trace as CSV to this file");

  // demos
  auto* demo_pure_cmd =
      app.add_subcommand("demo-pure", "pure-state cloning and deletion round trip");
  auto* demo_degen_cmd = app.add_subcommand(
      "demo-degenerate", "closed cloner for an equal-spectra mixed pair");
  double degen_p = 0.7;
  demo_degen_cmd->add_option("--p", degen_p, "shared spectrum weight (r = p)");

  for (CLI::App* sub : {states_cmd, obstruction_cmd, feasibility_cmd, open_cmd, search_cmd,
                        demo_pure_cmd, demo_degen_cmd}) {
    sub->add_option("--out", out_path, "write the JSON report to this file instead of stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (states_cmd->parsed()) {
      auto pair = resolve_pair(states_cmd, states_pair);
      Json results{{"rho0", state_summary(pair.rho0)}, {"rho1", state_summary(pair.rho1)}};
      emit_report("states", pair_echo(states_pair), std::move(results), out_path);
    } else if (obstruction_cmd->parsed()) {
      auto pair = resolve_pair(obstruction_cmd, obstruction_pair);
      auto blank = resolve_blank(obstruction_blank, pair);
      auto report = orthoclone::spectral_obstruction(pair, blank, resolve_task(obstruction_task));
      Json inputs = pair_echo(obstruction_pair);
      inputs["blank"] = obstruction_blank;
      inputs["task"] = obstruction_task;
      emit_report("obstruction", std::move(inputs), orthoclone::to_json(report), out_path);
    } else if (feasibility_cmd->parsed()) {
      auto pair = resolve_pair(feasibility_cmd, feasibility_pair);
      auto result = orthoclone::blank_feasibility(pair, resolve_task(feasibility_task));
      Json inputs = pair_echo(feasibility_pair);
      inputs["task"] = feasibility_task;
      emit_report("feasibility", std::move(inputs), orthoclone::to_json(result), out_path);
    } else if (open_cmd->parsed()) {
      auto pair = resolve_pair(open_cmd, open_pair);
      check_unit_interval(prior, "--prior");
      const auto measurement = mode == "fine" ? orthoclone::MeasurementMode::fine
                                              : orthoclone::MeasurementMode::coarse;
      auto result = orthoclone::open_clone(pair, which, measurement, prior);
      Json inputs = pair_echo(open_pair);
      inputs["which"] = which;
      inputs["mode"] = mode;
      inputs["prior"] = prior;
      emit_report("open-clone", std::move(inputs), orthoclone::to_json(result), out_path);
    } else if (search_cmd->parsed()) {
      auto pair = resolve_pair(search_cmd, search_pair);
      auto blank = resolve_blank(search_blank, pair);
      if (search_cfg.restarts < 1) {
        throw std::invalid_argument("--restarts must be positive");
      }
      if (search_cfg.max_iters < 1) {
        throw std::invalid_argument("--max-iters must be positive");
      }
      if (!(search_cfg.success_threshold > search_cfg.exactness_threshold)) {
        throw std::invalid_argument(
            "--success-threshold must exceed the exactness threshold 1e-9");
      }
      if (parallel < 1) throw std::invalid_argument("--parallel must be positive");
      auto result = orthoclone::minimize(resolve_task(search_task), pair, blank, search_cfg,
                                         parallel);
      if (!csv_path.empty()) {
        std::ostringstream csv;
        csv << "iteration,objective\n";
        csv.precision(17);
        for (const auto& point : result.trace) {
          csv << point.iteration << ',' << point.objective << '\n';
        }
        write_text(csv_path, csv.str());
      }
      Json inputs = pair_echo(search_pair);
      inputs["blank"] = search_blank;
      inputs["task"] = search_task;
      inputs["parallel"] = parallel;
      emit_report("search", std::move(inputs), orthoclone::to_json(result, search_cfg),
                  out_path);
    } else if (demo_pure_cmd->parsed()) {
      const auto clone_gate = orthoclone::closed_clone_pure_gate();
      const auto delete_gate = orthoclone::delete_pure_gate();
      Json clone_fidelities = Json::array();
      Json delete_fidelities = Json::array();
      for (int i = 0; i < 2; ++i) {
        const auto input = orthoclone::DensityMatrix::pure(orthoclone::Ket::basis(2, i));
        const auto blank = orthoclone::DensityMatrix::pure(orthoclone::Ket::basis(2, 0));
        const auto doubled = orthoclone::tensor(input, input);
        const auto cloned =
            orthoclone::apply_unitary(clone_gate, orthoclone::tensor(input, blank));
        clone_fidelities.push_back(orthoclone::fidelity(cloned, doubled));
        const auto deleted = orthoclone::apply_unitary(delete_gate, doubled);
        delete_fidelities.push_back(
            orthoclone::fidelity(deleted, orthoclone::tensor(input, blank)));
      }
      const double round_trip = (delete_gate.entries() * clone_gate.entries() -
                                 orthoclone::Matrix::Identity(4, 4))
                                    .cwiseAbs()
                                    .maxCoeff();
      Json results{{"gate", orthoclone::to_json(clone_gate.entries())},
                   {"clone_fidelity", std::move(clone_fidelities)},
                   {"delete_fidelity", std::move(delete_fidelities)},
                   {"round_trip_identity_distance", round_trip}};
      emit_report("demo-pure", Json::object(), std::move(results), out_path);
    } else if (demo_degen_cmd->parsed()) {
      if (!(degen_p > 0.0) || !(degen_p < 1.0)) {
        throw std::invalid_argument("--p must lie strictly inside (0, 1)");
      }
      auto pair = orthoclone::make_orthogonal_pair(degen_p, degen_p);
      auto feasibility = orthoclone::blank_feasibility(pair, orthoclone::Task::Clone);
      auto gate = orthoclone::degenerate_clone_unitary(degen_p);
      Json results{
          {"feasibility", orthoclone::to_json(feasibility)},
          {"cloning_objective", orthoclone::cloning_objective(gate, pair, pair.rho0)},
          {"deletion_objective",
           orthoclone::deletion_objective(gate.adjoint(), pair, pair.rho0)}};
      Json inputs{{"p", degen_p}, {"q", 1.0 - degen_p}, {"r", degen_p}, {"s", 1.0 - degen_p}};
      emit_report("demo-degenerate", std::move(inputs), std::move(results), out_path);
    }
  } catch (const orthoclone::numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
