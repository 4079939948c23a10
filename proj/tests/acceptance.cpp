// Acceptance gate: exercises every headline claim end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <orthoclone/channels.hpp>
#include <orthoclone/obstruction.hpp>
#include <orthoclone/search.hpp>
#include <orthoclone/serialize.hpp>

#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "test_helpers.hpp"

using namespace orthoclone;

namespace {

bool g_all_ok = true;

void report(int index, const char* name, bool ok, const std::string& detail = "") {
  std::printf("%s  criterion %d  %s%s%s%s\n", ok ? "PASS" : "FAIL", index, name,
              detail.empty() ? "" : "  [", detail.c_str(), detail.empty() ? "" : "]");
  g_all_ok = g_all_ok && ok;
}

std::string run_cli_results(const std::string& args, bool& ok) {
  const std::string cmd = std::string(ORTHOCLONE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    ok = false;
    return "";
  }
  std::string out;
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    ok = false;
    return "";
  }
  return Json::parse(out)["results"].dump();
}

void criterion_1() {
  bool ok = true;
  const Unitary clone_gate = closed_clone_pure_gate();
  const DensityMatrix blank = DensityMatrix::pure(Ket::basis(2, 0));
  for (int i = 0; i < 2; ++i) {
    const DensityMatrix input = DensityMatrix::pure(Ket::basis(2, i));
    const DensityMatrix cloned = apply_unitary(clone_gate, tensor(input, blank));
    ok = ok && fidelity(cloned, tensor(input, input)) >= 1.0 - 1e-10;
  }
  const double round_trip = (delete_pure_gate().entries() * clone_gate.entries() -
                             Matrix::Identity(4, 4))
                                .cwiseAbs()
                                .maxCoeff();
  ok = ok && round_trip <= 1e-10;
  report(1, "pure-state closed cloning and exact deletion", ok);
}

void criterion_2() {
  bool ok = true;
  auto gen = testutil::rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst_fidelity = 1.0;
  double worst_holevo_gap = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const OrthoPair pair = make_orthogonal_pair(u01(gen), u01(gen));
    for (MeasurementMode mode : {MeasurementMode::coarse, MeasurementMode::fine}) {
      for (int which = 0; which < 2; ++which) {
        const OpenCloneResult res = open_clone(pair, which, mode, 0.5);
        worst_fidelity = std::min(worst_fidelity, res.fidelity_to_target);
        ok = ok && res.fidelity_to_target >= 1.0 - 1e-9;
        if (mode == MeasurementMode::coarse) {
          const double gap = std::abs(res.record_holevo_bits - 1.0);
          worst_holevo_gap = std::max(worst_holevo_gap, gap);
          ok = ok && gap <= 1e-9;
        }
      }
    }
  }
  std::ostringstream detail;
  detail << "min fidelity " << worst_fidelity << ", max holevo gap " << worst_holevo_gap;
  report(2, "open cloning is exact and leaves a one-bit record", ok, detail.str());
}

void criterion_3() {
  bool ok = true;
  auto gen = testutil::rng(3030);
  double worst = 0.0;
  for (int dim : {2, 4, 16}) {
    for (int trial = 0; trial < 200; ++trial) {
      const DensityMatrix rho(testutil::random_density(dim, gen));
      const Unitary u(testutil::random_unitary(dim, gen));
      const auto before = spectrum(rho).values();
      const auto after = spectrum(apply_unitary(u, rho)).values();
      for (int j = 0; j < dim; ++j) {
        worst = std::max(worst, std::abs(before[j] - after[j]));
      }
    }
  }
  ok = worst <= 1e-9;
  std::ostringstream detail;
  detail << "max spectral drift " << worst;
  report(3, "unitary conjugation preserves spectra", ok, detail.str());
}

void criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  const OrthoPair pair = make_orthogonal_pair(0.7, 0.6);
  const SearchConfig cfg;  // 20 restarts x 500 iterations, seed 42
  double min_objective = 1.0;
  for (const DensityMatrix& blank : {pair.rho0, DensityMatrix::maximally_mixed(4)}) {
    for (Task task : {Task::Clone, Task::Delete}) {
      ok = ok && spectral_obstruction(pair, blank, task).blocked;
      ok = ok && !blank_feasibility(pair, task).feasible;
      const SearchResult res = minimize(task, pair, blank, cfg);
      min_objective = std::min(min_objective, res.best_objective);
      ok = ok && res.best_objective > 1e-9;
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = ok && elapsed < 300.0;
  std::ostringstream detail;
  detail << "min objective " << min_objective << ", elapsed " << elapsed << " s";
  report(4, "spectral obstruction is sound against the search", ok, detail.str());
}

void criterion_5() {
  bool ok = true;
  const OrthoPair pure = make_orthogonal_pair(1.0, 1.0);
  const SearchResult res = minimize(Task::Clone, pure, pure.rho0, SearchConfig{});
  ok = ok && res.best_objective <= 1e-6;
  ok = ok && res.verdict == Verdict::found;
  const double analytic = cloning_objective(controlled_sum_gate(4), pure, pure.rho0);
  ok = ok && analytic <= 1e-10;
  std::ostringstream detail;
  detail << "search best " << res.best_objective << ", analytic gate " << analytic;
  report(5, "search recovers the pure-state cloner", ok, detail.str());
}

void criterion_6() {
  bool ok = true;
  const OrthoPair degen = make_orthogonal_pair(0.7, 0.7);
  const BlankFeasibility fea = blank_feasibility(degen, Task::Clone);
  ok = ok && fea.feasible && fea.witness_spectrum.has_value();
  if (fea.witness_spectrum) {
    const auto& w = *fea.witness_spectrum;
    ok = ok && w.size() == 2 && std::abs(w[0] - 0.7) <= 1e-12 && std::abs(w[1] - 0.3) <= 1e-12;
  }
  const Unitary gate = degenerate_clone_unitary(0.7);
  const double clone_obj = cloning_objective(gate, degen, degen.rho0);
  const double delete_obj = deletion_objective(gate.adjoint(), degen, degen.rho0);
  ok = ok && clone_obj <= 1e-9 && delete_obj <= 1e-9;
  std::ostringstream detail;
  detail << "objectives " << clone_obj << " / " << delete_obj;
  report(6, "equal-spectra pair admits the explicit closed cloner", ok, detail.str());
}

void criterion_7() {
  bool ok = true;
  auto gen = testutil::rng(777);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const OrthoPair pair = make_orthogonal_pair(u01(gen), u01(gen));
    const BlankFeasibility c = blank_feasibility(pair, Task::Clone);
    const BlankFeasibility d = blank_feasibility(pair, Task::Delete);
    ok = ok && c.feasible == d.feasible && c.witness_spectrum == d.witness_spectrum;
  }
  report(7, "cloning and deleting share one feasibility verdict", ok);
}

void criterion_8() {
  bool ok = true;
  const std::string flags = "search --p 0.7 --r 0.6 --restarts 6 --max-iters 120 --seed 42";
  const std::string first = run_cli_results(flags, ok);
  const std::string second = run_cli_results(flags, ok);
  ok = ok && !first.empty() && first == second;
  report(8, "repeated search invocations emit identical payloads", ok);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf("%s\n", g_all_ok ? "all acceptance criteria passed"
                               : "one or more acceptance criteria FAILED");
  return g_all_ok ? 0 : 1;
}
