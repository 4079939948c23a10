#pragma once

#include <orthoclone/qstate.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace orthoclone {

// Sorted spectra count as equal when they agree pairwise within this.
inline constexpr double kSpectrumMatchTol = 1e-9;

enum class Task { Clone, Delete };

inline const char* task_name(Task t) { return t == Task::Clone ? "clone" : "delete"; }

struct SpectrumComparison {
  Spectrum input_spectrum;
  Spectrum output_spectrum;
  bool matched = false;
  double max_pairwise_gap = 0.0;
};

struct ObstructionReport {
  Task task = Task::Clone;
  std::array<SpectrumComparison, 2> per_input;
  bool blocked = false;
  std::string note;
};

struct BlankFeasibility {
  bool feasible = false;
  std::optional<std::vector<double>> witness_spectrum;
  std::string reason;
};

//------------------------------------------------------------------------------
// Spectrum arithmetic
//------------------------------------------------------------------------------

// Multiset of pairwise products: the spectrum of a tensor product in terms of
// the factor spectra.
inline Spectrum tensor_spectrum(const Spectrum& a, const Spectrum& b) {
  std::vector<double> prods;
  prods.reserve(static_cast<size_t>(a.dim()) * static_cast<size_t>(b.dim()));
  for (double x : a.values())
    for (double y : b.values()) prods.push_back(x * y);
  return Spectrum(std::move(prods));
}

namespace detail {

inline double max_pairwise_gap(const Spectrum& a, const Spectrum& b) {
  double gap = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    gap = std::max(gap, std::abs(a.values()[i] - b.values()[i]));
  }
  return gap;
}

inline SpectrumComparison compare_spectra(const DensityMatrix& in, const DensityMatrix& out) {
  SpectrumComparison cmp{spectrum(in), spectrum(out), false, 0.0};
  cmp.max_pairwise_gap = max_pairwise_gap(cmp.input_spectrum, cmp.output_spectrum);
  cmp.matched = cmp.max_pairwise_gap <= kSpectrumMatchTol;
  return cmp;
}

}  // namespace detail

//------------------------------------------------------------------------------
// The spectral certificate
//------------------------------------------------------------------------------

// Unitary evolution preserves the spectrum, so a closed cloner needs
// spec(rho_i x blank) = spec(rho_i x rho_i) for both inputs; a closed deleter
// needs the same equality with the sides swapped. A mismatch for either input
// certifies that no unitary implements the task exactly.
inline ObstructionReport spectral_obstruction(const OrthoPair& pair, const DensityMatrix& blank,
                                              Task task) {
  if (blank.dim() != 4) {
    throw std::invalid_argument("spectral_obstruction: blank state must have dimension 4");
  }

  auto compare_for = [&](const DensityMatrix& rho) {
    DensityMatrix with_blank = tensor(rho, blank);
    DensityMatrix with_copy = tensor(rho, rho);
    return (task == Task::Clone) ? detail::compare_spectra(with_blank, with_copy)
                                 : detail::compare_spectra(with_copy, with_blank);
  };

  ObstructionReport report{task,
                           {compare_for(pair.rho0), compare_for(pair.rho1)},
                           false,
                           ""};
  report.blocked = !(report.per_input[0].matched && report.per_input[1].matched);
  if (report.blocked) {
    report.note = std::string("spectra differ for at least one input: no unitary ") +
                  task_name(task) + "r exists for this pair and blank";
  } else {
    report.note = "spectra match for both inputs: the spectral argument does not "
                  "block this instance";
  }
  return report;
}

//------------------------------------------------------------------------------
// Feasibility over all blank states
//------------------------------------------------------------------------------

// Decides whether any blank spectrum satisfies both spectral constraints.
// For the rank-two pair the per-input constraint pins the blank spectrum to
// the input's own mixing weights, so a simultaneous solution exists exactly
// when {p,q} and {r,s} agree as multisets; the witness is that common
// multiset. The condition is side-symmetric, hence identical for cloning and
// deleting.
inline BlankFeasibility blank_feasibility(const OrthoPair& pair, Task /*task*/) {
  const double hi0 = std::max(pair.p, pair.q), lo0 = std::min(pair.p, pair.q);
  const double hi1 = std::max(pair.r, pair.s), lo1 = std::min(pair.r, pair.s);

  BlankFeasibility result;
  result.feasible =
      std::abs(hi0 - hi1) <= kSpectrumMatchTol && std::abs(lo0 - lo1) <= kSpectrumMatchTol;
  if (result.feasible) {
    std::vector<double> witness;
    if (hi0 > kProbTol) witness.push_back(hi0);
    if (lo0 > kProbTol) witness.push_back(lo0);
    result.witness_spectrum = std::move(witness);
    result.reason = "mixing weights agree as multisets; a blank with that spectrum "
                    "meets both spectral constraints";
  } else {
    result.reason = "each input pins the blank spectrum to its own mixing weights, "
                    "and the two weight multisets differ";
  }
  return result;
}

}  // namespace orthoclone
