#pragma once

#include <orthoclone/qstate.hpp>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace orthoclone {

inline constexpr double kCompletenessTol = 1e-10;

//------------------------------------------------------------------------------
// Instruments
//------------------------------------------------------------------------------

struct InstrumentBranch {
  std::string label;
  std::vector<Matrix> kraus_ops;
};

// A measurement with labeled branches. Each branch carries one or more Kraus
// operators; the whole set must resolve the identity.
class Instrument {
 public:
  explicit Instrument(std::vector<InstrumentBranch> branches)
      : branches_(std::move(branches)) {
    if (branches_.empty()) throw std::invalid_argument("Instrument: no branches");
    dim_ = 0;
    for (const auto& b : branches_) {
      if (b.kraus_ops.empty()) {
        throw std::invalid_argument("Instrument: branch without Kraus operators");
      }
      for (const auto& k : b.kraus_ops) {
        if (k.rows() != k.cols() || k.rows() == 0 || !detail::is_finite(k)) {
          throw std::invalid_argument("Instrument: Kraus operators must be square and finite");
        }
        if (dim_ == 0) dim_ = static_cast<int>(k.rows());
        if (k.rows() != dim_) {
          throw std::invalid_argument("Instrument: Kraus operator dimension mismatch");
        }
      }
    }
    Matrix sum = Matrix::Zero(dim_, dim_);
    for (const auto& b : branches_)
      for (const auto& k : b.kraus_ops) sum += k.adjoint() * k;
    if ((sum - Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff() > kCompletenessTol) {
      throw std::invalid_argument("Instrument: branches do not resolve the identity");
    }
  }

  const std::vector<InstrumentBranch>& branches() const { return branches_; }
  int dim() const { return dim_; }

 private:
  std::vector<InstrumentBranch> branches_;
  int dim_ = 0;
};

struct BranchOutcome {
  std::string label;
  double probability = 0.0;
  // Absent for branches with probability at or below kProbTol.
  std::optional<DensityMatrix> post_state;
};

// Classical record of a measurement: (label, probability) in branch order.
using RecordDistribution = std::vector<std::pair<std::string, double>>;

struct OpenCloneResult {
  DensityMatrix output_state;  // system x copy
  RecordDistribution record_distribution;
  double record_holevo_bits = 0.0;
  double fidelity_to_target = 0.0;
};

enum class MeasurementMode { coarse, fine };

//------------------------------------------------------------------------------
// The two instruments used on the rank-two pair
//------------------------------------------------------------------------------

// Rank-two projectors P0 = |0><0|+|2><2|, P1 = |1><1|+|3><3|.
inline Instrument coarse_projectors() {
  Matrix p0 = Matrix::Zero(4, 4);
  p0(0, 0) = 1;
  p0(2, 2) = 1;
  Matrix p1 = Matrix::Zero(4, 4);
  p1(1, 1) = 1;
  p1(3, 3) = 1;
  return Instrument({{"P0", {p0}}, {"P1", {p1}}});
}

// Projective measurement onto the full basis |0>,|1>,|2>,|3>.
inline Instrument fine_measurement() {
  std::vector<InstrumentBranch> branches;
  for (int k = 0; k < 4; ++k) {
    Matrix pk = Matrix::Zero(4, 4);
    pk(k, k) = 1;
    branches.push_back({std::to_string(k), {pk}});
  }
  return Instrument(std::move(branches));
}

//------------------------------------------------------------------------------
// Instrument application
//------------------------------------------------------------------------------

inline std::vector<BranchOutcome> apply_instrument(const Instrument& inst,
                                                   const DensityMatrix& rho) {
  if (inst.dim() != rho.dim()) {
    throw std::invalid_argument("apply_instrument: dimension mismatch");
  }
  std::vector<BranchOutcome> outcomes;
  outcomes.reserve(inst.branches().size());
  for (const auto& branch : inst.branches()) {
    Matrix acc = Matrix::Zero(rho.dim(), rho.dim());
    for (const auto& k : branch.kraus_ops) acc += k * rho.entries() * k.adjoint();
    const double prob = std::max(acc.trace().real(), 0.0);
    BranchOutcome out{branch.label, prob, std::nullopt};
    if (prob > kProbTol) {
      out.post_state = DensityMatrix(acc / prob, rho.subsystem_dims());
    }
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

//------------------------------------------------------------------------------
// Record information
//------------------------------------------------------------------------------

namespace detail {

inline void check_record(const RecordDistribution& rec, const char* name) {
  if (rec.empty()) throw std::invalid_argument(std::string(name) + ": empty record");
  double sum = 0.0;
  std::map<std::string, int> seen;
  for (const auto& [label, prob] : rec) {
    if (!std::isfinite(prob) || prob < -kProbTol || prob > 1.0 + kProbTol) {
      throw std::invalid_argument(std::string(name) + ": probability out of range");
    }
    if (++seen[label] > 1) {
      throw std::invalid_argument(std::string(name) + ": duplicate label");
    }
    sum += prob;
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw std::invalid_argument(std::string(name) + ": probabilities do not sum to 1");
  }
}

inline double shannon_bits(const std::map<std::string, double>& dist) {
  double h = 0.0;
  for (const auto& [label, p] : dist) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace detail

// Holevo information of the record about which input was supplied, with the
// record labels modeled as mutually orthogonal pointer states:
//   chi = H(prior * rec0 + (1-prior) * rec1) - prior H(rec0) - (1-prior) H(rec1)
// in bits. prior is the a-priori probability of input 0.
inline double record_holevo(double prior, const RecordDistribution& rec0,
                            const RecordDistribution& rec1) {
  if (!(prior >= 0.0 && prior <= 1.0)) {
    throw std::invalid_argument("record_holevo: prior must lie in [0,1]");
  }
  detail::check_record(rec0, "record_holevo: rec0");
  detail::check_record(rec1, "record_holevo: rec1");

  std::map<std::string, double> d0, d1, mix;
  for (const auto& [label, p] : rec0) d0[label] = std::max(p, 0.0);
  for (const auto& [label, p] : rec1) d1[label] = std::max(p, 0.0);
  for (const auto& [label, p] : d0) mix[label] += prior * p;
  for (const auto& [label, p] : d1) mix[label] += (1.0 - prior) * p;

  const double chi = detail::shannon_bits(mix) - prior * detail::shannon_bits(d0) -
                     (1.0 - prior) * detail::shannon_bits(d1);
  return std::max(chi, 0.0);
}

//------------------------------------------------------------------------------
// Open cloning
//------------------------------------------------------------------------------

namespace detail {

// Which input state a measurement outcome indicates. Supports are disjoint,
// so every label identifies the input unambiguously.
inline int indicated_input(MeasurementMode mode, const std::string& label) {
  if (mode == MeasurementMode::coarse) return label == "P0" ? 0 : 1;
  return (label == "0" || label == "2") ? 0 : 1;
}

inline RecordDistribution record_of(const Instrument& inst, const DensityMatrix& rho) {
  RecordDistribution rec;
  for (const auto& out : apply_instrument(inst, rho)) {
    rec.emplace_back(out.label, out.probability);
  }
  return rec;
}

}  // namespace detail

// Measure-and-prepare cloner. Measures rho_which, maps the outcome to the
// indicated input, and prepares that state twice from the known mixing
// probabilities. The record distributions for both hypothetical inputs feed
// the Holevo accounting under the given prior on input 0; the prior never
// affects the cloning map itself.
inline OpenCloneResult open_clone(const OrthoPair& pair, int which, MeasurementMode mode,
                                  double prior) {
  if (which != 0 && which != 1) {
    throw std::invalid_argument("open_clone: which must be 0 or 1");
  }
  if (!(prior >= 0.0 && prior <= 1.0)) {
    throw std::invalid_argument("open_clone: prior must lie in [0,1]");
  }

  const Instrument inst = (mode == MeasurementMode::coarse) ? coarse_projectors()
                                                            : fine_measurement();
  const DensityMatrix& rho = (which == 0) ? pair.rho0 : pair.rho1;

  const RecordDistribution record = detail::record_of(inst, rho);

  // Re-preparation: every outcome is mapped to the input it indicates and the
  // corresponding pair of copies is prepared fresh.
  Matrix out = Matrix::Zero(16, 16);
  for (const auto& [label, prob] : record) {
    if (prob <= kProbTol) continue;
    const DensityMatrix& indicated =
        (detail::indicated_input(mode, label) == 0) ? pair.rho0 : pair.rho1;
    out += prob * Eigen::kroneckerProduct(indicated.entries(), indicated.entries()).eval();
  }
  DensityMatrix output(std::move(out), {4, 4});

  const double chi = record_holevo(prior, detail::record_of(inst, pair.rho0),
                                   detail::record_of(inst, pair.rho1));
  const double fid = fidelity(output, tensor(rho, rho));
  return OpenCloneResult{std::move(output), record, chi, fid};
}

//------------------------------------------------------------------------------
// Closed cloning of orthogonal pure states
//------------------------------------------------------------------------------

// CNOT on system (control) x blank (target): |i>|0> -> |i>|i> for i = 0,1.
inline Unitary closed_clone_pure_gate() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return Unitary(std::move(m));
}

// Inverse of the cloning gate: |1>|1> -> |1>|0>, |0>|0> -> |0>|0>.
inline Unitary delete_pure_gate() { return closed_clone_pure_gate().adjoint(); }

}  // namespace orthoclone
