#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace orthoclone {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Validation tolerances. States are checked on construction, so every value
// in circulation satisfies its invariants.
inline constexpr double kNormTol = 1e-12;     // ket normalization
inline constexpr double kHermTol = 1e-12;     // entrywise Hermiticity
inline constexpr double kTraceTol = 1e-12;    // |tr - 1|
inline constexpr double kPsdTol = 1e-10;      // eigenvalues below -kPsdTol are rejected
inline constexpr double kUnitaryTol = 1e-10;  // entrywise |U^dag U - I|
inline constexpr double kProbTol = 1e-12;     // probability bookkeeping

// Raised when an eigensolver fails or a computation turns non-finite.
// Precondition violations use std::invalid_argument instead; the CLI maps
// the two classes to different exit codes.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool is_finite(const Matrix& m) {
  return m.allFinite();
}

// Real eigenvalues of a Hermitian matrix, ascending. Solver failure and
// non-finite output are signaled, never returned.
inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || !es.eigenvalues().allFinite()) {
    throw numeric_error("hermitian eigensolver did not converge");
  }
  return es.eigenvalues();
}

inline Eigen::SelfAdjointEigenSolver<Matrix> hermitian_eigensystem(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success || !es.eigenvalues().allFinite()) {
    throw numeric_error("hermitian eigensolver did not converge");
  }
  return es;
}

// sqrt of a PSD Hermitian matrix; small negative eigenvalues are clipped.
inline Matrix psd_sqrt(const Matrix& m) {
  auto es = hermitian_eigensystem(m);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace detail

//------------------------------------------------------------------------------
// Kets
//------------------------------------------------------------------------------

// Normalized pure-state vector.
class Ket {
 public:
  explicit Ket(CVector amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() == 0) throw std::invalid_argument("Ket: empty amplitude vector");
    if (!amps_.allFinite()) throw std::invalid_argument("Ket: non-finite amplitude");
    if (std::abs(amps_.norm() - 1.0) > kNormTol) {
      throw std::invalid_argument("Ket: amplitudes are not normalized");
    }
  }

  static Ket basis(int dim, int index) {
    if (dim <= 0 || index < 0 || index >= dim) {
      throw std::invalid_argument("Ket::basis: index out of range");
    }
    CVector v = CVector::Zero(dim);
    v(index) = 1.0;
    return Ket(std::move(v));
  }

  int dim() const { return static_cast<int>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }

  // |psi><psi|
  Matrix projector() const { return amps_ * amps_.adjoint(); }

 private:
  CVector amps_;
};

//------------------------------------------------------------------------------
// Density matrices
//------------------------------------------------------------------------------

// Hermitian, PSD, unit-trace matrix with a record of the tensor factorization
// of its underlying space. Immutable after construction.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries, std::vector<int> subsystem_dims = {})
      : entries_(std::move(entries)), subsystem_dims_(std::move(subsystem_dims)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
      throw std::invalid_argument("DensityMatrix: matrix must be square and nonempty");
    }
    if (!detail::is_finite(entries_)) {
      throw std::invalid_argument("DensityMatrix: non-finite entry");
    }
    const int n = static_cast<int>(entries_.rows());
    if (subsystem_dims_.empty()) subsystem_dims_ = {n};
    int prod = 1;
    for (int d : subsystem_dims_) {
      if (d <= 0) throw std::invalid_argument("DensityMatrix: subsystem dims must be positive");
      prod *= d;
    }
    if (prod != n) {
      throw std::invalid_argument("DensityMatrix: subsystem dims do not factor the dimension");
    }
    if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
      throw std::invalid_argument("DensityMatrix: not Hermitian");
    }
    if (std::abs(entries_.trace().real() - 1.0) > kTraceTol ||
        std::abs(entries_.trace().imag()) > kTraceTol) {
      throw std::invalid_argument("DensityMatrix: trace differs from 1");
    }
    if (detail::hermitian_eigenvalues(entries_).minCoeff() < -kPsdTol) {
      throw std::invalid_argument("DensityMatrix: not positive semidefinite");
    }
  }

  static DensityMatrix pure(const Ket& psi) { return DensityMatrix(psi.projector()); }

  // Maximally mixed state I/d.
  static DensityMatrix maximally_mixed(int dim) {
    if (dim <= 0) throw std::invalid_argument("maximally_mixed: dim must be positive");
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  // Diagonal state in the fixed basis, from a probability vector.
  static DensityMatrix diagonal(const std::vector<double>& weights) {
    const int n = static_cast<int>(weights.size());
    if (n == 0) throw std::invalid_argument("diagonal: empty weight list");
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = weights[i];
    return DensityMatrix(std::move(m));
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  const std::vector<int>& subsystem_dims() const { return subsystem_dims_; }

 private:
  Matrix entries_;
  std::vector<int> subsystem_dims_;
};

//------------------------------------------------------------------------------
// Unitaries
//------------------------------------------------------------------------------

class Unitary {
 public:
  explicit Unitary(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
      throw std::invalid_argument("Unitary: matrix must be square and nonempty");
    }
    if (!detail::is_finite(entries_)) {
      throw std::invalid_argument("Unitary: non-finite entry");
    }
    const int n = static_cast<int>(entries_.rows());
    Matrix gram = entries_.adjoint() * entries_;
    if ((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > kUnitaryTol) {
      throw std::invalid_argument("Unitary: columns are not orthonormal");
    }
  }

  static Unitary identity(int dim) {
    if (dim <= 0) throw std::invalid_argument("Unitary::identity: dim must be positive");
    return Unitary(Matrix::Identity(dim, dim));
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  Unitary adjoint() const { return Unitary(entries_.adjoint()); }

 private:
  Matrix entries_;
};

//------------------------------------------------------------------------------
// Spectra
//------------------------------------------------------------------------------

// Multiset of real eigenvalues, sorted descending. Values in [-kPsdTol, 0)
// are clipped to zero on construction; anything lower is rejected.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("Spectrum: empty value list");
    for (double& v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("Spectrum: non-finite value");
      if (v < -kPsdTol) {
        throw std::invalid_argument("Spectrum: eigenvalue below the PSD tolerance");
      }
      if (v < 0.0) v = 0.0;
    }
    std::sort(values_.begin(), values_.end(), std::greater<double>());
  }

  int dim() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& values() const { return values_; }

  double sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

 private:
  std::vector<double> values_;
};

//------------------------------------------------------------------------------
// The orthogonal rank-two pair
//------------------------------------------------------------------------------

// rho0 = p|0><0| + q|2><2| and rho1 = r|1><1| + s|3><3| on the fixed basis
// |0>,|1>,|2>,|3>. Supports are disjoint, so rho0 * rho1 = 0.
struct OrthoPair {
  DensityMatrix rho0;
  DensityMatrix rho1;
  double p, q, r, s;
};

inline OrthoPair make_orthogonal_pair(double p, double r) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("make_orthogonal_pair: p must lie in [0,1]");
  }
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::invalid_argument("make_orthogonal_pair: r must lie in [0,1]");
  }
  const double q = 1.0 - p;
  const double s = 1.0 - r;
  Matrix m0 = Matrix::Zero(4, 4);
  m0(0, 0) = p;
  m0(2, 2) = q;
  Matrix m1 = Matrix::Zero(4, 4);
  m1(1, 1) = r;
  m1(3, 3) = s;
  return OrthoPair{DensityMatrix(std::move(m0)), DensityMatrix(std::move(m1)), p, q, r, s};
}

//------------------------------------------------------------------------------
// Operations
//------------------------------------------------------------------------------

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  Matrix prod = Eigen::kroneckerProduct(a.entries(), b.entries());
  std::vector<int> dims = a.subsystem_dims();
  dims.insert(dims.end(), b.subsystem_dims().begin(), b.subsystem_dims().end());
  return DensityMatrix(std::move(prod), std::move(dims));
}

// Reduced state on the kept subsystems (original order preserved).
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<int> keep) {
  const auto& dims = rho.subsystem_dims();
  const int n_sub = static_cast<int>(dims.size());
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end()) {
    throw std::invalid_argument("partial_trace: duplicate subsystem index");
  }
  if (keep.front() < 0 || keep.back() >= n_sub) {
    throw std::invalid_argument("partial_trace: subsystem index out of range");
  }

  std::vector<int> traced;
  for (int i = 0; i < n_sub; ++i) {
    if (!std::binary_search(keep.begin(), keep.end(), i)) traced.push_back(i);
  }

  // Row-major strides of each subsystem index in the composite space.
  std::vector<long> stride(n_sub, 1);
  for (int i = n_sub - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

  long keep_dim = 1;
  for (int k : keep) keep_dim *= dims[k];
  long traced_dim = 1;
  for (int t : traced) traced_dim *= dims[t];

  // Map a linear index over the kept (resp. traced) subsystems to its offset
  // in the composite index.
  auto offset = [&](const std::vector<int>& subs, long linear) {
    long off = 0;
    for (int i = static_cast<int>(subs.size()) - 1; i >= 0; --i) {
      const int d = dims[subs[i]];
      off += (linear % d) * stride[subs[i]];
      linear /= d;
    }
    return off;
  };

  Matrix out = Matrix::Zero(keep_dim, keep_dim);
  for (long t = 0; t < traced_dim; ++t) {
    const long toff = offset(traced, t);
    for (long i = 0; i < keep_dim; ++i) {
      const long ioff = offset(keep, i) + toff;
      for (long j = 0; j < keep_dim; ++j) {
        out(i, j) += rho.entries()(ioff, offset(keep, j) + toff);
      }
    }
  }

  std::vector<int> out_dims;
  for (int k : keep) out_dims.push_back(dims[k]);
  return DensityMatrix(std::move(out), std::move(out_dims));
}

inline Spectrum spectrum(const DensityMatrix& rho) {
  Eigen::VectorXd lam = detail::hermitian_eigenvalues(rho.entries());
  return Spectrum(std::vector<double>(lam.data(), lam.data() + lam.size()));
}

// In bits; 0 log 0 = 0.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  const Spectrum spec = spectrum(rho);
  double h = 0.0;
  for (double lam : spec.values()) {
    if (lam > 0.0) h -= lam * std::log2(lam);
  }
  return std::max(h, 0.0);
}

// Uhlmann fidelity, squared convention: F = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  const Matrix sr = detail::psd_sqrt(rho.entries());
  Eigen::VectorXd lam = detail::hermitian_eigenvalues(sr * sigma.entries() * sr);
  double root = 0.0;
  for (long i = 0; i < lam.size(); ++i) root += std::sqrt(std::max(lam(i), 0.0));
  return std::clamp(root * root, 0.0, 1.0);
}

// (1/2) sum |eigenvalues of rho - sigma|.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  Eigen::VectorXd lam = detail::hermitian_eigenvalues(rho.entries() - sigma.entries());
  return std::clamp(0.5 * lam.cwiseAbs().sum(), 0.0, 1.0);
}

// U rho U^dag. Preserves the spectrum and the subsystem factorization.
inline DensityMatrix apply_unitary(const Unitary& u, const DensityMatrix& rho) {
  if (u.dim() != rho.dim()) {
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  }
  Matrix out = u.entries() * rho.entries() * u.entries().adjoint();
  return DensityMatrix(std::move(out), rho.subsystem_dims());
}

}  // namespace orthoclone
