#pragma once

// Numerical search over the unitary group for closed cloners and deleters,
// plus the explicit permutation gates that solve the pure and the degenerate
// equal-spectra cases analytically.
//
// Unitaries are parameterized as U = exp(iH) with H expanded in a fixed
// Hermitian basis, which is surjective onto U(dim). The basis order is:
// indices 0..dim-1 are the diagonal units e_kk, then for each index pair
// (k,l) with k<l in lexicographic order the symmetric unit e_kl + e_lk
// followed by the antisymmetric unit i e_kl - i e_lk. A parameter vector
// therefore has exactly dim^2 entries.
//
// The optimizer is a multi-restart L-BFGS. Restart k seeds std::mt19937_64
// with master_seed XOR k, so restarts are independent and the whole search is
// reproducible bit for bit; restarts may run on several threads without
// changing the result because each one is self-contained and the merge picks
// the minimum objective, ties going to the lowest restart index.

#include <orthoclone/obstruction.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace orthoclone {

struct UnitaryAnsatz {
  UnitaryAnsatz(int dim_, std::vector<double> params_)
      : dim(dim_), params(std::move(params_)) {
    if (dim < 1) throw std::invalid_argument("ansatz dimension must be positive");
    if (params.size() != static_cast<size_t>(dim) * static_cast<size_t>(dim)) {
      throw std::invalid_argument("ansatz needs dim^2 generator coefficients");
    }
  }

  int dim;
  std::vector<double> params;
};

struct SearchConfig {
  int restarts = 20;
  int max_iters = 500;
  double grad_tol = 1e-10;
  double step_tol = 1e-12;
  std::uint64_t master_seed = 42;
  double success_threshold = 1e-6;
  double exactness_threshold = 1e-9;
};

enum class Verdict { found, not_found };

inline const char* verdict_name(Verdict v) {
  return v == Verdict::found ? "found" : "not_found";
}

struct TracePoint {
  int iteration;
  double objective;
};

struct SearchResult {
  double best_objective = 0.0;
  std::vector<double> best_params;
  bool converged = false;
  long long iterations_used = 0;
  std::vector<TracePoint> trace;
  std::uint64_t seed_used = 0;
  Verdict verdict = Verdict::not_found;
};

namespace detail {

// a restart stops once the objective cannot meaningfully improve any more
inline constexpr double kObjectiveStopFloor = 1e-12;

inline Matrix generator_from_params(int dim, const Eigen::Ref<const Eigen::VectorXd>& params) {
  if (params.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw std::invalid_argument("generator needs dim^2 coefficients");
  }
  Matrix h = Matrix::Zero(dim, dim);
  int idx = 0;
  for (int k = 0; k < dim; ++k) h(k, k) = params[idx++];
  for (int k = 0; k < dim; ++k) {
    for (int l = k + 1; l < dim; ++l) {
      const double s = params[idx++];
      const double a = params[idx++];
      h(k, l) = Complex(s, a);
      h(l, k) = Complex(s, -a);
    }
  }
  return h;
}

inline double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

[[noreturn]] inline void throw_nonfinite(const char* what,
                                         const Eigen::Ref<const Eigen::VectorXd>& params) {
  std::ostringstream msg;
  msg << what << "; params:" << std::setprecision(17);
  for (Eigen::Index i = 0; i < params.size(); ++i) msg << ' ' << params[i];
  throw numeric_error(msg.str());
}

// Fast path for the search objective. The target B of each fidelity term has
// low rank, so F(X, B) = (tr sqrt(sqrt(B) X sqrt(B)))^2 reduces to the
// spectrum of the small matrix M = D S^dag X S D, where S holds the unit
// eigenvectors of B and D = diag(sqrt(beta)). With X = U A U^dag and
// A = C C^dag this needs only rows of U against the factors, never a 16x16
// fidelity. Gradients come from the eigendecomposition of the generator via
// the divided-difference rule d exp(iH) = V (Phi . (V^dag i dH V)) V^dag,
// folded through the chain rule in closed form.
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(Task task, const OrthoPair& pair, const DensityMatrix& blank) {
    if (pair.rho0.dim() != 4 || pair.rho1.dim() != 4) {
      throw std::invalid_argument("search expects a pair of 4-dim states");
    }
    if (blank.dim() != 4) {
      throw std::invalid_argument("search expects a 4-dim blank state");
    }
    for (int i = 0; i < 2; ++i) {
      const DensityMatrix& rho = i == 0 ? pair.rho0 : pair.rho1;
      const DensityMatrix doubled = tensor(rho, rho);
      const DensityMatrix padded = tensor(rho, blank);
      const DensityMatrix& input = task == Task::Clone ? padded : doubled;
      const DensityMatrix& target = task == Task::Clone ? doubled : padded;
      terms_[i].c = sqrt_factor(input.entries());
      factor_target(target.entries(), terms_[i]);
    }
  }

  int dim() const { return 16; }
  int param_count() const { return 256; }

  double value(const Eigen::Ref<const Eigen::VectorXd>& params) const {
    return eval(params, nullptr);
  }

  double value_and_grad(const Eigen::Ref<const Eigen::VectorXd>& params,
                        Eigen::VectorXd& grad) const {
    return eval(params, &grad);
  }

 private:
  struct Term {
    Matrix c;                     // input factor, A = c c^dag
    Matrix s;                     // unit eigenvectors of the target
    Eigen::VectorXcd beta_sqrt;   // sqrt of the target eigenvalues
  };

  static Matrix sqrt_factor(const Matrix& a) {
    auto es = hermitian_eigensystem(a);
    std::vector<int> keep;
    for (int j = 0; j < es.eigenvalues().size(); ++j) {
      if (es.eigenvalues()[j] > kProbTol) keep.push_back(j);
    }
    Matrix c(a.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j) {
      c.col(j) = std::sqrt(es.eigenvalues()[keep[j]]) * es.eigenvectors().col(keep[j]);
    }
    return c;
  }

  static void factor_target(const Matrix& b, Term& term) {
    auto es = hermitian_eigensystem(b);
    std::vector<int> keep;
    for (int j = 0; j < es.eigenvalues().size(); ++j) {
      if (es.eigenvalues()[j] > kProbTol) keep.push_back(j);
    }
    term.s.resize(b.rows(), static_cast<Eigen::Index>(keep.size()));
    term.beta_sqrt.resize(static_cast<Eigen::Index>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j) {
      term.s.col(j) = es.eigenvectors().col(keep[j]);
      term.beta_sqrt[j] = std::sqrt(es.eigenvalues()[keep[j]]);
    }
  }

  double eval(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd* grad) const {
    if (x.size() != param_count()) {
      throw std::invalid_argument("objective expects 256 generator coefficients");
    }
    if (!x.allFinite()) throw_nonfinite("non-finite objective parameters", x);

    const int n = dim();
    const Matrix h = generator_from_params(n, x);
    auto es = hermitian_eigensystem(h);
    const Matrix& v = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();
    Eigen::VectorXcd phase(n);
    for (int k = 0; k < n; ++k) phase[k] = std::polar(1.0, lam[k]);

    double acc = 0.0;
    Matrix r_total;
    if (grad) r_total = Matrix::Zero(n, n);

    for (const Term& term : terms_) {
      const Matrix sv = term.s.adjoint() * v;               // mB x n
      const Matrix vc = v.adjoint() * term.c;               // n x mA
      const Matrix w = sv * phase.asDiagonal() * vc;        // mB x mA
      Matrix m = term.beta_sqrt.asDiagonal() * (w * w.adjoint()) *
                 term.beta_sqrt.asDiagonal();
      m = Matrix(0.5 * (m + m.adjoint()));
      auto mes = hermitian_eigensystem(m);
      double root = 0.0;
      for (int j = 0; j < mes.eigenvalues().size(); ++j) {
        root += std::sqrt(std::max(mes.eigenvalues()[j], 0.0));
      }
      acc += std::max(0.0, 1.0 - root * root);

      if (grad) {
        Eigen::VectorXcd inv_sqrt(mes.eigenvalues().size());
        for (int j = 0; j < mes.eigenvalues().size(); ++j) {
          const double mu = mes.eigenvalues()[j];
          inv_sqrt[j] = mu > 1e-18 ? 0.5 / std::sqrt(mu) : 0.0;
        }
        const Matrix gmat = mes.eigenvectors() * inv_sqrt.asDiagonal() *
                            mes.eigenvectors().adjoint();
        const Matrix mid = w.adjoint() * (term.beta_sqrt.asDiagonal() * gmat *
                                          term.beta_sqrt.asDiagonal());
        r_total.noalias() +=
            (-2.0 * root) * (term.c * (mid * term.s.adjoint()));
      }
    }

    const double obj = std::clamp(0.5 * acc, 0.0, 1.0);
    if (!std::isfinite(obj)) throw_nonfinite("non-finite objective value", x);
    if (!grad) return obj;

    Matrix phi(n, n);
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        phi(k, l) = sinc(0.5 * (lam[k] - lam[l])) *
                    std::polar(1.0, 0.5 * (lam[k] + lam[l]));
      }
    }
    const Matrix q = v.adjoint() * r_total * v;
    const Matrix z = q.transpose().cwiseProduct(phi);
    const Matrix y = v.conjugate() * z * v.transpose();

    grad->resize(param_count());
    int idx = 0;
    for (int k = 0; k < n; ++k) (*grad)[idx++] = -std::imag(y(k, k));
    for (int k = 0; k < n; ++k) {
      for (int l = k + 1; l < n; ++l) {
        (*grad)[idx++] = -std::imag(y(k, l) + y(l, k));
        (*grad)[idx++] = -std::real(y(k, l) - y(l, k));
      }
    }
    if (!grad->allFinite()) throw_nonfinite("non-finite objective gradient", x);
    return obj;
  }

  std::array<Term, 2> terms_;
};

inline double unit_double(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

struct RestartOutcome {
  double best_objective = 0.0;
  Eigen::VectorXd best_params;
  bool converged = false;
  int iterations = 0;
  std::vector<TracePoint> trace;
  std::uint64_t seed = 0;
};

inline RestartOutcome run_restart(const ObjectiveEvaluator& eval, const SearchConfig& cfg,
                                  std::uint64_t seed) {
  constexpr double kPi = 3.14159265358979323846;
  const int n = eval.param_count();
  std::mt19937_64 gen(seed);
  Eigen::VectorXd x(n);
  for (int j = 0; j < n; ++j) x[j] = kPi * (2.0 * unit_double(gen) - 1.0);

  RestartOutcome out;
  out.seed = seed;

  Eigen::VectorXd g(n), g_new(n);
  double f = eval.value_and_grad(x, g);
  out.best_objective = f;
  out.best_params = x;
  out.trace.push_back({0, f});

  constexpr int kHistory = 8;
  std::vector<Eigen::VectorXd> s_hist, y_hist;
  std::vector<double> rho_hist;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
      out.converged = true;
      break;
    }

    // two-loop recursion for the quasi-Newton direction
    Eigen::VectorXd d = g;
    const int hist = static_cast<int>(s_hist.size());
    std::vector<double> alpha(hist);
    for (int j = hist - 1; j >= 0; --j) {
      alpha[j] = rho_hist[j] * s_hist[j].dot(d);
      d -= alpha[j] * y_hist[j];
    }
    if (hist > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int j = 0; j < hist; ++j) {
      const double beta = rho_hist[j] * y_hist[j].dot(d);
      d += (alpha[j] - beta) * s_hist[j];
    }
    d = -d;

    double gd = g.dot(d);
    if (gd > -1e-18) {
      d = -g;
      gd = -g.squaredNorm();
      if (gd > -1e-18) {
        out.converged = true;
        break;
      }
    }

    double step = it == 1 ? std::min(1.0, 1.0 / std::max(g.lpNorm<Eigen::Infinity>(), 1e-12))
                          : 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + step * d;
      const double f_try = eval.value(x_new);
      if (f_try <= f + 1e-4 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;
      break;
    }

    const double f_new = eval.value_and_grad(x_new, g_new);
    Eigen::VectorXd s_vec = x_new - x;
    Eigen::VectorXd y_vec = g_new - g;
    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-18) {
      s_hist.push_back(std::move(s_vec));
      y_hist.push_back(std::move(y_vec));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > kHistory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }

    x = std::move(x_new);
    g = g_new;
    f = f_new;
    out.iterations = it;
    if (f < out.best_objective) {
      out.best_objective = f;
      out.best_params = x;
    }
    out.trace.push_back({it, out.best_objective});

    if (out.best_objective <= kObjectiveStopFloor ||
        step * d.lpNorm<Eigen::Infinity>() <= cfg.step_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

inline std::vector<TracePoint> subsample_trace(const std::vector<TracePoint>& trace,
                                               size_t cap = 1000) {
  if (trace.size() <= cap) return trace;
  std::vector<TracePoint> out;
  out.reserve(cap);
  for (size_t i = 0; i < cap; ++i) {
    out.push_back(trace[i * (trace.size() - 1) / (cap - 1)]);
  }
  return out;
}

inline void validate_config(const SearchConfig& cfg) {
  if (cfg.restarts < 1) throw std::invalid_argument("restarts must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (!(cfg.grad_tol >= 0) || !(cfg.step_tol >= 0)) {
    throw std::invalid_argument("tolerances must be non-negative");
  }
  if (!(cfg.exactness_threshold > 0) ||
      !(cfg.success_threshold > cfg.exactness_threshold)) {
    throw std::invalid_argument(
        "thresholds must satisfy success_threshold > exactness_threshold > 0");
  }
}

}  // namespace detail

inline Unitary ansatz_to_unitary(const UnitaryAnsatz& a) {
  const Matrix h = detail::generator_from_params(
      a.dim, Eigen::Map<const Eigen::VectorXd>(a.params.data(),
                                               static_cast<Eigen::Index>(a.params.size())));
  auto es = detail::hermitian_eigensystem(h);
  Eigen::VectorXcd phase(a.dim);
  for (int k = 0; k < a.dim; ++k) phase[k] = std::polar(1.0, es.eigenvalues()[k]);
  return Unitary(es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint());
}

// |a>|b> -> |a>|(a+b) mod d>; at d=2 this is the two-qubit controlled-not,
// and at d=4 the permutation that clones the pure pair exactly.
inline Unitary controlled_sum_gate(int d) {
  if (d < 2) throw std::invalid_argument("controlled-sum needs a local dimension of at least 2");
  Matrix u = Matrix::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      u(a * d + (a + b) % d, a * d + b) = 1.0;
    }
  }
  return Unitary(u);
}

// Closed cloner for pairs with equal spectra (p = r) against a rho0 blank:
// identity while the system lies in span{|0>,|2>}, and a swap of the blank
// basis pairs |0><->|1>, |2><->|3> while it lies in span{|1>,|3>}. The p
// argument pins down the intended parameter range; the gate itself is the
// same permutation for every p strictly inside (0,1).
inline Unitary degenerate_clone_unitary(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("degenerate cloner needs p strictly inside (0,1)");
  }
  Matrix u = Matrix::Zero(16, 16);
  for (int s = 0; s < 4; ++s) {
    for (int c = 0; c < 4; ++c) {
      const int target = s % 2 == 0 ? c : c ^ 1;
      u(s * 4 + target, s * 4 + c) = 1.0;
    }
  }
  return Unitary(u);
}

inline double cloning_objective(const Unitary& u, const OrthoPair& pair,
                                const DensityMatrix& blank) {
  if (u.dim() != 16) {
    throw std::invalid_argument("cloning objective needs a 16-dim unitary");
  }
  if (blank.dim() != 4) {
    throw std::invalid_argument("cloning objective needs a 4-dim blank");
  }
  double acc = 0.0;
  for (const DensityMatrix* rho : {&pair.rho0, &pair.rho1}) {
    const DensityMatrix out = apply_unitary(u, tensor(*rho, blank));
    acc += 1.0 - fidelity(out, tensor(*rho, *rho));
  }
  return std::clamp(0.5 * acc, 0.0, 1.0);
}

inline double deletion_objective(const Unitary& u, const OrthoPair& pair,
                                 const DensityMatrix& blank) {
  if (u.dim() != 16) {
    throw std::invalid_argument("deletion objective needs a 16-dim unitary");
  }
  if (blank.dim() != 4) {
    throw std::invalid_argument("deletion objective needs a 4-dim blank");
  }
  double acc = 0.0;
  for (const DensityMatrix* rho : {&pair.rho0, &pair.rho1}) {
    const DensityMatrix out = apply_unitary(u, tensor(*rho, *rho));
    acc += 1.0 - fidelity(out, tensor(*rho, blank));
  }
  return std::clamp(0.5 * acc, 0.0, 1.0);
}

inline SearchResult minimize(Task task, const OrthoPair& pair, const DensityMatrix& blank,
                             const SearchConfig& config, int threads = 1) {
  detail::validate_config(config);
  if (threads < 1) throw std::invalid_argument("thread count must be positive");

  const detail::ObjectiveEvaluator eval(task, pair, blank);
  const int restarts = config.restarts;
  std::vector<detail::RestartOutcome> outcomes(restarts);
  std::vector<std::exception_ptr> errors(restarts);

  auto worker = [&](int offset) {
    for (int k = offset; k < restarts; k += threads) {
      try {
        outcomes[k] =
            detail::run_restart(eval, config, config.master_seed ^ static_cast<std::uint64_t>(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (auto& th : pool) th.join();
  }
  for (int k = 0; k < restarts; ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
  }

  int win = 0;
  long long total_iters = 0;
  for (int k = 0; k < restarts; ++k) {
    total_iters += outcomes[k].iterations;
    if (outcomes[k].best_objective < outcomes[win].best_objective) win = k;
  }

  SearchResult res;
  res.best_objective = outcomes[win].best_objective;
  res.best_params.assign(outcomes[win].best_params.data(),
                         outcomes[win].best_params.data() + outcomes[win].best_params.size());
  res.converged = outcomes[win].converged;
  res.iterations_used = total_iters;
  res.trace = detail::subsample_trace(outcomes[win].trace);
  res.seed_used = outcomes[win].seed;
  res.verdict = res.best_objective <= config.success_threshold ? Verdict::found
                                                               : Verdict::not_found;
  return res;
}

}  // namespace orthoclone
