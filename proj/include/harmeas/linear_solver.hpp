#pragma once

#include <memory>
#include <span>

#include <harmeas/kernels.hpp>

namespace harmeas {

struct SolverOptions {
  double rel_tol = 1e-10;
  long max_iter = 0;                  // 0: automatic
  std::size_t dense_threshold = 2000; // dense Cholesky below this many unknowns
  bool serial = false;                // use the reference kernels
};

struct SolveStats {
  long iterations = 0;
  double rel_residual = 0.0;  // ||b - Kx||_2 / ||b||_2
  bool dense = false;
};

/// Solver for K x = b with K a killed-walk Laplacian. Small systems are
/// factored once (dense LLT) and reused for every right-hand side; larger ones
/// use Jacobi-preconditioned conjugate gradients.
class SpdSolver {
 public:
  explicit SpdSolver(LaplacianMatrix k, SolverOptions opt = {});
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  /// x holds the initial guess on entry (ignored by the dense path).
  /// Throws SolverError when CG stops above tolerance.
  SolveStats solve(std::span<const double> b, std::span<double> x) const;

  const LaplacianMatrix& matrix() const noexcept { return k_; }
  const SolverOptions& options() const noexcept { return opt_; }
  bool dense() const noexcept { return static_cast<bool>(dense_); }

 private:
  struct Dense;
  LaplacianMatrix k_;
  SolverOptions opt_;
  std::unique_ptr<Dense> dense_;
};

/// Plain preconditioned CG, exposed for tests and benchmarks.
SolveStats conjugate_gradient(const LaplacianMatrix& k, std::span<const double> b,
                              std::span<double> x, double rel_tol, long max_iter,
                              bool serial);

}  // namespace harmeas
