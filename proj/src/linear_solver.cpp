#include <harmeas/linear_solver.hpp>

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <harmeas/error.hpp>

namespace harmeas {

struct SpdSolver::Dense {
  Eigen::LLT<Eigen::MatrixXd> llt;
};

namespace {

struct Ops {
  bool serial;
  void spmv(const LaplacianMatrix& k, std::span<const double> x, std::span<double> y) const {
    serial ? kernels::serial::spmv(k, x, y) : kernels::spmv(k, x, y);
  }
  double dot(std::span<const double> a, std::span<const double> b) const {
    return serial ? kernels::serial::dot(a, b) : kernels::dot(a, b);
  }
  void axpy(double a, std::span<const double> x, std::span<double> y) const {
    serial ? kernels::serial::axpy(a, x, y) : kernels::axpy(a, x, y);
  }
  void xpay(std::span<const double> x, double b, std::span<double> y) const {
    serial ? kernels::serial::xpay(x, b, y) : kernels::xpay(x, b, y);
  }
  void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> z) const {
    serial ? kernels::serial::hadamard(x, y, z) : kernels::hadamard(x, y, z);
  }
};

double residual_norm(const Ops& ops, const LaplacianMatrix& k, std::span<const double> b,
                     std::span<const double> x, std::vector<double>& scratch) {
  scratch.resize(b.size());
  ops.spmv(k, x, scratch);
  for (std::size_t i = 0; i < b.size(); ++i) scratch[i] = b[i] - scratch[i];
  return std::sqrt(ops.dot(scratch, scratch));
}

}  // namespace

SolveStats conjugate_gradient(const LaplacianMatrix& k, std::span<const double> b,
                              std::span<double> x, double rel_tol, long max_iter,
                              bool serial) {
  const Ops ops{serial};
  const std::size_t n = k.size();
  SolveStats st;
  const double bnorm = std::sqrt(ops.dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return st;
  }
  if (max_iter <= 0) max_iter = 50000 + static_cast<long>(n);

  std::vector<double> inv_diag(n), r(n), z(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / k.diag[i];
  ops.spmv(k, x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  ops.hadamard(inv_diag, r, z);
  p = z;
  double rz = ops.dot(r, z);
  double rnorm = std::sqrt(ops.dot(r, r));
  long it = 0;
  while (rnorm > rel_tol * bnorm && it < max_iter) {
    ops.spmv(k, p, q);
    const double alpha = rz / ops.dot(p, q);
    ops.axpy(alpha, p, x);
    ops.axpy(-alpha, q, r);
    ops.hadamard(inv_diag, r, z);
    const double rz_new = ops.dot(r, z);
    ops.xpay(z, rz_new / rz, p);
    rz = rz_new;
    rnorm = std::sqrt(ops.dot(r, r));
    ++it;
  }
  std::vector<double> scratch;
  st.iterations = it;
  st.rel_residual = residual_norm(ops, k, b, x, scratch) / bnorm;
  if (st.rel_residual > rel_tol * 10.0 && rnorm > rel_tol * bnorm)
    throw SolverError("conjugate gradients stopped after " + std::to_string(it) +
                          " iterations at relative residual " +
                          std::to_string(st.rel_residual),
                      st.rel_residual, it);
  return st;
}

SpdSolver::SpdSolver(LaplacianMatrix k, SolverOptions opt)
    : k_(std::move(k)), opt_(opt) {
  const std::size_t n = k_.size();
  if (n == 0 || n >= opt_.dense_threshold) return;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = k_.diag[i];
    for (auto p = k_.offsets[i]; p < k_.offsets[i + 1]; ++p) m(i, k_.cols[p]) -= k_.weights[p];
  }
  dense_ = std::make_unique<Dense>();
  dense_->llt.compute(m);
  if (dense_->llt.info() != Eigen::Success)
    fail(ErrorKind::Singular, "dense factorization failed: system is not positive definite");
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

SolveStats SpdSolver::solve(std::span<const double> b, std::span<double> x) const {
  require(b.size() == k_.size() && x.size() == k_.size(), "SpdSolver: size mismatch");
  if (!dense_)
    return conjugate_gradient(k_, b, x, opt_.rel_tol, opt_.max_iter, opt_.serial);

  const auto n = static_cast<Eigen::Index>(k_.size());
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
  Eigen::Map<Eigen::VectorXd> xv(x.data(), n);
  xv = dense_->llt.solve(bv);
  SolveStats st;
  st.dense = true;
  const double bnorm = bv.norm();
  if (bnorm > 0.0) {
    std::vector<double> scratch;
    st.rel_residual = residual_norm(Ops{true}, k_, b, x, scratch) / bnorm;
  }
  return st;
}

}  // namespace harmeas
