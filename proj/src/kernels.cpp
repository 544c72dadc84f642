#include <harmeas/kernels.hpp>

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace harmeas::kernels {

namespace {

std::size_t num_blocks(std::size_t n) { return (n + kReduceBlock - 1) / kReduceBlock; }

}  // namespace

void spmv(const LaplacianMatrix& k, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(k.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double s = k.diag[i] * x[i];
    for (auto p = k.offsets[i]; p < k.offsets[i + 1]; ++p) s -= k.weights[p] * x[k.cols[p]];
    y[i] = s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const auto nb = static_cast<std::int64_t>(num_blocks(n));
  std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < nb; ++blk) {
    const std::size_t lo = blk * kReduceBlock;
    const std::size_t hi = std::min(n, lo + kReduceBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[blk] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double norm_inf(std::span<const double> a) {
  const auto n = static_cast<std::int64_t>(a.size());
  double m = 0.0;
#pragma omp parallel for reduction(max : m) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpay(std::span<const double> x, double beta, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> z) {
  const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

namespace serial {

void spmv(const LaplacianMatrix& k, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < k.size(); ++i) {
    double s = k.diag[i] * x[i];
    for (auto p = k.offsets[i]; p < k.offsets[i + 1]; ++p) s -= k.weights[p] * x[k.cols[p]];
    y[i] = s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void xpay(std::span<const double> x, double beta, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> z) {
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] * y[i];
}

}  // namespace serial
}  // namespace harmeas::kernels
