#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace harmeas {

/// Sparse symmetric matrix K = diag(d) - W with W >= 0 off the diagonal,
/// stored row-wise. This is the pi-weighted Laplacian of a killed walk.
struct LaplacianMatrix {
  std::vector<std::int64_t> offsets{0};
  std::vector<std::int32_t> cols;
  std::vector<double> weights;  // W(i, cols[k]) > 0
  std::vector<double> diag;

  std::size_t size() const noexcept { return diag.size(); }
};

namespace kernels {

/// Reductions are summed in fixed blocks of this many entries, then the block
/// sums are added in order, so results do not depend on the thread count.
inline constexpr std::size_t kReduceBlock = 4096;

void spmv(const LaplacianMatrix& k, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpay(std::span<const double> x, double beta, std::span<double> y);
/// z = x * y elementwise
void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> z);

void set_threads(int n);
int max_threads();

/// Plain single-threaded reference versions, kept for testing and benchmarks.
namespace serial {
void spmv(const LaplacianMatrix& k, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double beta, std::span<double> y);
void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> z);
}  // namespace serial

}  // namespace kernels
}  // namespace harmeas
