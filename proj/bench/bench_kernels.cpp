// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <vector>

#include <harmeas/environment.hpp>
#include <harmeas/kernels.hpp>
#include <harmeas/monte_carlo.hpp>
#include <harmeas/solver.hpp>

using namespace harmeas;

namespace {

/// Killed-walk Laplacian of the l1 ball of radius r in Z^3.
const LaplacianMatrix& ball_matrix(int r) {
  static std::map<int, std::unique_ptr<LaplacianMatrix>> cache;
  auto& slot = cache[r];
  if (!slot) {
    auto g = lattice(3, r + 1, WindowShape::Diamond);
    auto b = ball(g, *g.find({0, 0, 0}), r);
    SolverOptions opt;
    opt.dense_threshold = 0;
    auto sys = make_region_system(g, b, opt);
    slot = std::make_unique<LaplacianMatrix>(sys.solver.matrix());
  }
  return *slot;
}

void BM_Spmv(benchmark::State& state, bool serial) {
  const auto& k = ball_matrix(static_cast<int>(state.range(0)));
  std::vector<double> x(k.size(), 1.0), y(k.size());
  for (auto _ : state) {
    if (serial) kernels::serial::spmv(k, x, y);
    else kernels::spmv(k, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(k.cols.size()));
}

void BM_Dot(benchmark::State& state, bool serial) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n, 0.5), b(n, 2.0);
  for (auto _ : state) {
    double s = serial ? kernels::serial::dot(a, b) : kernels::dot(a, b);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_ConjugateGradient(benchmark::State& state, bool serial) {
  const auto& k = ball_matrix(static_cast<int>(state.range(0)));
  std::vector<double> b(k.size(), 0.0), x(k.size());
  b[k.size() / 2] = 1.0;
  for (auto _ : state) {
    std::fill(x.begin(), x.end(), 0.0);
    auto st = conjugate_gradient(k, b, x, 1e-10, 0, serial);
    state.counters["iterations"] = static_cast<double>(st.iterations);
  }
}

void BM_MonteCarlo(benchmark::State& state, bool serial) {
  static auto g = lattice(2, 40, WindowShape::Diamond);
  const Vertex o = *g.find({0, 0});
  const VertexSet a{o, *g.find({1, 0})};
  const auto stop = boundary(g, ball(g, o, 16));
  McOptions opt;
  opt.walks = static_cast<std::uint64_t>(state.range(0));
  opt.seed = 11;
  opt.serial = serial;
  const Vertex x = *g.find({8, 0});
  for (auto _ : state) {
    auto r = mc_hitting(g, a, stop, x, opt);
    benchmark::DoNotOptimize(r.counts.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Spmv, parallel, false)->Arg(32)->Arg(64);
BENCHMARK_CAPTURE(BM_Spmv, serial, true)->Arg(32)->Arg(64);
BENCHMARK_CAPTURE(BM_Dot, parallel, false)->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK_CAPTURE(BM_Dot, serial, true)->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK_CAPTURE(BM_ConjugateGradient, parallel, false)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ConjugateGradient, serial, true)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_MonteCarlo, parallel, false)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_MonteCarlo, serial, true)->Arg(20000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
