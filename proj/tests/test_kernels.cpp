#include <doctest.h>

#include <random>

#include <harmeas/environment.hpp>
#include <harmeas/error.hpp>
#include <harmeas/kernels.hpp>
#include <harmeas/linear_solver.hpp>
#include <harmeas/solver.hpp>

using namespace harmeas;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("parallel kernels match the serial reference") {
  auto g = lattice(2, 60);
  const Vertex o = *g.find({0, 0});
  auto sys = make_region_system(g, ball(g, o, 55));
  const auto& k = sys.solver.matrix();
  const std::size_t n = k.size();
  auto x = random_vector(n, 1);
  auto y = random_vector(n, 2);

  std::vector<double> a(n), b(n);
  kernels::spmv(k, x, a);
  kernels::serial::spmv(k, x, b);
  for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == b[i]);

  CHECK(kernels::dot(x, y) == doctest::Approx(kernels::serial::dot(x, y)).epsilon(1e-12));
  CHECK(kernels::norm_inf(x) == kernels::serial::norm_inf(x));

  auto p = y, q = y;
  kernels::axpy(0.3, x, p);
  kernels::serial::axpy(0.3, x, q);
  CHECK(p == q);
  kernels::xpay(x, -1.7, p);
  kernels::serial::xpay(x, -1.7, q);
  CHECK(p == q);
}

TEST_CASE("reductions do not depend on the thread count") {
  auto x = random_vector(100000, 5);
  auto y = random_vector(100000, 6);
  const int before = kernels::max_threads();
  kernels::set_threads(1);
  const double one = kernels::dot(x, y);
  kernels::set_threads(4);
  const double four = kernels::dot(x, y);
  kernels::set_threads(before);
  CHECK(one == four);
}

TEST_CASE("CG agrees with the dense path and the serial CG") {
  auto g = lattice(2, 30);
  const Vertex o = *g.find({0, 0});
  auto region = ball(g, o, 28);
  SolverOptions dense;
  dense.dense_threshold = 100000;
  SolverOptions cg;
  cg.dense_threshold = 0;
  SolverOptions serial = cg;
  serial.serial = true;
  auto a = dirichlet_green(g, region, o, dense);
  auto b = dirichlet_green(g, region, o, cg);
  auto c = dirichlet_green(g, region, o, serial);
  CHECK(a.stats.dense);
  CHECK_FALSE(b.stats.dense);
  CHECK(b.stats.iterations > 0);
  for (Vertex v : region) {
    CHECK(a.value(v) == doctest::Approx(b.value(v)).epsilon(1e-8));
    CHECK(b.value(v) == doctest::Approx(c.value(v)).epsilon(1e-12));
  }
}

TEST_CASE("CG reports non-convergence") {
  auto g = lattice(2, 30);
  const Vertex o = *g.find({0, 0});
  SolverOptions opt;
  opt.dense_threshold = 0;
  opt.max_iter = 3;
  try {
    dirichlet_green(g, ball(g, o, 28), o, opt);
    FAIL("expected non-convergence");
  } catch (const SolverError& e) {
    CHECK(e.iterations() == 3);
    CHECK(e.residual() > 1e-10);
  }
}
