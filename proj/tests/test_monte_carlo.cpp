#include <doctest.h>

#include <harmeas/environment.hpp>
#include <harmeas/kernels.hpp>
#include <harmeas/monte_carlo.hpp>

#include "oracles.hpp"

using namespace harmeas;

TEST_CASE("walk started in the target is a delta") {
  auto g = lattice(2, 5);
  const Vertex o = *g.find({0, 0});
  McOptions opt;
  opt.walks = 1000;
  opt.seed = 3;
  auto r = mc_hitting(g, VertexSet{o}, VertexSet{}, o, opt);
  CHECK(r.counts[0] == 1000);
  CHECK(r.std_errors[0] == 0.0);
}

TEST_CASE("symmetric pair in a Z2 box") {
  auto g = lattice(2, 10);
  const Vertex a = *g.find({-1, 0}), b = *g.find({1, 0}), x = *g.find({0, 6});
  McOptions opt;
  opt.walks = 100000;
  opt.seed = 17;
  auto r = mc_hitting(g, VertexSet{a, b}, VertexSet{}, x, opt);
  CHECK(r.censored == 0);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(r.weights[i] - 0.5) < 4 * r.std_errors[i]);
}

TEST_CASE("Monte Carlo agrees with the exact solve") {
  auto g = oracle::random_graph(25, 4, 0.15);
  VertexSet a{2, 9}, stop{20};
  McOptions opt;
  opt.walks = 100000;
  opt.seed = 99;
  auto mc = mc_hitting(g, a, stop, 14, opt);
  auto exact = hitting_distribution(g, a, stop, 14);
  auto agree = compare_mc_exact(mc, exact.measure, 1e-4);
  CHECK(agree.pass);
  CHECK(agree.max_z < 4.0);
}

TEST_CASE("results do not depend on threads or the serial path") {
  auto g = oracle::random_graph(30, 8, 0.1);
  McOptions opt;
  opt.walks = 20000;
  opt.seed = 5;
  auto a = mc_hitting(g, VertexSet{0, 1}, VertexSet{29}, 15, opt);
  opt.serial = true;
  auto b = mc_hitting(g, VertexSet{0, 1}, VertexSet{29}, 15, opt);
  opt.serial = false;
  const int before = kernels::max_threads();
  kernels::set_threads(3);
  auto c = mc_hitting(g, VertexSet{0, 1}, VertexSet{29}, 15, opt);
  kernels::set_threads(before);
  CHECK(a.counts == b.counts);
  CHECK(a.counts == c.counts);
}

TEST_CASE("censoring is reported separately") {
  auto g = lattice(2, 30);
  const Vertex o = *g.find({0, 0}), x = *g.find({25, 0});
  McOptions opt;
  opt.walks = 2000;
  opt.seed = 1;
  opt.step_cap = 10;
  auto r = mc_hitting(g, VertexSet{o}, VertexSet{}, x, opt);
  CHECK(r.censored == 2000);
  CHECK(r.censored_fraction == 1.0);
  CHECK(r.weights[0] == 0.0);
}

TEST_CASE("binomial p-values") {
  CHECK(binomial_two_sided_p(50, 100, 0.5) == doctest::Approx(1.0));
  CHECK(binomial_two_sided_p(0, 100, 0.5) < 1e-20);
  CHECK(binomial_two_sided_p(0, 10, 0.0) == 1.0);
  CHECK(binomial_two_sided_p(1, 10, 0.0) == 0.0);
}
