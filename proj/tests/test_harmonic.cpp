#include <doctest.h>

#include <cmath>
#include <random>

#include <harmeas/capacity.hpp>
#include <harmeas/environment.hpp>
#include <harmeas/error.hpp>
#include <harmeas/harmonic_measure.hpp>

#include "oracles.hpp"

using namespace harmeas;

namespace {

// H_A^m from the dense hitting kernel of A together with the outside of B.
std::vector<double> brute_finite_ball(const WeightedGraph& g, const VertexSet& a, const VertexSet& b) {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < static_cast<Vertex>(g.num_vertices()); ++v)
    if (!b.contains(v)) out.push_back(v);
  const VertexSet bc(out);
  const VertexSet t = set_union(a, bc);
  auto h = oracle::hitting_kernel(g, t);
  auto p = oracle::transition_matrix(g);
  std::vector<double> w;
  double s = 0.0;
  for (Vertex y : a) {
    double e = 0.0;
    for (Vertex z = 0; z < static_cast<Vertex>(g.num_vertices()); ++z)
      for (std::size_t k = 0; k < t.size(); ++k)
        if (bc.contains(t[k])) e += p(y, z) * h(z, static_cast<Eigen::Index>(k));
    w.push_back(g.pi(y) * e);
    s += w.back();
  }
  for (auto& x : w) x /= s;
  return w;
}

}  // namespace

TEST_CASE("finite ball measure examples") {
  auto z2 = lattice(2, 40, WindowShape::Diamond);
  const Vertex o = *z2.find({0, 0});
  auto single = finite_ball_measure(z2, VertexSet{o}, o, 8);
  CHECK(single.measure.weights == std::vector<double>{1.0});

  const Vertex l = *z2.find({-1, 0}), r = *z2.find({1, 0});
  auto pair = finite_ball_measure(z2, VertexSet{l, r}, o, 8);
  CHECK(pair.measure.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pair.capacity_check < 1e-10);
  CHECK(pair.measure.total() == doctest::Approx(1.0).epsilon(1e-14));

  const Vertex e1 = *z2.find({1, 0});
  auto adj = finite_ball_measure(z2, VertexSet{o, e1}, o, 32);
  CHECK(adj.measure.weights[0] == doctest::Approx(0.5).epsilon(0.02));

  CHECK_THROWS_AS(finite_ball_measure(z2, VertexSet{*z2.find({9, 0})}, o, 8), Error);

  auto z3 = lattice(3, 17, WindowShape::Diamond);
  const Vertex c = *z3.find({1, 0, 0});
  VertexSet line{*z3.find({0, 0, 0}), c, *z3.find({2, 0, 0})};
  auto m = finite_ball_measure(z3, line, c, 16);
  const double w0 = m.measure.weight(line[0]), w1 = m.measure.weight(c), w2 = m.measure.weight(line[2]);
  CHECK(w1 < w0);
  CHECK(w0 == doctest::Approx(w2).epsilon(1e-9));
}

TEST_CASE("finite ball measure against the dense oracle") {
  std::mt19937_64 rng(21);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto g = oracle::random_graph(10 + trial % 15, 3000 + trial, 0.15);
    const Vertex x0 = static_cast<Vertex>(rng() % g.num_vertices());
    const int m = 2 + static_cast<int>(rng() % 3);
    auto b = ball(g, x0, m);
    if (boundary(g, b).empty()) continue;
    std::vector<Vertex> ids;
    for (Vertex v : b)
      if (rng() % 3 == 0) ids.push_back(v);
    if (ids.empty()) ids.push_back(x0);
    VertexSet a(ids);
    auto res = finite_ball_measure(g, a, x0, m);
    auto ref = brute_finite_ball(g, a, b);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(res.measure.weights[i] == doctest::Approx(ref[i]).epsilon(1e-9));
    CHECK(res.capacity_check < 1e-10);
    ++checked;
  }
  CHECK(checked > 30);
}

TEST_CASE("transient limit and escape formula on Z3") {
  auto z3 = lattice(3, 33, WindowShape::Diamond);
  const Vertex o = *z3.find({0, 0, 0});
  VertexSet far{o, *z3.find({3, 0, 0})};
  auto t = transient_limit_measure(z3, far, o, {8, 16, 32});
  REQUIRE(t.tv.size() == 2);
  CHECK(t.tv[1] < t.tv[0]);
  CHECK(t.cauchy);
  CHECK(t.flag.empty());

  const Vertex e1 = *z3.find({1, 0, 0}), e2 = *z3.find({0, 1, 0});
  VertexSet ell{o, e1, e2};
  auto tl = transient_limit_measure(z3, ell, o, {8, 16});
  for (const auto& m : tl.per_scale) CHECK(m.weight(e1) == doctest::Approx(m.weight(e2)).epsilon(1e-9));

  auto es = escape_formula_measure(z3, ell, o, {8, 16, 32});
  auto tl32 = transient_limit_measure(z3, ell, o, {16, 32});
  CHECK(total_variation(es.measure, tl32.measure) < 0.01);
}

TEST_CASE("observed measures") {
  auto z2 = lattice(2, 30, WindowShape::Diamond);
  const Vertex o = *z2.find({0, 0});
  auto w = ball(z2, o, 30);
  MeasureOnSet delta{VertexSet{o}, {1.0}, 0.0};
  auto p = observed_measure_profile(z2, VertexSet{o}, w, {*z2.find({1, 0})}, &delta);
  CHECK(p.observers[0].measure.weights == std::vector<double>{1.0});
  CHECK(p.observers[0].tv_to_limit == 0.0);

  VertexSet pair{*z2.find({-1, 0}), *z2.find({1, 0})};
  auto q = observed_measure_profile(z2, pair, w, {*z2.find({0, 7}), *z2.find({0, -7})});
  CHECK(q.observers[0].measure.weights[0] == doctest::Approx(q.observers[1].measure.weights[0]).epsilon(1e-10));
  CHECK(q.observers[0].mass < 1.0);
  CHECK(q.observers[0].measure.defect == doctest::Approx(1.0 - q.observers[0].mass));

  auto z3 = lattice(3, 33, WindowShape::Diamond);
  const Vertex c = *z3.find({0, 0, 0});
  VertexSet a{c, *z3.find({1, 1, 0})};
  auto lim = transient_limit_measure(z3, a, c, {24, 32});
  std::vector<Vertex> obs;
  for (int d : {2, 4, 8, 16}) obs.push_back(*z3.find({-d, 0, 0}));
  auto prof = observed_measure_profile(z3, a, ball(z3, c, 33), obs, &lim.measure);
  for (std::size_t i = 1; i < prof.observers.size(); ++i)
    CHECK(prof.observers[i].tv_to_limit < prof.observers[i - 1].tv_to_limit);
  CHECK(prof.fitted);
  CHECK(prof.nu_hat > 0.0);
}

TEST_CASE("sandwich bounds bracket the conditional hitting measure") {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    auto g = oracle::random_graph(8 + trial % 23, 7000 + trial, 0.12);
    const int n = static_cast<int>(g.num_vertices());
    const Vertex x0 = static_cast<Vertex>(rng() % n);
    auto b = ball(g, x0, 2 + static_cast<int>(rng() % 2));
    if (b.size() == static_cast<std::size_t>(n) || boundary(g, b).empty()) continue;
    std::vector<Vertex> ids{x0};
    for (Vertex v : b)
      if (rng() % 3 == 0) ids.push_back(v);
    VertexSet a(ids);
    auto sb = sandwich_bounds(g, a, b);
    auto h = oracle::hitting_kernel(g, a);
    for (Vertex x = 0; x < n; ++x) {
      if (b.contains(x)) continue;
      double mass = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) mass += h(x, static_cast<Eigen::Index>(i));
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double hb = h(x, static_cast<Eigen::Index>(i)) / mass;
        CHECK(hb >= sb.lower[i] - 1e-12);
        CHECK(hb <= sb.upper[i] + 1e-12);
      }
    }
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("recurrent identification on Z2") {
  auto g = lattice(2, 257, WindowShape::Diamond);
  const Vertex o = *g.find({0, 0}), e1 = *g.find({1, 0});
  auto k0 = potential_kernel(g, o, {128, 256});
  auto single = recurrent_ident_measure(g, VertexSet{o}, o, k0);
  CHECK(single.measure.weights[0] == doctest::Approx(1.0));

  VertexSet pair{o, e1};
  auto m = recurrent_ident_measure(g, pair, o, k0);
  CHECK(m.measure.weights[0] == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(m.identity_residual < 1e-8);

  auto k1 = potential_kernel(g, e1, {128, 256});
  auto inv = base_point_invariance(g, pair, {&k0, &k1});
  CHECK(inv.max_tv < 1e-3);

  std::vector<const PotentialKernel*> one{&k0};
  CHECK(base_point_invariance(g, VertexSet{o}, one).max_tv == 0.0);
}
