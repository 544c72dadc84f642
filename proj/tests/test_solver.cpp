#include <doctest.h>

#include <harmeas/environment.hpp>
#include <harmeas/error.hpp>
#include <harmeas/solver.hpp>

#include "oracles.hpp"

using namespace harmeas;

TEST_CASE("harmonic extension basics") {
  auto path = oracle::path_graph(3);
  auto f = harmonic_extension(path, VertexSet{1}, std::map<Vertex, double>{{0, 0.0}, {2, 1.0}});
  CHECK(f.value(1) == doctest::Approx(0.5));

  auto g = oracle::random_graph(20, 3);
  VertexSet region{2, 3, 5, 8, 9, 11, 15};
  std::map<Vertex, double> bv;
  for (Vertex v : boundary(g, region)) bv[v] = 2.5;
  auto c = harmonic_extension(g, region, bv);
  for (Vertex v : region) CHECK(c.value(v) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(c.residual_norm < 1e-10);

  std::map<Vertex, double> missing;
  CHECK_THROWS_AS(harmonic_extension(g, region, missing), Error);
}

TEST_CASE("harmonic extension on a 3x3 grid against a dense solve") {
  auto g = lattice(2, 2);  // 5x5; interior 3x3
  std::vector<Vertex> inner;
  std::vector<double> data(g.num_vertices(), 0.0);
  for (Vertex v = 0; static_cast<std::size_t>(v) < g.num_vertices(); ++v) {
    auto c = g.coord(v);
    if (std::abs(c[0]) <= 1 && std::abs(c[1]) <= 1) inner.push_back(v);
    if (c[0] == 2) data[v] = 1.0;
  }
  VertexSet region(inner);
  auto f = harmonic_extension(g, region, data);
  // Oracle: the hitting kernel of the frame, applied to the data.
  auto frame = boundary(g, region);
  auto h = oracle::hitting_kernel(g, frame);
  const Vertex center = *g.find({0, 0});
  double expect = 0.0;
  for (std::size_t k = 0; k < frame.size(); ++k) expect += h(center, k) * data[frame[k]];
  CHECK(f.value(center) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(f.value(center) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("maximum principle on random data") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = oracle::random_graph(25, seed);
    std::mt19937_64 rng(seed);
    std::vector<Vertex> r;
    for (Vertex v = 0; v < 25; ++v)
      if (rng() % 3) r.push_back(v);
    if (r.size() == 25) r.pop_back();
    VertexSet region(r);
    std::vector<double> data(25);
    for (double& d : data) d = static_cast<double>(rng() % 1000) / 100.0 - 5.0;
    PotentialField f;
    try {
      f = harmonic_extension(g, region, data);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Singular);
      continue;
    }
    double lo = 1e300, hi = -1e300;
    for (Vertex v : f.boundary) {
      lo = std::min(lo, data[v]);
      hi = std::max(hi, data[v]);
    }
    for (Vertex v : region) {
      CHECK(f.value(v) >= lo - 1e-10);
      CHECK(f.value(v) <= hi + 1e-10);
    }
  }
}

TEST_CASE("singular systems are reported") {
  GraphBuilder b(4);
  b.add_edge(0, 1, 1.0);
  b.add_edge(2, 3, 1.0);
  auto g = std::move(b).build();
  try {
    make_region_system(g, VertexSet{0, 1});
    FAIL("expected singular");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Singular);
  }
}

TEST_CASE("hitting distribution examples") {
  auto g = oracle::random_graph(12, 7);
  auto r = hitting_distribution(g, VertexSet{4}, VertexSet{}, 0);
  CHECK(r.measure.weight(4) == doctest::Approx(1.0));

  auto seg = oracle::path_graph(5);
  auto gr = hitting_distribution(seg, VertexSet{0}, VertexSet{4}, 1);
  CHECK(gr.mass_on_target == doctest::Approx(0.75));
  CHECK(gr.survival == doctest::Approx(0.25));

  auto in_a = hitting_distribution(seg, VertexSet{0, 2}, VertexSet{4}, 2);
  CHECK(in_a.measure.weight(2) == 1.0);

  // Unreachable target.
  GraphBuilder b(4);
  b.add_edge(0, 1, 1.0);
  b.add_edge(1, 2, 1.0);
  b.add_edge(2, 3, 1.0);
  auto line = std::move(b).build();
  auto stuck = hitting_distribution(line, VertexSet{0}, VertexSet{1}, 2);
  CHECK(stuck.mass_on_target == 0.0);
  try {
    stuck.conditional();
    FAIL("expected unreachable target");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnreachableTarget);
  }
}

TEST_CASE("hitting distribution on a Z2 box against a dense oracle") {
  auto g = lattice(2, 20);
  const Vertex o = *g.find({0, 0});
  const Vertex e1 = *g.find({1, 0});
  const Vertex x = *g.find({10, 10});
  VertexSet a{o, e1};
  auto r = hitting_distribution(g, a, VertexSet{}, x);
  CHECK(r.measure.weight(o) > 0.0);
  CHECK(r.measure.weight(o) < 1.0);
  CHECK(r.measure.total() == doctest::Approx(1.0).epsilon(1e-10));

  auto small = lattice(2, 6);
  const Vertex so = *small.find({0, 0}), se = *small.find({1, 0}), sx = *small.find({4, 3});
  VertexSet sa{so, se};
  auto h = oracle::hitting_kernel(small, sa);
  auto sr = hitting_distribution(small, sa, VertexSet{}, sx);
  CHECK(sr.measure.weight(so) == doctest::Approx(h(sx, 0)).epsilon(1e-10));
  CHECK(sr.measure.weight(se) == doctest::Approx(h(sx, 1)).epsilon(1e-10));
}

TEST_CASE("row and column routes agree") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto g = oracle::random_graph(30, seed, 0.15);
    VertexSet t{1, 7, 19};
    std::vector<Vertex> q = {0, 3, 7, 12, 25, 29};
    auto cols = hitting_matrix(g, t, q, HittingRoute::Columns);
    auto rows = hitting_matrix(g, t, q, HittingRoute::Rows);
    auto oracle_h = oracle::hitting_kernel(g, t);
    for (std::size_t i = 0; i < q.size(); ++i)
      for (std::size_t j = 0; j < t.size(); ++j) {
        CHECK(cols.at(i, j) == doctest::Approx(rows.at(i, j)).epsilon(1e-9));
        CHECK(cols.at(i, j) == doctest::Approx(oracle_h(q[i], j)).epsilon(1e-9));
      }
  }
}

TEST_CASE("Dirichlet Green function") {
  auto seg = oracle::path_graph(5);
  auto col = dirichlet_green(seg, VertexSet{1, 2, 3}, 2);
  CHECK(col.value(2) == doctest::Approx(2.0));
  CHECK(col.value(0) == 0.0);

  auto star = lattice(2, 1);
  const Vertex c = *star.find({0, 0});
  CHECK(dirichlet_green(star, VertexSet{c}, c).value(c) == doctest::Approx(1.0));

  CHECK_THROWS_AS(dirichlet_green(seg, VertexSet{1, 2}, 3), Error);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = oracle::random_graph(8, seed, 0.3);
    VertexSet b{0, 2, 3, 5, 6};
    auto gm = oracle::green_matrix(g, b);
    for (std::size_t i = 0; i < b.size(); ++i) {
      auto ci = dirichlet_green(g, b, b[i]);
      for (std::size_t j = 0; j < b.size(); ++j) {
        auto cj = dirichlet_green(g, b, b[j]);
        const double lhs = g.pi(b[j]) * ci.value(b[j]);
        const double rhs = g.pi(b[i]) * cj.value(b[i]);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        CHECK(ci.value(b[j]) == doctest::Approx(gm(j, i)).epsilon(1e-9));
        CHECK(ci.value(b[j]) >= 0.0);
      }
    }
  }
}

TEST_CASE("transient Green column in Z3") {
  auto g = lattice(3, 65, WindowShape::Diamond);
  const Vertex o = *g.find({0, 0, 0});
  auto tg = green_column_transient(g, o, {16, 32, 64});
  CHECK(tg.diagonal[0] < tg.diagonal[1]);
  CHECK(tg.diagonal[1] < tg.diagonal[2]);
  CHECK(tg.diagonal[2] < 1.5164);
  CHECK(tg.diagonal[2] > 1.49);
  MESSAGE("G_R(0,0) at R = 16, 32, 64: " << tg.diagonal[0] << " " << tg.diagonal[1] << " " << tg.diagonal[2]);
  const auto& f = tg.final();
  for (Vertex v : f.domain) CHECK(f.value(v) <= f.value(o) + 1e-12);
  // G(x,0) D(0,x) roughly constant along an axis well inside the window.
  std::vector<double> prod;
  for (int d : {8, 12, 16}) prod.push_back(f.value(*g.find({d, 0, 0})) * d);
  CHECK(prod.front() / prod.back() < 1.5);
  CHECK_THROWS(green_column_transient(g, o, {16, 70}));
}

TEST_CASE("last exit decomposition") {
  auto seg = oracle::path_graph(5);
  CHECK(last_exit_residual(seg, VertexSet{1}, VertexSet{1, 2}, 4) < 1e-14);

  int checked = 0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const int n = 8 + static_cast<int>(seed % 23);
    auto g = oracle::random_graph(n, seed, 0.1);
    std::mt19937_64 rng(seed * 7 + 1);
    std::vector<Vertex> b, a;
    for (Vertex v = 0; v < n; ++v)
      if (rng() % 2) {
        b.push_back(v);
        if (rng() % 3 == 0) a.push_back(v);
      }
    if (a.empty() || b.size() == static_cast<std::size_t>(n)) continue;
    VertexSet bs(b);
    Vertex x = 0;
    while (bs.contains(x)) ++x;
    CHECK(last_exit_residual(g, VertexSet(a), bs, x) <= 1e-8);
    ++checked;
  }
  CHECK(checked >= 100);

  GraphBuilder d(5);
  d.add_edge(0, 1, 1.0);
  d.add_edge(1, 2, 1.0);
  d.add_edge(3, 4, 1.0);
  auto disc = std::move(d).build();
  CHECK(last_exit_residual(disc, VertexSet{0}, VertexSet{0, 1}, 4) == 0.0);
}

TEST_CASE("measures") {
  MeasureOnSet a{VertexSet{1, 2}, {0.5, 0.5}};
  MeasureOnSet b{VertexSet{1, 2}, {0.6, 0.4}};
  CHECK(total_variation(a, a) == 0.0);
  CHECK(total_variation(a, b) == doctest::Approx(0.1));
  MeasureOnSet c{VertexSet{1, 3}, {0.5, 0.5}};
  CHECK_THROWS_AS(total_variation(a, c), Error);
}
