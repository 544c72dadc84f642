// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <harmeas/capacity.hpp>
#include <harmeas/environment.hpp>
#include <harmeas/error.hpp>
#include <harmeas/harmonic_measure.hpp>
#include <harmeas/harnack.hpp>
#include <harmeas/kesten.hpp>
#include <harmeas/monte_carlo.hpp>
#include <harmeas/potential.hpp>
#include <harmeas/solver.hpp>

#include "oracles.hpp"

using namespace harmeas;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + fmt(x);
  return "[" + s + "]";
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

// Shared instances, built on first use.
const WeightedGraph& z3() {
  static auto g = lattice(3, 129, WindowShape::Diamond);
  return g;
}

const WeightedGraph& z2() {
  static auto g = lattice(2, 513, WindowShape::Diamond);
  return g;
}

Vertex at(const WeightedGraph& g, std::initializer_list<int> c) {
  auto v = g.find(c);
  if (!v) fail(ErrorKind::Domain, "vertex outside the window");
  return *v;
}

const TransientGreen& z3_green() {
  static auto tg = green_column_transient(z3(), at(z3(), {0, 0, 0}), {64, 128});
  return tg;
}

const PotentialKernel& z2_kernel(Vertex x0) {
  static std::map<Vertex, std::unique_ptr<PotentialKernel>> cache;
  auto& k = cache[x0];
  if (!k) k = std::make_unique<PotentialKernel>(potential_kernel(z2(), x0, {256, 512}));
  return *k;
}

Cluster sampled_cluster(int dim, int half_width, double p, std::uint64_t seed) {
  EnvironmentSpec spec;
  spec.dim = dim;
  spec.half_width = half_width;
  spec.law = ConductanceLaw::bernoulli(p);
  spec.seed = seed;
  return extract_cluster(sample_environment(spec), ClusterMode::Largest());
}

// 1. Conditional measures from far observers converge to the finite-ball limit.
Outcome theorem_one_convergence() {
  const auto& g = z3();
  const Vertex o = at(g, {0, 0, 0});
  const VertexSet a{o, at(g, {1, 0, 0}), at(g, {1, 1, 0})};
  auto lim = finite_ball_measure(g, a, o, 96);
  std::vector<Vertex> obs;
  for (int d : {16, 32, 64}) obs.push_back(at(g, {-d, 0, 0}));
  auto prof = observed_measure_profile(g, a, ball(g, o, 128), obs, &lim.measure);
  std::vector<double> tv;
  for (const auto& ob : prof.observers) tv.push_back(ob.tv_to_limit);
  const bool decreasing = tv[0] > tv[1] && tv[1] > tv[2];
  return {decreasing && tv[2] < 0.02, "TV to H^96 at D = 16, 32, 64: " + list(tv)};
}

// 2. Finite-ball limit against the escape-probability formula.
Outcome two_route_transient() {
  const auto& g = z3();
  const Vertex o = at(g, {0, 0, 0});
  const std::vector<VertexSet> targets{
      VertexSet{o, at(g, {1, 0, 0}), at(g, {1, 1, 0})},
      VertexSet{o, at(g, {3, 0, 0})},
      VertexSet{o, at(g, {0, 2, 0}), at(g, {1, 0, 1})},
  };
  std::vector<double> tv;
  for (const auto& a : targets) {
    auto fin = transient_limit_measure(g, a, o, {32, 64, 128});
    auto esc = escape_formula_measure(g, a, o, {32, 64, 128});
    tv.push_back(total_variation(fin.measure, esc.measure));
  }
  const bool ok = std::all_of(tv.begin(), tv.end(), [](double t) { return t < 5e-3; });
  return {ok, "TV per target: " + list(tv)};
}

// 3. Green function band with the right and a misdeclared exponent.
Outcome green_band() {
  const auto& g = z3();
  const auto& col = z3_green().final();
  auto a1 = ge_gamma_audit(g, col, 1.0, 8, 32, 0);
  auto a2 = ge_gamma_audit(g, col, 2.0, 8, 32, 0);
  return {a1.band_ratio() < 10.0 && a2.band_ratio() > 10.0,
          "band ratio gamma=1: " + fmt(a1.band_ratio()) + " (< 10), gamma=2: " + fmt(a2.band_ratio()) +
              " (> 10)"};
}

// 4. Exact Harnack ratio against the Green-ratio bound.
Outcome harnack_chain() {
  const auto& g = z3();
  const Vertex o = at(g, {0, 0, 0});
  auto audit = ge_gamma_audit(g, z3_green().final(), 1.0, 8, 32, 0);
  const double bound = harnack_constant_bound(audit);
  std::vector<double> ratios;
  for (auto [r, m] : {std::pair{2, 4.0}, std::pair{4, 4.0}})
    ratios.push_back(harnack_ratio_exact(g, o, r, boukricha_factor(m)).ratio);
  const bool ok = std::all_of(ratios.begin(), ratios.end(), [&](double x) { return x <= bound; });
  return {ok, "ratios (R,M) = (2,4), (4,4): " + list(ratios) + " <= 2 C_s/C_i = " + fmt(bound)};
}

// 5. (ln n) Cap_{B(0,n)}({0}) on Z^2 and on a cluster.
Outcome log_capacity_band() {
  const std::vector<int> ns{32, 64, 128, 256};
  const auto& g = z2();
  const Vertex o = at(g, {0, 0});
  std::vector<double> lat, clu;
  for (int n : ns) lat.push_back(std::log(n) * capacity_relative(g, VertexSet{o}, ball(g, o, n)));
  auto c = sampled_cluster(2, 256, 0.7, 5);
  for (int n : ns)
    clu.push_back(std::log(n) * capacity_relative(c.graph, VertexSet{c.anchor}, ball(c.graph, c.anchor, n)));
  return {spread(lat) < 1.5 && spread(clu) < 4.0, "Z2 " + list(lat) + " spread " + fmt(spread(lat)) +
                                                      "; cluster (seed 5) " + list(clu) + " spread " +
                                                      fmt(spread(clu))};
}

// 6. Kesten-grid flows on three percolation clusters.
Outcome kesten_construction() {
  const int n = 256;
  KestenOptions opt;
  opt.c_k = 3.0;
  std::vector<double> scaled;
  std::string detail;
  bool ok = true;
  for (std::uint64_t seed : {7, 8, 9}) {
    auto c = sampled_cluster(2, n, 0.7, seed);
    KestenReport r;
    try {
      r = kesten_grid_flow(c.graph, c.anchor, n, opt);
    } catch (const Error& e) {
      return {false, "seed " + std::to_string(seed) + ": " + e.what()};
    }
    const double cap =
        capacity_relative(c.graph, VertexSet{c.anchor}, kesten_box_interior(c.graph, r.geometry));
    const bool seed_ok = r.min_strip_channels >= 1 && r.min_stretch_channels >= 1 &&
                         r.max_interior_divergence <= 1e-10 && r.thomson <= cap;
    ok = ok && seed_ok;
    scaled.push_back(r.unit_energy / std::log(n));
    detail += "seed " + std::to_string(seed) + ": channels>=" + std::to_string(r.min_strip_channels) +
              " div " + fmt(r.max_interior_divergence) + " thomson " + fmt(r.thomson) + " <= cap " +
              fmt(cap) + "; ";
  }
  ok = ok && spread(scaled) < 5.0;
  return {ok, detail + "energy/ln n " + list(scaled) + " spread " + fmt(spread(scaled))};
}

struct RecurrentCheck {
  double observer_tv = 0.0;
  double base_tv = 0.0;
};

RecurrentCheck recurrent_check(const WeightedGraph& g, const VertexSet& a, Vertex x0,
                               const std::vector<const PotentialKernel*>& kernels,
                               const std::vector<Vertex>& observers, int window) {
  auto rec = recurrent_ident_measure(g, a, x0, *kernels.front());
  auto prof = observed_measure_profile(g, a, ball(g, x0, window), observers, &rec.measure);
  RecurrentCheck out;
  for (const auto& o : prof.observers) out.observer_tv = std::max(out.observer_tv, o.tv_to_limit);
  out.base_tv = base_point_invariance(g, a, kernels).max_tv;
  return out;
}

// 7. Recurrent identification against far observers, and base-point invariance.
Outcome recurrent_identification() {
  const auto& g = z2();
  const Vertex o = at(g, {0, 0}), e1 = at(g, {1, 0}), e2 = at(g, {2, 0});
  const VertexSet a{o, e1, e2};
  std::vector<const PotentialKernel*> ks{&z2_kernel(o), &z2_kernel(e1), &z2_kernel(e2)};
  std::vector<Vertex> obs{at(g, {-128, 0}), at(g, {130, 0}), at(g, {1, 128}), at(g, {1, -128})};
  auto lat = recurrent_check(g, a, o, ks, obs, 512);

  const std::uint64_t seed = 3;
  auto c = sampled_cluster(2, 512, 0.7, seed);
  const auto& h = c.graph;
  auto ac = h.coord(c.anchor);
  std::vector<Vertex> ids{c.anchor};
  for (int s : {1, 2}) {
    auto v = h.find({ac[0] + s, ac[1]});
    if (!v) return {false, "cluster seed " + std::to_string(seed) + ": A does not fit in the cluster"};
    ids.push_back(*v);
  }
  const VertexSet ca(ids);
  std::vector<std::unique_ptr<PotentialKernel>> owned;
  std::vector<const PotentialKernel*> cks;
  for (Vertex y : ca) {
    owned.push_back(std::make_unique<PotentialKernel>(potential_kernel(h, y, {256, 512})));
    cks.push_back(owned.back().get());
  }
  // Observers: extreme points of the chemical sphere of radius 128.
  auto sph = sphere(h, c.anchor, 128);
  std::vector<Vertex> cobs;
  for (int axis : {0, 1}) {
    auto [lo, hi] = std::minmax_element(sph.begin(), sph.end(), [&](Vertex u, Vertex v) {
      return h.coord(u)[axis] < h.coord(v)[axis];
    });
    cobs.push_back(*lo);
    cobs.push_back(*hi);
  }
  std::sort(cobs.begin(), cobs.end());
  cobs.erase(std::unique(cobs.begin(), cobs.end()), cobs.end());
  auto clu = recurrent_check(h, ca, c.anchor, cks, cobs, 512);

  const bool ok = lat.observer_tv <= 0.02 && lat.base_tv <= 0.01 && clu.observer_tv <= 0.05 &&
                  clu.base_tv <= 0.05;
  return {ok, "Z2 observer TV " + fmt(lat.observer_tv) + " base TV " + fmt(lat.base_tv) + "; cluster (seed " +
                  std::to_string(seed) + ") observer TV " + fmt(clu.observer_tv) + " base TV " +
                  fmt(clu.base_tv)};
}

// 8. Potential kernel facts on Z^2.
Outcome potential_facts() {
  const auto& g = z2();
  const Vertex o = at(g, {0, 0});
  const auto& k = z2_kernel(o);
  double worst = 0.0;
  for (auto e : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}})
    worst = std::max(worst, std::abs(k.g(at(g, {e.first, e.second})) - 1.0));
  const bool ok = k.g(o) == 0.0 && worst <= 1e-3 && k.mean_value_residual <= 1e-3 && k.window_radius >= 256;
  return {ok, "g(0) = " + fmt(k.g(o)) + ", max |g(e) - 1| = " + fmt(worst) + ", mean-value residual " +
                  fmt(k.mean_value_residual) + ", window " + std::to_string(k.window_radius)};
}

VertexSet random_subset(std::mt19937_64& rng, int n, double p) {
  std::vector<Vertex> ids;
  std::bernoulli_distribution coin(p);
  for (int v = 0; v < n; ++v)
    if (coin(rng)) ids.push_back(v);
  return VertexSet(ids);
}

// 9. Property suites on small random graphs against dense oracles.
Outcome oracle_equivalence() {
  // Last-exit identity.
  int le_count = 0;
  double le_worst = 0.0;
  for (std::uint64_t seed = 0; le_count < 100; ++seed) {
    const int n = 8 + static_cast<int>(seed % 23);
    auto g = oracle::random_graph(n, 50000 + seed, 0.1);
    std::mt19937_64 rng(seed * 7 + 3);
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
    le_worst = std::max(le_worst, last_exit_residual(g, VertexSet(a), bs, x));
    ++le_count;
  }

  // Sandwich bounds.
  int sw_count = 0, sw_violations = 0;
  std::mt19937_64 rng(91);
  for (int trial = 0; sw_count < 100; ++trial) {
    auto g = oracle::random_graph(8 + trial % 23, 60000 + trial, 0.12);
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
        if (hb < sb.lower[i] - 1e-12 || hb > sb.upper[i] + 1e-12) ++sw_violations;
      }
    }
    ++sw_count;
  }

  // Harnack extremal value against random positive boundary data.
  int hk_count = 0, hk_exceeded = 0;
  double hk_gap = 0.0;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; hk_count < 100; ++trial) {
    auto g = oracle::random_graph(8 + trial % 13, 70000 + trial, 0.15);
    const Vertex x = static_cast<Vertex>(rng() % g.num_vertices());
    auto outer = ball(g, x, 3);
    auto inner = ball(g, x, 1 + static_cast<int>(rng() % 2));
    if (boundary(g, outer).empty() || !is_subset(closure(g, inner), outer)) continue;
    auto k = exit_kernel(g, outer, inner.ids());
    const double exact = extremal_ratio(k).ratio;
    auto h = oracle::hitting_kernel(g, boundary(g, outer));
    const auto nz = static_cast<Eigen::Index>(k.boundary.size());
    double best = 0.0;
    for (int s = 0; s < 10000; ++s) {
      Eigen::VectorXd f(nz);
      if (s % 2 == 0) {
        for (Eigen::Index z = 0; z < nz; ++z) f(z) = u01(rng);
      } else {
        for (Eigen::Index z = 0; z < nz; ++z) f(z) = 1e-10 * u01(rng);
        f(static_cast<Eigen::Index>(rng() % nz)) = 1.0;
      }
      double hi = 0.0, lo = 1e300;
      for (Vertex v : inner) {
        const double val = h.row(v).dot(f);
        hi = std::max(hi, val);
        lo = std::min(lo, val);
      }
      const double q = hi / lo;
      if (q > exact * (1 + 1e-9)) ++hk_exceeded;
      best = std::max(best, q);
    }
    hk_gap = std::max(hk_gap, std::abs(best - exact) / exact);
    ++hk_count;
  }

  // Capacity monotonicity in A and in B.
  int cap_count = 0, cap_violations = 0;
  for (int trial = 0; cap_count < 100; ++trial) {
    const int n = 5 + trial % 26;
    auto g = oracle::random_graph(n, 80000 + trial, 0.3);
    auto b = random_subset(rng, n, 0.75);
    if (b.size() < 2 || b.size() == static_cast<std::size_t>(n)) continue;
    auto a = set_intersection(b, random_subset(rng, n, 0.3));
    if (a.empty()) continue;
    auto a2 = set_union(a, set_intersection(b, random_subset(rng, n, 0.3)));
    auto b2 = set_union(a, set_intersection(b, random_subset(rng, n, 0.6)));
    const double c = capacity_relative(g, a, b);
    if (c > capacity_relative(g, a2, b) + 1e-12) ++cap_violations;
    if (capacity_relative(g, a, b2) < c - 1e-12) ++cap_violations;
    if (std::abs(c - oracle::capacity(g, a, b)) > 1e-9 * std::max(1.0, c)) ++cap_violations;
    ++cap_count;
  }

  const bool ok = le_worst <= 1e-8 && sw_violations == 0 && hk_exceeded == 0 && hk_gap <= 1e-6 &&
                  cap_violations == 0;
  return {ok, "last-exit max residual " + fmt(le_worst) + " (" + std::to_string(le_count) +
                  " graphs); sandwich violations " + std::to_string(sw_violations) + " (" +
                  std::to_string(sw_count) + "); Harnack max gap " + fmt(hk_gap) + ", exceeded " +
                  std::to_string(hk_exceeded) + " (" + std::to_string(hk_count) + "); capacity violations " +
                  std::to_string(cap_violations) + " (" + std::to_string(cap_count) + ")"};
}

// 10. Monte Carlo hitting frequencies against exact solves.
Outcome monte_carlo_consistency() {
  struct Config {
    std::string name;
    WeightedGraph g;
    VertexSet a;
    Vertex start;
    Vertex center;
    int stop_radius;
    std::uint64_t seed;
  };
  std::vector<Config> cfgs;
  {
    auto g = lattice(2, 20, WindowShape::Diamond);
    VertexSet a{at(g, {0, 0}), at(g, {1, 0}), at(g, {2, 0})};
    const Vertex s = at(g, {5, 3}), c = at(g, {0, 0});
    cfgs.push_back({"Z2", std::move(g), a, s, c, 12, 101});
  }
  {
    auto g = lattice(3, 12, WindowShape::Diamond);
    VertexSet a{at(g, {0, 0, 0}), at(g, {1, 1, 0})};
    const Vertex s = at(g, {4, 0, 0}), c = at(g, {0, 0, 0});
    cfgs.push_back({"Z3", std::move(g), a, s, c, 10, 102});
  }
  {
    auto cl = sampled_cluster(2, 32, 0.7, 5);
    auto& g = cl.graph;
    std::vector<Vertex> ids{cl.anchor};
    for (Vertex v : g.neighbors(cl.anchor)) ids.push_back(v);
    VertexSet a(ids);
    auto sph = sphere(g, cl.anchor, 6);
    if (sph.empty()) return {false, "cluster too small"};
    cfgs.push_back({"cluster", std::move(cl.graph), a, sph[0], cl.anchor, 12, 103});
  }
  bool ok = true;
  std::string detail;
  for (const auto& c : cfgs) {
    const auto stop = boundary(c.g, ball(c.g, c.center, c.stop_radius));
    auto exact = hitting_distribution(c.g, c.a, stop, c.start);
    McOptions mo;
    mo.walks = 100000;
    mo.seed = c.seed;
    auto mc = mc_hitting(c.g, c.a, stop, c.start, mo);
    auto agree = compare_mc_exact(mc, exact.measure, 1e-4);
    ok = ok && agree.pass && mc.censored == 0;
    detail += c.name + " min p " + fmt(agree.min_p_value) + (agree.pass ? "" : " REJECTED") + "; ";
  }
  return {ok, detail + "10^5 walks each, alpha 1e-4"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"transient convergence of conditional measures (Z3)", theorem_one_convergence},
      {"two-route agreement, finite-ball limit vs escape formula (Z3)", two_route_transient},
      {"Green function band discriminates gamma (Z3)", green_band},
      {"Harnack ratio below the Green-ratio bound (Z3)", harnack_chain},
      {"log-capacity band (Z2 and cluster)", log_capacity_band},
      {"Kesten-grid flow on percolation clusters", kesten_construction},
      {"recurrent identification and base-point invariance", recurrent_identification},
      {"potential kernel facts (Z2)", potential_facts},
      {"oracle equivalence property suites", oracle_equivalence},
      {"Monte Carlo consistency", monte_carlo_consistency},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
      return 2;
    }
    selected.insert(k);
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++failures;
    std::printf("%s [%d] %s: %s (%.0f s)\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
