#include <harmeas/monte_carlo.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/binomial.hpp>

#include <harmeas/error.hpp>
#include <harmeas/random.hpp>

namespace harmeas {

MeasureOnSet McResult::measure() const {
  MeasureOnSet m;
  m.support = support;
  m.weights = weights;
  return m;
}

namespace {

// Cumulative conductances per row for inversion sampling.
struct Sampler {
  std::vector<std::int64_t> offsets;
  std::vector<double> cum;
  std::vector<Vertex> target;

  explicit Sampler(const WeightedGraph& g) {
    const std::size_t n = g.num_vertices();
    offsets.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v)
      offsets[v + 1] = offsets[v] + static_cast<std::int64_t>(g.degree(static_cast<Vertex>(v)));
    cum.resize(offsets.back());
    target.resize(offsets.back());
    for (std::size_t v = 0; v < n; ++v) {
      auto nb = g.neighbors(static_cast<Vertex>(v));
      auto cd = g.conductances(static_cast<Vertex>(v));
      double s = 0.0;
      for (std::size_t j = 0; j < nb.size(); ++j) {
        s += cd[j];
        cum[offsets[v] + j] = s;
        target[offsets[v] + j] = nb[j];
      }
    }
  }

  Vertex step(Vertex x, double u) const {
    const auto lo = cum.begin() + offsets[x];
    const auto hi = cum.begin() + offsets[x + 1];
    const double r = u * *(hi - 1);
    auto it = std::upper_bound(lo, hi, r);
    if (it == hi) --it;
    return target[it - cum.begin()];
  }
};

std::int32_t run_walk(const Sampler& s, const std::vector<std::int32_t>& slot, Vertex x,
                      std::uint64_t seed, std::int64_t cap) {
  std::mt19937_64 rng(seed);
  for (std::int64_t t = 0; t < cap; ++t) {
    if (slot[x] >= 0) return slot[x];
    x = s.step(x, to_unit(rng()));
  }
  return slot[x] >= 0 ? slot[x] : -1;
}

}  // namespace

McResult mc_hitting(const WeightedGraph& g, const VertexSet& a, const VertexSet& stop,
                    Vertex x, const McOptions& opt) {
  require(g.valid(x), "mc_hitting: unknown start vertex");
  require(opt.walks >= 1, "mc_hitting: need at least one walk");
  require(opt.step_cap >= 1, "mc_hitting: step cap must be >= 1");
  require(!a.empty(), "mc_hitting: empty target set");
  require(set_intersection(a, stop).empty(), "mc_hitting: target and stop must be disjoint");

  McResult r;
  r.support = set_union(a, stop);
  const std::size_t k = r.support.size();
  std::vector<std::int32_t> slot(g.num_vertices(), -1);
  for (std::size_t i = 0; i < k; ++i) slot[r.support[i]] = static_cast<std::int32_t>(i);
  require(slot[x] >= 0 || g.degree(x) > 0, "mc_hitting: start vertex is isolated");

  const Sampler sampler(g);
  const auto walks = static_cast<std::int64_t>(opt.walks);
  std::vector<std::int32_t> outcome(walks);
  if (opt.serial) {
    for (std::int64_t w = 0; w < walks; ++w)
      outcome[w] = run_walk(sampler, slot, x, stream_seed(opt.seed, w), opt.step_cap);
  } else {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t w = 0; w < walks; ++w)
      outcome[w] = run_walk(sampler, slot, x, stream_seed(opt.seed, w), opt.step_cap);
  }

  r.counts.assign(k, 0);
  for (auto o : outcome) {
    if (o < 0) ++r.censored;
    else ++r.counts[o];
  }
  r.walks = opt.walks;
  r.censored_fraction = static_cast<double>(r.censored) / static_cast<double>(r.walks);
  const double done = static_cast<double>(r.completed());
  r.weights.assign(k, 0.0);
  r.std_errors.assign(k, 0.0);
  if (done > 0)
    for (std::size_t i = 0; i < k; ++i) {
      const double p = static_cast<double>(r.counts[i]) / done;
      r.weights[i] = p;
      r.std_errors[i] = std::sqrt(p * (1.0 - p) / done);
    }
  return r;
}

double binomial_two_sided_p(std::uint64_t k, std::uint64_t n, double p) {
  require(k <= n, "binomial test: k exceeds n");
  require(p >= 0.0 && p <= 1.0, "binomial test: p outside [0,1]");
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
  const double kd = static_cast<double>(k);
  const double lower = boost::math::cdf(dist, kd);
  const double upper = k == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, kd - 1.0));
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

McAgreement compare_mc_exact(const McResult& mc, const MeasureOnSet& exact, double alpha) {
  require(mc.support == exact.support, "compare_mc_exact: supports differ");
  McAgreement out;
  const std::uint64_t n = mc.completed();
  for (std::size_t i = 0; i < mc.support.size(); ++i) {
    const double p = std::clamp(exact.weights[i], 0.0, 1.0);
    const double pv = binomial_two_sided_p(mc.counts[i], n, p);
    const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    const double z = sd > 0.0 ? std::abs(mc.weights[i] - p) / sd
                              : (mc.weights[i] == p ? 0.0 : INFINITY);
    if (pv < out.min_p_value) {
      out.min_p_value = pv;
      out.worst = mc.support[i];
    }
    out.max_z = std::max(out.max_z, z);
  }
  out.pass = out.min_p_value >= alpha;
  return out;
}

}  // namespace harmeas
