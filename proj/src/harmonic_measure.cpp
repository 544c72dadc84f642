#include <harmeas/harmonic_measure.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <harmeas/capacity.hpp>
#include <harmeas/error.hpp>

namespace harmeas {

const char* to_string(MeasureMethod m) {
  switch (m) {
    case MeasureMethod::FiniteBall: return "finite_ball";
    case MeasureMethod::TransientLimit: return "transient_limit";
    case MeasureMethod::EscapeFormula: return "escape_formula";
    case MeasureMethod::RecurrentIdent: return "recurrent_ident";
  }
  return "?";
}

namespace {

// Component of `start` inside the allowed mask.
VertexSet component_within(const WeightedGraph& g, Vertex start, const std::vector<char>& allowed) {
  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<Vertex> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    Vertex x = stack.back();
    stack.pop_back();
    for (Vertex y : g.neighbors(x))
      if (allowed[y] && !seen[y]) {
        seen[y] = 1;
        stack.push_back(y);
      }
  }
  return VertexSet::from_mask(seen);
}

void record_convergence(HarmonicMeasureResult& r) {
  r.tv.clear();
  for (std::size_t k = 1; k < r.per_scale.size(); ++k)
    r.tv.push_back(total_variation(r.per_scale[k - 1], r.per_scale[k]));
  r.cauchy = true;
  for (std::size_t k = 1; k < r.tv.size(); ++k)
    if (!(r.tv[k] < r.tv[k - 1])) r.cauchy = false;
}

}  // namespace

HarmonicMeasureResult finite_ball_measure(const WeightedGraph& g, const VertexSet& a, Vertex x0,
                                          int m, const SolverOptions& opt) {
  require(!a.empty(), "finite_ball_measure: A is empty");
  require(g.valid(x0), "finite_ball_measure: unknown base point");
  const VertexSet b = ball(g, x0, m);
  if (!is_subset(a, b))
    fail(ErrorKind::Domain, "finite_ball_measure: A is not inside B(x0, " + std::to_string(m) + ")");
  if (boundary(g, b).empty())
    fail(ErrorKind::Domain, "finite_ball_measure: B(x0, " + std::to_string(m) + ") has no boundary");

  const std::size_t n = g.num_vertices();
  auto in_b = b.mask(n);
  auto in_a = a.mask(n);
  std::vector<double> out_flux(n, 0.0);  // a(w, B^c)
  for (Vertex w : b) {
    auto nb = g.neighbors(w);
    auto cd = g.conductances(w);
    for (std::size_t j = 0; j < nb.size(); ++j)
      if (!in_b[nb[j]]) out_flux[w] += cd[j];
  }

  HarmonicMeasureResult r;
  r.target = a;
  r.base = x0;
  r.method = MeasureMethod::FiniteBall;
  r.scale = m;
  r.measure.support = a;
  for (Vertex y : a) {
    std::vector<char> allowed(n, 0);
    for (std::size_t v = 0; v < n; ++v) allowed[v] = in_b[v] && !in_a[v];
    allowed[y] = 1;
    auto dom = component_within(g, y, allowed);
    auto col = dirichlet_green(g, dom, y, opt);
    double s = 0.0;
    for (Vertex w : dom) s += col.value(w) * out_flux[w];
    r.measure.weights.push_back(s / col.value(y));
  }
  r.capacity = r.measure.total();
  if (!(r.capacity > 0.0))
    fail(ErrorKind::UnreachableTarget, "finite_ball_measure: A cannot reach the ball boundary");
  for (auto& w : r.measure.weights) w /= r.capacity;
  const double cap = capacity_relative(g, a, b, opt);
  r.capacity_check = std::abs(r.capacity - cap) / cap;
  r.scales = {m};
  r.per_scale = {r.measure};
  return r;
}

HarmonicMeasureResult transient_limit_measure(const WeightedGraph& g, const VertexSet& a,
                                              Vertex x0, const std::vector<int>& schedule,
                                              const SolverOptions& opt) {
  require(!schedule.empty(), "transient_limit_measure: empty schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    require(schedule[i] > schedule[i - 1], "transient_limit_measure: schedule must increase");
  HarmonicMeasureResult r;
  for (int m : schedule) {
    auto f = finite_ball_measure(g, a, x0, m, opt);
    r.per_scale.push_back(f.measure);
    r.capacity = f.capacity;
    r.capacity_check = std::max(r.capacity_check, f.capacity_check);
  }
  r.target = a;
  r.base = x0;
  r.method = MeasureMethod::TransientLimit;
  r.scale = schedule.back();
  r.scales = schedule;
  r.measure = r.per_scale.back();
  record_convergence(r);
  if (!r.cauchy) r.flag = "recurrent or window-limited";
  return r;
}

HarmonicMeasureResult escape_formula_measure(const WeightedGraph& g, const VertexSet& a,
                                             Vertex x0, const std::vector<int>& radii,
                                             const SolverOptions& opt) {
  auto ec = escape_capacity(g, a, x0, radii, opt);
  HarmonicMeasureResult r;
  r.target = a;
  r.base = x0;
  r.method = MeasureMethod::EscapeFormula;
  r.scale = radii.back();
  r.scales = radii;
  auto weights_of = [&](const std::vector<double>& es) {
    MeasureOnSet m;
    m.support = a;
    for (std::size_t i = 0; i < a.size(); ++i) m.weights.push_back(g.pi(a[i]) * es[i]);
    return m;
  };
  for (const auto& es : ec.escape) r.per_scale.push_back(normalized(weights_of(es)));
  record_convergence(r);

  std::vector<double> es = ec.escape.back();
  if (ec.escape.size() >= 2 && !ec.recurrent) {
    const auto& prev = ec.escape[ec.escape.size() - 2];
    const double r1 = radii[radii.size() - 2], r2 = radii.back();
    for (std::size_t i = 0; i < es.size(); ++i)
      es[i] -= (prev[i] - es[i]) * (1 / r2) / (1 / r1 - 1 / r2);
  }
  if (ec.recurrent) r.flag = "recurrent instance";
  auto w = weights_of(es);
  r.capacity = w.total();
  if (!(r.capacity > 0.0))
    fail(ErrorKind::UnreachableTarget, "escape_formula_measure: zero extrapolated capacity");
  r.measure = normalized(w);
  return r;
}

HarmonicMeasureResult recurrent_ident_measure(const WeightedGraph& g, const VertexSet& a,
                                              Vertex x0, const PotentialKernel& k,
                                              const UAOptions& opt) {
  auto u = u_a_field(g, a, x0, k, opt);
  HarmonicMeasureResult r;
  r.target = a;
  r.base = x0;
  r.method = MeasureMethod::RecurrentIdent;
  r.scale = u.window;
  r.measure.support = a;
  for (std::size_t i = 0; i < a.size(); ++i) r.measure.weights.push_back(g.pi(a[i]) * u.pu[i]);
  r.capacity = r.measure.total();
  if (!(r.capacity > 0.0))
    fail(ErrorKind::Consistency, "recurrent_ident_measure: sum of pi Pu_A is not positive");
  for (auto& w : r.measure.weights) w /= r.capacity;
  r.identity_residual = u.identity_residual;
  r.scales = {u.window};
  r.per_scale = {r.measure};
  if (!k.converged) r.flag = "potential kernel not converged";
  return r;
}

ObservedProfile observed_measure_profile(const WeightedGraph& g, const VertexSet& a,
                                         const VertexSet& window,
                                         const std::vector<Vertex>& observers,
                                         const MeasureOnSet* limit, const SolverOptions& opt) {
  require(!a.empty(), "observed_measure_profile: A is empty");
  require(is_subset(a, window), "observed_measure_profile: A must lie in the window");
  const std::size_t n = g.num_vertices();
  auto in_w = window.mask(n);
  auto in_a = a.mask(n);
  std::vector<char> allowed(n, 0);
  for (std::size_t v = 0; v < n; ++v) allowed[v] = in_w[v] && !in_a[v];

  ObservedProfile p;
  p.target = a;
  p.window = window;
  std::vector<char> region_mask(n, 0);
  for (Vertex x : observers) {
    require(g.valid(x), "observed_measure_profile: unknown observer");
    require(allowed[x], "observed_measure_profile: observers must lie in the window outside A");
    if (!region_mask[x])
      for (Vertex v : component_within(g, x, allowed)) region_mask[v] = 1;
  }
  const VertexSet region = VertexSet::from_mask(region_mask);

  std::vector<std::vector<double>> h(observers.size(), std::vector<double>(a.size(), 0.0));
  if (!region.empty()) {
    auto sys = make_region_system(g, region, opt);
    std::vector<double> b(sys.size()), x(sys.size());
    for (std::size_t ti = 0; ti < a.size(); ++ti) {
      std::fill(b.begin(), b.end(), 0.0);
      auto nb = g.neighbors(a[ti]);
      auto cd = g.conductances(a[ti]);
      for (std::size_t j = 0; j < nb.size(); ++j)
        if (sys.local(nb[j]) >= 0) b[sys.local(nb[j])] += cd[j];
      std::fill(x.begin(), x.end(), 0.0);
      sys.solver.solve(b, x);
      for (std::size_t oi = 0; oi < observers.size(); ++oi)
        h[oi][ti] = x[sys.local(observers[oi])];
    }
  }

  auto dist = bfs_distances(g, a.ids());
  std::vector<double> lx, ly;
  for (std::size_t oi = 0; oi < observers.size(); ++oi) {
    ObserverMeasure om;
    om.observer = observers[oi];
    om.distance = dist[observers[oi]];
    om.measure.support = a;
    om.measure.weights = h[oi];
    om.mass = om.measure.total();
    if (!(om.mass > 0.0)) {
      om.excluded = true;
    } else {
      om.measure.defect = 1.0 - om.mass;
      for (auto& w : om.measure.weights) w /= om.mass;
      if (limit) {
        om.tv_to_limit = total_variation(om.measure, *limit);
        if (om.tv_to_limit > 0.0 && om.distance > 0) {
          lx.push_back(std::log(static_cast<double>(om.distance)));
          ly.push_back(std::log(om.tv_to_limit));
        }
      }
    }
    p.observers.push_back(std::move(om));
  }

  std::vector<double> ux(lx);
  std::sort(ux.begin(), ux.end());
  ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
  if (ux.size() >= 4) {
    const double k = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    p.nu_hat = -slope;
    p.fit_c = std::exp((sy - slope * sx) / k);
    p.fitted = true;
  }
  return p;
}

BasePointReport base_point_invariance(const WeightedGraph& g, const VertexSet& a,
                                      const std::vector<const PotentialKernel*>& kernels,
                                      const UAOptions& opt) {
  BasePointReport rep;
  for (const auto* k : kernels) {
    require(a.contains(k->source), "base_point_invariance: base points must lie in A");
    rep.bases.push_back(k->source);
    rep.measures.push_back(recurrent_ident_measure(g, a, k->source, *k, opt));
  }
  for (std::size_t i = 0; i < rep.measures.size(); ++i)
    for (std::size_t j = i + 1; j < rep.measures.size(); ++j)
      rep.max_tv = std::max(rep.max_tv, total_variation(rep.measures[i].measure, rep.measures[j].measure));
  return rep;
}

BasePointReport base_point_invariance(const WeightedGraph& g, const VertexSet& a,
                                      const std::vector<Vertex>& bases,
                                      const std::vector<int>& radii,
                                      const PotentialKernelOptions& kopt, const UAOptions& opt) {
  std::vector<PotentialKernel> ks;
  for (Vertex b : bases) ks.push_back(potential_kernel(g, b, radii, kopt));
  std::vector<const PotentialKernel*> ptrs;
  for (const auto& k : ks) ptrs.push_back(&k);
  return base_point_invariance(g, a, ptrs, opt);
}

SandwichBounds sandwich_bounds(const WeightedGraph& g, const VertexSet& a, const VertexSet& b,
                               const SolverOptions& opt) {
  require(is_subset(a, b), "sandwich_bounds: A must lie in B");
  const VertexSet db = boundary(g, b);
  require(!db.empty(), "sandwich_bounds: B has no boundary");
  const VertexSet t = set_union(a, db);

  // Rows of the time >= 0 hitting kernel of T at the neighbours of A.
  std::vector<Vertex> q;
  for (Vertex y : a)
    for (Vertex w : g.neighbors(y)) q.push_back(w);
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  auto hm = hitting_matrix(g, t, q, HittingRoute::Rows, opt);

  // h1[y][k] = pi(y) P_y(X at the first time >= 1 in T equals db[k]).
  std::vector<std::vector<double>> h1(a.size(), std::vector<double>(db.size(), 0.0));
  std::vector<std::size_t> col(db.size());
  for (std::size_t k = 0; k < db.size(); ++k)
    col[k] = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), db[k]) - t.begin());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto nb = g.neighbors(a[i]);
    auto cd = g.conductances(a[i]);
    for (std::size_t j = 0; j < nb.size(); ++j) {
      const std::size_t qi =
          static_cast<std::size_t>(std::lower_bound(q.begin(), q.end(), nb[j]) - q.begin());
      for (std::size_t k = 0; k < db.size(); ++k) h1[i][k] += cd[j] * hm.at(qi, col[k]);
    }
  }

  SandwichBounds sb;
  sb.a = a;
  sb.lower.assign(a.size(), std::numeric_limits<double>::infinity());
  sb.upper.assign(a.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < db.size(); ++k) {
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) den += h1[i][k];
    if (!(den > 0.0)) continue;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sb.lower[i] = std::min(sb.lower[i], h1[i][k] / den);
      sb.upper[i] = std::max(sb.upper[i], h1[i][k] / den);
    }
  }
  return sb;
}

}  // namespace harmeas
