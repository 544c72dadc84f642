#include <harmeas/solver.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <harmeas/error.hpp>

namespace harmeas {

// ------------------------------------------------------------------ measures

double MeasureOnSet::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double MeasureOnSet::weight(Vertex v) const {
  auto it = std::lower_bound(support.begin(), support.end(), v);
  if (it == support.end() || *it != v) return 0.0;
  return weights[it - support.begin()];
}

namespace {

void require_same_support(const MeasureOnSet& a, const MeasureOnSet& b) {
  if (a.support == b.support) return;
  std::ostringstream msg;
  msg << "measures have different supports; symmetric difference:";
  for (Vertex v : set_difference(a.support, b.support)) msg << ' ' << v;
  msg << " |";
  for (Vertex v : set_difference(b.support, a.support)) msg << ' ' << v;
  fail(ErrorKind::Domain, msg.str());
}

}  // namespace

double total_variation(const MeasureOnSet& a, const MeasureOnSet& b) {
  require_same_support(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.weights.size(); ++i) s += std::abs(a.weights[i] - b.weights[i]);
  return 0.5 * s;
}

double max_abs_delta(const MeasureOnSet& a, const MeasureOnSet& b) {
  require_same_support(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.weights.size(); ++i)
    m = std::max(m, std::abs(a.weights[i] - b.weights[i]));
  return m;
}

MeasureOnSet normalized(const MeasureOnSet& m) {
  const double t = m.total();
  if (!(t > 0.0)) fail(ErrorKind::UnreachableTarget, "cannot renormalize a measure of zero mass");
  MeasureOnSet out = m;
  for (double& w : out.weights) w /= t;
  out.defect = 0.0;
  return out;
}

MeasureOnSet restrict_to(const MeasureOnSet& m, const VertexSet& keep) {
  MeasureOnSet out;
  std::vector<Vertex> ids;
  for (std::size_t i = 0; i < m.support.size(); ++i)
    if (keep.contains(m.support[i])) {
      ids.push_back(m.support[i]);
      out.weights.push_back(m.weights[i]);
    }
  out.support = VertexSet(std::move(ids));
  out.defect = m.total() - out.total() + m.defect;
  return out;
}

// ------------------------------------------------------------------- systems

RegionSystem make_region_system(const WeightedGraph& g, const VertexSet& region,
                                const SolverOptions& opt) {
  const std::size_t n = g.num_vertices();
  std::vector<Vertex> local_of(n, -1);
  for (std::size_t i = 0; i < region.size(); ++i) {
    require(g.valid(region[i]), "region contains an unknown vertex");
    local_of[region[i]] = static_cast<Vertex>(i);
  }

  LaplacianMatrix k;
  const std::size_t m = region.size();
  k.diag.resize(m);
  k.offsets.assign(m + 1, 0);
  std::vector<char> exits(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const Vertex v = region[i];
    double d = g.pi(v);
    auto nb = g.neighbors(v);
    auto cd = g.conductances(v);
    for (std::size_t j = 0; j < nb.size(); ++j) {
      if (nb[j] == v) {
        d -= cd[j];
      } else if (local_of[nb[j]] >= 0) {
        k.cols.push_back(local_of[nb[j]]);
        k.weights.push_back(cd[j]);
      } else {
        exits[i] = 1;
      }
    }
    k.diag[i] = d;
    k.offsets[i + 1] = static_cast<std::int64_t>(k.cols.size());
  }

  // Every component must be able to leave the region.
  std::vector<char> seen(exits);
  std::vector<std::int32_t> stack;
  for (std::size_t i = 0; i < m; ++i)
    if (exits[i]) stack.push_back(static_cast<std::int32_t>(i));
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    for (auto p = k.offsets[i]; p < k.offsets[i + 1]; ++p)
      if (!seen[k.cols[p]]) {
        seen[k.cols[p]] = 1;
        stack.push_back(k.cols[p]);
      }
  }
  for (std::size_t i = 0; i < m; ++i)
    if (!seen[i])
      fail(ErrorKind::Singular, "vertex " + std::to_string(region[i]) +
                                    " lies in a region component with no absorbing boundary");

  RegionSystem sys{std::vector<Vertex>(region.begin(), region.end()), std::move(local_of),
                   SpdSolver(std::move(k), opt)};
  return sys;
}

std::vector<double> boundary_rhs(const WeightedGraph& g, const RegionSystem& sys,
                                 std::span<const double> host_values) {
  std::vector<double> b(sys.size(), 0.0);
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const Vertex v = sys.vertices[i];
    auto nb = g.neighbors(v);
    auto cd = g.conductances(v);
    double s = 0.0;
    for (std::size_t j = 0; j < nb.size(); ++j)
      if (sys.local_of[nb[j]] < 0) s += cd[j] * host_values[nb[j]];
    b[i] = s;
  }
  return b;
}

VertexSet absorbing_region(const WeightedGraph& g, const VertexSet& absorbing,
                           std::span<const Vertex> seeds) {
  const std::size_t n = g.num_vertices();
  auto in_t = absorbing.mask(n);
  std::vector<char> keep(n, 0);
  std::vector<Vertex> stack;
  auto flood = [&](Vertex start, bool& touches) {
    keep[start] = 1;
    stack.assign(1, start);
    while (!stack.empty()) {
      Vertex x = stack.back();
      stack.pop_back();
      for (Vertex y : g.neighbors(x)) {
        if (in_t[y]) {
          touches = true;
        } else if (!keep[y]) {
          keep[y] = 1;
          stack.push_back(y);
        }
      }
    }
  };

  if (seeds.empty()) {
    bool dummy = false;
    for (Vertex t : absorbing)
      for (Vertex y : g.neighbors(t))
        if (!in_t[y] && !keep[y]) flood(y, dummy);
  } else {
    for (Vertex s : seeds) {
      require(g.valid(s), "absorbing_region: unknown seed vertex");
      if (in_t[s] || keep[s]) continue;
      bool touches = false;
      flood(s, touches);
      if (!touches)
        fail(ErrorKind::Singular, "vertex " + std::to_string(s) +
                                      " cannot reach the absorbing set");
    }
  }
  return VertexSet::from_mask(keep);
}

double laplacian_residual(const WeightedGraph& g, const VertexSet& region,
                          std::span<const double> u) {
  double m = 0.0;
  for (Vertex x : region) {
    auto nb = g.neighbors(x);
    auto cd = g.conductances(x);
    double s = 0.0;
    for (std::size_t j = 0; j < nb.size(); ++j) s += cd[j] * u[nb[j]];
    m = std::max(m, std::abs(s / g.pi(x) - u[x]));
  }
  return m;
}

// ------------------------------------------------------- harmonic extension

PotentialField harmonic_extension(const WeightedGraph& g, const VertexSet& region,
                                  std::span<const double> host_values,
                                  const SolverOptions& opt) {
  require(!region.empty(), "harmonic_extension: empty region");
  require(host_values.size() == g.num_vertices(),
          "harmonic_extension: boundary data must be host-indexed");
  auto sys = make_region_system(g, region, opt);
  auto b = boundary_rhs(g, sys, host_values);
  std::vector<double> x(sys.size(), 0.0);
  PotentialField f;
  f.stats = sys.solver.solve(b, x);
  f.region = region;
  f.boundary = boundary(g, region);
  f.values.assign(g.num_vertices(), 0.0);
  for (Vertex v : f.boundary) f.values[v] = host_values[v];
  for (std::size_t i = 0; i < sys.size(); ++i) f.values[sys.vertices[i]] = x[i];
  f.residual_norm = laplacian_residual(g, region, f.values);
  return f;
}

PotentialField harmonic_extension(const WeightedGraph& g, const VertexSet& region,
                                  const std::map<Vertex, double>& boundary_values,
                                  const SolverOptions& opt) {
  std::vector<double> host(g.num_vertices(), 0.0);
  for (Vertex v : boundary(g, region)) {
    auto it = boundary_values.find(v);
    require(it != boundary_values.end(),
            "harmonic_extension: no boundary value for vertex " + std::to_string(v));
    host[v] = it->second;
  }
  return harmonic_extension(g, region, host, opt);
}

// ------------------------------------------------------ hitting distributions

const char* to_string(HittingRoute r) {
  switch (r) {
    case HittingRoute::Auto: return "auto";
    case HittingRoute::Columns: return "columns";
    case HittingRoute::Rows: return "rows";
  }
  return "unknown";
}

HittingMatrix hitting_matrix(const WeightedGraph& g, const VertexSet& targets,
                             std::span<const Vertex> queries, HittingRoute route,
                             const SolverOptions& opt) {
  require(!targets.empty(), "hitting_matrix: empty target set");
  for (Vertex t : targets) require(g.valid(t), "hitting_matrix: unknown target vertex");
  HittingMatrix out;
  out.targets = targets;
  out.queries.assign(queries.begin(), queries.end());
  const std::size_t nt = targets.size();
  const std::size_t nq = queries.size();
  out.values.assign(nq * nt, 0.0);
  if (route == HittingRoute::Auto)
    route = nt < nq ? HittingRoute::Columns : HittingRoute::Rows;
  out.route = route;

  std::vector<Vertex> inner;
  for (std::size_t qi = 0; qi < nq; ++qi) {
    require(g.valid(queries[qi]), "hitting_matrix: unknown query vertex");
    auto it = std::lower_bound(targets.begin(), targets.end(), queries[qi]);
    if (it != targets.end() && *it == queries[qi])
      out.values[qi * nt + (it - targets.begin())] = 1.0;
    else
      inner.push_back(queries[qi]);
  }
  if (inner.empty()) return out;

  const VertexSet region = absorbing_region(g, targets, inner);
  auto sys = make_region_system(g, region, opt);
  std::vector<double> b(sys.size()), x(sys.size());

  if (route == HittingRoute::Columns) {
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const Vertex t = targets[ti];
      std::fill(b.begin(), b.end(), 0.0);
      auto nb = g.neighbors(t);
      auto cd = g.conductances(t);
      for (std::size_t j = 0; j < nb.size(); ++j)
        if (sys.local(nb[j]) >= 0) b[sys.local(nb[j])] += cd[j];
      std::fill(x.begin(), x.end(), 0.0);
      sys.solver.solve(b, x);
      for (std::size_t qi = 0; qi < nq; ++qi) {
        const Vertex q = queries[qi];
        if (sys.local(q) >= 0) out.values[qi * nt + ti] = x[sys.local(q)];
      }
    }
  } else {
    for (std::size_t qi = 0; qi < nq; ++qi) {
      const Vertex q = queries[qi];
      if (sys.local(q) < 0) continue;
      std::fill(b.begin(), b.end(), 0.0);
      b[sys.local(q)] = g.pi(q);
      std::fill(x.begin(), x.end(), 0.0);
      sys.solver.solve(b, x);
      for (std::size_t ti = 0; ti < nt; ++ti) {
        const Vertex t = targets[ti];
        auto nb = g.neighbors(t);
        auto cd = g.conductances(t);
        double s = 0.0;
        for (std::size_t j = 0; j < nb.size(); ++j)
          if (sys.local(nb[j]) >= 0) s += x[sys.local(nb[j])] * cd[j];
        out.values[qi * nt + ti] = s / g.pi(q);
      }
    }
  }
  return out;
}

MeasureOnSet HittingResult::conditional() const {
  return normalized(restrict_to(measure, target));
}

HittingResult hitting_distribution(const WeightedGraph& g, const VertexSet& a,
                                   const VertexSet& stop, Vertex x, HittingRoute route,
                                   const SolverOptions& opt) {
  require(g.valid(x), "hitting_distribution: unknown start vertex");
  require(!a.empty(), "hitting_distribution: empty target set");
  require(set_intersection(a, stop).empty(),
          "hitting_distribution: target and stop sets must be disjoint");
  const VertexSet all = set_union(a, stop);
  const Vertex q[] = {x};
  auto hm = hitting_matrix(g, all, q, route, opt);

  HittingResult r;
  r.target = a;
  r.measure.support = all;
  r.measure.weights.assign(hm.values.begin(), hm.values.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (a.contains(all[i])) r.mass_on_target += r.measure.weights[i];
    else r.survival += r.measure.weights[i];
  }
  return r;
}

// ------------------------------------------------------------ Green columns

GreenColumn dirichlet_green(const WeightedGraph& g, const VertexSet& b, Vertex x0,
                            const SolverOptions& opt, std::span<const double> warm_start) {
  require(g.valid(x0), "dirichlet_green: unknown source vertex");
  require(b.contains(x0), "dirichlet_green: source must lie in the domain");
  auto sys = make_region_system(g, b, opt);
  std::vector<double> rhs(sys.size(), 0.0), x(sys.size(), 0.0);
  rhs[sys.local(x0)] = g.pi(x0);
  if (!warm_start.empty())
    for (std::size_t i = 0; i < sys.size(); ++i) x[i] = warm_start[sys.vertices[i]];

  GreenColumn col;
  col.stats = sys.solver.solve(rhs, x);
  col.domain = b;
  col.source = x0;
  col.values.assign(g.num_vertices(), 0.0);
  for (std::size_t i = 0; i < sys.size(); ++i) col.values[sys.vertices[i]] = x[i];
  double m = 0.0;
  for (Vertex v : b) {
    auto nb = g.neighbors(v);
    auto cd = g.conductances(v);
    double s = 0.0;
    for (std::size_t j = 0; j < nb.size(); ++j) s += cd[j] * col.values[nb[j]];
    const double delta = v == x0 ? 1.0 : 0.0;
    m = std::max(m, std::abs(s / g.pi(v) - col.values[v] + delta));
  }
  col.residual_norm = m;
  return col;
}

TransientGreen green_column_transient(const WeightedGraph& g, Vertex x0,
                                      const std::vector<int>& radii,
                                      const SolverOptions& opt) {
  require(g.valid(x0), "green_column_transient: unknown source vertex");
  require(!radii.empty(), "green_column_transient: empty radius schedule");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] >= 1, "green_column_transient: radii must be >= 1");
    if (i > 0) require(radii[i] > radii[i - 1], "green_column_transient: radii must increase");
  }
  const Vertex src[] = {x0};
  auto dist = bfs_distances(g, src, radii.back());

  TransientGreen out;
  out.source = x0;
  out.radii = radii;
  for (int r : radii) {
    bool has_sphere = false;
    std::vector<Vertex> ids;
    for (std::size_t v = 0; v < dist.size(); ++v) {
      if (dist[v] < r) ids.push_back(static_cast<Vertex>(v));
      else if (dist[v] == r) has_sphere = true;
    }
    require(has_sphere, "green_column_transient: graph does not contain the ball of radius " +
                            std::to_string(r) + " with its boundary");
    std::span<const double> warm;
    if (!out.columns.empty()) warm = out.columns.back().values;
    auto col = dirichlet_green(g, VertexSet(std::move(ids)), x0, opt, warm);
    col.radius = r;
    if (!out.columns.empty()) {
      const auto& prev = out.columns.back();
      for (Vertex v : prev.domain) {
        const double tol = 1e-12 + kMonotoneRelTol * std::abs(col.values[v]);
        out.monotone_tolerance = std::max(out.monotone_tolerance, tol);
        if (col.values[v] < prev.values[v] - tol)
          fail(ErrorKind::Consistency,
               "Green column decreased at vertex " + std::to_string(v) + " between radii " +
                   std::to_string(prev.radius) + " and " + std::to_string(r));
      }
    }
    out.diagonal.push_back(col.values[x0]);
    out.columns.push_back(std::move(col));
  }
  if (out.diagonal.size() >= 2)
    out.last_gap = out.diagonal.back() - out.diagonal[out.diagonal.size() - 2];
  return out;
}

// ---------------------------------------------------------------- last exit

double last_exit_residual(const WeightedGraph& g, const VertexSet& a, const VertexSet& b,
                          Vertex x, const SolverOptions& opt) {
  require(g.valid(x), "last_exit_residual: unknown vertex");
  require(!a.empty(), "last_exit_residual: empty target set");
  require(is_subset(a, b), "last_exit_residual: A must lie in B");
  require(!b.contains(x), "last_exit_residual: x must lie outside B");

  const VertexSet region_a = absorbing_region(g, a);
  if (!region_a.contains(x)) return 0.0;  // x never reaches A: both sides vanish

  // Left: H_A(x, .) by target columns.
  const Vertex q[] = {x};
  auto lhs = hitting_matrix(g, a, q, HittingRoute::Columns, opt);

  // G_{A^c}(x, z) = pi(z) G_{A^c}(z, x) / pi(x) from one Green solve.
  auto sys = make_region_system(g, region_a, opt);
  std::vector<double> rhs(sys.size(), 0.0), w(sys.size(), 0.0);
  rhs[sys.local(x)] = g.pi(x);
  sys.solver.solve(rhs, w);

  // H_{A u dB}(z, y) with time >= 1: one step, then the hitting kernel.
  const VertexSet db = boundary(g, b);
  const VertexSet t = set_union(a, db);
  std::vector<Vertex> steps;
  for (Vertex z : db)
    for (Vertex y : g.neighbors(z)) steps.push_back(y);
  const VertexSet step_set(steps);
  auto h = hitting_matrix(g, t, step_set.ids(), HittingRoute::Columns, opt);

  double worst = 0.0;
  for (std::size_t ai = 0; ai < a.size(); ++ai) {
    const Vertex y = a[ai];
    const std::size_t ti = std::lower_bound(t.begin(), t.end(), y) - t.begin();
    double right = 0.0;
    for (Vertex z : db) {
      const Vertex lz = sys.local(z);
      if (lz < 0) continue;
      const double green = g.pi(z) * w[lz] / g.pi(x);
      auto nb = g.neighbors(z);
      auto cd = g.conductances(z);
      double step = 0.0;
      for (std::size_t j = 0; j < nb.size(); ++j) {
        const std::size_t qi =
            std::lower_bound(step_set.begin(), step_set.end(), nb[j]) - step_set.begin();
        step += cd[j] * h.at(qi, ti);
      }
      right += green * step / g.pi(z);
    }
    worst = std::max(worst, std::abs(lhs.at(0, ai) - right));
  }
  return worst;
}

}  // namespace harmeas
