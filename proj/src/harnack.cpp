#include <harmeas/harnack.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <harmeas/error.hpp>

namespace harmeas {

ExitKernel exit_kernel(const WeightedGraph& g, const VertexSet& domain,
                       const std::vector<Vertex>& points, const SolverOptions& opt) {
  ExitKernel k;
  k.domain = domain;
  k.boundary = boundary(g, domain);
  k.points = points;
  require(!k.boundary.empty(), "exit_kernel: the domain has no boundary");
  for (Vertex p : points) require(domain.contains(p), "exit_kernel: points must lie in the domain");
  auto sys = make_region_system(g, domain, opt);
  const std::size_t nz = k.boundary.size();
  k.values.assign(points.size() * nz, 0.0);

  // Domain vertices adjacent to the boundary with their edges out.
  struct Out {
    std::size_t local;
    std::size_t zi;
    double a;
  };
  std::vector<Out> outs;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const Vertex w = sys.vertices[i];
    auto nb = g.neighbors(w);
    auto cd = g.conductances(w);
    for (std::size_t j = 0; j < nb.size(); ++j)
      if (sys.local(nb[j]) < 0) {
        auto it = std::lower_bound(k.boundary.begin(), k.boundary.end(), nb[j]);
        outs.push_back({i, static_cast<std::size_t>(it - k.boundary.begin()), cd[j]});
      }
  }

  std::vector<double> b(sys.size(), 0.0), x(sys.size(), 0.0);
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const Vertex u = points[pi];
    std::fill(b.begin(), b.end(), 0.0);
    b[sys.local(u)] = g.pi(u);
    std::fill(x.begin(), x.end(), 0.0);
    sys.solver.solve(b, x);  // x = G(., u)
    for (const auto& o : outs) k.values[pi * nz + o.zi] += x[o.local] * o.a / g.pi(u);
  }
  return k;
}

ExtremalRatio extremal_ratio(const ExitKernel& k) {
  ExtremalRatio r;
  const std::size_t nz = k.boundary.size();
  for (std::size_t zi = 0; zi < nz; ++zi) {
    double hi = -1.0, lo = std::numeric_limits<double>::infinity();
    std::size_t ahi = 0, alo = 0;
    for (std::size_t pi = 0; pi < k.points.size(); ++pi) {
      const double v = k.at(pi, zi);
      if (v > hi) {
        hi = v;
        ahi = pi;
      }
      if (v < lo) {
        lo = v;
        alo = pi;
      }
    }
    if (hi <= 0.0) continue;  // column vanishes on the points
    const double q = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (q > r.ratio || r.witness < 0) {
      r.ratio = std::max(q, 1.0);
      r.witness = k.boundary[zi];
      r.argmax = k.points[ahi];
      r.argmin = k.points[alo];
    }
  }
  return r;
}

HarnackAudit harnack_ratio_exact(const WeightedGraph& g, Vertex x, int r, double m,
                                 const SolverOptions& opt) {
  require(g.valid(x), "harnack_ratio_exact: unknown center");
  require(r >= 1 && m >= 1.0, "harnack_ratio_exact: need R >= 1 and M >= 1");
  HarnackAudit a;
  a.center = x;
  a.inner_radius = r;
  a.factor = m;
  a.outer_radius = static_cast<int>(std::ceil(m * r - 1e-12));
  const VertexSet inner = ball(g, x, r);
  const VertexSet outer = ball(g, x, a.outer_radius);
  if (boundary(g, outer).empty())
    fail(ErrorKind::Domain, "harnack_ratio_exact: B(x, M R) has no boundary in the graph");
  // Every inner vertex must be interior to the outer ball.
  if (!is_subset(closure(g, inner), outer))
    fail(ErrorKind::Domain, "harnack_ratio_exact: B(x, R) is not interior to B(x, M R)");
  auto k = exit_kernel(g, outer, inner.ids(), opt);
  auto e = extremal_ratio(k);
  a.ratio = e.ratio;
  a.witness = e.witness;
  return a;
}

GreenianAudit ge_gamma_audit(const WeightedGraph& g, const GreenColumn& column, double gamma,
                             int d_min, int d_max, int radius_floor) {
  require(d_min >= 1 && d_max >= d_min, "ge_gamma_audit: bad shell range");
  if (column.radius > 0)
    require(d_max < column.radius, "ge_gamma_audit: shells must lie inside the Green window");
  GreenianAudit a;
  a.source = column.source;
  a.gamma = gamma;
  a.d_min = d_min;
  a.d_max = d_max;
  a.radius_floor = radius_floor;
  const Vertex src[] = {column.source};
  auto dist = bfs_distances(g, src, d_max);
  a.c_i = std::numeric_limits<double>::infinity();
  a.c_s = 0.0;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    const int d = dist[v];
    if (d < d_min || d > d_max) continue;
    GreenPair p;
    p.y = static_cast<Vertex>(v);
    p.distance = d;
    p.green = column.values[v];
    p.scaled = p.green * std::pow(static_cast<double>(d), gamma);
    if (d < radius_floor) {
      a.excluded.push_back(p);
      continue;
    }
    a.c_i = std::min(a.c_i, p.scaled);
    a.c_s = std::max(a.c_s, p.scaled);
    a.retained.push_back(p);
  }
  require(!a.retained.empty(), "ge_gamma_audit: no pair in the shells");
  return a;
}

double harnack_constant_bound(const GreenianAudit& audit) {
  require(audit.c_i > 0.0, "harnack_constant_bound: C_i must be positive");
  return std::pow(2.0, audit.gamma) * audit.c_s / audit.c_i;
}

HolderProfile holder_profile(const WeightedGraph& g, std::span<const double> field, Vertex x0,
                             const std::vector<int>& scales) {
  require(field.size() == g.num_vertices(), "holder_profile: field must be host-indexed");
  require(scales.size() >= 2, "holder_profile: need at least two scales");
  for (std::size_t i = 1; i < scales.size(); ++i)
    require(scales[i] == scales[i - 1] + 1, "holder_profile: scales must be consecutive");
  const Vertex src[] = {x0};
  auto dist = bfs_distances(g, src, 1 << scales.back());
  HolderProfile h;
  h.scales = scales;
  for (int i : scales) {
    const int rad = 1 << i;
    double hi = -std::numeric_limits<double>::infinity(), lo = -hi;
    for (std::size_t v = 0; v < dist.size(); ++v)
      if (dist[v] < rad) {
        hi = std::max(hi, field[v]);
        lo = std::min(lo, field[v]);
      }
    h.oscillation.push_back(hi - lo);
  }
  h.lambda = 0.0;
  bool any = false;
  for (std::size_t k = 0; k + 1 < h.oscillation.size(); ++k) {
    if (h.oscillation[k + 1] > 0.0) {
      h.lambda = std::max(h.lambda, h.oscillation[k] / h.oscillation[k + 1]);
      any = true;
    }
  }
  h.nu = any && h.lambda > 0.0 ? -std::log2(h.lambda) : std::numeric_limits<double>::infinity();
  return h;
}

AnnulusAudit annulus_harnack_ratio(const WeightedGraph& g, Vertex x0, int r, int m, int outer,
                                   const SolverOptions& opt) {
  require(r >= 1 && r < m && m < outer, "annulus_harnack_ratio: need r < m < outer");
  AnnulusAudit a;
  a.r = r;
  a.m = m;
  a.outer = outer;
  const Vertex src[] = {x0};
  auto dist = bfs_distances(g, src, outer);
  std::vector<Vertex> dom, sph;
  bool has_outer_boundary = false;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist[v] >= r && dist[v] < outer) dom.push_back(static_cast<Vertex>(v));
    if (dist[v] == m) sph.push_back(static_cast<Vertex>(v));
    if (dist[v] == outer) has_outer_boundary = true;
  }
  if (sph.empty()) fail(ErrorKind::Domain, "annulus_harnack_ratio: the sphere is empty");
  if (!has_outer_boundary)
    fail(ErrorKind::Domain, "annulus_harnack_ratio: the graph does not contain B(x0, outer)");
  a.sphere_size = sph.size();
  auto k = exit_kernel(g, VertexSet(std::move(dom)), sph, opt);
  auto e = extremal_ratio(k);
  a.ratio = e.ratio;
  a.witness = e.witness;
  return a;
}

}  // namespace harmeas
