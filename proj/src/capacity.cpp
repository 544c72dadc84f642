#include <harmeas/capacity.hpp>

#include <cmath>

#include <harmeas/error.hpp>
#include <harmeas/solver.hpp>

namespace harmeas {

namespace {

// Components of B \ A with an edge leaving B \ A; the rest never reach A or
// the outside and carry no flux.
VertexSet solvable_part(const WeightedGraph& g, const VertexSet& region) {
  const std::size_t n = g.num_vertices();
  auto in = region.mask(n);
  std::vector<char> keep(n, 0);
  std::vector<Vertex> stack;
  for (Vertex v : region) {
    bool exits = false;
    for (Vertex y : g.neighbors(v))
      if (!in[y]) exits = true;
    if (exits && !keep[v]) {
      keep[v] = 1;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    Vertex x = stack.back();
    stack.pop_back();
    for (Vertex y : g.neighbors(x))
      if (in[y] && !keep[y]) {
        keep[y] = 1;
        stack.push_back(y);
      }
  }
  return VertexSet::from_mask(keep);
}

}  // namespace

RelativeCapacity relative_capacity(const WeightedGraph& g, const VertexSet& a, const VertexSet& b,
                                   const SolverOptions& opt) {
  require(!a.empty(), "capacity: A is empty");
  if (!is_subset(a, b)) fail(ErrorKind::Domain, "capacity: A is not contained in B");
  if (boundary(g, b).empty()) fail(ErrorKind::Domain, "capacity: B has no boundary in the graph");

  // h(z) = P_z(leave B before hitting A): 0 on A, 1 outside B.
  const std::size_t n = g.num_vertices();
  auto in_b = b.mask(n);
  std::vector<double> h(n, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    if (!in_b[v]) h[v] = 1.0;

  RelativeCapacity out;
  auto region = solvable_part(g, set_difference(b, a));
  if (!region.empty()) {
    auto sys = make_region_system(g, region, opt);
    auto rhs = boundary_rhs(g, sys, h);
    std::vector<double> x(sys.size(), 0.0);
    out.stats = sys.solver.solve(rhs, x);
    for (std::size_t i = 0; i < sys.size(); ++i) h[sys.vertices[i]] = x[i];
  }
  // Components of B \ A not in the region touch neither A nor B^c.
  out.a = a;
  out.escape.reserve(a.size());
  for (Vertex x : a) {
    auto nb = g.neighbors(x);
    auto cd = g.conductances(x);
    double s = 0.0;
    for (std::size_t j = 0; j < nb.size(); ++j) s += cd[j] * h[nb[j]];
    out.escape.push_back(s / g.pi(x));
    out.value += s;
  }
  return out;
}

double capacity_relative(const WeightedGraph& g, const VertexSet& a, const VertexSet& b,
                         const SolverOptions& opt) {
  return relative_capacity(g, a, b, opt).value;
}

EscapeCapacity escape_capacity(const WeightedGraph& g, const VertexSet& a, Vertex center,
                               const std::vector<int>& radii, const SolverOptions& opt) {
  require(g.valid(center), "escape_capacity: unknown center");
  require(!radii.empty(), "escape_capacity: empty radius schedule");
  for (std::size_t i = 1; i < radii.size(); ++i)
    require(radii[i] > radii[i - 1], "escape_capacity: radii must increase");
  const Vertex src[] = {center};
  auto dist = bfs_distances(g, src, radii.back());

  EscapeCapacity out;
  out.a = a;
  out.center = center;
  out.radii = radii;
  for (int r : radii) {
    std::vector<Vertex> ids;
    for (std::size_t v = 0; v < dist.size(); ++v)
      if (dist[v] < r) ids.push_back(static_cast<Vertex>(v));
    VertexSet ball_r(std::move(ids));
    if (!is_subset(a, ball_r))
      fail(ErrorKind::Domain, "escape_capacity: A is not inside B(center, " + std::to_string(r) + ")");
    auto rc = relative_capacity(g, a, ball_r, opt);
    if (!out.values.empty() && rc.value > out.values.back() * (1.0 + 1e-8) + 1e-14)
      out.monotone = false;
    out.values.push_back(rc.value);
    out.escape.push_back(std::move(rc.escape));
  }

  const std::size_t k = out.values.size();
  out.limit = out.values.back();
  if (k >= 2) out.last_gap = out.values[k - 2] - out.values[k - 1];
  if (k >= 3) {
    const double g1 = out.values[k - 3] - out.values[k - 2];
    const double g2 = out.last_gap;
    const double r0 = radii[k - 3], r1 = radii[k - 2], r2 = radii[k - 1];
    const double rho_t = (1 / r1 - 1 / r2) / (1 / r0 - 1 / r1);
    const double rho_r = (1 / std::log(r1) - 1 / std::log(r2)) / (1 / std::log(r0) - 1 / std::log(r1));
    out.gap_ratio = g1 > 0 ? g2 / g1 : 0.0;
    if (out.gap_ratio > 0) {
      const double lo = std::log(out.gap_ratio);
      out.recurrent = std::abs(lo - std::log(rho_r)) < std::abs(lo - std::log(rho_t));
    }
    if (out.recurrent) {
      out.limit = 0.0;
    } else {
      // Richardson step for V = L + b/R.
      const double b = g2 / (1 / r1 - 1 / r2);
      out.limit = out.values.back() - b / r2;
    }
  }
  return out;
}

}  // namespace harmeas
