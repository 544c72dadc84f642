#include <harmeas/potential.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <harmeas/error.hpp>

namespace harmeas {

PotentialKernel potential_kernel(const WeightedGraph& g, Vertex x0, const std::vector<int>& radii,
                                 const PotentialKernelOptions& opt) {
  require(g.valid(x0), "potential_kernel: unknown source vertex");
  require(!radii.empty(), "potential_kernel: empty radius schedule");
  require(opt.window_fraction > 0.0 && opt.window_fraction <= 1.0,
          "potential_kernel: window_fraction must lie in (0,1]");
  for (std::size_t i = 1; i < radii.size(); ++i)
    require(radii[i] > radii[i - 1], "potential_kernel: radii must increase");

  PotentialKernel k;
  k.source = x0;
  k.radii = radii;
  const Vertex src[] = {x0};
  k.distance = bfs_distances(g, src, radii.back());
  const std::size_t n = g.num_vertices();

  std::vector<double> prev_column;
  std::vector<double> prev_g;
  for (int r : radii) {
    bool has_sphere = false;
    std::vector<Vertex> ids;
    for (std::size_t v = 0; v < n; ++v) {
      if (k.distance[v] < r) ids.push_back(static_cast<Vertex>(v));
      else if (k.distance[v] == r) has_sphere = true;
    }
    require(has_sphere, "potential_kernel: graph does not contain the ball of radius " +
                            std::to_string(r) + " with its boundary");
    const VertexSet ball_r(std::move(ids));
    auto col = dirichlet_green(g, ball_r, x0, opt.solver, prev_column);
    const double diag = col.values[x0];
    k.diagonal.push_back(diag);
    std::vector<double> gr(n, 0.0);
    for (Vertex v : ball_r) gr[v] = diag - col.values[v];
    // Outside the ball G_R vanishes, so the difference is the diagonal itself.
    for (std::size_t v = 0; v < n; ++v)
      if (k.distance[v] >= r) gr[v] = diag;
    prev_g.swap(gr);
    if (!gr.empty()) {
      k.last_gap.assign(n, 0.0);
      for (std::size_t v = 0; v < n; ++v) k.last_gap[v] = std::abs(prev_g[v] - gr[v]);
    }
    prev_column = std::move(col.values);
  }
  k.values = std::move(prev_g);
  if (k.last_gap.empty()) k.last_gap.assign(n, std::numeric_limits<double>::infinity());

  k.window_radius = std::max(1, static_cast<int>(opt.window_fraction * radii.back()));
  int limit = k.window_radius;
  for (std::size_t v = 0; v < n; ++v)
    if (k.distance[v] < limit && k.values[v] < 0.0) limit = k.distance[v];
  k.converged_radius = std::max(1, limit);
  k.negativity_shrink = k.window_radius - k.converged_radius;

  k.max_gap = 0.0;
  for (std::size_t v = 0; v < n; ++v)
    if (k.distance[v] < k.converged_radius) k.max_gap = std::max(k.max_gap, k.last_gap[v]);
  k.converged = radii.size() >= 2 && k.max_gap <= opt.gap_tol;

  double mv = 0.0;
  auto nb = g.neighbors(x0);
  auto cd = g.conductances(x0);
  for (std::size_t j = 0; j < nb.size(); ++j) mv += cd[j] * k.values[nb[j]];
  k.mean_value_residual = std::abs(mv / g.pi(x0) - 1.0);
  return k;
}

// ---------------------------------------------------------------- log bounds

double KernelLogBounds::c6() const {
  double c = std::max(1.0, c_upper);
  if (c_lower > 0.0) c = std::max(c, 1.0 / c_lower);
  return c;
}

KernelLogBounds kernel_log_bounds(const WeightedGraph& g, const PotentialKernel& k,
                                  const std::vector<int>& shells) {
  require(!shells.empty(), "kernel_log_bounds: no shells");
  KernelLogBounds out;
  for (int d : shells) {
    require(d >= 2, "kernel_log_bounds: shells must have D >= 2");
    require(d < k.converged_radius, "kernel_log_bounds: shell " + std::to_string(d) +
                                        " lies outside the converged window");
    ShellRatio s;
    s.distance = d;
    s.min_ratio = std::numeric_limits<double>::infinity();
    s.max_ratio = -std::numeric_limits<double>::infinity();
    const double l = std::log(static_cast<double>(d));
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      if (k.distance[v] != d) continue;
      const double r = k.values[v] / l;
      s.min_ratio = std::min(s.min_ratio, r);
      s.max_ratio = std::max(s.max_ratio, r);
      ++s.count;
    }
    require(s.count > 0, "kernel_log_bounds: empty shell at D = " + std::to_string(d));
    out.shells.push_back(s);
  }
  std::sort(out.shells.begin(), out.shells.end(),
            [](const ShellRatio& a, const ShellRatio& b) { return a.distance < b.distance; });
  out.rho_hat = out.shells.back().distance;
  for (auto it = out.shells.rbegin(); it != out.shells.rend() && it->min_ratio > 0.0; ++it)
    out.rho_hat = it->distance;
  out.c_lower = std::numeric_limits<double>::infinity();
  out.c_upper = 0.0;
  for (const auto& s : out.shells) {
    if (s.distance < out.rho_hat) continue;
    out.c_lower = std::min(out.c_lower, s.min_ratio);
    out.c_upper = std::max(out.c_upper, s.max_ratio);
  }
  return out;
}

// ---------------------------------------------------------------- level ball

LevelBall level_ball(const WeightedGraph& g, const PotentialKernel& k, double n, double c6) {
  require(n > 1.0, "level_ball: threshold must exceed 1");
  const double level = std::log(n);
  LevelBall out;
  out.n = n;
  std::vector<char> in(g.num_vertices(), 0);
  std::vector<Vertex> stack{k.source}, members{k.source};
  in[k.source] = 1;
  while (!stack.empty()) {
    const Vertex x = stack.back();
    stack.pop_back();
    if (!k.in_window(x) || k.distance[x] + 1 >= k.converged_radius)
      fail(ErrorKind::WindowClipped,
           "level set for n = " + std::to_string(n) + " reaches the edge of the converged window (radius " +
               std::to_string(k.converged_radius) + ")");
    out.max_distance = std::max(out.max_distance, k.distance[x]);
    for (Vertex y : g.neighbors(x))
      if (!in[y] && k.values[y] < level) {
        in[y] = 1;
        stack.push_back(y);
        members.push_back(y);
      }
  }
  out.members = VertexSet(std::move(members));

  if (c6 > 0.0) {
    out.c6 = c6;
    const double inner = std::pow(n, 1.0 / c6);
    out.outer_radius = std::pow(n, c6);
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      if (static_cast<double>(k.distance[v]) < inner) {
        ++out.inner_ball_size;
        if (!in[v]) out.sandwich_ok = false;
      }
    }
    if (static_cast<double>(out.max_distance) >= out.outer_radius) out.sandwich_ok = false;
  }
  return out;
}

// ----------------------------------------------------------------------- u_A

UAField u_a_field(const WeightedGraph& g, const VertexSet& a, Vertex x0, const PotentialKernel& k,
                  const UAOptions& opt) {
  require(!a.empty(), "u_a_field: empty set A");
  require(a.contains(x0), "u_a_field: base point must lie in A");
  require(k.source == x0, "u_a_field: kernel source differs from the base point");
  require(opt.window_fraction > 0.0 && opt.window_fraction <= 1.0,
          "u_a_field: window_fraction must lie in (0,1]");
  const int rw = std::max(2, static_cast<int>(opt.window_fraction * k.converged_radius));
  for (Vertex y : a) {
    require(g.valid(y), "u_a_field: unknown vertex in A");
    if (k.distance[y] + 1 >= rw)
      fail(ErrorKind::WindowClipped, "u_a_field: A is not inside the killed window of radius " +
                                         std::to_string(rw));
  }

  const std::size_t n = g.num_vertices();
  std::vector<Vertex> inner;
  for (std::size_t v = 0; v < n; ++v)
    if (k.distance[v] < rw && !a.contains(static_cast<Vertex>(v)))
      inner.push_back(static_cast<Vertex>(v));
  const VertexSet region(std::move(inner));

  // N: E_x[g(X_tau); hit A inside W];  Dn: P_x(hit A inside W).
  std::vector<double> data_n(n, 0.0), data_d(n, 0.0);
  for (Vertex y : a) {
    data_n[y] = k.values[y];
    data_d[y] = 1.0;
  }
  auto near = harmonic_extension(g, region, data_n, opt.solver);
  auto reach = harmonic_extension(g, region, data_d, opt.solver);

  auto near_at = [&](Vertex z) { return k.distance[z] < rw ? near.values[z] : 0.0; };
  auto reach_at = [&](Vertex z) { return k.distance[z] < rw ? reach.values[z] : 0.0; };

  UAField out;
  out.a = a;
  out.source = x0;
  out.window = rw;
  const std::size_t m = a.size();
  std::vector<double> alpha(m, 0.0), beta(m, 0.0);
  double sum_alpha = 0.0, sum_beta = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Vertex y = a[i];
    auto nb = g.neighbors(y);
    auto cd = g.conductances(y);
    for (std::size_t j = 0; j < nb.size(); ++j) {
      const Vertex z = nb[j];
      const double p = cd[j] / g.pi(y);
      alpha[i] += p * (k.values[z] - near_at(z));
      beta[i] += p * (1.0 - reach_at(z));
    }
    sum_alpha += g.pi(y) * alpha[i];
    sum_beta += g.pi(y) * beta[i];
  }
  require(sum_beta > 0.0, "u_a_field: no escape from A to the window boundary");
  const double c = (sum_alpha - g.pi(x0)) / sum_beta;
  out.far_constant = c;

  // E_x g(X at first time >= 0 in A), defined on W.
  std::vector<double> expect(n, 0.0);
  out.values.assign(n, 0.0);
  for (Vertex v : region) {
    expect[v] = near.values[v] + (1.0 - reach.values[v]) * c;
    out.values[v] = k.values[v] - expect[v];
  }
  for (Vertex y : a) expect[y] = k.values[y];

  out.pu.resize(m);
  out.pu_identity.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vertex y = a[i];
    out.pu[i] = alpha[i] - c * beta[i];
    auto nb = g.neighbors(y);
    auto cd = g.conductances(y);
    double direct = 0.0, step_expect = 0.0;
    for (std::size_t j = 0; j < nb.size(); ++j) {
      const Vertex z = nb[j];
      const double p = cd[j] / g.pi(y);
      direct += p * out.values[z];
      step_expect += p * expect[z];
    }
    out.pu_identity[i] = k.values[y] + (y == x0 ? 1.0 : 0.0) - step_expect;
    out.identity_residual = std::max(out.identity_residual, std::abs(direct - out.pu_identity[i]));
    out.identity_residual = std::max(out.identity_residual, std::abs(direct - out.pu[i]));
  }

  // Harmonicity off A, away from the window edge where the far-field
  // substitution takes over.
  std::vector<Vertex> interior;
  for (Vertex v : region)
    if (k.distance[v] + 1 < rw) interior.push_back(v);
  out.harmonic_residual = laplacian_residual(g, VertexSet(std::move(interior)), out.values);

  out.min_value = 0.0;
  for (Vertex v : region) {
    out.min_value = std::min(out.min_value, out.values[v]);
    if (out.values[v] < 0.0) ++out.negative_count;
  }
  return out;
}

// ------------------------------------------------------------------- escape

std::vector<double> escape_probability(const WeightedGraph& g, const PotentialKernel& k,
                                       const VertexSet& a, double n, bool level,
                                       const SolverOptions& opt) {
  require(!a.empty(), "escape_probability: empty set A");
  const std::size_t nv = g.num_vertices();
  std::vector<char> inside(nv, 0);
  if (level) {
    auto lb = level_ball(g, k, n);
    for (Vertex v : lb.members) inside[v] = 1;
  } else {
    require(n >= 1.0 && n <= k.radii.back(),
            "escape_probability: metric radius must lie in [1, largest kernel radius]");
    for (std::size_t v = 0; v < nv; ++v)
      if (k.distance[v] < n) inside[v] = 1;
  }
  std::vector<Vertex> ids;
  std::vector<double> data(nv, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    const auto x = static_cast<Vertex>(v);
    if (inside[v] && !a.contains(x)) ids.push_back(x);
    if (!inside[v]) data[v] = 1.0;
  }
  std::vector<double> f = data;
  if (!ids.empty()) {
    auto field = harmonic_extension(g, VertexSet(std::move(ids)), data, opt);
    for (std::size_t v = 0; v < nv; ++v)
      if (inside[v] && !a.contains(static_cast<Vertex>(v))) f[v] = field.values[v];
  }
  // Start in A: tau_A counts times >= 1, so take one step first.
  std::vector<double> out = f;
  for (Vertex y : a) {
    if (!inside[y]) {
      out[y] = 1.0;
      continue;
    }
    auto nb = g.neighbors(y);
    auto cd = g.conductances(y);
    double s = 0.0;
    for (std::size_t j = 0; j < nb.size(); ++j)
      if (!a.contains(nb[j])) s += cd[j] * f[nb[j]];
    out[y] = s / g.pi(y);
  }
  return out;
}

EscapeEstimate escape_log_estimate(const WeightedGraph& g, const PotentialKernel& k,
                                   const VertexSet& a, int m, double n, bool level,
                                   const SolverOptions& opt) {
  require(m >= 2, "escape_log_estimate: m must be >= 2");
  require(n > m, "escape_log_estimate: n must exceed m");
  std::vector<Vertex> sphere_m;
  for (std::size_t v = 0; v < g.num_vertices(); ++v)
    if (k.distance[v] == m) sphere_m.push_back(static_cast<Vertex>(v));
  require(!sphere_m.empty(), "escape_log_estimate: empty sphere at m = " + std::to_string(m));
  auto p = escape_probability(g, k, a, n, level, opt);
  EscapeEstimate out;
  out.min_probability = std::numeric_limits<double>::infinity();
  for (Vertex y : sphere_m)
    if (p[y] < out.min_probability) {
      out.min_probability = p[y];
      out.argmin = y;
    }
  out.log_ratio = std::log(static_cast<double>(m)) / std::log(n);
  out.ratio = out.min_probability / out.log_ratio;
  return out;
}

}  // namespace harmeas
