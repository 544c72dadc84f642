#include <harmeas/environment.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <harmeas/error.hpp>
#include <harmeas/random.hpp>

namespace harmeas {

ConductanceLaw ConductanceLaw::bernoulli(double p) {
  ConductanceLaw l;
  l.kind = LawKind::Bernoulli;
  l.p = p;
  return l;
}

ConductanceLaw ConductanceLaw::uniform(double lo, double hi) {
  ConductanceLaw l;
  l.kind = LawKind::Uniform;
  l.lo = lo;
  l.hi = hi;
  return l;
}

ConductanceLaw ConductanceLaw::constant(double c) {
  ConductanceLaw l;
  l.kind = LawKind::Constant;
  l.c = c;
  return l;
}

ConductanceLaw ConductanceLaw::two_point(double p, double a_hi, double a_lo) {
  ConductanceLaw l;
  l.kind = LawKind::TwoPoint;
  l.p = p;
  l.a_hi = a_hi;
  l.a_lo = a_lo;
  return l;
}

void ConductanceLaw::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  switch (kind) {
    case LawKind::Bernoulli:
      require(p >= 0.0 && p <= 1.0, "bernoulli: p must lie in [0,1]");
      break;
    case LawKind::Uniform:
      require(finite_nonneg(lo) && finite_nonneg(hi), "uniform: bounds must be finite and >= 0");
      require(lo <= hi, "uniform: lo must not exceed hi");
      break;
    case LawKind::Constant:
      require(finite_nonneg(c), "constant: value must be finite and >= 0");
      break;
    case LawKind::TwoPoint:
      require(p >= 0.0 && p <= 1.0, "two-point: p must lie in [0,1]");
      require(finite_nonneg(a_hi) && finite_nonneg(a_lo),
              "two-point: values must be finite and >= 0");
      break;
  }
}

double ConductanceLaw::draw(double u) const {
  switch (kind) {
    case LawKind::Bernoulli: return u < p ? 1.0 : 0.0;
    case LawKind::Uniform: return lo + (hi - lo) * u;
    case LawKind::Constant: return c;
    case LawKind::TwoPoint: return u < p ? a_hi : a_lo;
  }
  return 0.0;
}

const char* to_string(LawKind kind) {
  switch (kind) {
    case LawKind::Bernoulli: return "bernoulli";
    case LawKind::Uniform: return "uniform";
    case LawKind::Constant: return "constant";
    case LawKind::TwoPoint: return "two-point";
  }
  return "unknown";
}

LawKind law_kind_from_string(const std::string& s) {
  if (s == "bernoulli") return LawKind::Bernoulli;
  if (s == "uniform") return LawKind::Uniform;
  if (s == "constant") return LawKind::Constant;
  if (s == "two-point" || s == "two_point") return LawKind::TwoPoint;
  fail(ErrorKind::Validation, "unknown conductance law '" + s + "'");
}

const char* to_string(WindowShape s) {
  return s == WindowShape::Box ? "box" : "diamond";
}

WindowShape window_shape_from_string(const std::string& s) {
  if (s == "box") return WindowShape::Box;
  if (s == "diamond") return WindowShape::Diamond;
  fail(ErrorKind::Validation, "unknown window shape '" + s + "'");
}

void EnvironmentSpec::validate() const {
  require(dim >= 2 && dim <= kMaxLatticeDim, "environment: dim must be in [2,4]");
  require(half_width >= 1 && half_width < kMaxLatticeCoord,
          "environment: half_width must be in [1,32766]");
  law.validate();
}

double edge_uniform(std::uint64_t seed, std::span<const int> lower, int axis) {
  std::uint64_t h = mix64(seed);
  for (int c : lower) h = hash_combine(h, static_cast<std::uint32_t>(c));
  h = hash_combine(h, static_cast<std::uint64_t>(axis));
  return to_unit(h);
}

namespace {

bool in_window(std::span<const int> c, int half_width, WindowShape shape) {
  if (shape == WindowShape::Box) {
    for (int v : c)
      if (v < -half_width || v > half_width) return false;
    return true;
  }
  int s = 0;
  for (int v : c) s += std::abs(v);
  return s <= half_width;
}

// Calls f(coords) for every window point in lexicographic order.
template <class F>
void for_each_window_point(int dim, int half_width, WindowShape shape, F&& f) {
  std::vector<int> c(dim, -half_width);
  while (true) {
    if (in_window(c, half_width, shape)) f(std::span<const int>(c));
    int axis = dim - 1;
    while (axis >= 0 && c[axis] == half_width) {
      c[axis] = -half_width;
      --axis;
    }
    if (axis < 0) return;
    ++c[axis];
  }
}

}  // namespace

std::size_t window_vertex_count(int dim, int half_width, WindowShape shape) {
  const std::size_t side = 2 * static_cast<std::size_t>(half_width) + 1;
  if (shape == WindowShape::Box) {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= side;
    return n;
  }
  // Points of Z^d with |x|_1 <= L: sum_k 2^k C(d,k) C(L,k).
  auto binom = [](double m, int k) {
    double r = 1.0;
    for (int j = 0; j < k; ++j) r *= (m - j) / (j + 1);
    return r;
  };
  std::size_t total = 0;
  for (int k = 0; k <= dim; ++k)
    total += static_cast<std::size_t>(
        std::llround(std::ldexp(1.0, k) * binom(dim, k) * binom(half_width, k)));
  return total;
}

std::size_t estimate_environment_bytes(const EnvironmentSpec& spec) {
  const std::size_t v = window_vertex_count(spec.dim, spec.half_width, spec.shape);
  const std::size_t e = v * static_cast<std::size_t>(spec.dim);
  const std::size_t per_vertex = 8 + 8 + 4 * spec.dim + 16 + 8;
  const std::size_t per_edge = 16 + 2 * (4 + 8);
  return v * per_vertex + e * per_edge;
}

WeightedGraph sample_environment(const EnvironmentSpec& spec) {
  spec.validate();
  const std::size_t need = estimate_environment_bytes(spec);
  if (need > spec.memory_budget)
    fail(ErrorKind::Resource, "environment window needs about " + std::to_string(need) +
                                  " bytes, budget is " + std::to_string(spec.memory_budget));

  const int d = spec.dim;
  const int L = spec.half_width;
  std::vector<int> coords;
  std::vector<std::uint64_t> keys;
  const std::size_t n_est = window_vertex_count(d, L, spec.shape);
  coords.reserve(n_est * d);
  keys.reserve(n_est);
  for_each_window_point(d, L, spec.shape, [&](std::span<const int> c) {
    coords.insert(coords.end(), c.begin(), c.end());
    keys.push_back(pack_coordinates(c));
  });
  const std::size_t n = keys.size();

  GraphBuilder b(n, false, true);
  b.reserve(n * d);
  std::vector<int> y(d);
  for (std::size_t x = 0; x < n; ++x) {
    std::span<const int> cx(coords.data() + x * d, d);
    for (int axis = 0; axis < d; ++axis) {
      std::copy(cx.begin(), cx.end(), y.begin());
      ++y[axis];
      if (!in_window(y, L, spec.shape)) continue;
      const double a = spec.law.draw(edge_uniform(spec.seed, cx, axis));
      if (a == 0.0) continue;
      auto it = std::lower_bound(keys.begin(), keys.end(), pack_coordinates(y));
      b.add_edge(static_cast<Vertex>(x), static_cast<Vertex>(it - keys.begin()), a);
    }
  }
  keys.clear();
  keys.shrink_to_fit();
  b.set_coordinates(d, std::move(coords));
  return std::move(b).build();
}

WeightedGraph lattice(int dim, int half_width, WindowShape shape, double conductance) {
  EnvironmentSpec spec;
  spec.dim = dim;
  spec.half_width = half_width;
  spec.shape = shape;
  spec.law = ConductanceLaw::constant(conductance);
  return sample_environment(spec);
}

// ------------------------------------------------------------------ clusters

Vertex Cluster::local(Vertex host) const {
  auto it = std::lower_bound(host_ids.begin(), host_ids.end(), host);
  if (it == host_ids.end() || *it != host) return -1;
  return static_cast<Vertex>(it - host_ids.begin());
}

std::vector<Vertex> union_find_components(const WeightedGraph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<Vertex> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Vertex v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (Vertex x = 0; static_cast<std::size_t>(x) < n; ++x) {
    for (Vertex y : g.neighbors(x)) {
      if (y <= x) continue;
      Vertex rx = find(x), ry = find(y);
      if (rx == ry) continue;
      if (rx < ry) parent[ry] = rx;
      else parent[rx] = ry;
    }
  }
  for (Vertex x = 0; static_cast<std::size_t>(x) < n; ++x) parent[x] = find(x);
  return parent;
}

Cluster extract_cluster(const WeightedGraph& g, ClusterMode mode) {
  const std::size_t n = g.num_vertices();
  require(n > 0, "extract_cluster: empty graph");
  auto label = union_find_components(g);

  Vertex root = -1;
  if (mode.largest) {
    std::vector<std::size_t> size(n, 0);
    for (Vertex l : label) ++size[l];
    std::size_t best = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (size[v] > best) {
        best = size[v];
        root = static_cast<Vertex>(v);
      }
    if (best < 2)
      fail(ErrorKind::IsolatedAnchor, "extract_cluster: every vertex is isolated");
  } else {
    require(g.valid(mode.anchor), "extract_cluster: unknown anchor vertex");
    if (g.degree(mode.anchor) == 0)
      fail(ErrorKind::IsolatedAnchor,
           "extract_cluster: anchor " + std::to_string(mode.anchor) + " is isolated");
    root = label[mode.anchor];
  }

  std::vector<Vertex> members;
  for (std::size_t v = 0; v < n; ++v)
    if (label[v] == root) members.push_back(static_cast<Vertex>(v));

  Cluster c;
  c.host_vertices = n;
  c.host_ids = members;
  c.graph = induced_subgraph(g, VertexSet(std::move(members)));
  if (!mode.largest) {
    c.anchor = c.local(mode.anchor);
  } else if (g.has_coordinates()) {
    int best = std::numeric_limits<int>::max();
    for (Vertex v = 0; static_cast<std::size_t>(v) < c.graph.num_vertices(); ++v) {
      int s = 0;
      for (int x : c.graph.coord(v)) s += std::abs(x);
      if (s < best) {
        best = s;
        c.anchor = v;
      }
    }
  } else {
    c.anchor = 0;
  }
  const Vertex src[] = {c.anchor};
  c.anchor_distance = bfs_distances(c.graph, src);
  return c;
}

ChemicalAudit chemical_distance_audit(const Cluster& c, std::size_t pairs,
                                      std::uint64_t seed, int min_l1) {
  const WeightedGraph& g = c.graph;
  const std::size_t n = g.num_vertices();
  require(n >= 2, "chemical_distance_audit: cluster needs at least 2 vertices");
  require(g.has_coordinates(), "chemical_distance_audit: cluster has no coordinates");
  require(pairs >= 1, "chemical_distance_audit: need at least one pair");

  std::mt19937_64 rng(stream_seed(seed, 0));
  auto pick = [&] { return static_cast<Vertex>(to_unit(rng()) * static_cast<double>(n)); };
  std::vector<std::pair<Vertex, Vertex>> sample;
  const std::size_t max_attempts = 100 * pairs;
  for (std::size_t attempt = 0; attempt < max_attempts && sample.size() < pairs; ++attempt) {
    Vertex u = pick(), v = pick();
    if (u == v || g.l1_distance(u, v) < std::max(min_l1, 1)) continue;
    sample.emplace_back(u, v);
  }
  std::stable_sort(sample.begin(), sample.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  ChemicalAudit out;
  double sum = 0.0;
  std::vector<int> dist;
  Vertex current = -1;
  for (auto [u, v] : sample) {
    if (u != current) {
      const Vertex src[] = {u};
      dist = bfs_distances(g, src);
      current = u;
    }
    const int l1 = g.l1_distance(u, v);
    const double ratio = static_cast<double>(dist[v]) / l1;
    sum += ratio;
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.max_u = u;
      out.max_v = v;
      out.max_chemical = dist[v];
      out.max_l1 = l1;
    }
  }
  out.pairs = sample.size();
  out.mean_ratio = sample.empty() ? 0.0 : sum / static_cast<double>(sample.size());
  return out;
}

}  // namespace harmeas
