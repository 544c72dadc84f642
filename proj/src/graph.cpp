#include <harmeas/graph.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include <harmeas/error.hpp>

namespace harmeas {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Singular: return "singular_system";
    case ErrorKind::NonConvergence: return "non_convergence";
    case ErrorKind::UnreachableTarget: return "unreachable_target";
    case ErrorKind::IsolatedAnchor: return "isolated_anchor";
    case ErrorKind::Resource: return "resource";
    case ErrorKind::WindowClipped: return "window_clipped";
    case ErrorKind::ConstructionFailed: return "construction_failed";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::Io: return "io";
    case ErrorKind::Validation: return "validation";
  }
  return "unknown";
}

// ---------------------------------------------------------------- VertexSet

VertexSet::VertexSet(std::vector<Vertex> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

VertexSet::VertexSet(std::initializer_list<Vertex> ids)
    : VertexSet(std::vector<Vertex>(ids)) {}

VertexSet VertexSet::from_mask(const std::vector<char>& mask) {
  VertexSet s;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) s.ids_.push_back(static_cast<Vertex>(i));
  return s;
}

bool VertexSet::contains(Vertex v) const {
  return std::binary_search(ids_.begin(), ids_.end(), v);
}

std::vector<char> VertexSet::mask(std::size_t n) const {
  std::vector<char> m(n, 0);
  for (Vertex v : ids_) m[static_cast<std::size_t>(v)] = 1;
  return m;
}

VertexSet set_union(const VertexSet& a, const VertexSet& b) {
  std::vector<Vertex> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return VertexSet(std::move(out));
}

VertexSet set_difference(const VertexSet& a, const VertexSet& b) {
  std::vector<Vertex> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return VertexSet(std::move(out));
}

VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
  std::vector<Vertex> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return VertexSet(std::move(out));
}

bool is_subset(const VertexSet& a, const VertexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// ------------------------------------------------------------ WeightedGraph

namespace {
constexpr int kCoordBits = 16;
constexpr int kCoordOffset = 1 << (kCoordBits - 1);
}  // namespace

std::uint64_t pack_coordinates(std::span<const int> c) {
  std::uint64_t key = 0;
  for (int v : c) {
    key = (key << kCoordBits) |
          static_cast<std::uint64_t>(static_cast<std::uint32_t>(v + kCoordOffset) &
                                     ((1u << kCoordBits) - 1));
  }
  return key;
}

double WeightedGraph::conductance(Vertex x, Vertex y) const {
  auto nb = neighbors(x);
  auto it = std::lower_bound(nb.begin(), nb.end(), y);
  if (it == nb.end() || *it != y) return 0.0;
  return cond_[offsets_[x] + (it - nb.begin())];
}

std::optional<Vertex> WeightedGraph::find(std::span<const int> c) const {
  if (dim_ == 0 || static_cast<int>(c.size()) != dim_) return std::nullopt;
  for (int v : c)
    if (v < -kCoordOffset || v >= kCoordOffset) return std::nullopt;
  const std::uint64_t key = pack_coordinates(c);
  auto it = std::lower_bound(
      coord_index_.begin(), coord_index_.end(), key,
      [](const auto& entry, std::uint64_t k) { return entry.first < k; });
  if (it == coord_index_.end() || it->first != key) return std::nullopt;
  return it->second;
}

int WeightedGraph::l1_distance(Vertex x, Vertex y) const {
  require(dim_ > 0, "l1_distance: graph has no coordinates");
  auto cx = coord(x);
  auto cy = coord(y);
  int d = 0;
  for (int i = 0; i < dim_; ++i) d += std::abs(cx[i] - cy[i]);
  return d;
}

GraphBuilder::GraphBuilder(std::size_t num_vertices, bool allow_self_loops,
                           bool allow_isolated)
    : n_(num_vertices), allow_self_loops_(allow_self_loops), allow_isolated_(allow_isolated) {
  require(num_vertices < static_cast<std::size_t>(std::numeric_limits<Vertex>::max()),
          "GraphBuilder: too many vertices");
}

void GraphBuilder::add_edge(Vertex x, Vertex y, double a) {
  require(x >= 0 && static_cast<std::size_t>(x) < n_ && y >= 0 &&
              static_cast<std::size_t>(y) < n_,
          "add_edge: vertex id out of range (" + std::to_string(x) + "," +
              std::to_string(y) + ")");
  require(std::isfinite(a) && a >= 0.0, "add_edge: conductance must be finite and >= 0");
  require(x != y || allow_self_loops_, "add_edge: self-loop at vertex " + std::to_string(x));
  if (a == 0.0) return;
  if (x > y) std::swap(x, y);
  edges_.push_back({x, y, a});
}

void GraphBuilder::set_coordinates(int dim, std::vector<int> coords) {
  require(dim > 0 && dim <= kMaxLatticeDim, "set_coordinates: dimension must be in [1,4]");
  require(coords.size() == n_ * static_cast<std::size_t>(dim),
          "set_coordinates: coordinate array has wrong length");
  dim_ = dim;
  coords_ = std::move(coords);
}

WeightedGraph GraphBuilder::build() && {
  std::sort(edges_.begin(), edges_.end(), [](const Edge& l, const Edge& r) {
    return l.x != r.x ? l.x < r.x : l.y < r.y;
  });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].x == edges_[i - 1].x && edges_[i].y == edges_[i - 1].y)
      fail(ErrorKind::Domain, "GraphBuilder: repeated edge {" +
                                  std::to_string(edges_[i].x) + "," +
                                  std::to_string(edges_[i].y) + "}");
  }

  WeightedGraph g;
  g.offsets_.assign(n_ + 1, 0);
  for (const Edge& e : edges_) {
    ++g.offsets_[e.x + 1];
    if (e.x != e.y) ++g.offsets_[e.y + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.adj_.resize(g.offsets_.back());
  g.cond_.resize(g.offsets_.back());
  std::vector<std::int64_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const Edge& e : edges_) {
    g.adj_[fill[e.x]] = e.y;
    g.cond_[fill[e.x]++] = e.a;
    if (e.x != e.y) {
      g.adj_[fill[e.y]] = e.x;
      g.cond_[fill[e.y]++] = e.a;
    }
    if (e.x == e.y) g.self_loops_ = true;
  }
  // Edges were sorted by (x,y); rows of the larger endpoint are filled in
  // increasing x order as well, so every row is already sorted.
  g.pi_.assign(n_, 0.0);
  for (std::size_t v = 0; v < n_; ++v) {
    double s = 0.0;
    for (auto k = g.offsets_[v]; k < g.offsets_[v + 1]; ++k) s += g.cond_[k];
    if (!(s > 0.0) && !allow_isolated_)
      fail(ErrorKind::Domain,
           "GraphBuilder: vertex " + std::to_string(v) + " has no incident edge");
    g.pi_[v] = s;
  }
  g.num_edges_ = edges_.size();
  edges_.clear();
  edges_.shrink_to_fit();

  if (dim_ > 0) {
    g.dim_ = dim_;
    g.coords_ = std::move(coords_);
    g.coord_index_.resize(n_);
    for (std::size_t v = 0; v < n_; ++v)
      g.coord_index_[v] = {pack_coordinates(g.coord(static_cast<Vertex>(v))),
                           static_cast<Vertex>(v)};
    std::sort(g.coord_index_.begin(), g.coord_index_.end());
  }
  return g;
}

// --------------------------------------------------------------- operations

double transition_prob(const WeightedGraph& g, Vertex x, Vertex y) {
  require(g.valid(x) && g.valid(y), "transition_prob: unknown vertex");
  return g.conductance(x, y) / g.pi(x);
}

std::vector<int> bfs_distances(const WeightedGraph& g,
                               std::span<const Vertex> sources, int max_dist,
                               const std::vector<char>* allowed) {
  std::vector<int> dist(g.num_vertices(), kUnreachable);
  std::vector<Vertex> frontier;
  for (Vertex s : sources) {
    require(g.valid(s), "bfs_distances: unknown source vertex");
    if (dist[s] != 0) {
      dist[s] = 0;
      frontier.push_back(s);
    }
  }
  std::vector<Vertex> next;
  for (int d = 0; d < max_dist && !frontier.empty(); ++d) {
    next.clear();
    for (Vertex x : frontier) {
      for (Vertex y : g.neighbors(x)) {
        if (dist[y] != kUnreachable) continue;
        if (allowed && !(*allowed)[y]) continue;
        dist[y] = d + 1;
        next.push_back(y);
      }
    }
    frontier.swap(next);
  }
  return dist;
}

int graph_distance(const WeightedGraph& g, Vertex x, Vertex y) {
  require(g.valid(x) && g.valid(y), "graph_distance: unknown vertex");
  if (x == y) return 0;
  const Vertex src[] = {x};
  return bfs_distances(g, src)[y];
}

VertexSet ball(const WeightedGraph& g, Vertex x, int radius) {
  require(g.valid(x), "ball: unknown center");
  require(radius >= 1, "ball: radius must be >= 1");
  const Vertex src[] = {x};
  auto dist = bfs_distances(g, src, radius - 1);
  std::vector<Vertex> ids;
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (dist[v] < radius) ids.push_back(static_cast<Vertex>(v));
  return VertexSet(std::move(ids));
}

VertexSet sphere(const WeightedGraph& g, Vertex x, int r) {
  require(g.valid(x), "sphere: unknown center");
  require(r >= 0, "sphere: negative radius");
  const Vertex src[] = {x};
  auto dist = bfs_distances(g, src, r);
  std::vector<Vertex> ids;
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (dist[v] == r) ids.push_back(static_cast<Vertex>(v));
  return VertexSet(std::move(ids));
}

VertexSet boundary(const WeightedGraph& g, const VertexSet& a) {
  auto in = a.mask(g.num_vertices());
  std::vector<Vertex> out;
  for (Vertex x : a) {
    require(g.valid(x), "boundary: unknown vertex");
    for (Vertex y : g.neighbors(x))
      if (!in[y]) out.push_back(y);
  }
  return VertexSet(std::move(out));
}

VertexSet closure(const WeightedGraph& g, const VertexSet& a) {
  return set_union(a, boundary(g, a));
}

VertexSet crossing_set(const WeightedGraph& g, const VertexSet& w,
                       const VertexSet& v, const VertexSet& u) {
  require(is_subset(u, v) && is_subset(v, w),
          "crossing_set: requires U within V within W");
  const std::size_t n = g.num_vertices();
  const VertexSet dv = boundary(g, v);

  // (a) reachable from U through V.
  auto in_v = v.mask(n);
  auto from_u = bfs_distances(g, u.ids(), kUnreachable, &in_v);

  // (b) reaches the boundary of W inside the closure of W.
  const VertexSet dw = boundary(g, w);
  std::vector<int> from_dw;
  if (!dw.empty()) {
    auto in_wbar = closure(g, w).mask(n);
    from_dw = bfs_distances(g, dw.ids(), kUnreachable, &in_wbar);
  }

  std::vector<Vertex> out;
  for (Vertex x : dv) {
    bool touches_u = false;
    for (Vertex y : g.neighbors(x))
      if (in_v[y] && from_u[y] != kUnreachable) touches_u = true;
    const bool reaches_w = dw.empty() || from_dw[x] != kUnreachable;
    if (touches_u && reaches_w) out.push_back(x);
  }
  return VertexSet(std::move(out));
}

std::vector<int> component_labels(const WeightedGraph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<int> label(n, -1);
  int next = 0;
  std::vector<Vertex> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    stack.assign(1, static_cast<Vertex>(s));
    while (!stack.empty()) {
      Vertex x = stack.back();
      stack.pop_back();
      for (Vertex y : g.neighbors(x))
        if (label[y] < 0) {
          label[y] = next;
          stack.push_back(y);
        }
    }
    ++next;
  }
  return label;
}

WeightedGraph induced_subgraph(const WeightedGraph& g, const VertexSet& keep) {
  const std::size_t n = g.num_vertices();
  std::vector<Vertex> local(n, -1);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    require(g.valid(keep[i]), "induced_subgraph: unknown vertex");
    local[keep[i]] = static_cast<Vertex>(i);
  }
  GraphBuilder b(keep.size(), g.has_self_loops());
  for (Vertex x : keep) {
    auto nb = g.neighbors(x);
    auto cd = g.conductances(x);
    for (std::size_t k = 0; k < nb.size(); ++k)
      if (nb[k] >= x && local[nb[k]] >= 0) b.add_edge(local[x], local[nb[k]], cd[k]);
  }
  if (g.has_coordinates()) {
    std::vector<int> coords;
    coords.reserve(keep.size() * g.dim());
    for (Vertex x : keep) {
      auto c = g.coord(x);
      coords.insert(coords.end(), c.begin(), c.end());
    }
    b.set_coordinates(g.dim(), std::move(coords));
  }
  return std::move(b).build();
}

}  // namespace harmeas
