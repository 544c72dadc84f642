#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace harmeas {

using Vertex = std::int32_t;

/// Distance value returned when two vertices lie in different components.
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Sorted, duplicate-free list of vertex ids.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(std::vector<Vertex> ids);
  VertexSet(std::initializer_list<Vertex> ids);

  static VertexSet from_mask(const std::vector<char>& mask);

  bool contains(Vertex v) const;
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }
  Vertex operator[](std::size_t i) const { return ids_[i]; }
  const std::vector<Vertex>& ids() const noexcept { return ids_; }

  /// Dense membership mask of length n.
  std::vector<char> mask(std::size_t n) const;

  friend bool operator==(const VertexSet&, const VertexSet&) = default;

 private:
  std::vector<Vertex> ids_;
};

VertexSet set_union(const VertexSet& a, const VertexSet& b);
VertexSet set_difference(const VertexSet& a, const VertexSet& b);
VertexSet set_intersection(const VertexSet& a, const VertexSet& b);
bool is_subset(const VertexSet& a, const VertexSet& b);

/// Order-preserving key for lattice coordinates (up to 4 axes, each in
/// [-32768, 32767]); lexicographic order of coordinates is key order.
std::uint64_t pack_coordinates(std::span<const int> c);
inline constexpr int kMaxLatticeDim = 4;
inline constexpr int kMaxLatticeCoord = 32767;

/// Finite weighted graph in compressed adjacency form. Zero conductances are
/// never stored, so adjacency is exactly the relation a(x,y) > 0. Vertices may
/// carry integer lattice coordinates; they are metadata only.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  std::size_t num_vertices() const noexcept { return pi_.size(); }
  std::size_t num_edges() const noexcept { return num_edges_; }
  bool valid(Vertex x) const noexcept {
    return x >= 0 && static_cast<std::size_t>(x) < pi_.size();
  }

  std::span<const Vertex> neighbors(Vertex x) const {
    return {adj_.data() + offsets_[x], adj_.data() + offsets_[x + 1]};
  }
  std::span<const double> conductances(Vertex x) const {
    return {cond_.data() + offsets_[x], cond_.data() + offsets_[x + 1]};
  }
  std::size_t degree(Vertex x) const {
    return static_cast<std::size_t>(offsets_[x + 1] - offsets_[x]);
  }

  /// Vertex weight pi(x) = sum of incident conductances.
  double pi(Vertex x) const { return pi_[x]; }
  const std::vector<double>& weights() const noexcept { return pi_; }

  /// a(x,y), zero when x and y are not adjacent.
  double conductance(Vertex x, Vertex y) const;

  bool has_self_loops() const noexcept { return self_loops_; }

  int dim() const noexcept { return dim_; }
  bool has_coordinates() const noexcept { return dim_ > 0; }
  std::span<const int> coord(Vertex x) const {
    return {coords_.data() + static_cast<std::size_t>(x) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  std::optional<Vertex> find(std::span<const int> c) const;
  std::optional<Vertex> find(std::initializer_list<int> c) const {
    return find(std::span<const int>(c.begin(), c.size()));
  }
  /// l1 distance between the coordinates of two vertices.
  int l1_distance(Vertex x, Vertex y) const;

 private:
  friend class GraphBuilder;

  std::vector<std::int64_t> offsets_{0};
  std::vector<Vertex> adj_;
  std::vector<double> cond_;
  std::vector<double> pi_;
  std::size_t num_edges_ = 0;
  bool self_loops_ = false;

  int dim_ = 0;
  std::vector<int> coords_;
  std::vector<std::pair<std::uint64_t, Vertex>> coord_index_;
};

class GraphBuilder {
 public:
  explicit GraphBuilder(std::size_t num_vertices, bool allow_self_loops = false,
                        bool allow_isolated = false);

  /// Adds the undirected edge {x,y}. Zero conductances are dropped; negative
  /// values, repeated edges and (unless allowed) self-loops are rejected.
  void add_edge(Vertex x, Vertex y, double a);
  void set_coordinates(int dim, std::vector<int> coords);
  void reserve(std::size_t edges) { edges_.reserve(edges); }

  /// Throws Domain when a vertex has no incident edge (pi must be positive),
  /// unless isolated vertices were allowed (raw lattice environments).
  WeightedGraph build() &&;

 private:
  struct Edge {
    Vertex x;
    Vertex y;
    double a;
  };
  std::size_t n_;
  bool allow_self_loops_;
  bool allow_isolated_;
  std::vector<Edge> edges_;
  int dim_ = 0;
  std::vector<int> coords_;
};

/// p(x,y) = a(x,y) / pi(x).
double transition_prob(const WeightedGraph& g, Vertex x, Vertex y);

/// Multi-source breadth-first distances. Vertices with allowed[v] == 0 are
/// neither entered nor expanded (sources are always accepted). The search stops
/// expanding at max_dist.
std::vector<int> bfs_distances(const WeightedGraph& g,
                               std::span<const Vertex> sources,
                               int max_dist = kUnreachable,
                               const std::vector<char>* allowed = nullptr);

int graph_distance(const WeightedGraph& g, Vertex x, Vertex y);

/// B(x,R) = { y : D(x,y) < R }.
VertexSet ball(const WeightedGraph& g, Vertex x, int radius);
/// { y : D(x,y) == r }.
VertexSet sphere(const WeightedGraph& g, Vertex x, int r);
/// Vertices outside A adjacent to A.
VertexSet boundary(const WeightedGraph& g, const VertexSet& a);
/// A together with its boundary.
VertexSet closure(const WeightedGraph& g, const VertexSet& a);

/// Vertices of the boundary of V that connect to U through V and reach the
/// boundary of W inside the closure of W. Requires U within V within W. When W
/// has no boundary (W is the whole window) the second condition is vacuous.
VertexSet crossing_set(const WeightedGraph& g, const VertexSet& w,
                       const VertexSet& v, const VertexSet& u);

/// Component label per vertex, labels numbered by smallest member id.
std::vector<int> component_labels(const WeightedGraph& g);

/// Subgraph induced on `keep`; local vertex i corresponds to keep[i].
/// Coordinates are carried over. Vertices left without edges are rejected.
WeightedGraph induced_subgraph(const WeightedGraph& g, const VertexSet& keep);

}  // namespace harmeas
