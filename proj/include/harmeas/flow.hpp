#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include <harmeas/graph.hpp>

namespace harmeas {

/// Edge flow stored once per undirected edge, oriented from the smaller to the
/// larger endpoint, so antisymmetry holds by construction.
class Flow {
 public:
  Flow() = default;

  /// Adds `amount` in the direction x -> y. Requires a(x,y) > 0.
  void add(const WeightedGraph& g, Vertex x, Vertex y, double amount);
  /// theta(x -> y).
  double value(Vertex x, Vertex y) const;

  VertexSet sources;
  VertexSet sinks;

  /// Net outflow per vertex (nonzero entries only).
  std::map<Vertex, double> divergence() const;
  /// Largest |divergence| off sources and sinks.
  double interior_divergence() const;
  /// Net flux out of the sources.
  double intensity() const;
  /// Net flux into the sinks.
  double sink_inflow() const;
  /// Sum over edges of theta^2 / a.
  double energy() const;
  double energy_on(const std::vector<char>& edge_mask_vertices) const;

  struct Entry {
    double theta = 0.0;  // min -> max
    double conductance = 0.0;
  };
  const std::map<std::pair<Vertex, Vertex>, Entry>& edges() const noexcept { return edges_; }
  void scale(double s);
  void assign_entries(std::map<std::pair<Vertex, Vertex>, Entry> e) { edges_ = std::move(e); }

 private:
  std::map<std::pair<Vertex, Vertex>, Entry> edges_;
};

/// Unit flow along consecutive vertices; source = path.front(), sink = path.back().
Flow flow_from_path(const WeightedGraph& g, std::span<const Vertex> path);

/// Edgewise weighted sum; sources and sinks are united.
Flow flow_sum(const std::vector<Flow>& flows, const std::vector<double>& weights);

/// intensity^2 / energy, a lower bound on the capacity between sources and sinks.
double thomson_bound(const Flow& f);

}  // namespace harmeas
