#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <harmeas/graph.hpp>

namespace harmeas {

enum class LawKind { Bernoulli, Uniform, Constant, TwoPoint };

/// i.i.d. conductance law. Only the fields of the selected kind are read.
struct ConductanceLaw {
  LawKind kind = LawKind::Constant;
  double p = 1.0;     // bernoulli, two-point
  double lo = 0.0;    // uniform
  double hi = 1.0;    // uniform
  double c = 1.0;     // constant
  double a_hi = 1.0;  // two-point value with probability p
  double a_lo = 0.0;  // two-point value with probability 1-p

  static ConductanceLaw bernoulli(double p);
  static ConductanceLaw uniform(double lo, double hi);
  static ConductanceLaw constant(double c);
  static ConductanceLaw two_point(double p, double a_hi, double a_lo);

  void validate() const;
  /// Maps a uniform variate in [0,1) to a conductance.
  double draw(double u) const;
};

const char* to_string(LawKind kind);
LawKind law_kind_from_string(const std::string& s);

/// Window shape: the box [-L,L]^d or the l1 ball {|x|_1 <= L}.
enum class WindowShape { Box, Diamond };

const char* to_string(WindowShape s);
WindowShape window_shape_from_string(const std::string& s);

struct EnvironmentSpec {
  int dim = 2;
  int half_width = 1;
  ConductanceLaw law;
  std::uint64_t seed = 0;
  WindowShape shape = WindowShape::Box;
  std::size_t memory_budget = std::size_t{3} << 30;

  void validate() const;
};

/// Counter-based draw for the lattice edge {x, x + e_axis}: a splitmix64
/// finalizer chain over (seed, coordinates of x, axis), top 53 bits as a double
/// in [0,1). An edge gets the same variate whatever window contains it.
double edge_uniform(std::uint64_t seed, std::span<const int> lower, int axis);

std::size_t window_vertex_count(int dim, int half_width, WindowShape shape);
/// Bytes needed to sample the window (graph plus construction scratch).
std::size_t estimate_environment_bytes(const EnvironmentSpec& spec);

/// Vertices are numbered in lexicographic order of their coordinates. Closed
/// edges are omitted, so vertices may be isolated.
WeightedGraph sample_environment(const EnvironmentSpec& spec);

struct Cluster {
  WeightedGraph graph;              // the component, locally indexed
  std::vector<Vertex> host_ids;     // local id -> host id
  Vertex anchor = 0;                // local id
  std::size_t host_vertices = 0;
  std::vector<int> anchor_distance; // chemical distance from the anchor

  Vertex local(Vertex host) const;  // -1 when not in the cluster
};

struct ClusterMode {
  bool largest = true;
  Vertex anchor = -1;  // host id, anchored mode only

  static ClusterMode Largest() { return {true, -1}; }
  static ClusterMode Anchored(Vertex v) { return {false, v}; }
};

/// In largest mode the anchor is the component vertex closest (l1) to the
/// origin when coordinates exist, else its smallest id.
Cluster extract_cluster(const WeightedGraph& g, ClusterMode mode);

/// Union-find component labels; each label is the smallest vertex id of the
/// component.
std::vector<Vertex> union_find_components(const WeightedGraph& g);

struct ChemicalAudit {
  std::size_t pairs = 0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  Vertex max_u = -1;
  Vertex max_v = -1;
  int max_chemical = 0;
  int max_l1 = 0;
};

/// Samples vertex pairs (local ids) with l1 distance >= min_l1 and reports the
/// ratio of chemical to l1 distance.
ChemicalAudit chemical_distance_audit(const Cluster& c, std::size_t pairs,
                                      std::uint64_t seed, int min_l1 = 1);

/// Lattice graph helpers used throughout tests and the CLI.
WeightedGraph lattice(int dim, int half_width, WindowShape shape = WindowShape::Box,
                      double conductance = 1.0);

}  // namespace harmeas
