#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <harmeas/graph.hpp>
#include <harmeas/linear_solver.hpp>

namespace harmeas {

/// Weights over a finite support. `defect` is the mass deliberately missing
/// from a sub-probability vector (zero for proper measures).
struct MeasureOnSet {
  VertexSet support;
  std::vector<double> weights;  // aligned with support
  double defect = 0.0;

  double total() const;
  double weight(Vertex v) const;  // zero off the support
};

/// Half the l1 distance. Throws Domain naming the symmetric difference when
/// the supports differ.
double total_variation(const MeasureOnSet& a, const MeasureOnSet& b);
double max_abs_delta(const MeasureOnSet& a, const MeasureOnSet& b);
/// Renormalized copy; throws UnreachableTarget on zero mass.
MeasureOnSet normalized(const MeasureOnSet& m);
/// Restriction to a subset of the support.
MeasureOnSet restrict_to(const MeasureOnSet& m, const VertexSet& keep);

/// Linear system of the walk killed on leaving `vertices`.
struct RegionSystem {
  std::vector<Vertex> vertices;  // local -> host (sorted)
  std::vector<Vertex> local_of;  // host -> local, -1 outside
  SpdSolver solver;

  std::size_t size() const noexcept { return vertices.size(); }
  Vertex local(Vertex host) const { return local_of[host]; }
};

/// Throws Singular when a component of the region has no edge leaving it.
RegionSystem make_region_system(const WeightedGraph& g, const VertexSet& region,
                                const SolverOptions& opt = {});

/// b_i = sum over y outside the region of a(x_i, y) f(y), f host-indexed.
std::vector<double> boundary_rhs(const WeightedGraph& g, const RegionSystem& sys,
                                 std::span<const double> host_values);

/// Vertices outside `absorbing` whose component (in the graph with
/// `absorbing` removed) touches `absorbing`. With seeds, only the components
/// holding a seed are kept, and a seed whose component cannot reach the
/// absorbing set raises Singular.
VertexSet absorbing_region(const WeightedGraph& g, const VertexSet& absorbing,
                           std::span<const Vertex> seeds = {});

/// max over the region of |sum_y p(x,y) u(y) - u(x)| for host-indexed u.
double laplacian_residual(const WeightedGraph& g, const VertexSet& region,
                          std::span<const double> u);

struct PotentialField {
  VertexSet region;
  VertexSet boundary;
  std::vector<double> values;  // host-indexed; zero off region and boundary
  double residual_norm = 0.0;
  SolveStats stats;

  double value(Vertex v) const { return values[v]; }
};

PotentialField harmonic_extension(const WeightedGraph& g, const VertexSet& region,
                                  const std::map<Vertex, double>& boundary_values,
                                  const SolverOptions& opt = {});
PotentialField harmonic_extension(const WeightedGraph& g, const VertexSet& region,
                                  std::span<const double> host_values,
                                  const SolverOptions& opt = {});

enum class HittingRoute { Auto, Columns, Rows };
const char* to_string(HittingRoute r);

/// H(q, t) = P_q(X at the first time >= 0 in T equals t) for queries q and
/// targets t in T. Columns: one solve per target. Rows: one Green solve per
/// query, H(q,t) = sum_z G(z,q) a(z,t) / pi(q) by reversibility.
struct HittingMatrix {
  VertexSet targets;
  std::vector<Vertex> queries;
  std::vector<double> values;  // row-major, queries x targets
  HittingRoute route = HittingRoute::Auto;

  double at(std::size_t qi, std::size_t ti) const { return values[qi * targets.size() + ti]; }
};

HittingMatrix hitting_matrix(const WeightedGraph& g, const VertexSet& targets,
                             std::span<const Vertex> queries,
                             HittingRoute route = HittingRoute::Auto,
                             const SolverOptions& opt = {});

struct HittingResult {
  VertexSet target;           // A
  MeasureOnSet measure;       // over A and stop
  double survival = 0.0;      // mass landing on stop
  double mass_on_target = 0.0;

  /// Restriction to A renormalized; throws UnreachableTarget on zero mass.
  MeasureOnSet conditional() const;
};

HittingResult hitting_distribution(const WeightedGraph& g, const VertexSet& a,
                                   const VertexSet& stop, Vertex x,
                                   HittingRoute route = HittingRoute::Auto,
                                   const SolverOptions& opt = {});

struct GreenColumn {
  VertexSet domain;
  Vertex source = -1;
  std::vector<double> values;  // host-indexed, zero outside the domain
  int radius = -1;             // ball radius when the domain is a ball
  SolveStats stats;
  double residual_norm = 0.0;  // max |L G - delta / pi| relative form

  double value(Vertex v) const { return values[v]; }
};

/// G_B(., x0), expected visits to x0 before leaving B.
GreenColumn dirichlet_green(const WeightedGraph& g, const VertexSet& b, Vertex x0,
                            const SolverOptions& opt = {},
                            std::span<const double> warm_start = {});

struct TransientGreen {
  Vertex source = -1;
  std::vector<int> radii;
  std::vector<double> diagonal;        // G_R(x0, x0) per radius
  std::vector<GreenColumn> columns;    // one per radius
  double last_gap = 0.0;               // diagonal increment at the last radius
  double monotone_tolerance = 0.0;

  const GreenColumn& final() const { return columns.back(); }
};

/// Relative slack of the monotonicity check, on top of an absolute 1e-12.
inline constexpr double kMonotoneRelTol = 1e-8;

TransientGreen green_column_transient(const WeightedGraph& g, Vertex x0,
                                      const std::vector<int>& radii,
                                      const SolverOptions& opt = {});

/// Both sides of H_A(x, y) = sum over z in dB of G_{A^c}(x, z) H_{A u dB}(z, y)
/// (the right factor with time >= 1). Returns the max discrepancy over y in A.
double last_exit_residual(const WeightedGraph& g, const VertexSet& a, const VertexSet& b,
                          Vertex x, const SolverOptions& opt = {});

}  // namespace harmeas
