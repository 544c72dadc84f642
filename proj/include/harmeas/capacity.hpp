#pragma once

#include <vector>

#include <harmeas/graph.hpp>
#include <harmeas/linear_solver.hpp>

namespace harmeas {

/// Cap_B(A) with the escape probabilities P_x(leave B before returning to A).
struct RelativeCapacity {
  VertexSet a;
  double value = 0.0;
  std::vector<double> escape;  // aligned with a
  SolveStats stats;
};

/// Throws Domain when A is not inside B or B has no boundary.
RelativeCapacity relative_capacity(const WeightedGraph& g, const VertexSet& a, const VertexSet& b,
                                   const SolverOptions& opt = {});

double capacity_relative(const WeightedGraph& g, const VertexSet& a, const VertexSet& b,
                         const SolverOptions& opt = {});

struct EscapeCapacity {
  VertexSet a;
  Vertex center = -1;
  std::vector<int> radii;
  std::vector<double> values;                 // Cap_{B(center,R)}(A)
  std::vector<std::vector<double>> escape;    // per radius, aligned with a
  double last_gap = 0.0;
  double limit = 0.0;      // extrapolated Cap(A); zero when flagged recurrent
  double gap_ratio = 0.0;  // observed ratio of the last two gaps
  bool monotone = true;
  bool recurrent = false;
};

/// Capacities relative to the balls B(center, R), with a recurrence flag that
/// compares the decay of the gaps with the 1/R and 1/ln R models.
EscapeCapacity escape_capacity(const WeightedGraph& g, const VertexSet& a, Vertex center,
                               const std::vector<int>& radii, const SolverOptions& opt = {});

}  // namespace harmeas
