#pragma once

#include <vector>

#include <harmeas/graph.hpp>
#include <harmeas/solver.hpp>

namespace harmeas {

struct PotentialKernelOptions {
  double window_fraction = 0.5;  // trusted window as a fraction of the largest radius
  double gap_tol = 0.25;         // max last-radius increment inside the window
  SolverOptions solver;
};

/// g(., x0) from finite-ball differences G_R(x0,x0) - G_R(., x0).
struct PotentialKernel {
  Vertex source = -1;
  std::vector<int> radii;
  std::vector<double> diagonal;   // G_R(x0, x0) per radius
  std::vector<double> values;     // host-indexed g at the largest radius
  std::vector<double> last_gap;   // host-indexed |g_R - g_R'| for the last two radii
  std::vector<int> distance;      // graph distance from x0 (kUnreachable beyond)
  int window_radius = 0;          // nominal trusted radius
  int converged_radius = 0;       // after shrinking away negative values
  int negativity_shrink = 0;      // window_radius - converged_radius
  double max_gap = 0.0;           // over the converged window
  double mean_value_residual = 0.0;
  bool converged = false;

  double g(Vertex v) const { return values[v]; }
  bool in_window(Vertex v) const { return distance[v] < converged_radius; }
};

PotentialKernel potential_kernel(const WeightedGraph& g, Vertex x0, const std::vector<int>& radii,
                                 const PotentialKernelOptions& opt = {});

struct ShellRatio {
  int distance = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::size_t count = 0;
};

/// Empirical constants with c_lower ln D <= g <= c_upper ln D on the shells.
struct KernelLogBounds {
  double c_lower = 0.0;
  double c_upper = 0.0;
  int rho_hat = 0;  // smallest shell from which every ratio is positive
  std::vector<ShellRatio> shells;

  /// c6 = max(c_upper, 1/c_lower, 1).
  double c6() const;
};

KernelLogBounds kernel_log_bounds(const WeightedGraph& g, const PotentialKernel& k,
                                  const std::vector<int>& shells);

struct LevelBall {
  double n = 0.0;
  VertexSet members;            // { g < ln n }
  int max_distance = 0;         // largest D(x0, .) among members
  double c6 = 0.0;              // sandwich exponent used (0: not checked)
  bool sandwich_ok = true;
  std::size_t inner_ball_size = 0;  // |B(x0, n^{1/c6})|
  double outer_radius = 0.0;        // n^{c6}
};

/// Sublevel set of g, grown from x0. Throws WindowClipped when it reaches the
/// edge of the converged window. c6 > 0 enables the sandwich check.
LevelBall level_ball(const WeightedGraph& g, const PotentialKernel& k, double n, double c6 = 0.0);

struct UAOptions {
  double window_fraction = 0.5;  // killed window radius relative to the kernel window
  SolverOptions solver;
};

/// u_A(x, x0) = g(x, x0) - E_x g(X at the first time >= 0 in A). The expectation
/// is split at the exit of the killed window W = B(x0, R_W): the part hitting A
/// inside W is solved exactly, and the walks leaving W contribute a constant c
/// fixed by sum over A of pi(y) Pu_A(y) = pi(x0).
struct UAField {
  VertexSet a;
  Vertex source = -1;
  int window = 0;                  // R_W
  std::vector<double> values;      // host-indexed on B(x0, R_W); zero on A
  std::vector<double> pu;          // Pu_A on A (aligned with a)
  std::vector<double> pu_identity; // g + 1_{x0} - E g(X_{tau_A}) on A
  double identity_residual = 0.0;  // max |pu - pu_identity|
  double far_constant = 0.0;       // c
  double harmonic_residual = 0.0;  // max |L u_A| on W minus A
  std::size_t negative_count = 0;  // vertices off A with u_A < 0
  double min_value = 0.0;

  double value(Vertex v) const { return values[v]; }
};

UAField u_a_field(const WeightedGraph& g, const VertexSet& a, Vertex x0, const PotentialKernel& k,
                  const UAOptions& opt = {});

/// P_x(exit before tau_A) for the exit of the level ball (level = true) or of
/// the metric ball B(x0, n). Host-indexed; values for x in A use one step.
std::vector<double> escape_probability(const WeightedGraph& g, const PotentialKernel& k,
                                       const VertexSet& a, double n, bool level,
                                       const SolverOptions& opt = {});

struct EscapeEstimate {
  double min_probability = 0.0;
  Vertex argmin = -1;
  double log_ratio = 0.0;  // ln m / ln n
  double ratio = 0.0;      // min_probability / log_ratio
};

/// Minimum over the sphere D(x0, .) = m of P_y(exit before tau_A).
EscapeEstimate escape_log_estimate(const WeightedGraph& g, const PotentialKernel& k,
                                   const VertexSet& a, int m, double n, bool level = true,
                                   const SolverOptions& opt = {});

}  // namespace harmeas
