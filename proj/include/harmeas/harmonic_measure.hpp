#pragma once

#include <string>
#include <vector>

#include <harmeas/graph.hpp>
#include <harmeas/potential.hpp>
#include <harmeas/solver.hpp>

namespace harmeas {

enum class MeasureMethod { FiniteBall, TransientLimit, EscapeFormula, RecurrentIdent };
const char* to_string(MeasureMethod m);

struct HarmonicMeasureResult {
  VertexSet target;
  Vertex base = -1;
  MeasureOnSet measure;
  MeasureMethod method = MeasureMethod::FiniteBall;
  int scale = 0;  // m for a finite ball, largest radius otherwise

  // Convergence record: measures per scale and TV between consecutive ones.
  std::vector<int> scales;
  std::vector<MeasureOnSet> per_scale;
  std::vector<double> tv;
  bool cauchy = true;  // tv strictly decreasing
  std::string flag;    // empty when nothing was flagged

  double capacity = 0.0;        // denominator
  double capacity_check = 0.0;  // relative gap to the independent capacity route
  double defect = 0.0;          // mass not on A (observed measures)
  double identity_residual = 0.0;
};

/// H_A^m(y) = pi(y) P_y(tau_A > tau_{dB(x0,m)}) / Cap_m(A). Each numerator
/// comes from a Green solve with pole y; the sum is compared with
/// relative_capacity.
HarmonicMeasureResult finite_ball_measure(const WeightedGraph& g, const VertexSet& a, Vertex x0,
                                          int m, const SolverOptions& opt = {});

/// H_A^m over an increasing schedule; the last one is the reported measure.
HarmonicMeasureResult transient_limit_measure(const WeightedGraph& g, const VertexSet& a,
                                              Vertex x0, const std::vector<int>& schedule,
                                              const SolverOptions& opt = {});

/// pi(y) Es_A(y) / Cap(A) with Es_A extrapolated in 1/R from escape_capacity.
HarmonicMeasureResult escape_formula_measure(const WeightedGraph& g, const VertexSet& a,
                                             Vertex x0, const std::vector<int>& radii,
                                             const SolverOptions& opt = {});

/// pi(y) Pu_A(y, x0) normalized over A.
HarmonicMeasureResult recurrent_ident_measure(const WeightedGraph& g, const VertexSet& a,
                                              Vertex x0, const PotentialKernel& k,
                                              const UAOptions& opt = {});

struct ObserverMeasure {
  Vertex observer = -1;
  int distance = 0;     // D(x, A)
  double mass = 0.0;    // P_x(hit A before leaving the window)
  MeasureOnSet measure; // conditional on A
  double tv_to_limit = 0.0;
  bool excluded = false;
};

struct ObservedProfile {
  VertexSet target;
  VertexSet window;
  std::vector<ObserverMeasure> observers;
  double nu_hat = 0.0;  // -slope of log TV against log D
  double fit_c = 0.0;
  bool fitted = false;  // needs at least 4 distinct distances with TV > 0
};

/// Conditional hitting distributions of A from each observer for the walk
/// killed on leaving `window`, with TV to `limit` when it is given.
ObservedProfile observed_measure_profile(const WeightedGraph& g, const VertexSet& a,
                                         const VertexSet& window,
                                         const std::vector<Vertex>& observers,
                                         const MeasureOnSet* limit = nullptr,
                                         const SolverOptions& opt = {});

struct BasePointReport {
  std::vector<Vertex> bases;
  std::vector<HarmonicMeasureResult> measures;
  double max_tv = 0.0;
};

BasePointReport base_point_invariance(const WeightedGraph& g, const VertexSet& a,
                                      const std::vector<const PotentialKernel*>& kernels,
                                      const UAOptions& opt = {});

/// Computes a kernel per base point first.
BasePointReport base_point_invariance(const WeightedGraph& g, const VertexSet& a,
                                      const std::vector<Vertex>& bases,
                                      const std::vector<int>& radii,
                                      const PotentialKernelOptions& kopt = {},
                                      const UAOptions& opt = {});

/// For each y in A the range over z in dB of
/// pi(y) H_{A u dB}(y,z) / sum over y' of pi(y') H_{A u dB}(y',z), with the
/// hitting time taken >= 1. Points z that A cannot reach are skipped.
struct SandwichBounds {
  VertexSet a;
  std::vector<double> lower, upper;  // aligned with a
};

SandwichBounds sandwich_bounds(const WeightedGraph& g, const VertexSet& a, const VertexSet& b,
                               const SolverOptions& opt = {});

}  // namespace harmeas
