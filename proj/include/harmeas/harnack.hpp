#pragma once

#include <vector>

#include <harmeas/graph.hpp>
#include <harmeas/linear_solver.hpp>
#include <harmeas/solver.hpp>

namespace harmeas {

/// Exit kernel K(u, z) = P_u(X at the exit of `domain` equals z) for u in
/// `points`, z over the outer boundary of the domain. One Green solve per point.
struct ExitKernel {
  VertexSet domain;
  VertexSet boundary;
  std::vector<Vertex> points;
  std::vector<double> values;  // points x boundary, row-major

  double at(std::size_t pi, std::size_t zi) const { return values[pi * boundary.size() + zi]; }
};

ExitKernel exit_kernel(const WeightedGraph& g, const VertexSet& domain,
                       const std::vector<Vertex>& points, const SolverOptions& opt = {});

/// sup over positive harmonic u of max u / min u on `points`, attained at a
/// single kernel column.
struct ExtremalRatio {
  double ratio = 1.0;
  Vertex witness = -1;   // boundary point z*
  Vertex argmax = -1, argmin = -1;
};

ExtremalRatio extremal_ratio(const ExitKernel& k);

struct HarnackAudit {
  Vertex center = -1;
  int inner_radius = 0;   // R
  double factor = 0.0;    // M
  int outer_radius = 0;   // ceil(M R)
  double ratio = 1.0;
  Vertex witness = -1;
};

/// Positive harmonic functions on B(x, M R) compared on B(x, R).
HarnackAudit harnack_ratio_exact(const WeightedGraph& g, Vertex x, int r, double m,
                                 const SolverOptions& opt = {});

/// Outer factor of the annuli in the Green-ratio argument: harmonic on
/// B(x, (M + 2) R).
inline double boukricha_factor(double m) { return m + 2.0; }

struct GreenPair {
  Vertex y = -1;
  int distance = 0;
  double green = 0.0;
  double scaled = 0.0;  // G D^gamma
};

struct GreenianAudit {
  Vertex source = -1;
  double gamma = 0.0;
  int d_min = 0, d_max = 0;
  int radius_floor = 0;
  std::vector<GreenPair> retained;
  std::vector<GreenPair> excluded;  // below the radius floor
  double c_i = 0.0, c_s = 0.0;

  double band_ratio() const { return c_s / c_i; }
};

/// Fits C_i = min and C_s = max of G(x0, y) D(x0, y)^gamma over the shells
/// D in [d_min, d_max]; pairs closer than radius_floor are listed as excluded.
GreenianAudit ge_gamma_audit(const WeightedGraph& g, const GreenColumn& column, double gamma,
                             int d_min, int d_max, int radius_floor = 0);

/// 2^gamma C_s / C_i.
double harnack_constant_bound(const GreenianAudit& audit);

struct HolderProfile {
  std::vector<int> scales;        // i, balls B(x0, 2^i)
  std::vector<double> oscillation;
  double lambda = 0.0;            // max V(i) / V(i+1)
  double nu = 0.0;                // -log2 lambda; infinity for constant fields
};

HolderProfile holder_profile(const WeightedGraph& g, std::span<const double> field, Vertex x0,
                             const std::vector<int>& scales);

/// Positive harmonic functions on B(x0, outer) minus B(x0, r), compared on the
/// sphere D(x0, .) = m. Both boundary components index the kernel columns.
struct AnnulusAudit {
  int r = 0, m = 0, outer = 0;
  double ratio = 1.0;
  Vertex witness = -1;
  std::size_t sphere_size = 0;
};

AnnulusAudit annulus_harnack_ratio(const WeightedGraph& g, Vertex x0, int r, int m, int outer,
                                   const SolverOptions& opt = {});

}  // namespace harmeas
