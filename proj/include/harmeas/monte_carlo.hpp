#pragma once

#include <cstdint>
#include <vector>

#include <harmeas/graph.hpp>
#include <harmeas/solver.hpp>

namespace harmeas {

struct McOptions {
  std::uint64_t walks = 100000;
  std::uint64_t seed = 0;
  std::int64_t step_cap = 1000000;
  bool serial = false;  // reference loop without OpenMP
};

struct McResult {
  VertexSet support;                  // A and stop
  std::vector<std::uint64_t> counts;  // aligned with support
  std::vector<double> weights;        // counts / completed walks
  std::vector<double> std_errors;
  std::uint64_t walks = 0;
  std::uint64_t censored = 0;         // walks that hit the step cap
  double censored_fraction = 0.0;

  std::uint64_t completed() const noexcept { return walks - censored; }
  MeasureOnSet measure() const;
};

/// Walk i uses its own mt19937_64 stream seeded from (seed, i); outcomes are
/// stored per walk and tallied in walk order.
McResult mc_hitting(const WeightedGraph& g, const VertexSet& a, const VertexSet& stop,
                    Vertex x, const McOptions& opt);

/// Two-sided exact binomial p-value 2 min(P(K <= k), P(K >= k)), capped at 1.
double binomial_two_sided_p(std::uint64_t k, std::uint64_t n, double p);

struct McAgreement {
  double min_p_value = 1.0;
  double max_z = 0.0;
  Vertex worst = -1;
  bool pass = true;
};

/// Per support point binomial test of the Monte Carlo counts against exact
/// probabilities at significance alpha.
McAgreement compare_mc_exact(const McResult& mc, const MeasureOnSet& exact, double alpha);

}  // namespace harmeas
