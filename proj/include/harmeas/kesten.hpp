#pragma once

#include <string>
#include <vector>

#include <harmeas/channels.hpp>
#include <harmeas/flow.hpp>
#include <harmeas/graph.hpp>

namespace harmeas {

/// Square grid of side s = C_K ln n (rounded up to an even integer) covering
/// [-N, N]^2 around the anchor, N = (J + 1/2) s with J maximal such that N < n.
struct KestenGeometry {
  int n = 0;
  double c_k = 0.0;
  int side = 0;  // s
  int j_max = 0; // J
  int half = 0;  // N
  int ax = 0, ay = 0;  // anchor coordinates (grid origin)

  /// Square (i, j) as a closed rectangle in absolute coordinates.
  Strip square(int i, int j) const;
};

KestenGeometry kesten_geometry(int n, double c_k, int ax = 0, int ay = 0);

/// Square-grid cells met by the diameter from (-N, j s) to (N, -j s), as a
/// 4-connected sequence; a corner crossing adds the cell of the horizontal step.
std::vector<std::pair<int, int>> diameter_squares(int j_max, int j);

struct Stretch {
  std::size_t first = 0, last = 0;  // cell range within the path of squares
  bool horizontal = true;
  int direction = 1;                // +1 right/up, -1 down
  ChannelReport channels;
};

struct SquarePath {
  int j = 0;
  std::vector<std::pair<int, int>> cells;
  std::vector<Stretch> stretches;
  std::size_t used_channels = 0;           // min over stretches
  std::vector<std::vector<Vertex>> paths;  // left side -> right side, loop-erased
  std::size_t multiplicity_violations = 0; // edges on more than two of `paths`
  std::size_t max_multiplicity = 0;
};

struct KestenOptions {
  double c_k = 2.0;
  bool full_strips = true;  // also scan full-length row and column strips
};

struct KestenReport {
  KestenGeometry geometry;
  std::vector<SquarePath> square_paths;
  std::vector<ChannelReport> row_strips;   // horizontal, one per square row
  std::vector<ChannelReport> column_strips;
  std::size_t min_stretch_channels = 0;
  std::size_t min_strip_channels = 0;
  std::vector<Vertex> pi1, pi2;            // x_l -> anchor
  std::size_t connection_failures = 0;
  std::size_t multiplicity_violations = 0;
  std::size_t num_paths = 0;               // paths from the anchor to the box sides
  double intensity = 0.0;
  double energy = 0.0;
  double energy_grid = 0.0;
  double energy_connection = 0.0;          // edges of pi1 and pi2
  double unit_energy = 0.0;                // energy / intensity^2
  double thomson = 0.0;
  double max_interior_divergence = 0.0;
  Flow flow;
};

/// Builds theta_n from the anchor to the sides of [-N, N]^2. Throws
/// ConstructionFailed naming the first strip without an open crossing.
KestenReport kesten_grid_flow(const WeightedGraph& g, Vertex anchor, int n,
                              const KestenOptions& opt = {});

/// Vertices of g strictly inside the box (the domain of the exact capacity).
VertexSet kesten_box_interior(const WeightedGraph& g, const KestenGeometry& geo);

/// Smallest integer C_K in [1, max_c] for which every stretch of every path of
/// squares has an open crossing on all given graphs; 0 when none does.
int calibrate_kesten_constant(const std::vector<const WeightedGraph*>& graphs,
                              const std::vector<Vertex>& anchors, int n, int max_c);

std::vector<Vertex> loop_erase(const std::vector<Vertex>& walk);

}  // namespace harmeas
