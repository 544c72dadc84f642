#pragma once

#include <vector>

#include <harmeas/graph.hpp>

namespace harmeas {

/// Closed rectangle [x0,x1] x [y0,y1] of a planar lattice graph. Horizontal
/// strips are crossed from x = x0 to x = x1, vertical ones from y = y0 to y = y1.
struct Strip {
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool horizontal = true;
  int index = 0;

  int length() const { return horizontal ? x1 - x0 : y1 - y0; }
  int width() const { return horizontal ? y1 - y0 : x1 - x0; }
  bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct ChannelReport {
  Strip strip;
  /// Vertex-disjoint crossings, ordered by the transverse coordinate of their
  /// first vertex. Each starts on the entry side, ends on the exit side and
  /// touches neither side in between.
  std::vector<std::vector<Vertex>> channels;

  std::size_t count() const noexcept { return channels.size(); }
};

/// Maximum number of vertex-disjoint open crossings (unit vertex capacities).
ChannelReport find_channels(const WeightedGraph& g, const Strip& strip);

}  // namespace harmeas
