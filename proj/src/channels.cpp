#include <harmeas/channels.hpp>

#include <algorithm>
#include <deque>

#include <harmeas/error.hpp>

namespace harmeas {

namespace {

struct Arc {
  int to;
  int cap;
  int rev;
  bool forward;
};

class UnitNetwork {
 public:
  explicit UnitNetwork(int n) : adj_(n) {}

  void add(int u, int v, int cap) {
    adj_[u].push_back({v, cap, static_cast<int>(adj_[v].size()), true});
    adj_[v].push_back({u, 0, static_cast<int>(adj_[u].size()) - 1, false});
  }

  bool augment(int s, int t) {
    std::vector<std::pair<int, int>> parent(adj_.size(), {-1, -1});
    parent[s] = {s, -1};
    std::deque<int> q{s};
    while (!q.empty() && parent[t].first < 0) {
      int u = q.front();
      q.pop_front();
      for (int i = 0; i < static_cast<int>(adj_[u].size()); ++i) {
        const Arc& a = adj_[u][i];
        if (a.cap > 0 && parent[a.to].first < 0) {
          parent[a.to] = {u, i};
          q.push_back(a.to);
        }
      }
    }
    if (parent[t].first < 0) return false;
    for (int v = t; v != s;) {
      auto [u, i] = parent[v];
      Arc& a = adj_[u][i];
      a.cap -= 1;
      adj_[v][a.rev].cap += 1;
      v = u;
    }
    return true;
  }

  const std::vector<Arc>& arcs(int u) const { return adj_[u]; }

 private:
  std::vector<std::vector<Arc>> adj_;
};

}  // namespace

ChannelReport find_channels(const WeightedGraph& g, const Strip& strip) {
  require(g.dim() == 2, "find_channels: needs a graph with 2D coordinates");
  require(strip.x1 > strip.x0 && strip.y1 >= strip.y0, "find_channels: degenerate strip");
  require(strip.horizontal ? strip.x1 > strip.x0 : strip.y1 > strip.y0,
          "find_channels: strip has no length");

  // Along / across coordinates in the crossing direction.
  auto along = [&](Vertex v) { return strip.horizontal ? g.coord(v)[0] : g.coord(v)[1]; };
  auto across = [&](Vertex v) { return strip.horizontal ? g.coord(v)[1] : g.coord(v)[0]; };
  const int start = strip.horizontal ? strip.x0 : strip.y0;
  const int stop = strip.horizontal ? strip.x1 : strip.y1;

  std::vector<Vertex> nodes;
  for (int x = strip.x0; x <= strip.x1; ++x)
    for (int y = strip.y0; y <= strip.y1; ++y)
      if (auto v = g.find({x, y})) nodes.push_back(*v);
  std::sort(nodes.begin(), nodes.end());
  auto local = [&](Vertex v) -> int {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
    return it != nodes.end() && *it == v ? static_cast<int>(it - nodes.begin()) : -1;
  };

  const int m = static_cast<int>(nodes.size());
  const int s = 2 * m, t = 2 * m + 1;
  UnitNetwork net(2 * m + 2);
  for (int i = 0; i < m; ++i) {
    const Vertex v = nodes[i];
    net.add(2 * i, 2 * i + 1, 1);
    if (along(v) == start) net.add(s, 2 * i, 1);
    if (along(v) == stop) net.add(2 * i + 1, t, 1);
    for (Vertex w : g.neighbors(v)) {
      const int j = local(w);
      if (j >= 0 && j != i) net.add(2 * i + 1, 2 * j, 1);
    }
  }
  while (net.augment(s, t)) {
  }

  ChannelReport rep;
  rep.strip = strip;
  for (const Arc& a : net.arcs(s)) {
    if (!a.forward || a.cap != 0) continue;
    std::vector<Vertex> path;
    int in = a.to;
    while (true) {
      const int i = in / 2;
      path.push_back(nodes[i]);
      int next = -1;
      for (const Arc& b : net.arcs(2 * i + 1)) {
        if (b.forward && b.cap == 0) {
          next = b.to;
          break;
        }
      }
      require(next >= 0, "find_channels: broken flow decomposition");
      if (next == t) break;
      in = next;
    }
    // Last visit of the entry side, then first visit of the exit side.
    std::size_t first = 0;
    for (std::size_t k = 0; k < path.size(); ++k)
      if (along(path[k]) == start) first = k;
    std::size_t last = first;
    while (along(path[last]) != stop) ++last;
    rep.channels.emplace_back(path.begin() + first, path.begin() + last + 1);
  }
  std::sort(rep.channels.begin(), rep.channels.end(),
            [&](const auto& p, const auto& q) { return across(p.front()) < across(q.front()); });
  return rep;
}

}  // namespace harmeas
