#include <harmeas/flow.hpp>

#include <cmath>
#include <string>

#include <harmeas/error.hpp>

namespace harmeas {

void Flow::add(const WeightedGraph& g, Vertex x, Vertex y, double amount) {
  const double a = g.conductance(x, y);
  if (!(a > 0.0) || x == y)
    fail(ErrorKind::Domain, "flow: vertices " + std::to_string(x) + " and " + std::to_string(y) +
                                " are not adjacent");
  auto key = x < y ? std::make_pair(x, y) : std::make_pair(y, x);
  auto& e = edges_[key];
  e.conductance = a;
  e.theta += x < y ? amount : -amount;
}

double Flow::value(Vertex x, Vertex y) const {
  auto key = x < y ? std::make_pair(x, y) : std::make_pair(y, x);
  auto it = edges_.find(key);
  if (it == edges_.end()) return 0.0;
  return x < y ? it->second.theta : -it->second.theta;
}

std::map<Vertex, double> Flow::divergence() const {
  std::map<Vertex, double> d;
  for (const auto& [k, e] : edges_) {
    d[k.first] += e.theta;
    d[k.second] -= e.theta;
  }
  return d;
}

double Flow::interior_divergence() const {
  double m = 0.0;
  for (const auto& [v, x] : divergence())
    if (!sources.contains(v) && !sinks.contains(v)) m = std::max(m, std::abs(x));
  return m;
}

double Flow::intensity() const {
  double s = 0.0;
  auto d = divergence();
  for (Vertex v : sources) {
    auto it = d.find(v);
    if (it != d.end()) s += it->second;
  }
  return s;
}

double Flow::sink_inflow() const {
  double s = 0.0;
  auto d = divergence();
  for (Vertex v : sinks) {
    auto it = d.find(v);
    if (it != d.end()) s -= it->second;
  }
  return s;
}

double Flow::energy() const {
  double s = 0.0;
  for (const auto& [k, e] : edges_) s += e.theta * e.theta / e.conductance;
  return s;
}

double Flow::energy_on(const std::vector<char>& mask) const {
  double s = 0.0;
  for (const auto& [k, e] : edges_)
    if (mask[k.first] && mask[k.second]) s += e.theta * e.theta / e.conductance;
  return s;
}

void Flow::scale(double s) {
  for (auto& [k, e] : edges_) e.theta *= s;
}

Flow flow_from_path(const WeightedGraph& g, std::span<const Vertex> path) {
  require(path.size() >= 2, "flow_from_path: a path needs at least two vertices");
  Flow f;
  for (std::size_t i = 1; i < path.size(); ++i) f.add(g, path[i - 1], path[i], 1.0);
  f.sources = VertexSet{path.front()};
  f.sinks = VertexSet{path.back()};
  return f;
}

Flow flow_sum(const std::vector<Flow>& flows, const std::vector<double>& weights) {
  require(flows.size() == weights.size(), "flow_sum: one weight per flow");
  Flow out;
  std::map<std::pair<Vertex, Vertex>, Flow::Entry> acc;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    for (const auto& [k, e] : flows[i].edges()) {
      auto& t = acc[k];
      t.conductance = e.conductance;
      t.theta += weights[i] * e.theta;
    }
    out.sources = set_union(out.sources, flows[i].sources);
    out.sinks = set_union(out.sinks, flows[i].sinks);
  }
  out.assign_entries(std::move(acc));
  return out;
}

double thomson_bound(const Flow& f) {
  const double i = f.intensity();
  if (std::abs(i) < 1e-300) fail(ErrorKind::Domain, "thomson_bound: flow has zero intensity");
  const double e = f.energy();
  require(std::isfinite(e) && e > 0.0, "thomson_bound: energy must be finite and positive");
  return i * i / e;
}

}  // namespace harmeas
