#include <harmeas/kesten.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include <harmeas/error.hpp>

namespace harmeas {

Strip KestenGeometry::square(int i, int j) const {
  const int h = side / 2;
  Strip s;
  s.x0 = ax + i * side - h;
  s.x1 = ax + i * side + h;
  s.y0 = ay + j * side - h;
  s.y1 = ay + j * side + h;
  return s;
}

KestenGeometry kesten_geometry(int n, double c_k, int ax, int ay) {
  require(n >= 2, "kesten: n must be at least 2");
  require(c_k > 0, "kesten: C_K must be positive");
  KestenGeometry geo;
  geo.n = n;
  geo.c_k = c_k;
  geo.ax = ax;
  geo.ay = ay;
  const int w = static_cast<int>(std::ceil(c_k * std::log(static_cast<double>(n)) - 1e-12));
  geo.side = std::max(2, w + (w % 2));
  // Largest J with (J + 1/2) s < n.
  int j = 0;
  while ((2 * (j + 1) + 1) * geo.side < 2 * n) ++j;
  if (j < 1)
    fail(ErrorKind::Domain, "kesten: n = " + std::to_string(n) +
                                " is too small for squares of side " + std::to_string(geo.side));
  geo.j_max = j;
  geo.half = j * geo.side + geo.side / 2;
  return geo;
}

std::vector<std::pair<int, int>> diameter_squares(int j_max, int j) {
  require(j_max >= 0 && std::abs(j) <= j_max, "diameter_squares: index out of range");
  std::vector<std::pair<int, int>> cells{{-j_max, j}};
  int ci = -j_max, cj = j;
  const int sgn = j > 0 ? -1 : 1;
  const long long span = 2LL * j_max + 1;
  while (ci != j_max || cj != -j) {
    bool step_h;
    if (cj == -j) {
      step_h = true;
    } else if (ci == j_max) {
      step_h = false;
    } else {
      // Compare the abscissae of the next vertical and horizontal cell walls.
      const long long a = (2LL * cj + sgn) * span;
      const long long b = (2LL * ci + 1) * (-2LL * j);
      if (a == b) {
        cells.emplace_back(++ci, cj);
        step_h = false;
      } else {
        const bool horiz_first = j < 0 ? a < b : a > b;
        step_h = !horiz_first;
      }
    }
    if (step_h) ++ci;
    else cj += sgn;
    cells.emplace_back(ci, cj);
  }
  return cells;
}

std::vector<Vertex> loop_erase(const std::vector<Vertex>& walk) {
  std::vector<Vertex> out;
  std::unordered_map<Vertex, std::size_t> pos;
  for (Vertex v : walk) {
    auto it = pos.find(v);
    if (it != pos.end()) {
      for (std::size_t k = it->second + 1; k < out.size(); ++k) pos.erase(out[k]);
      out.resize(it->second + 1);
    } else {
      pos[v] = out.size();
      out.push_back(v);
    }
  }
  return out;
}

namespace {

std::string describe(const Strip& s) {
  return std::string(s.horizontal ? "horizontal" : "vertical") + " strip [" +
         std::to_string(s.x0) + "," + std::to_string(s.x1) + "]x[" + std::to_string(s.y0) +
         "," + std::to_string(s.y1) + "]";
}

SquarePath square_path_layout(const KestenGeometry& geo, int j) {
  SquarePath sp;
  sp.j = j;
  sp.cells = diameter_squares(geo.j_max, j);
  const auto& c = sp.cells;
  // Maximal runs of moves of one kind.
  for (std::size_t k = 0; k + 1 < c.size();) {
    const bool horiz = c[k + 1].second == c[k].second;
    std::size_t e = k;
    while (e + 1 < c.size() && (c[e + 1].second == c[e].second) == horiz) ++e;
    Stretch st;
    st.first = k;
    st.last = e;
    st.horizontal = horiz;
    st.direction = horiz ? 1 : (c[k + 1].second > c[k].second ? 1 : -1);
    sp.stretches.push_back(st);
    k = e;
  }
  // The end squares are crossed horizontally so that every path meets the
  // left and right sides of the box.
  if (sp.stretches.empty() || !sp.stretches.front().horizontal)
    sp.stretches.insert(sp.stretches.begin(), Stretch{0, 0, true, 1, {}});
  if (!sp.stretches.back().horizontal)
    sp.stretches.push_back(Stretch{c.size() - 1, c.size() - 1, true, 1, {}});

  for (std::size_t s = 0; s < sp.stretches.size(); ++s) {
    auto& st = sp.stretches[s];
    Strip r = geo.square(c[st.first].first, c[st.first].second);
    const Strip r2 = geo.square(c[st.last].first, c[st.last].second);
    r.x0 = std::min(r.x0, r2.x0);
    r.x1 = std::max(r.x1, r2.x1);
    r.y0 = std::min(r.y0, r2.y0);
    r.y1 = std::max(r.y1, r2.y1);
    r.horizontal = st.horizontal;
    r.index = static_cast<int>(s);
    st.channels.strip = r;
  }
  return sp;
}

std::vector<SquarePath> layout_and_channels(const WeightedGraph& g, const KestenGeometry& geo) {
  std::vector<SquarePath> paths;
  for (int j = -geo.j_max; j <= geo.j_max; ++j) paths.push_back(square_path_layout(geo, j));
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::size_t s = 0; s < paths[p].stretches.size(); ++s) jobs.emplace_back(p, s);
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < static_cast<long>(jobs.size()); ++k) {
    auto& st = paths[jobs[k].first].stretches[jobs[k].second];
    const Strip r = st.channels.strip;
    st.channels = find_channels(g, r);
    if (!st.horizontal && st.direction < 0)
      for (auto& ch : st.channels.channels) std::reverse(ch.begin(), ch.end());
  }
  return paths;
}

// Indices of m channels spread evenly over c.
std::vector<std::size_t> spread(std::size_t c, std::size_t m) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < m; ++k)
    idx.push_back(m == 1 ? (c - 1) / 2 : (k * (c - 1) + (m - 1) / 2) / (m - 1));
  return idx;
}

}  // namespace

VertexSet kesten_box_interior(const WeightedGraph& g, const KestenGeometry& geo) {
  require(g.dim() == 2, "kesten: needs a graph with 2D coordinates");
  std::vector<Vertex> ids;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    auto c = g.coord(static_cast<Vertex>(v));
    if (std::abs(c[0] - geo.ax) < geo.half && std::abs(c[1] - geo.ay) < geo.half)
      ids.push_back(static_cast<Vertex>(v));
  }
  return VertexSet(std::move(ids));
}

KestenReport kesten_grid_flow(const WeightedGraph& g, Vertex anchor, int n,
                              const KestenOptions& opt) {
  require(g.dim() == 2, "kesten: needs a graph with 2D coordinates");
  require(g.valid(anchor), "kesten: unknown anchor");
  KestenReport rep;
  auto& geo = rep.geometry;
  geo = kesten_geometry(n, opt.c_k, g.coord(anchor)[0], g.coord(anchor)[1]);
  const int s = geo.side;

  if (opt.full_strips) {
    for (int j = -geo.j_max; j <= geo.j_max; ++j) {
      Strip row = geo.square(0, j);
      row.x0 = geo.ax - geo.half;
      row.x1 = geo.ax + geo.half;
      row.horizontal = true;
      row.index = j;
      Strip col = geo.square(j, 0);
      col.y0 = geo.ay - geo.half;
      col.y1 = geo.ay + geo.half;
      col.horizontal = false;
      col.index = j;
      rep.row_strips.push_back({row, {}});
      rep.column_strips.push_back({col, {}});
    }
    const long m = static_cast<long>(rep.row_strips.size());
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < 2 * m; ++k) {
      auto& r = k < m ? rep.row_strips[k] : rep.column_strips[k - m];
      r = find_channels(g, r.strip);
    }
    rep.min_strip_channels = static_cast<std::size_t>(-1);
    for (const auto* set : {&rep.row_strips, &rep.column_strips})
      for (const auto& r : *set) rep.min_strip_channels = std::min(rep.min_strip_channels, r.count());
  }

  rep.square_paths = layout_and_channels(g, geo);
  rep.min_stretch_channels = static_cast<std::size_t>(-1);
  for (const auto& sp : rep.square_paths)
    for (const auto& st : sp.stretches) {
      rep.min_stretch_channels = std::min(rep.min_stretch_channels, st.channels.count());
      if (st.channels.count() == 0)
        fail(ErrorKind::ConstructionFailed,
             "kesten: no open crossing in the " + describe(st.channels.strip) +
                 " of the diameter j = " + std::to_string(sp.j));
    }

  // Step two: paths of P'_n, left side to right side.
  for (auto& sp : rep.square_paths) {
    std::size_t m = static_cast<std::size_t>(-1);
    for (const auto& st : sp.stretches) m = std::min(m, st.channels.count());
    sp.used_channels = m;
    std::vector<std::vector<const std::vector<Vertex>*>> chosen(sp.stretches.size());
    for (std::size_t t = 0; t < sp.stretches.size(); ++t)
      for (std::size_t i : spread(sp.stretches[t].channels.count(), m))
        chosen[t].push_back(&sp.stretches[t].channels.channels[i]);

    // rank_at[t][k]: rank of chosen channel k of stretch t relative to the
    // inner corner of the turn at its end (t, t+1).
    auto ranks = [&](std::size_t t, std::size_t cell_index, int prev_di, int prev_dj, int next_di,
                     int next_dj) {
      const auto& [ci, cj] = sp.cells[cell_index];
      const Strip sq = geo.square(ci, cj);
      const int di = prev_di != 0 ? prev_di : next_di;
      const int dj = prev_dj != 0 ? prev_dj : next_dj;
      const int cx = di < 0 ? sq.x0 : sq.x1;
      const int cy = dj < 0 ? sq.y0 : sq.y1;
      std::vector<std::pair<int, std::size_t>> key;
      for (std::size_t k = 0; k < chosen[t].size(); ++k) {
        const Vertex f = chosen[t][k]->front();
        const int d = sp.stretches[t].horizontal ? std::abs(g.coord(f)[1] - cy)
                                                 : std::abs(g.coord(f)[0] - cx);
        key.emplace_back(d, k);
      }
      std::sort(key.begin(), key.end());
      std::vector<std::size_t> rank(chosen[t].size()), by_rank(chosen[t].size());
      for (std::size_t r = 0; r < key.size(); ++r) {
        rank[key[r].second] = r;
        by_rank[r] = key[r].second;
      }
      return std::make_pair(rank, by_rank);
    };

    // Turn maps: chosen index in stretch t -> chosen index in stretch t+1.
    std::vector<std::vector<std::size_t>> next_of(sp.stretches.size());
    for (std::size_t t = 0; t + 1 < sp.stretches.size(); ++t) {
      const std::size_t tc = sp.stretches[t].last;
      const auto cur = sp.cells[tc];
      const auto prev = tc > 0 ? sp.cells[tc - 1] : std::make_pair(cur.first - 1, cur.second);
      const auto next = tc + 1 < sp.cells.size() ? sp.cells[tc + 1]
                                                 : std::make_pair(cur.first + 1, cur.second);
      const int pdi = prev.first - cur.first, pdj = prev.second - cur.second;
      const int ndi = next.first - cur.first, ndj = next.second - cur.second;
      auto [rank_in, by_in] = ranks(t, tc, pdi, pdj, ndi, ndj);
      auto [rank_out, by_out] = ranks(t + 1, tc, pdi, pdj, ndi, ndj);
      next_of[t].resize(m);
      for (std::size_t k = 0; k < m; ++k) next_of[t][k] = by_out[rank_in[k]];
    }

    for (std::size_t k0 = 0; k0 < m; ++k0) {
      std::size_t k = k0;
      const std::vector<Vertex>* cur = chosen[0][k];
      std::size_t pos = 0;
      std::vector<Vertex> walk{(*cur)[0]};
      for (std::size_t t = 0; t + 1 < sp.stretches.size(); ++t) {
        k = next_of[t][k];
        const std::vector<Vertex>* nxt = chosen[t + 1][k];
        std::unordered_map<Vertex, std::size_t> where;
        for (std::size_t q = 0; q < nxt->size(); ++q) where[(*nxt)[q]] = q;
        std::size_t hit = static_cast<std::size_t>(-1), at = 0;
        for (std::size_t q = pos; q < cur->size(); ++q)
          if (auto it = where.find((*cur)[q]); it != where.end()) {
            for (std::size_t r = pos + 1; r <= q; ++r) walk.push_back((*cur)[r]);
            hit = q;
            at = it->second;
            break;
          }
        if (hit == static_cast<std::size_t>(-1)) {
          for (std::size_t q = pos; q-- > 0;)
            if (auto it = where.find((*cur)[q]); it != where.end()) {
              for (std::size_t r = pos; r-- > q;) walk.push_back((*cur)[r]);
              hit = q;
              at = it->second;
              break;
            }
        }
        if (hit == static_cast<std::size_t>(-1))
          fail(ErrorKind::ConstructionFailed,
               "kesten: channels do not meet at the turn into the " +
                   describe(sp.stretches[t + 1].channels.strip));
        cur = nxt;
        pos = at;
      }
      for (std::size_t r = pos + 1; r < cur->size(); ++r) walk.push_back((*cur)[r]);
      sp.paths.push_back(loop_erase(walk));
    }

    std::map<std::pair<Vertex, Vertex>, std::size_t> mult;
    for (const auto& p : sp.paths)
      for (std::size_t q = 1; q < p.size(); ++q)
        ++mult[std::minmax(p[q - 1], p[q])];
    for (const auto& [e, cnt] : mult) {
      sp.max_multiplicity = std::max(sp.max_multiplicity, cnt);
      if (cnt > 2) ++sp.multiplicity_violations;
    }
    rep.multiplicity_violations += sp.multiplicity_violations;
  }

  // Step three: connection paths pi_1, pi_2 by shortest open paths in the box.
  const auto inside = [&](Vertex v) {
    auto c = g.coord(v);
    return std::abs(c[0] - geo.ax) < geo.half && std::abs(c[1] - geo.ay) < geo.half;
  };
  std::vector<char> allowed(g.num_vertices(), 0);
  for (std::size_t v = 0; v < g.num_vertices(); ++v) allowed[v] = inside(static_cast<Vertex>(v));
  const Vertex src[] = {anchor};
  auto dist = bfs_distances(g, src, kUnreachable, &allowed);
  auto pick = [&](int j) {
    const Strip sq = geo.square(0, j);
    Vertex best = -1;
    int bd = kUnreachable;
    for (int x = sq.x0; x <= sq.x1; ++x)
      for (int y = sq.y0; y <= sq.y1; ++y)
        if (auto v = g.find({x, y}); v && dist[*v] != kUnreachable) {
          const int d = std::abs(x - geo.ax) + std::abs(y - geo.ay - j * s);
          if (d < bd || (d == bd && *v < best)) {
            bd = d;
            best = *v;
          }
        }
    if (best < 0)
      fail(ErrorKind::ConstructionFailed,
           "kesten: no vertex connected to the anchor in the square centered at (0," +
               std::to_string(j * s) + ")");
    std::vector<Vertex> path{best};
    while (path.back() != anchor) {
      const Vertex x = path.back();
      for (Vertex y : g.neighbors(x))
        if (dist[y] == dist[x] - 1) {
          path.push_back(y);
          break;
        }
    }
    return path;
  };
  rep.pi1 = pick(1);
  rep.pi2 = pick(-1);
  std::unordered_map<Vertex, std::pair<int, std::size_t>> on_pi;
  for (std::size_t q = 0; q < rep.pi2.size(); ++q) on_pi[rep.pi2[q]] = {2, q};
  for (std::size_t q = 0; q < rep.pi1.size(); ++q) on_pi[rep.pi1[q]] = {1, q};

  std::map<std::pair<Vertex, Vertex>, Flow::Entry> acc;
  auto add_path = [&](std::vector<Vertex> to_side) {
    // to_side runs from the anchor outwards; stop at the first box-side vertex.
    std::size_t end = 0;
    while (end + 1 < to_side.size() && inside(to_side[end])) ++end;
    for (std::size_t q = 1; q <= end; ++q) {
      const Vertex x = to_side[q - 1], y = to_side[q];
      auto& e = acc[std::minmax(x, y)];
      e.conductance = g.conductance(x, y);
      e.theta += x < y ? 1.0 : -1.0;
    }
    ++rep.num_paths;
    return to_side[end];
  };
  std::vector<Vertex> sinks;
  for (const auto& sp : rep.square_paths)
    for (const auto& p : sp.paths) {
      std::size_t lq = p.size(), rq = p.size();
      for (std::size_t q = 0; q < p.size(); ++q)
        if (on_pi.count(p[q])) {
          lq = q;
          break;
        }
      for (std::size_t q = p.size(); q-- > 0;)
        if (on_pi.count(p[q])) {
          rq = q;
          break;
        }
      if (lq == p.size()) {
        ++rep.connection_failures;
        continue;
      }
      for (std::size_t side = 0; side < 2; ++side) {
        const std::size_t q = side == 0 ? lq : rq;
        const auto [which, idx] = on_pi.at(p[q]);
        const auto& pi = which == 1 ? rep.pi1 : rep.pi2;
        std::vector<Vertex> out(pi.rbegin(), pi.rend() - static_cast<long>(idx));
        // out: anchor ... p[q]; then along p away from the junction.
        if (side == 0)
          for (std::size_t r = q; r-- > 0;) out.push_back(p[r]);
        else
          for (std::size_t r = q + 1; r < p.size(); ++r) out.push_back(p[r]);
        sinks.push_back(add_path(loop_erase(out)));
      }
    }
  if (rep.num_paths == 0)
    fail(ErrorKind::ConstructionFailed, "kesten: no path of the grid meets pi_1 or pi_2");

  rep.flow.assign_entries(std::move(acc));
  rep.flow.sources = VertexSet{anchor};
  rep.flow.sinks = VertexSet(std::move(sinks));

  std::set<std::pair<Vertex, Vertex>> pi_edges;
  for (const auto* pi : {&rep.pi1, &rep.pi2})
    for (std::size_t q = 1; q < pi->size(); ++q) pi_edges.insert(std::minmax((*pi)[q - 1], (*pi)[q]));
  for (const auto& [k, e] : rep.flow.edges()) {
    const double en = e.theta * e.theta / e.conductance;
    (pi_edges.count(k) ? rep.energy_connection : rep.energy_grid) += en;
  }
  rep.energy = rep.flow.energy();
  rep.intensity = rep.flow.intensity();
  rep.thomson = thomson_bound(rep.flow);
  rep.unit_energy = rep.energy / (rep.intensity * rep.intensity);
  rep.max_interior_divergence = rep.flow.interior_divergence();
  return rep;
}

int calibrate_kesten_constant(const std::vector<const WeightedGraph*>& graphs,
                              const std::vector<Vertex>& anchors, int n, int max_c) {
  require(graphs.size() == anchors.size(), "calibrate_kesten_constant: one anchor per graph");
  for (int c = 1; c <= max_c; ++c) {
    bool ok = true;
    for (std::size_t i = 0; i < graphs.size() && ok; ++i) {
      const auto& g = *graphs[i];
      KestenGeometry geo;
      try {
        geo = kesten_geometry(n, c, g.coord(anchors[i])[0], g.coord(anchors[i])[1]);
      } catch (const Error&) {
        return 0;
      }
      for (const auto& sp : layout_and_channels(g, geo))
        for (const auto& st : sp.stretches)
          if (st.channels.count() == 0) ok = false;
    }
    if (ok) return c;
  }
  return 0;
}

}  // namespace harmeas
