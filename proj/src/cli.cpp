#include <harmeas/cli.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include <harmeas/capacity.hpp>
#include <harmeas/environment.hpp>
#include <harmeas/error.hpp>
#include <harmeas/graph_io.hpp>
#include <harmeas/harmonic_measure.hpp>
#include <harmeas/harnack.hpp>
#include <harmeas/kesten.hpp>
#include <harmeas/monte_carlo.hpp>
#include <harmeas/potential.hpp>
#include <harmeas/serialize.hpp>

namespace harmeas {

namespace {

namespace fs = std::filesystem;

/// Configuration error tied to a field path.
class FieldError : public Error {
 public:
  FieldError(std::string path, const std::string& what)
      : Error(ErrorKind::Validation, path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

/// Reads typed fields of one JSON object, writing defaults back so the object
/// ends up fully resolved. finish() rejects keys nobody asked for.
class Section {
 public:
  Section(Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (obj_.is_null()) obj_ = Json::object();
    if (!obj_.is_object()) throw FieldError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string path(const std::string& key) const { return join_path(path_, key); }
  bool has(const std::string& key) const { return obj_.contains(key) && !obj_[key].is_null(); }

  Json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_[key];
  }

  long long integer(const std::string& key, std::optional<long long> def = {}) {
    Json& v = fetch(key, def ? Json(*def) : Json());
    if (!v.is_number_integer()) throw FieldError(path(key), "expected an integer");
    return v.get<long long>();
  }

  double number(const std::string& key, std::optional<double> def = {}) {
    Json& v = fetch(key, def ? Json(*def) : Json());
    if (!v.is_number()) throw FieldError(path(key), "expected a number");
    return v.get<double>();
  }

  bool boolean(const std::string& key, std::optional<bool> def = {}) {
    Json& v = fetch(key, def ? Json(*def) : Json());
    if (!v.is_boolean()) throw FieldError(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> def = {},
                     const std::vector<std::string>& choices = {}) {
    Json& v = fetch(key, def ? Json(*def) : Json());
    if (!v.is_string()) throw FieldError(path(key), "expected a string");
    auto s = v.get<std::string>();
    if (!choices.empty() && std::find(choices.begin(), choices.end(), s) == choices.end()) {
      std::string list;
      for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
      throw FieldError(path(key), "must be one of " + list);
    }
    return s;
  }

  std::vector<int> int_list(const std::string& key, std::optional<std::vector<int>> def = {},
                            bool allow_empty = false) {
    Json& v = fetch(key, def ? Json(*def) : Json());
    if (!v.is_array()) throw FieldError(path(key), "expected a list of integers");
    if (v.empty() && !allow_empty) throw FieldError(path(key), "must not be empty");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer())
        throw FieldError(path(key) + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back(v[i].get<int>());
    }
    return out;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw FieldError(path(it.key()), "unknown key");
  }

 private:
  Json& fetch(const std::string& key, const Json& def) {
    seen_.insert(key);
    if (!has(key)) {
      if (def.is_null()) throw FieldError(path(key), "required field is missing");
      obj_[key] = def;
    }
    return obj_[key];
  }

  Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void positive(const Section& s, const std::string& key, double v) {
  if (!(v > 0)) throw FieldError(s.path(key), "must be positive");
}

void increasing(const Section& s, const std::string& key, const std::vector<int>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] <= 0) throw FieldError(s.path(key), "entries must be positive");
    if (i && v[i] <= v[i - 1]) throw FieldError(s.path(key), "entries must be increasing");
  }
}

struct LoadedGraph {
  WeightedGraph graph;
  bool stochastic = false;
  Json summary;
};

struct Context {
  std::string command;
  Json config;  // resolved in place
  std::optional<std::uint64_t> seed;
  SolverOptions solver;
  std::optional<LoadedGraph> loaded;

  Json result = Json::object();
  std::vector<std::string> flags;
  std::optional<CsvTable> csv;
  std::vector<std::pair<std::string, std::string>> extra_files;
};

ConductanceLaw read_law(Section s) {
  const auto kind = s.string("kind", std::nullopt, {"bernoulli", "uniform", "constant", "two-point"});
  ConductanceLaw law;
  if (kind == "bernoulli") law = ConductanceLaw::bernoulli(s.number("p"));
  else if (kind == "uniform") law = ConductanceLaw::uniform(s.number("lo"), s.number("hi"));
  else if (kind == "constant") law = ConductanceLaw::constant(s.number("c", 1.0));
  else law = ConductanceLaw::two_point(s.number("p"), s.number("a_hi"), s.number("a_lo"));
  s.finish();
  try {
    law.validate();
  } catch (const Error& e) {
    throw FieldError(s.path("kind"), e.what());
  }
  return law;
}

EnvironmentSpec read_environment(Section& s, const Context& ctx) {
  EnvironmentSpec spec;
  spec.dim = static_cast<int>(s.integer("dim", 2));
  spec.half_width = static_cast<int>(s.integer("half_width"));
  spec.shape = window_shape_from_string(s.string("shape", "box", {"box", "diamond"}));
  spec.law = read_law(Section(s.raw("law"), s.path("law")));
  if (!ctx.seed) throw FieldError("seed", "required for stochastic commands (use --seed)");
  spec.seed = *ctx.seed;
  try {
    spec.validate();
  } catch (const Error& e) {
    throw FieldError(s.path("half_width"), e.what());
  }
  return spec;
}

WeightedGraph& graph_of(Context& ctx, bool raw_environment = false) {
  if (ctx.loaded) return ctx.loaded->graph;
  Section s(ctx.config["graph"], "graph");
  const auto kind = s.string("kind", "lattice", {"lattice", "environment", "file"});
  LoadedGraph lg;
  lg.summary["kind"] = kind;
  if (kind == "lattice") {
    const int dim = static_cast<int>(s.integer("dim", 2));
    const int hw = static_cast<int>(s.integer("half_width"));
    const auto shape = window_shape_from_string(s.string("shape", "diamond", {"box", "diamond"}));
    const double c = s.number("conductance", 1.0);
    if (dim < 1 || dim > kMaxLatticeDim) throw FieldError(s.path("dim"), "must be in [1,4]");
    if (hw < 1) throw FieldError(s.path("half_width"), "must be positive");
    positive(s, "conductance", c);
    EnvironmentSpec probe;
    probe.dim = dim;
    probe.half_width = hw;
    probe.shape = shape;
    if (estimate_environment_bytes(probe) > probe.memory_budget)
      throw FieldError(s.path("half_width"), "window exceeds the memory budget");
    lg.graph = lattice(dim, hw, shape, c);
  } else if (kind == "environment") {
    auto spec = read_environment(s, ctx);
    const bool cluster = s.boolean("cluster", true);
    lg.stochastic = true;
    auto env = sample_environment(spec);
    if (cluster && !raw_environment) {
      auto c = extract_cluster(env, ClusterMode::Largest());
      lg.summary["host_vertices"] = c.host_vertices;
      lg.graph = std::move(c.graph);
    } else {
      lg.graph = std::move(env);
    }
  } else {
    const auto path = s.string("path");
    try {
      lg.graph = read_graph_file(path);
    } catch (const Error& e) {
      throw FieldError(s.path("path"), e.what());
    }
  }
  s.finish();
  lg.summary["vertices"] = lg.graph.num_vertices();
  lg.summary["edges"] = lg.graph.num_edges();
  ctx.loaded = std::move(lg);
  return ctx.loaded->graph;
}

Vertex read_vertex(const WeightedGraph& g, const Json& v, const std::string& path) {
  if (v.is_number_integer()) {
    const auto id = v.get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= g.num_vertices())
      throw FieldError(path, "vertex id out of range");
    return static_cast<Vertex>(id);
  }
  if (v.is_array()) {
    if (!g.has_coordinates()) throw FieldError(path, "graph has no coordinates; use a vertex id");
    std::vector<int> c;
    for (const auto& x : v) {
      if (!x.is_number_integer()) throw FieldError(path, "coordinates must be integers");
      c.push_back(x.get<int>());
    }
    if (static_cast<int>(c.size()) != g.dim())
      throw FieldError(path, "expected " + std::to_string(g.dim()) + " coordinates");
    auto id = g.find(c);
    if (!id) throw FieldError(path, "coordinates " + v.dump() + " are not a vertex of the graph");
    return *id;
  }
  throw FieldError(path, "expected a vertex id or a coordinate list");
}

std::vector<Vertex> read_vertex_list(const WeightedGraph& g, Json& v, const std::string& path) {
  if (!v.is_array()) throw FieldError(path, "expected a list of vertices");
  if (v.empty()) throw FieldError(path, "must not be empty");
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(read_vertex(g, v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Vertex base_vertex(Context& ctx, Section& top) {
  auto& g = graph_of(ctx);
  if (!top.has("base")) throw FieldError("base", "required field is missing");
  return read_vertex(g, top.raw("base"), "base");
}

VertexSet target_set(Context& ctx, Section& top) {
  auto& g = graph_of(ctx);
  if (!top.has("target")) throw FieldError("target", "required field is missing");
  auto ids = read_vertex_list(g, top.raw("target"), "target");
  VertexSet a(ids);
  if (a.size() != ids.size()) throw FieldError("target", "repeated vertex");
  return a;
}

std::vector<std::string> coord_header(const WeightedGraph& g) {
  std::vector<std::string> h{"id"};
  for (int i = 0; i < g.dim(); ++i) h.push_back("x" + std::to_string(i + 1));
  return h;
}

std::vector<Json> coord_cells(const WeightedGraph& g, Vertex v) {
  std::vector<Json> cells{v};
  if (g.has_coordinates())
    for (int c : g.coord(v)) cells.push_back(c);
  return cells;
}

void measure_csv(Context& ctx, const WeightedGraph& g, const MeasureOnSet& m) {
  auto h = coord_header(g);
  h.push_back("weight");
  CsvTable t(h);
  for (std::size_t i = 0; i < m.support.size(); ++i) {
    auto cells = coord_cells(g, m.support[i]);
    cells.push_back(m.weights[i]);
    t.row(cells);
  }
  ctx.csv = std::move(t);
}

Json stats_json(const SolveStats& s) {
  return Json{{"iterations", s.iterations}, {"rel_residual", s.rel_residual}, {"dense", s.dense}};
}

// ------------------------------------------------------------------ commands

void cmd_env_sample(Context& ctx, Section& top, Section& p) {
  Section gs(ctx.config["graph"], "graph");
  if (gs.string("kind", "lattice") != "environment")
    throw FieldError("graph.kind", "env-sample needs an environment graph");
  const bool write = p.boolean("write_graph", false);
  p.finish();
  (void)top;
  auto& g = graph_of(ctx, true);
  std::size_t isolated = 0;
  double total = 0.0;
  std::map<std::size_t, std::size_t> degrees;
  for (Vertex v = 0; v < static_cast<Vertex>(g.num_vertices()); ++v) {
    ++degrees[g.degree(v)];
    if (g.degree(v) == 0) ++isolated;
    total += g.pi(v);
  }
  ctx.result["vertices"] = g.num_vertices();
  ctx.result["open_edges"] = g.num_edges();
  ctx.result["isolated_vertices"] = isolated;
  ctx.result["mean_conductance"] = g.num_edges() ? 0.5 * total / g.num_edges() : 0.0;
  CsvTable t({"degree", "count"});
  for (auto [d, c] : degrees) t.row({d, c});
  ctx.csv = std::move(t);
  if (write) {
    std::ostringstream s;
    write_graph(s, g, "environment sample");
    ctx.extra_files.emplace_back("graph.txt", s.str());
  }
}

void cmd_cluster(Context& ctx, Section& top, Section& p) {
  Section gs(ctx.config["graph"], "graph");
  if (gs.string("kind", "lattice") != "environment")
    throw FieldError("graph.kind", "cluster needs an environment graph");
  const auto pairs = p.integer("audit_pairs", 1000);
  const auto min_l1 = p.integer("min_l1", 1);
  const bool write = p.boolean("write_graph", false);
  if (pairs < 0) throw FieldError(p.path("audit_pairs"), "must be non-negative");
  if (min_l1 < 1) throw FieldError(p.path("min_l1"), "must be at least 1");
  p.finish();
  (void)top;
  auto& env = graph_of(ctx, true);
  auto c = extract_cluster(env, ClusterMode::Largest());
  ctx.result["host_vertices"] = c.host_vertices;
  ctx.result["cluster_vertices"] = c.graph.num_vertices();
  ctx.result["cluster_edges"] = c.graph.num_edges();
  ctx.result["density"] = static_cast<double>(c.graph.num_vertices()) / c.host_vertices;
  ctx.result["anchor"] = vertex_json(c.graph, c.anchor);
  if (pairs > 0 && c.graph.num_vertices() > 1) {
    auto a = chemical_distance_audit(c, static_cast<std::size_t>(pairs), *ctx.seed,
                                     static_cast<int>(min_l1));
    ctx.result["chemical_audit"] = {{"pairs", a.pairs},
                                    {"max_ratio", a.max_ratio},
                                    {"mean_ratio", a.mean_ratio},
                                    {"max_chemical", a.max_chemical},
                                    {"max_l1", a.max_l1}};
  }
  std::map<int, std::size_t> hist;
  for (int d : c.anchor_distance)
    if (d != kUnreachable) ++hist[d];
  CsvTable t({"distance", "count"});
  for (auto [d, n] : hist) t.row({d, n});
  ctx.csv = std::move(t);
  if (write) {
    std::ostringstream s;
    write_graph(s, c.graph, "largest cluster");
    ctx.extra_files.emplace_back("cluster.txt", s.str());
  }
}

void shell_table(Context& ctx, const WeightedGraph& g, Vertex x0, const std::vector<double>& f,
                 int max_d, const std::string& name) {
  const Vertex src[] = {x0};
  auto dist = bfs_distances(g, src, max_d);
  std::vector<double> lo(max_d + 1, 1e300), hi(max_d + 1, -1e300);
  std::vector<std::size_t> cnt(max_d + 1, 0);
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist[v] > max_d) continue;
    lo[dist[v]] = std::min(lo[dist[v]], f[v]);
    hi[dist[v]] = std::max(hi[dist[v]], f[v]);
    ++cnt[dist[v]];
  }
  CsvTable t({"distance", "min_" + name, "max_" + name, "count"});
  for (int d = 0; d <= max_d; ++d)
    if (cnt[d]) t.row({d, lo[d], hi[d], cnt[d]});
  ctx.csv = std::move(t);
}

void cmd_green(Context& ctx, Section& top, Section& p) {
  auto radii = p.int_list("radii");
  increasing(p, "radii", radii);
  p.finish();
  auto& g = graph_of(ctx);
  const Vertex x0 = base_vertex(ctx, top);
  auto tg = green_column_transient(g, x0, radii, ctx.solver);
  ctx.result["source"] = vertex_json(g, x0);
  ctx.result["radii"] = tg.radii;
  ctx.result["diagonal"] = tg.diagonal;
  ctx.result["last_gap"] = tg.last_gap;
  ctx.result["monotone_tolerance"] = tg.monotone_tolerance;
  ctx.result["stats"] = stats_json(tg.final().stats);
  shell_table(ctx, g, x0, tg.final().values, radii.back() - 1, "green");
}

void cmd_potential_kernel(Context& ctx, Section& top, Section& p) {
  auto radii = p.int_list("radii");
  increasing(p, "radii", radii);
  PotentialKernelOptions ko;
  ko.window_fraction = p.number("window_fraction", 0.5);
  ko.gap_tol = p.number("gap_tol", 0.25);
  auto shells = p.int_list("shells", std::vector<int>{}, true);
  positive(p, "window_fraction", ko.window_fraction);
  positive(p, "gap_tol", ko.gap_tol);
  p.finish();
  ko.solver = ctx.solver;
  auto& g = graph_of(ctx);
  const Vertex x0 = base_vertex(ctx, top);
  auto k = potential_kernel(g, x0, radii, ko);
  ctx.result["source"] = vertex_json(g, x0);
  ctx.result["diagonal"] = k.diagonal;
  ctx.result["window_radius"] = k.window_radius;
  ctx.result["converged_radius"] = k.converged_radius;
  ctx.result["negativity_shrink"] = k.negativity_shrink;
  ctx.result["max_gap"] = k.max_gap;
  ctx.result["mean_value_residual"] = k.mean_value_residual;
  ctx.result["converged"] = k.converged;
  if (!k.converged) ctx.flags.push_back("potential kernel not converged inside the window");
  if (!shells.empty()) {
    auto b = kernel_log_bounds(g, k, shells);
    ctx.result["log_bounds"] = {{"c_lower", b.c_lower}, {"c_upper", b.c_upper},
                                {"rho_hat", b.rho_hat}, {"c6", b.c6()}};
  }
  shell_table(ctx, g, x0, k.values, std::max(0, k.converged_radius - 1), "g");
}

void cmd_capacity(Context& ctx, Section& top, Section& p) {
  auto radii = p.int_list("radii");
  increasing(p, "radii", radii);
  p.finish();
  auto& g = graph_of(ctx);
  const auto a = target_set(ctx, top);
  const Vertex c = base_vertex(ctx, top);
  CsvTable t({"radius", "capacity"});
  if (radii.size() == 1) {
    auto b = ball(g, c, radii[0]);
    if (!is_subset(a, b)) throw FieldError("target", "not inside the ball B(base, radius)");
    auto r = relative_capacity(g, a, b, ctx.solver);
    ctx.result["value"] = r.value;
    ctx.result["escape"] = r.escape;
    t.row({radii[0], r.value});
  } else {
    auto e = escape_capacity(g, a, c, radii, ctx.solver);
    ctx.result["values"] = e.values;
    ctx.result["limit"] = e.limit;
    ctx.result["gap_ratio"] = e.gap_ratio;
    ctx.result["monotone"] = e.monotone;
    ctx.result["recurrent"] = e.recurrent;
    if (!e.monotone) ctx.flags.push_back("capacities are not monotone in the radius");
    for (std::size_t i = 0; i < radii.size(); ++i) t.row({radii[i], e.values[i]});
  }
  ctx.result["target"] = vertex_set_json(g, a);
  ctx.csv = std::move(t);
}

void cmd_kesten_flow(Context& ctx, Section& top, Section& p) {
  const int n = static_cast<int>(p.integer("n"));
  KestenOptions ko;
  ko.c_k = p.number("c_k", 3.0);
  ko.full_strips = p.boolean("full_strips", true);
  const bool exact = p.boolean("exact_capacity", true);
  if (n < 4) throw FieldError(p.path("n"), "must be at least 4");
  positive(p, "c_k", ko.c_k);
  p.finish();
  auto& g = graph_of(ctx);
  if (g.dim() != 2) throw FieldError("graph.dim", "kesten-flow needs a planar lattice graph");
  const Vertex anchor = base_vertex(ctx, top);
  auto r = kesten_grid_flow(g, anchor, n, ko);
  const auto& geo = r.geometry;
  ctx.result["geometry"] = {{"side", geo.side}, {"j_max", geo.j_max}, {"half", geo.half}};
  ctx.result["num_paths"] = r.num_paths;
  ctx.result["min_stretch_channels"] = r.min_stretch_channels;
  ctx.result["min_strip_channels"] = r.min_strip_channels;
  ctx.result["connection_failures"] = r.connection_failures;
  ctx.result["multiplicity_violations"] = r.multiplicity_violations;
  ctx.result["intensity"] = r.intensity;
  ctx.result["energy"] = r.energy;
  ctx.result["unit_energy"] = r.unit_energy;
  ctx.result["thomson"] = r.thomson;
  ctx.result["max_interior_divergence"] = r.max_interior_divergence;
  if (exact) {
    auto interior = kesten_box_interior(g, geo);
    const double cap = capacity_relative(g, VertexSet{anchor}, interior, ctx.solver);
    ctx.result["exact_capacity"] = cap;
    if (r.thomson > cap * (1 + 1e-9)) ctx.flags.push_back("Thomson bound exceeds the exact capacity");
  }
  if (r.max_interior_divergence > 1e-10) ctx.flags.push_back("flow is not divergence-free");
  CsvTable t({"orientation", "index", "channels"});
  for (const auto& s : r.row_strips) t.row({"row", s.strip.index, s.count()});
  for (const auto& s : r.column_strips) t.row({"column", s.strip.index, s.count()});
  ctx.csv = std::move(t);
}

void put_measure(Context& ctx, const WeightedGraph& g, const HarmonicMeasureResult& m) {
  ctx.result["target"] = vertex_set_json(g, m.target);
  ctx.result["base"] = vertex_json(g, m.base);
  ctx.result["method"] = to_string(m.method);
  ctx.result["measure"] = measure_json(g, m.measure);
  if (!m.flag.empty()) {
    ctx.result["flag"] = m.flag;
    ctx.flags.push_back(m.flag);
  }
}

void cmd_hmeasure_finite(Context& ctx, Section& top, Section& p) {
  const int m = static_cast<int>(p.integer("m"));
  if (m < 1) throw FieldError(p.path("m"), "must be positive");
  p.finish();
  auto& g = graph_of(ctx);
  const auto a = target_set(ctx, top);
  const Vertex x0 = base_vertex(ctx, top);
  auto r = finite_ball_measure(g, a, x0, m, ctx.solver);
  put_measure(ctx, g, r);
  ctx.result["m"] = m;
  ctx.result["capacity"] = r.capacity;
  ctx.result["capacity_check"] = r.capacity_check;
  measure_csv(ctx, g, r.measure);
}

void cmd_hmeasure_transient(Context& ctx, Section& top, Section& p) {
  auto sched = p.int_list("schedule");
  increasing(p, "schedule", sched);
  const auto method = p.string("method", "finite", {"finite", "escape"});
  p.finish();
  auto& g = graph_of(ctx);
  const auto a = target_set(ctx, top);
  const Vertex x0 = base_vertex(ctx, top);
  if (method == "finite") {
    auto r = transient_limit_measure(g, a, x0, sched, ctx.solver);
    put_measure(ctx, g, r);
    ctx.result["scales"] = r.scales;
    ctx.result["tv"] = r.tv;
    ctx.result["cauchy"] = r.cauchy;
    CsvTable t({"scale", "tv_to_previous"});
    for (std::size_t i = 0; i < r.tv.size(); ++i) t.row({r.scales[i + 1], r.tv[i]});
    ctx.csv = std::move(t);
  } else {
    auto r = escape_formula_measure(g, a, x0, sched, ctx.solver);
    put_measure(ctx, g, r);
    ctx.result["capacity"] = r.capacity;
    measure_csv(ctx, g, r.measure);
  }
}

void cmd_hmeasure_recurrent(Context& ctx, Section& top, Section& p) {
  auto radii = p.int_list("radii");
  increasing(p, "radii", radii);
  PotentialKernelOptions ko;
  ko.window_fraction = p.number("kernel_window_fraction", 0.5);
  ko.gap_tol = p.number("gap_tol", 0.25);
  positive(p, "gap_tol", ko.gap_tol);
  UAOptions uo;
  uo.window_fraction = p.number("window_fraction", 0.5);
  auto bases_json = p.has("bases") ? p.raw("bases") : (p.raw("bases") = Json::array());
  p.finish();
  ko.solver = uo.solver = ctx.solver;
  auto& g = graph_of(ctx);
  const auto a = target_set(ctx, top);
  const Vertex x0 = base_vertex(ctx, top);
  auto k = potential_kernel(g, x0, radii, ko);
  if (!k.converged) ctx.flags.push_back("potential kernel not converged inside the window");
  auto r = recurrent_ident_measure(g, a, x0, k, uo);
  put_measure(ctx, g, r);
  ctx.result["identity_residual"] = r.identity_residual;
  if (!bases_json.empty()) {
    std::vector<Vertex> bases = read_vertex_list(g, bases_json, "params.bases");
    for (std::size_t i = 0; i < bases.size(); ++i)
      if (!a.contains(bases[i]))
        throw FieldError("params.bases[" + std::to_string(i) + "]", "base point must lie in the target");
    auto inv = base_point_invariance(g, a, bases, radii, ko, uo);
    ctx.result["base_point_max_tv"] = inv.max_tv;
  }
  measure_csv(ctx, g, r.measure);
}

void cmd_hmeasure_profile(Context& ctx, Section& top, Section& p) {
  const int window = static_cast<int>(p.integer("window"));
  const int limit_m = static_cast<int>(p.integer("limit_m", 0));
  if (window < 2) throw FieldError(p.path("window"), "must be at least 2");
  if (limit_m < 0) throw FieldError(p.path("limit_m"), "must be non-negative");
  auto& g = graph_of(ctx);
  auto observers = read_vertex_list(g, p.raw("observers"), p.path("observers"));
  p.finish();
  const auto a = target_set(ctx, top);
  const Vertex x0 = base_vertex(ctx, top);
  auto w = ball(g, x0, window);
  for (std::size_t i = 0; i < observers.size(); ++i)
    if (!w.contains(observers[i]))
      throw FieldError("params.observers[" + std::to_string(i) + "]", "outside the window");
  std::optional<HarmonicMeasureResult> lim;
  if (limit_m > 0) {
    lim = finite_ball_measure(g, a, x0, limit_m, ctx.solver);
    ctx.result["limit"] = measure_json(g, lim->measure);
  }
  auto prof = observed_measure_profile(g, a, w, observers, lim ? &lim->measure : nullptr, ctx.solver);
  Json obs = Json::array();
  auto h = coord_header(g);
  for (const char* c : {"distance", "mass", "tv_to_limit"}) h.push_back(c);
  CsvTable t(h);
  for (const auto& o : prof.observers) {
    obs.push_back({{"observer", vertex_json(g, o.observer)},
                   {"distance", o.distance},
                   {"mass", o.mass},
                   {"excluded", o.excluded},
                   {"measure", measure_json(g, o.measure)},
                   {"tv_to_limit", o.tv_to_limit}});
    auto cells = coord_cells(g, o.observer);
    cells.push_back(o.distance);
    cells.push_back(o.mass);
    cells.push_back(o.tv_to_limit);
    t.row(cells);
  }
  ctx.result["target"] = vertex_set_json(g, a);
  ctx.result["observers"] = obs;
  ctx.result["fitted"] = prof.fitted;
  if (prof.fitted) {
    ctx.result["nu_hat"] = prof.nu_hat;
    ctx.result["fit_c"] = prof.fit_c;
  }
  ctx.csv = std::move(t);
}

void cmd_harnack_audit(Context& ctx, Section& top, Section& p) {
  auto radii = p.int_list("radii");
  increasing(p, "radii", radii);
  const double m = p.number("m", 4.0);
  const bool bouk = p.boolean("boukricha", false);
  if (m <= 1.0) throw FieldError(p.path("m"), "must exceed 1");
  p.finish();
  auto& g = graph_of(ctx);
  const Vertex x = base_vertex(ctx, top);
  const double factor = bouk ? boukricha_factor(m) : m;
  Json audits = Json::array();
  CsvTable t({"r", "factor", "outer_radius", "ratio"});
  for (int r : radii) {
    auto a = harnack_ratio_exact(g, x, r, factor, ctx.solver);
    audits.push_back({{"r", r}, {"factor", factor}, {"outer_radius", a.outer_radius},
                      {"ratio", a.ratio}, {"witness", vertex_json(g, a.witness)}});
    t.row({r, factor, a.outer_radius, a.ratio});
  }
  ctx.result["center"] = vertex_json(g, x);
  ctx.result["audits"] = audits;
  ctx.csv = std::move(t);
}

void cmd_ge_audit(Context& ctx, Section& top, Section& p) {
  const int radius = static_cast<int>(p.integer("radius"));
  const double gamma = p.number("gamma");
  const int d_min = static_cast<int>(p.integer("d_min"));
  const int d_max = static_cast<int>(p.integer("d_max"));
  const int floor = static_cast<int>(p.integer("radius_floor", 0));
  if (d_min < 1 || d_max < d_min) throw FieldError(p.path("d_max"), "need 1 <= d_min <= d_max");
  if (d_max >= radius) throw FieldError(p.path("d_max"), "must be below the window radius");
  p.finish();
  auto& g = graph_of(ctx);
  const Vertex x0 = base_vertex(ctx, top);
  auto tg = green_column_transient(g, x0, {radius}, ctx.solver);
  auto a = ge_gamma_audit(g, tg.final(), gamma, d_min, d_max, floor);
  ctx.result["source"] = vertex_json(g, x0);
  ctx.result["gamma"] = gamma;
  ctx.result["c_i"] = a.c_i;
  ctx.result["c_s"] = a.c_s;
  ctx.result["band_ratio"] = a.band_ratio();
  ctx.result["harnack_bound"] = harnack_constant_bound(a);
  ctx.result["retained"] = a.retained.size();
  Json ex = Json::array();
  for (const auto& e : a.excluded) ex.push_back({{"vertex", vertex_json(g, e.y)}, {"distance", e.distance}});
  ctx.result["excluded"] = ex;
  CsvTable t({"id", "distance", "green", "scaled", "retained"});
  for (const auto& e : a.retained) t.row({e.y, e.distance, e.green, e.scaled, 1});
  for (const auto& e : a.excluded) t.row({e.y, e.distance, e.green, e.scaled, 0});
  ctx.csv = std::move(t);
}

void cmd_annulus_audit(Context& ctx, Section& top, Section& p) {
  const int r = static_cast<int>(p.integer("r"));
  auto ms = p.int_list("m");
  increasing(p, "m", ms);
  const int outer = static_cast<int>(p.integer("outer", 0));
  const double mu = p.number("outer_factor", 3.0);
  positive(p, "outer_factor", mu);
  p.finish();
  auto& g = graph_of(ctx);
  const Vertex x0 = base_vertex(ctx, top);
  Json audits = Json::array();
  CsvTable t({"m", "outer", "ratio", "sphere_size"});
  for (int m : ms) {
    const int out = outer > 0 ? outer : static_cast<int>(std::ceil(mu * m));
    auto a = annulus_harnack_ratio(g, x0, r, m, out, ctx.solver);
    audits.push_back({{"m", m}, {"outer", out}, {"ratio", a.ratio},
                      {"witness", vertex_json(g, a.witness)}, {"sphere_size", a.sphere_size}});
    t.row({m, out, a.ratio, a.sphere_size});
  }
  ctx.result["center"] = vertex_json(g, x0);
  ctx.result["r"] = r;
  ctx.result["audits"] = audits;
  ctx.csv = std::move(t);
}

void cmd_mc_check(Context& ctx, Section& top, Section& p) {
  const int stop_radius = static_cast<int>(p.integer("stop_radius"));
  McOptions mo;
  mo.walks = static_cast<std::uint64_t>(p.integer("walks", 100000));
  mo.step_cap = p.integer("step_cap", 1000000);
  const double alpha = p.number("alpha", 1e-4);
  if (stop_radius < 1) throw FieldError(p.path("stop_radius"), "must be positive");
  if (p.integer("walks") < 1) throw FieldError(p.path("walks"), "must be positive");
  if (!(alpha > 0 && alpha < 1)) throw FieldError(p.path("alpha"), "must lie in (0,1)");
  auto& g = graph_of(ctx);
  Vertex center = -1;
  if (p.has("center")) center = read_vertex(g, p.raw("center"), p.path("center"));
  p.finish();
  if (!ctx.seed) throw FieldError("seed", "required for stochastic commands (use --seed)");
  mo.seed = *ctx.seed;
  const auto a = target_set(ctx, top);
  const Vertex x = base_vertex(ctx, top);
  if (center < 0) center = x;
  auto b = ball(g, center, stop_radius);
  if (!is_subset(a, b)) throw FieldError("target", "not inside the stop ball");
  if (!b.contains(x)) throw FieldError("base", "walk start outside the stop ball");
  const auto stop = boundary(g, b);
  auto exact = hitting_distribution(g, a, stop, x, HittingRoute::Auto, ctx.solver);
  auto mc = mc_hitting(g, a, stop, x, mo);
  auto agree = compare_mc_exact(mc, exact.measure, alpha);
  ctx.result["walks"] = mc.walks;
  ctx.result["censored"] = mc.censored;
  ctx.result["exact"] = measure_json(g, exact.measure);
  ctx.result["mc"] = measure_json(g, mc.measure());
  ctx.result["min_p_value"] = agree.min_p_value;
  ctx.result["max_z"] = agree.max_z;
  ctx.result["pass"] = agree.pass;
  if (!agree.pass) ctx.flags.push_back("binomial test rejected at the configured significance");
  auto h = coord_header(g);
  for (const char* c : {"count", "mc_weight", "exact_weight", "p_value"}) h.push_back(c);
  CsvTable t(h);
  for (std::size_t i = 0; i < mc.support.size(); ++i) {
    const double pe = exact.measure.weight(mc.support[i]);
    auto cells = coord_cells(g, mc.support[i]);
    cells.push_back(mc.counts[i]);
    cells.push_back(mc.weights[i]);
    cells.push_back(pe);
    cells.push_back(binomial_two_sided_p(mc.counts[i], mc.completed(), pe));
    t.row(cells);
  }
  ctx.csv = std::move(t);
}

using Handler = std::function<void(Context&, Section&, Section&)>;

const std::map<std::string, std::pair<Handler, std::string>>& commands() {
  static const std::map<std::string, std::pair<Handler, std::string>> table{
      {"env-sample", {cmd_env_sample, "Sample a random conductance environment"}},
      {"cluster", {cmd_cluster, "Largest open cluster and chemical-distance audit"}},
      {"green", {cmd_green, "Green columns on an increasing sequence of balls"}},
      {"potential-kernel", {cmd_potential_kernel, "Potential kernel g(., x0)"}},
      {"capacity", {cmd_capacity, "Relative or escape capacity of a target"}},
      {"kesten-flow", {cmd_kesten_flow, "Kesten-grid unit flow and Thomson bound"}},
      {"hmeasure-finite", {cmd_hmeasure_finite, "Finite-ball harmonic measure"}},
      {"hmeasure-transient", {cmd_hmeasure_transient, "Harmonic measure on transient graphs"}},
      {"hmeasure-recurrent", {cmd_hmeasure_recurrent, "Harmonic measure on recurrent graphs"}},
      {"hmeasure-profile", {cmd_hmeasure_profile, "Observed hitting measures by distance"}},
      {"harnack-audit", {cmd_harnack_audit, "Exact Harnack ratios on balls"}},
      {"ge-audit", {cmd_ge_audit, "Green function band audit"}},
      {"annulus-audit", {cmd_annulus_audit, "Annulus Harnack ratios"}},
      {"mc-check", {cmd_mc_check, "Monte Carlo hitting test against the exact solve"}},
  };
  return table;
}

void set_path(Json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw FieldError("--set", "expected key.path=value, got '" + assignment + "'");
  const auto key = assignment.substr(0, eq);
  const auto text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json* node = &root;
  std::stringstream ss(key);
  std::string part, walked;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    walked = join_path(walked, parts[i]);
    if (parts[i].empty()) throw FieldError(key, "empty path segment");
    if (!node->is_object()) {
      if (!node->is_null()) throw FieldError(walked, "not an object");
      *node = Json::object();
    }
    node = &(*node)[parts[i]];
  }
  *node = std::move(value);
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation:
    case ErrorKind::Domain:
    case ErrorKind::Io:
    case ErrorKind::Resource:
    case ErrorKind::WindowClipped:
    case ErrorKind::IsolatedAnchor:
      return kExitValidation;
    case ErrorKind::NonConvergence:
    case ErrorKind::Singular:
    case ErrorKind::ConstructionFailed:
    case ErrorKind::UnreachableTarget:
    case ErrorKind::Consistency:
      return kExitFlagged;
  }
  return kExitFailure;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  const std::string& path = {}) {
  Json e{{"kind", kind}, {"message", message}};
  if (!path.empty()) e["path"] = path;
  err << Json{{"error", e}}.dump() << '\n';
}

struct RunOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string output;
};

fs::path output_dir(const std::string& configured) {
  const char* root = std::getenv("HARMEAS_OUTPUT_ROOT");
  fs::path p(configured);
  if (p.is_absolute() || !root || !*root) return p;
  return fs::path(root) / p;
}

int run_command(const std::string& name, const RunOptions& ro, std::ostream& out) {
  Context ctx;
  ctx.command = name;
  if (!ro.config_file.empty()) {
    std::string text;
    try {
      text = read_text_file(ro.config_file);
    } catch (const Error& e) {
      throw FieldError("--config", e.what());
    }
    ctx.config = Json::parse(text, nullptr, false);
    if (ctx.config.is_discarded()) throw FieldError("--config", "file is not valid JSON");
  }
  if (ctx.config.is_null()) ctx.config = Json::object();
  for (const auto& s : ro.sets) set_path(ctx.config, s);
  if (ro.seed) ctx.config["seed"] = *ro.seed;
  if (!ro.output.empty()) ctx.config["output"] = ro.output;

  Section top(ctx.config, "");
  const auto cmd = top.string("command", name);
  if (cmd != name) throw FieldError("command", "config is for '" + cmd + "', not '" + name + "'");
  if (top.has("seed")) {
    const auto s = top.integer("seed");
    if (s < 0) throw FieldError("seed", "must be non-negative");
    ctx.seed = static_cast<std::uint64_t>(s);
  } else {
    top.raw("seed") = nullptr;
  }
  const auto out_name = top.string("output", name);
  {
    Section s(top.raw("solver"), "solver");
    ctx.solver.rel_tol = s.number("rel_tol", 1e-10);
    ctx.solver.dense_threshold = static_cast<std::size_t>(s.integer("dense_threshold", 2000));
    ctx.solver.serial = s.boolean("serial", false);
    positive(s, "rel_tol", ctx.solver.rel_tol);
    s.finish();
  }
  top.raw("graph");
  top.raw("params");
  const bool has_target = top.has("target");
  const bool has_base = top.has("base");
  if (has_target) top.raw("target");
  if (has_base) top.raw("base");
  top.finish();

  Section params(ctx.config["params"], "params");
  commands().at(name).first(ctx, top, params);
  params.finish();

  Json provenance{{"version", kVersion},
                  {"command", name},
                  {"seed", ctx.seed ? Json(*ctx.seed) : Json()},
                  {"params", ctx.config["params"]},
                  {"solver", ctx.config["solver"]}};
  if (ctx.loaded) provenance["graph"] = ctx.loaded->summary;
  Json doc{{"provenance", provenance}, {"result", ctx.result}, {"flags", ctx.flags}};

  const auto dir = output_dir(out_name);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FieldError("output", "cannot create " + dir.string() + ": " + ec.message());
  write_text_file((dir / "result.json").string(), doc.dump(2) + "\n");
  write_text_file((dir / "config.json").string(), ctx.config.dump(2) + "\n");
  if (ctx.csv) write_text_file((dir / "data.csv").string(), ctx.csv->str());
  for (const auto& [file, text] : ctx.extra_files) write_text_file((dir / file).string(), text);

  const bool flagged = !ctx.flags.empty();
  out << Json{{"status", flagged ? "flagged" : "ok"}, {"output", dir.string()}, {"flags", ctx.flags}}.dump()
      << '\n';
  return flagged ? kExitFlagged : kExitOk;
}

int run_compare(const std::string& a, const std::string& b, std::optional<double> tol,
                const std::string& output, std::ostream& out) {
  auto load = [](const std::string& path) {
    Json j = Json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded()) throw FieldError(path, "file is not valid JSON");
    try {
      return labelled_measure(j);
    } catch (const Error& e) {
      throw FieldError(path, e.what());
    }
  };
  auto c = compare_measures(load(a), load(b));
  Json deltas = Json::array();
  CsvTable t({"point", "a", "b", "delta"});
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    deltas.push_back({{"point", c.labels[i]}, {"a", c.a[i]}, {"b", c.b[i]}, {"delta", c.a[i] - c.b[i]}});
    t.row({"\"" + c.labels[i] + "\"", c.a[i], c.b[i], c.a[i] - c.b[i]});
  }
  Json doc{{"provenance", {{"version", kVersion}, {"command", "compare"}, {"inputs", {a, b}}}},
           {"result", {{"tv", c.tv}, {"max_delta", c.max_delta}, {"points", deltas}}}};
  std::vector<std::string> flags;
  if (tol) {
    doc["provenance"]["tolerance"] = *tol;
    if (c.tv > *tol) flags.push_back("total variation above the tolerance");
  }
  doc["flags"] = flags;
  if (!output.empty()) {
    const auto dir = output_dir(output);
    fs::create_directories(dir);
    write_text_file((dir / "result.json").string(), doc.dump(2) + "\n");
    write_text_file((dir / "data.csv").string(), t.str());
  }
  out << doc["result"].dump() << '\n';
  return flags.empty() ? kExitOk : kExitFlagged;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Harmonic measure experiments on weighted graphs", "harmeas"};
  app.require_subcommand(1);
  RunOptions ro;
  std::uint64_t seed = 0;
  std::map<CLI::App*, std::string> names;
  for (const auto& [name, entry] : commands()) {
    auto* sub = app.add_subcommand(name, entry.second);
    sub->add_option("-c,--config", ro.config_file, "JSON configuration file");
    sub->add_option("--set", ro.sets, "Override a config field: key.path=value")->take_all();
    sub->add_option("--seed", seed, "Seed for stochastic commands");
    sub->add_option("--threads", ro.threads, "OpenMP threads (results do not depend on it)");
    sub->add_option("-o,--output", ro.output, "Output directory (relative to HARMEAS_OUTPUT_ROOT)");
    names[sub] = name;
  }
  std::string file_a, file_b, cmp_out;
  double tol = -1.0;
  auto* cmp = app.add_subcommand("compare", "Total variation between two result measures");
  cmp->add_option("a", file_a, "First result file")->required();
  cmp->add_option("b", file_b, "Second result file")->required();
  cmp->add_option("--tol", tol, "Flag when the total variation exceeds this");
  cmp->add_option("-o,--output", cmp_out, "Also write result.json and data.csv here");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "Validation", e.what());
    return kExitValidation;
  }

  try {
    if (ro.threads < 0) throw FieldError("--threads", "must be non-negative");
    if (ro.threads > 0) omp_set_num_threads(ro.threads);
    if (cmp->parsed())
      return run_compare(file_a, file_b, tol >= 0 ? std::optional<double>(tol) : std::nullopt, cmp_out, out);
    for (const auto& [sub, name] : names) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed")) ro.seed = seed;
      return run_command(name, ro, out);
    }
    report_error(err, "Validation", "no subcommand");
    return kExitValidation;
  } catch (const FieldError& e) {
    report_error(err, "Validation", e.what(), e.path());
    return kExitValidation;
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const Json::exception& e) {
    report_error(err, "Validation", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    report_error(err, "Failure", e.what());
    return kExitFailure;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace harmeas
