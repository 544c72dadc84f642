#include <harmeas/graph_io.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <harmeas/error.hpp>

namespace harmeas {

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

std::size_t read_header(std::istream& in, long& lineno) {
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream ss(line);
    std::string key;
    long long n = -1;
    ss >> key >> n;
    if (key != "vertices" || n < 0)
      fail(ErrorKind::Io, "line " + std::to_string(lineno) + ": expected 'vertices N'");
    return static_cast<std::size_t>(n);
  }
  fail(ErrorKind::Io, "missing 'vertices N' header");
}

void write_comment(std::ostream& out, const std::string& comment) {
  std::istringstream ss(comment);
  std::string line;
  while (std::getline(ss, line)) out << "# " << line << '\n';
}

}  // namespace

WeightedGraph read_graph(std::istream& in, bool allow_self_loops) {
  long lineno = 0;
  const std::size_t n = read_header(in, lineno);
  GraphBuilder b(n, allow_self_loops);
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream ss(line);
    long long x = -1, y = -1;
    double a = -1.0;
    if (!(ss >> x >> y >> a))
      fail(ErrorKind::Io, "line " + std::to_string(lineno) + ": expected 'x y a'");
    try {
      b.add_edge(static_cast<Vertex>(x), static_cast<Vertex>(y), a);
    } catch (const Error& e) {
      fail(ErrorKind::Io, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return std::move(b).build();
}

WeightedGraph read_graph_file(const std::string& path, bool allow_self_loops) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  return read_graph(in, allow_self_loops);
}

void write_graph(std::ostream& out, const WeightedGraph& g, const std::string& comment) {
  write_comment(out, comment);
  out << "vertices " << g.num_vertices() << '\n';
  char buf[64];
  for (Vertex x = 0; static_cast<std::size_t>(x) < g.num_vertices(); ++x) {
    auto nb = g.neighbors(x);
    auto cd = g.conductances(x);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] < x) continue;
      std::snprintf(buf, sizeof buf, "%.17g", cd[k]);
      out << x << ' ' << nb[k] << ' ' << buf << '\n';
    }
  }
}

void write_graph_file(const std::string& path, const WeightedGraph& g,
                      const std::string& comment) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  write_graph(out, g, comment);
}

VertexSet read_vertex_set(std::istream& in) {
  long lineno = 0;
  const std::size_t n = read_header(in, lineno);
  std::vector<Vertex> ids;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream ss(line);
    long long v = -1;
    if (!(ss >> v) || v < 0 || static_cast<std::size_t>(v) >= n)
      fail(ErrorKind::Io, "line " + std::to_string(lineno) + ": bad vertex id");
    ids.push_back(static_cast<Vertex>(v));
  }
  return VertexSet(std::move(ids));
}

void write_vertex_set(std::ostream& out, const VertexSet& s, std::size_t num_vertices,
                      const std::string& comment) {
  write_comment(out, comment);
  out << "vertices " << num_vertices << '\n';
  for (Vertex v : s) out << v << '\n';
}

}  // namespace harmeas
