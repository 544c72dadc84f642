#pragma once

#include <iosfwd>
#include <string>

#include <harmeas/graph.hpp>

namespace harmeas {

/// Edge-list text format:
///   # comment
///   vertices N
///   x y a
/// Lines may appear in any order after the header; writes are sorted by (x,y)
/// with x <= y so a read/write round trip is byte-stable.
WeightedGraph read_graph(std::istream& in, bool allow_self_loops = false);
WeightedGraph read_graph_file(const std::string& path, bool allow_self_loops = false);

void write_graph(std::ostream& out, const WeightedGraph& g,
                 const std::string& comment = {});
void write_graph_file(const std::string& path, const WeightedGraph& g,
                      const std::string& comment = {});

/// Vertex-set files share the header, followed by one id per line.
VertexSet read_vertex_set(std::istream& in);
void write_vertex_set(std::ostream& out, const VertexSet& s, std::size_t num_vertices,
                      const std::string& comment = {});

}  // namespace harmeas
