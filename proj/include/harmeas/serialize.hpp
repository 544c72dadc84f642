#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include <harmeas/graph.hpp>
#include <harmeas/solver.hpp>

namespace harmeas {

inline constexpr const char* kVersion = "harmeas 0.1.0";

using Json = nlohmann::ordered_json;

/// Vertex ids with their coordinates when the graph has them.
Json vertex_json(const WeightedGraph& g, Vertex v);
Json vertex_set_json(const WeightedGraph& g, const VertexSet& s);

/// {"support": [...], "weights": [...], "defect": d}, support entries as in
/// vertex_json.
Json measure_json(const WeightedGraph& g, const MeasureOnSet& m);

/// A measure read back from a result file, keyed by a printable label
/// (coordinates "x,y" when present, otherwise the id).
struct LabelledMeasure {
  std::vector<std::string> labels;
  std::vector<double> weights;
};

LabelledMeasure labelled_measure(const Json& j);

struct MeasureComparison {
  double tv = 0.0;
  double max_delta = 0.0;
  std::vector<std::string> labels;
  std::vector<double> a, b;
};

/// Throws Domain listing the symmetric difference when the supports differ.
MeasureComparison compare_measures(const LabelledMeasure& a, const LabelledMeasure& b);

/// Plain CSV with full-precision numbers.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(const std::vector<Json>& cells);
  std::string str() const;

 private:
  std::size_t width_;
  std::string text_;
};

std::string format_number(double x);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace harmeas
