#include <harmeas/serialize.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <harmeas/error.hpp>

namespace harmeas {

Json vertex_json(const WeightedGraph& g, Vertex v) {
  Json j;
  j["id"] = v;
  if (g.has_coordinates()) {
    auto c = g.coord(v);
    j["coords"] = std::vector<int>(c.begin(), c.end());
  }
  return j;
}

Json vertex_set_json(const WeightedGraph& g, const VertexSet& s) {
  Json arr = Json::array();
  for (Vertex v : s) arr.push_back(vertex_json(g, v));
  return arr;
}

Json measure_json(const WeightedGraph& g, const MeasureOnSet& m) {
  Json j;
  j["support"] = vertex_set_json(g, m.support);
  j["weights"] = m.weights;
  j["defect"] = m.defect;
  return j;
}

namespace {

std::string label_of(const Json& v) {
  if (v.is_object() && v.contains("coords")) {
    std::string s;
    for (const auto& c : v["coords"]) {
      if (!s.empty()) s += ',';
      s += std::to_string(c.get<int>());
    }
    return "(" + s + ")";
  }
  if (v.is_object() && v.contains("id")) return std::to_string(v["id"].get<long long>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  fail(ErrorKind::Validation, "measure support entry is neither an id nor a vertex object");
}

}  // namespace

LabelledMeasure labelled_measure(const Json& j) {
  const Json* m = &j;
  if (j.contains("result") && j["result"].contains("measure")) m = &j["result"]["measure"];
  else if (j.contains("measure")) m = &j["measure"];
  if (!m->contains("support") || !m->contains("weights"))
    fail(ErrorKind::Validation, "no measure (support and weights) found in the result");
  const auto& sup = (*m)["support"];
  const auto& w = (*m)["weights"];
  if (!sup.is_array() || !w.is_array() || sup.size() != w.size())
    fail(ErrorKind::Validation, "measure support and weights differ in length");
  LabelledMeasure out;
  for (std::size_t i = 0; i < sup.size(); ++i) {
    out.labels.push_back(label_of(sup[i]));
    out.weights.push_back(w[i].get<double>());
  }
  return out;
}

MeasureComparison compare_measures(const LabelledMeasure& a, const LabelledMeasure& b) {
  std::map<std::string, double> ma, mb;
  for (std::size_t i = 0; i < a.labels.size(); ++i) ma[a.labels[i]] = a.weights[i];
  for (std::size_t i = 0; i < b.labels.size(); ++i) mb[b.labels[i]] = b.weights[i];
  std::vector<std::string> only;
  for (const auto& [k, v] : ma)
    if (!mb.count(k)) only.push_back(k);
  for (const auto& [k, v] : mb)
    if (!ma.count(k)) only.push_back(k);
  if (!only.empty()) {
    std::string list;
    for (const auto& s : only) list += (list.empty() ? "" : " ") + s;
    fail(ErrorKind::Domain, "supports differ; symmetric difference: " + list);
  }
  MeasureComparison c;
  double l1 = 0.0;
  for (const auto& [k, v] : ma) {
    const double d = std::abs(v - mb[k]);
    l1 += d;
    c.max_delta = std::max(c.max_delta, d);
    c.labels.push_back(k);
    c.a.push_back(v);
    c.b.push_back(mb[k]);
  }
  c.tv = 0.5 * l1;
  return c;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += '\n';
}

CsvTable& CsvTable::row(const std::vector<Json>& cells) {
  require(cells.size() == width_, "CsvTable: row width differs from the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    const auto& c = cells[i];
    if (c.is_number_float()) text_ += format_number(c.get<double>());
    else if (c.is_string()) text_ += c.get<std::string>();
    else text_ += c.dump();
  }
  text_ += '\n';
  return *this;
}

std::string CsvTable::str() const { return text_; }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace harmeas
