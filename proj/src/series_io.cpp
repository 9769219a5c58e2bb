#include "htgcn/series_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "htgcn/errors.hpp"

namespace htgcn {

namespace {

using nlohmann::ordered_json;
using json = nlohmann::json;

ordered_json snapshot_to_json(const HeteroSnapshot& g) {
  ordered_json j;
  j["t"] = g.time_index();
  j["node_type_count"] = g.node_type_count();
  j["edge_type_count"] = g.edge_type_count();
  ordered_json nodes = ordered_json::array();
  for (const NodeRecord& n : g.nodes()) {
    ordered_json r;
    r["id"] = n.id;
    r["type"] = n.node_type;
    r["features"] = n.features;
    r["label"] = n.label ? ordered_json(*n.label) : ordered_json(nullptr);
    nodes.push_back(std::move(r));
  }
  ordered_json edges = ordered_json::array();
  for (const EdgeRecord& e : g.edges()) {
    ordered_json r;
    r["src"] = e.src;
    r["dst"] = e.dst;
    r["etype"] = e.edge_type;
    edges.push_back(std::move(r));
  }
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  return j;
}

const json& require(const json& obj, const char* key, std::size_t line, const std::string& where) {
  if (!obj.is_object()) throw ParseError(line, where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, where + key, "missing");
  return *it;
}

template <typename T>
T integer(const json& v, std::size_t line, const std::string& field) {
  if (!v.is_number_integer()) throw ParseError(line, field, "expected an integer");
  return v.get<T>();
}

HeteroSnapshot snapshot_from_json(const json& j, std::size_t line) {
  const int t = integer<int>(require(j, "t", line, ""), line, "t");
  const json& nodes_json = require(j, "nodes", line, "");
  const json& edges_json = require(j, "edges", line, "");
  if (!nodes_json.is_array()) throw ParseError(line, "nodes", "expected an array");
  if (!edges_json.is_array()) throw ParseError(line, "edges", "expected an array");

  std::vector<NodeRecord> nodes;
  nodes.reserve(nodes_json.size());
  int max_node_type = -1;
  for (std::size_t i = 0; i < nodes_json.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "].";
    const json& n = nodes_json[i];
    NodeRecord r;
    r.id = integer<NodeId>(require(n, "id", line, where), line, where + "id");
    r.node_type = integer<int>(require(n, "type", line, where), line, where + "type");
    const json& f = require(n, "features", line, where);
    if (!f.is_array()) throw ParseError(line, where + "features", "expected an array");
    r.features.reserve(f.size());
    for (const json& v : f) {
      if (!v.is_number()) throw ParseError(line, where + "features", "expected numbers");
      r.features.push_back(v.get<double>());
    }
    if (const auto it = n.find("label"); it != n.end() && !it->is_null()) {
      r.label = integer<int>(*it, line, where + "label");
    }
    max_node_type = std::max(max_node_type, r.node_type);
    nodes.push_back(std::move(r));
  }

  std::vector<EdgeRecord> edges;
  edges.reserve(edges_json.size());
  int max_edge_type = -1;
  for (std::size_t i = 0; i < edges_json.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "].";
    const json& e = edges_json[i];
    EdgeRecord r;
    r.src = integer<NodeId>(require(e, "src", line, where), line, where + "src");
    r.dst = integer<NodeId>(require(e, "dst", line, where), line, where + "dst");
    r.edge_type = integer<int>(require(e, "etype", line, where), line, where + "etype");
    max_edge_type = std::max(max_edge_type, r.edge_type);
    edges.push_back(r);
  }

  int node_types = max_node_type + 1;
  int edge_types = max_edge_type + 1;
  if (const auto it = j.find("node_type_count"); it != j.end())
    node_types = integer<int>(*it, line, "node_type_count");
  if (const auto it = j.find("edge_type_count"); it != j.end())
    edge_types = integer<int>(*it, line, "edge_type_count");

  try {
    return HeteroSnapshot(t, node_types, edge_types, std::move(nodes), std::move(edges));
  } catch (const GraphError& e) {
    throw ParseError(line, "snapshot", e.what());
  }
}

}  // namespace

void write_series(const TemporalSeries& series, std::ostream& out) {
  for (const HeteroSnapshot& g : series.snapshots()) out << snapshot_to_json(g).dump() << '\n';
}

void write_series(const TemporalSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_series(series, out);
  if (!out) throw IoError("failed writing " + path.string());
}

TemporalSeries read_series(std::istream& in) {
  std::vector<HeteroSnapshot> snapshots;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, "document", std::string("malformed JSON: ") + e.what());
    }
    snapshots.push_back(snapshot_from_json(j, line));
  }
  try {
    return TemporalSeries(std::move(snapshots));
  } catch (const GraphError& e) {
    throw ParseError(line, "series", e.what());
  }
}

TemporalSeries read_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_series(in);
}

}  // namespace htgcn
