#include "htgcn/hetero_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "htgcn/errors.hpp"
#include "htgcn/kernels.hpp"

namespace htgcn {

HeteroSnapshot::HeteroSnapshot(int time_index, int node_type_count, int edge_type_count,
                               std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges)
    : time_index_(time_index),
      node_type_count_(node_type_count),
      edge_type_count_(edge_type_count),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)) {
  if (time_index_ < 1) {
    throw GraphError("time_index must be >= 1, got " + std::to_string(time_index_));
  }
  if (node_type_count_ < 1 || edge_type_count_ < 0 || node_type_count_ + edge_type_count_ <= 2) {
    throw GraphError("snapshot is not heterogeneous: " + std::to_string(node_type_count_) +
                     " node types + " + std::to_string(edge_type_count_) + " edge types <= 2");
  }

  feature_dim_ = nodes_.empty() ? 0 : nodes_.front().features.size();
  by_type_.assign(static_cast<std::size_t>(node_type_count_), {});
  type_row_.resize(nodes_.size());
  index_.reserve(nodes_.size());
  for (std::size_t p = 0; p < nodes_.size(); ++p) {
    const NodeRecord& n = nodes_[p];
    if (!index_.emplace(n.id, p).second) {
      throw GraphError("duplicate node id " + std::to_string(n.id));
    }
    if (n.node_type < 0 || n.node_type >= node_type_count_) {
      throw UnknownTypeError("node", n.node_type);
    }
    if (n.features.size() != feature_dim_) {
      throw GraphError("node " + std::to_string(n.id) + " has " +
                       std::to_string(n.features.size()) + " features, expected " +
                       std::to_string(feature_dim_));
    }
    if (n.label && *n.label < 0) {
      throw GraphError("node " + std::to_string(n.id) + " has negative label");
    }
    auto& bucket = by_type_[static_cast<std::size_t>(n.node_type)];
    type_row_[p] = bucket.size();
    bucket.push_back(p);
  }

  adjacency_.assign(static_cast<std::size_t>(edge_type_count_),
                    std::vector<std::vector<std::size_t>>(nodes_.size()));
  for (EdgeRecord& e : edges_) {
    if (e.src == e.dst) throw GraphError("self-loop on node " + std::to_string(e.src));
    if (e.edge_type < 0 || e.edge_type >= edge_type_count_) {
      throw UnknownTypeError("edge", e.edge_type);
    }
    if (e.src > e.dst) std::swap(e.src, e.dst);
    const auto a = index_.find(e.src);
    const auto b = index_.find(e.dst);
    if (a == index_.end() || b == index_.end()) {
      throw GraphError("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                       ") references a missing node");
    }
    auto& lists = adjacency_[static_cast<std::size_t>(e.edge_type)];
    lists[a->second].push_back(b->second);
    lists[b->second].push_back(a->second);
  }
  for (auto& lists : adjacency_) {
    for (auto& l : lists) {
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
    }
  }
}

std::optional<std::size_t> HeteroSnapshot::position(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const NodeRecord& HeteroSnapshot::node(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw GraphError("no node with id " + std::to_string(id));
  return nodes_[it->second];
}

const std::vector<std::size_t>& HeteroSnapshot::nodes_of_type(TypeTag type) const {
  check_node_type(type);
  return by_type_[static_cast<std::size_t>(type)];
}

std::optional<std::size_t> HeteroSnapshot::type_row(NodeId id) const {
  const auto p = position(id);
  if (!p) return std::nullopt;
  return type_row_[*p];
}

std::span<const std::size_t> HeteroSnapshot::neighbors(std::size_t position,
                                                       TypeTag edge_type) const {
  check_edge_type(edge_type);
  return adjacency_[static_cast<std::size_t>(edge_type)][position];
}

void HeteroSnapshot::check_node_type(TypeTag t) const {
  if (t < 0 || t >= node_type_count_) throw UnknownTypeError("node", t);
}

void HeteroSnapshot::check_edge_type(TypeTag t) const {
  if (t < 0 || t >= edge_type_count_) throw UnknownTypeError("edge", t);
}

DenseMatrix HeteroSnapshot::feature_matrix(TypeTag type) const {
  const auto& rows = nodes_of_type(type);
  DenseMatrix x(rows.size(), feature_dim_);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = nodes_[rows[r]].features;
    std::copy(f.begin(), f.end(), x.row(r).begin());
  }
  return x;
}

std::vector<int> HeteroSnapshot::labels(TypeTag type) const {
  const auto& rows = nodes_of_type(type);
  std::vector<int> out(rows.size(), -1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& l = nodes_[rows[r]].label;
    if (l) out[r] = *l;
  }
  return out;
}

TemporalSeries::TemporalSeries(std::vector<HeteroSnapshot> snapshots)
    : snapshots_(std::move(snapshots)) {
  for (std::size_t i = 1; i < snapshots_.size(); ++i) {
    if (snapshots_[i].time_index() <= snapshots_[i - 1].time_index()) {
      throw GraphError("snapshot time indices must strictly increase (" +
                       std::to_string(snapshots_[i - 1].time_index()) + " then " +
                       std::to_string(snapshots_[i].time_index()) + ")");
    }
    if (!snapshots_[i].nodes().empty() && !snapshots_[0].nodes().empty() &&
        snapshots_[i].feature_dim() != snapshots_[0].feature_dim()) {
      throw GraphError("feature dimension changes across snapshots");
    }
  }
}

std::span<const HeteroSnapshot> TemporalSeries::window(std::size_t length) const {
  if (length > snapshots_.size()) {
    throw GraphError("window of " + std::to_string(length) + " snapshots requested, series has " +
                     std::to_string(snapshots_.size()));
  }
  return std::span<const HeteroSnapshot>(snapshots_).last(length);
}

DenseMatrix block_adjacency(const HeteroSnapshot& snapshot, TypeTag node_type,
                            TypeTag edge_type) {
  snapshot.check_node_type(node_type);
  snapshot.check_edge_type(edge_type);
  const auto& members = snapshot.nodes_of_type(node_type);
  const auto& nodes = snapshot.nodes();
  const auto n = static_cast<std::int64_t>(members.size());
  DenseMatrix a(members.size(), members.size());

  // Each row is written by exactly one iteration.
#pragma omp parallel for schedule(dynamic, 16) if (n > 256)
  for (std::int64_t r = 0; r < n; ++r) {
    const std::size_t u = members[static_cast<std::size_t>(r)];
    for (std::size_t w : snapshot.neighbors(u, edge_type)) {
      if (nodes[w].node_type == node_type) {
        a(static_cast<std::size_t>(r), *snapshot.type_row(nodes[w].id)) = 1.0;
        continue;
      }
      for (std::size_t v : snapshot.neighbors(w, edge_type)) {
        if (v == u || nodes[v].node_type != node_type) continue;
        a(static_cast<std::size_t>(r), *snapshot.type_row(nodes[v].id)) = 1.0;
      }
    }
  }
  return a;
}

DenseMatrix collapse_adjacency(const HeteroSnapshot& snapshot, TypeTag target_type) {
  const auto& members = snapshot.nodes_of_type(target_type);
  if (members.empty()) {
    throw GraphError("no nodes of type " + std::to_string(target_type) + " in snapshot t=" +
                     std::to_string(snapshot.time_index()));
  }
  DenseMatrix sum(members.size(), members.size());
  for (TypeTag e = 0; e < snapshot.edge_type_count(); ++e) {
    const DenseMatrix block = block_adjacency(snapshot, target_type, e);
    for (std::size_t i = 0; i < sum.size(); ++i) sum.values()[i] += block.values()[i];
  }
  return sum;
}

std::vector<double> augmented_degrees(const DenseMatrix& adjacency) {
  std::vector<double> deg(adjacency.rows(), 1.0);
  for (std::size_t i = 0; i < adjacency.rows(); ++i)
    for (double v : adjacency.row(i)) deg[i] += v;
  return deg;
}

DenseMatrix normalize_adjacency(const DenseMatrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw ShapeError("normalize_adjacency: matrix is not square (" + adjacency.shape_string() +
                     ")");
  }
  const std::size_t n = adjacency.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (adjacency(i, j) != adjacency(j, i)) {
        throw ShapeError("normalize_adjacency: matrix is not symmetric at (" + std::to_string(i) +
                         "," + std::to_string(j) + ")");
      }
      if (adjacency(i, j) < 0.0) {
        throw ShapeError("normalize_adjacency: negative entry at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      }
    }
  }
  DenseMatrix with_self = adjacency;
  for (std::size_t i = 0; i < n; ++i) with_self(i, i) += 1.0;
  return kernels::degree_normalize(with_self, augmented_degrees(adjacency));
}

}  // namespace htgcn
