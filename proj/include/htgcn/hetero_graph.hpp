#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "htgcn/dense_matrix.hpp"

namespace htgcn {

using NodeId = std::int64_t;
using TypeTag = int;

struct NodeRecord {
  NodeId id = 0;
  TypeTag node_type = 0;
  std::vector<double> features;
  std::optional<int> label;

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

// Undirected typed edge, stored with src < dst.
struct EdgeRecord {
  NodeId src = 0;
  NodeId dst = 0;
  TypeTag edge_type = 0;

  friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
};

// One time step of a heterogeneous graph. Validated and indexed on
// construction, immutable afterwards.
class HeteroSnapshot {
 public:
  HeteroSnapshot(int time_index, int node_type_count, int edge_type_count,
                 std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges);

  int time_index() const noexcept { return time_index_; }
  int node_type_count() const noexcept { return node_type_count_; }
  int edge_type_count() const noexcept { return edge_type_count_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  const std::vector<NodeRecord>& nodes() const noexcept { return nodes_; }
  const std::vector<EdgeRecord>& edges() const noexcept { return edges_; }

  bool contains(NodeId id) const { return index_.contains(id); }
  // Position of id in nodes(), or nullopt.
  std::optional<std::size_t> position(NodeId id) const;
  const NodeRecord& node(NodeId id) const;

  // Positions (into nodes()) of every node of the given type, in snapshot order.
  // This order defines the rows of every per-type matrix.
  const std::vector<std::size_t>& nodes_of_type(TypeTag type) const;
  // Row of node id inside its type's matrices, or nullopt.
  std::optional<std::size_t> type_row(NodeId id) const;

  // Neighbors of the node at `position` via edges of the given type, as positions.
  std::span<const std::size_t> neighbors(std::size_t position, TypeTag edge_type) const;

  void check_node_type(TypeTag t) const;
  void check_edge_type(TypeTag t) const;

  // Feature rows of one node type, row order per nodes_of_type.
  DenseMatrix feature_matrix(TypeTag type) const;
  // Labels of one node type (-1 where unlabeled), row order per nodes_of_type.
  std::vector<int> labels(TypeTag type) const;

 private:
  int time_index_;
  int node_type_count_;
  int edge_type_count_;
  std::size_t feature_dim_ = 0;
  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> by_type_;
  std::vector<std::size_t> type_row_;
  // adjacency_[edge_type][position] -> neighbor positions (sorted, deduplicated)
  std::vector<std::vector<std::vector<std::size_t>>> adjacency_;
};

// Snapshots with strictly increasing time indices and a shared feature dimension.
class TemporalSeries {
 public:
  TemporalSeries() = default;
  explicit TemporalSeries(std::vector<HeteroSnapshot> snapshots);

  const std::vector<HeteroSnapshot>& snapshots() const noexcept { return snapshots_; }
  std::size_t size() const noexcept { return snapshots_.size(); }
  bool empty() const noexcept { return snapshots_.empty(); }
  const HeteroSnapshot& operator[](std::size_t i) const { return snapshots_[i]; }
  const HeteroSnapshot& back() const { return snapshots_.back(); }

  // The last `length` snapshots.
  std::span<const HeteroSnapshot> window(std::size_t length) const;

 private:
  std::vector<HeteroSnapshot> snapshots_;
};

// |V_i| x |V_i| 0/1 matrix over nodes of `node_type`: two nodes are adjacent when
// joined directly by an edge of `edge_type`, or through one intermediate node of
// another type with both hops of `edge_type`. Zero diagonal.
DenseMatrix block_adjacency(const HeteroSnapshot& snapshot, TypeTag node_type, TypeTag edge_type);

// Entrywise sum of block_adjacency over every edge type.
DenseMatrix collapse_adjacency(const HeteroSnapshot& snapshot, TypeTag target_type);

// D^-1/2 (A + I) D^-1/2 with D = diag(rowsum(A + I)).
DenseMatrix normalize_adjacency(const DenseMatrix& adjacency);

// Diagonal of D above: row sums of A + I.
std::vector<double> augmented_degrees(const DenseMatrix& adjacency);

}  // namespace htgcn
