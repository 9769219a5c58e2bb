#pragma once

#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "htgcn/dense_matrix.hpp"
#include "htgcn/hetero_graph.hpp"

namespace htgcn {

// a1 -e1-> a2 -e2-> ... -> an. Textual form alternates node and edge tags:
// "0-0-1-0-0" is node type 0, edge type 0, node type 1, edge type 0, node type 0.
struct MetaPath {
  std::vector<TypeTag> node_types;
  std::vector<TypeTag> edge_types;

  static MetaPath parse(std::string_view text);
  static std::vector<MetaPath> parse_list(std::string_view comma_separated);
  std::string to_string() const;

  TypeTag head_type() const { return node_types.front(); }
  TypeTag anchor_type() const { return node_types.at(1); }
  TypeTag tail_type() const { return node_types.back(); }

  // Throws unless the path has the three-node form used for cross-time pairing
  // and every tag is valid for the snapshot.
  void check_against(const HeteroSnapshot& snapshot) const;

  friend bool operator==(const MetaPath&, const MetaPath&) = default;
};

struct PathInstance {
  NodeId head = 0;
  NodeId anchor = 0;
  NodeId tail = 0;
  friend auto operator<=>(const PathInstance&, const PathInstance&) = default;
};

struct AnchorPair {
  NodeId prev_endpoint = 0;
  NodeId cur_endpoint = 0;
  NodeId anchor = 0;
  friend bool operator==(const AnchorPair&, const AnchorPair&) = default;
};

struct AnchorPairing {
  std::vector<NodeId> anchor_ids;  // ascending
  std::vector<AnchorPair> pairs;   // ascending by (anchor, prev, cur)
};

struct PairingOptions {
  std::size_t max_pairs_per_anchor = 32;
  bool keep_self_pairs = false;
  // Only off for self-comparison tests; training always pairs t-1 with t.
  bool require_consecutive = true;
};

// Row indices of each pair's endpoints inside the prev snapshot's head-type
// matrices and the cur snapshot's tail-type matrices.
struct PairRows {
  std::vector<std::size_t> prev_rows;
  std::vector<std::size_t> cur_rows;
};

// Every (u, a, v) with u -e1- a -e2- v and matching node types, including u == v.
std::vector<PathInstance> enumerate_instances(const HeteroSnapshot& snapshot, const MetaPath& mp);

// Anchors present in both snapshots and the cross product of their prev-step
// head neighbors with their cur-step tail neighbors. Pairs beyond the per-anchor
// cap are subsampled uniformly (order preserved) with `rng`.
AnchorPairing shared_anchors(const HeteroSnapshot& prev, const HeteroSnapshot& cur,
                             const MetaPath& mp, const PairingOptions& options,
                             std::mt19937_64& rng);

PairRows pair_rows(const HeteroSnapshot& prev, const HeteroSnapshot& cur, const MetaPath& mp,
                   const AnchorPairing& pairing);

// Gathers the aligned P x d matrices (prev embeddings, cur embeddings).
std::pair<DenseMatrix, DenseMatrix> sample_pair_matrices(const DenseMatrix& prev_embedding,
                                                         const DenseMatrix& cur_embedding,
                                                         const PairRows& rows);

}  // namespace htgcn
