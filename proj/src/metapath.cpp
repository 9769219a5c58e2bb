#include "htgcn/metapath.hpp"

#include <algorithm>
#include <charconv>
#include <iterator>

#include "htgcn/errors.hpp"

namespace htgcn {

namespace {

std::vector<std::size_t> typed_neighbors(const HeteroSnapshot& g, std::size_t position,
                                         TypeTag edge_type, TypeTag node_type) {
  std::vector<std::size_t> out;
  for (std::size_t w : g.neighbors(position, edge_type))
    if (g.nodes()[w].node_type == node_type) out.push_back(w);
  return out;
}

std::vector<NodeId> ids_of(const HeteroSnapshot& g, const std::vector<std::size_t>& positions) {
  std::vector<NodeId> ids;
  ids.reserve(positions.size());
  for (std::size_t p : positions) ids.push_back(g.nodes()[p].id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void gather_rows(const DenseMatrix& src, const std::vector<std::size_t>& rows, DenseMatrix& out,
                 const char* which) {
  out = DenseMatrix(rows.size(), src.cols());
  for (std::size_t p = 0; p < rows.size(); ++p) {
    if (rows[p] >= src.rows()) {
      throw GraphError(std::string("pair ") + std::to_string(p) + " references " + which +
                       " row " + std::to_string(rows[p]) + " of " + std::to_string(src.rows()));
    }
    std::copy(src.row(rows[p]).begin(), src.row(rows[p]).end(), out.row(p).begin());
  }
}

}  // namespace

MetaPath MetaPath::parse(std::string_view text) {
  std::vector<int> tags;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('-', start), text.size());
    const std::string_view token = text.substr(start, end - start);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || value < 0) {
      throw ConfigError("meta-path", "bad type tag '" + std::string(token) + "' in '" +
                                         std::string(text) + "'");
    }
    tags.push_back(value);
    start = end + 1;
  }
  if (tags.size() < 3 || tags.size() % 2 == 0) {
    throw ConfigError("meta-path", "'" + std::string(text) +
                                       "' must alternate node and edge tags (node-edge-node...)");
  }
  MetaPath mp;
  for (std::size_t i = 0; i < tags.size(); ++i)
    (i % 2 == 0 ? mp.node_types : mp.edge_types).push_back(tags[i]);
  return mp;
}

std::vector<MetaPath> MetaPath::parse_list(std::string_view comma_separated) {
  std::vector<MetaPath> out;
  std::size_t start = 0;
  while (start < comma_separated.size()) {
    const std::size_t end = std::min(comma_separated.find(',', start), comma_separated.size());
    const auto token = comma_separated.substr(start, end - start);
    if (!token.empty()) out.push_back(parse(token));
    start = end + 1;
  }
  return out;
}

std::string MetaPath::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < node_types.size(); ++i) {
    if (i > 0) s += "-" + std::to_string(edge_types[i - 1]) + "-";
    s += std::to_string(node_types[i]);
  }
  return s;
}

void MetaPath::check_against(const HeteroSnapshot& snapshot) const {
  if (node_types.size() != 3 || edge_types.size() != 2) {
    throw ConfigError("meta-path", "only three-node paths are supported, got '" + to_string() +
                                       "'");
  }
  for (TypeTag t : node_types) snapshot.check_node_type(t);
  for (TypeTag t : edge_types) snapshot.check_edge_type(t);
}

std::vector<PathInstance> enumerate_instances(const HeteroSnapshot& snapshot, const MetaPath& mp) {
  mp.check_against(snapshot);
  std::vector<PathInstance> out;
  const auto& nodes = snapshot.nodes();
  for (std::size_t a : snapshot.nodes_of_type(mp.anchor_type())) {
    const auto heads = typed_neighbors(snapshot, a, mp.edge_types[0], mp.head_type());
    const auto tails = typed_neighbors(snapshot, a, mp.edge_types[1], mp.tail_type());
    for (std::size_t u : heads)
      for (std::size_t v : tails) out.push_back({nodes[u].id, nodes[a].id, nodes[v].id});
  }
  return out;
}

AnchorPairing shared_anchors(const HeteroSnapshot& prev, const HeteroSnapshot& cur,
                             const MetaPath& mp, const PairingOptions& options,
                             std::mt19937_64& rng) {
  if (options.require_consecutive && prev.time_index() + 1 != cur.time_index()) {
    throw GraphError("snapshots t=" + std::to_string(prev.time_index()) + " and t=" +
                     std::to_string(cur.time_index()) + " are not consecutive");
  }
  mp.check_against(prev);
  mp.check_against(cur);

  AnchorPairing pairing;
  for (std::size_t p : cur.nodes_of_type(mp.anchor_type())) {
    const NodeId id = cur.nodes()[p].id;
    const auto before = prev.position(id);
    if (before && prev.nodes()[*before].node_type == mp.anchor_type())
      pairing.anchor_ids.push_back(id);
  }
  std::sort(pairing.anchor_ids.begin(), pairing.anchor_ids.end());

  std::vector<AnchorPair> candidates;
  for (NodeId anchor : pairing.anchor_ids) {
    const auto prev_ends =
        ids_of(prev, typed_neighbors(prev, *prev.position(anchor), mp.edge_types[0], mp.head_type()));
    const auto cur_ends =
        ids_of(cur, typed_neighbors(cur, *cur.position(anchor), mp.edge_types[1], mp.tail_type()));
    candidates.clear();
    for (NodeId u : prev_ends) {
      for (NodeId v : cur_ends) {
        if (u == v && !options.keep_self_pairs) continue;
        candidates.push_back({u, v, anchor});
      }
    }
    if (candidates.size() > options.max_pairs_per_anchor) {
      std::sample(candidates.begin(), candidates.end(), std::back_inserter(pairing.pairs),
                  options.max_pairs_per_anchor, rng);
    } else {
      pairing.pairs.insert(pairing.pairs.end(), candidates.begin(), candidates.end());
    }
  }
  return pairing;
}

PairRows pair_rows(const HeteroSnapshot& prev, const HeteroSnapshot& cur, const MetaPath& mp,
                   const AnchorPairing& pairing) {
  PairRows rows;
  rows.prev_rows.reserve(pairing.pairs.size());
  rows.cur_rows.reserve(pairing.pairs.size());
  for (const AnchorPair& pr : pairing.pairs) {
    const auto a = prev.type_row(pr.prev_endpoint);
    const auto b = cur.type_row(pr.cur_endpoint);
    if (!a || prev.node(pr.prev_endpoint).node_type != mp.head_type()) {
      throw GraphError("pair endpoint " + std::to_string(pr.prev_endpoint) +
                       " is not a head-type node of the previous snapshot");
    }
    if (!b || cur.node(pr.cur_endpoint).node_type != mp.tail_type()) {
      throw GraphError("pair endpoint " + std::to_string(pr.cur_endpoint) +
                       " is not a tail-type node of the current snapshot");
    }
    rows.prev_rows.push_back(*a);
    rows.cur_rows.push_back(*b);
  }
  return rows;
}

std::pair<DenseMatrix, DenseMatrix> sample_pair_matrices(const DenseMatrix& prev_embedding,
                                                         const DenseMatrix& cur_embedding,
                                                         const PairRows& rows) {
  if (rows.prev_rows.size() != rows.cur_rows.size()) {
    throw ShapeError("pair row lists differ in length");
  }
  std::pair<DenseMatrix, DenseMatrix> out;
  gather_rows(prev_embedding, rows.prev_rows, out.first, "previous");
  gather_rows(cur_embedding, rows.cur_rows, out.second, "current");
  return out;
}

}  // namespace htgcn
