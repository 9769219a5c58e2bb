#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "htgcn/hetero_graph.hpp"

namespace htgcn {

// Temporal heterogeneous stochastic block model.
//
// Every node carries a hidden community; only `labeled_type` exposes it as a
// label. Edge type e joins the e-th node-type pair in lexicographic order
// ((0,1), (0,2), (1,2), (0,3), ...), and each cross-type pair of nodes is
// joined with p_in when their communities agree and p_out otherwise. Between
// steps a churn_rate fraction of each type is replaced by fresh ids and a
// migration_rate fraction of the survivors switches community.
struct GenConfig {
  int node_type_count = 3;
  int edge_type_count = 3;
  int community_count = 3;
  std::vector<std::size_t> nodes_per_type{300, 100, 12};
  int time_steps = 3;
  double p_in = 0.2;
  double p_out = 0.01;
  double churn_rate = 0.1;
  double migration_rate = 0.05;
  std::size_t feature_dim = 16;
  double feature_noise = 1.0;
  TypeTag labeled_type = 0;
  std::uint64_t seed = 7;

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

// Node-type pair joined by each edge type.
std::vector<std::pair<TypeTag, TypeTag>> edge_type_pairs(int node_type_count, int edge_type_count);

TemporalSeries generate_series(const GenConfig& cfg);

}  // namespace htgcn
