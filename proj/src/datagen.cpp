#include "htgcn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <random>

#include "htgcn/errors.hpp"

namespace htgcn {

namespace {

struct LiveNode {
  NodeId id;
  int community;
};

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void GenConfig::validate() const {
  if (node_type_count < 1) throw ConfigError("node_type_count", "must be >= 1");
  if (edge_type_count < 0) throw ConfigError("edge_type_count", "must be >= 0");
  if (node_type_count + edge_type_count <= 2) {
    throw ConfigError("edge_type_count", "node_type_count + edge_type_count must exceed 2");
  }
  if (edge_type_count > node_type_count * (node_type_count - 1) / 2) {
    throw ConfigError("edge_type_count", "at most one edge type per node-type pair (" +
                                             std::to_string(node_type_count *
                                                            (node_type_count - 1) / 2) +
                                             ")");
  }
  if (community_count < 1) throw ConfigError("community_count", "must be >= 1");
  if (nodes_per_type.size() != static_cast<std::size_t>(node_type_count)) {
    throw ConfigError("nodes_per_type", "needs one entry per node type");
  }
  if (time_steps < 1) throw ConfigError("time_steps", "must be >= 1");
  if (!is_probability(p_in)) throw ConfigError("p_in", "must lie in [0,1]");
  if (!is_probability(p_out)) throw ConfigError("p_out", "must lie in [0,1]");
  if (!(p_in > p_out)) throw ConfigError("p_in", "must exceed p_out");
  if (!(churn_rate >= 0.0 && churn_rate < 1.0)) throw ConfigError("churn_rate", "must lie in [0,1)");
  if (!(migration_rate >= 0.0 && migration_rate < 1.0)) {
    throw ConfigError("migration_rate", "must lie in [0,1)");
  }
  if (feature_dim == 0) throw ConfigError("feature_dim", "must be positive");
  if (!(feature_noise >= 0.0)) throw ConfigError("feature_noise", "must be non-negative");
  if (labeled_type < 0 || labeled_type >= node_type_count) {
    throw ConfigError("labeled_type", "must name an existing node type");
  }
}

std::vector<std::pair<TypeTag, TypeTag>> edge_type_pairs(int node_type_count,
                                                         int edge_type_count) {
  std::vector<std::pair<TypeTag, TypeTag>> pairs;
  for (TypeTag a = 0; a < node_type_count; ++a)
    for (TypeTag b = a + 1; b < node_type_count; ++b) pairs.emplace_back(a, b);
  pairs.resize(std::min<std::size_t>(pairs.size(), static_cast<std::size_t>(edge_type_count)));
  return pairs;
}

TemporalSeries generate_series(const GenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto C = cfg.community_count;
  const auto D = cfg.feature_dim;

  DenseMatrix means(static_cast<std::size_t>(C), D);
  for (double& v : means.values()) v = gauss(rng);

  NodeId next_id = 0;
  std::uniform_int_distribution<int> any_community(0, C - 1);
  std::vector<std::vector<LiveNode>> live(static_cast<std::size_t>(cfg.node_type_count));
  for (std::size_t type = 0; type < live.size(); ++type) {
    const std::size_t n = cfg.nodes_per_type[type];
    std::vector<int> communities(n);
    for (std::size_t i = 0; i < n; ++i) communities[i] = static_cast<int>(i % static_cast<std::size_t>(C));
    std::shuffle(communities.begin(), communities.end(), rng);
    for (std::size_t i = 0; i < n; ++i) live[type].push_back({next_id++, communities[i]});
  }

  const auto pairs = edge_type_pairs(cfg.node_type_count, cfg.edge_type_count);
  std::vector<HeteroSnapshot> snapshots;
  for (int t = 1; t <= cfg.time_steps; ++t) {
    if (t > 1) {
      for (auto& nodes : live) {
        std::vector<std::size_t> order(nodes.size());
        std::iota(order.begin(), order.end(), 0);
        const auto replaced = static_cast<std::size_t>(
            std::llround(cfg.churn_rate * static_cast<double>(nodes.size())));
        std::vector<std::size_t> gone;
        std::sample(order.begin(), order.end(), std::back_inserter(gone), replaced, rng);
        std::vector<char> fresh(nodes.size(), 0);
        for (std::size_t i : gone) {
          nodes[i] = {next_id++, any_community(rng)};
          fresh[i] = 1;
        }
        std::vector<std::size_t> survivors;
        for (std::size_t i = 0; i < nodes.size(); ++i)
          if (!fresh[i]) survivors.push_back(i);
        const auto movers = static_cast<std::size_t>(
            std::llround(cfg.migration_rate * static_cast<double>(survivors.size())));
        std::vector<std::size_t> moving;
        std::sample(survivors.begin(), survivors.end(), std::back_inserter(moving), movers, rng);
        if (C > 1) {
          std::uniform_int_distribution<int> shift(1, C - 1);
          for (std::size_t i : moving) nodes[i].community = (nodes[i].community + shift(rng)) % C;
        }
      }
    }

    std::vector<NodeRecord> records;
    for (std::size_t type = 0; type < live.size(); ++type) {
      for (const LiveNode& n : live[type]) {
        NodeRecord r;
        r.id = n.id;
        r.node_type = static_cast<TypeTag>(type);
        r.features.resize(D);
        for (std::size_t k = 0; k < D; ++k)
          r.features[k] = means(static_cast<std::size_t>(n.community), k) + cfg.feature_noise * gauss(rng);
        if (r.node_type == cfg.labeled_type) r.label = n.community;
        records.push_back(std::move(r));
      }
    }

    std::vector<EdgeRecord> edges;
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      const auto& as = live[static_cast<std::size_t>(pairs[e].first)];
      const auto& bs = live[static_cast<std::size_t>(pairs[e].second)];
      for (const LiveNode& a : as) {
        for (const LiveNode& b : bs) {
          const double p = a.community == b.community ? cfg.p_in : cfg.p_out;
          if (unit(rng) < p) {
            edges.push_back({std::min(a.id, b.id), std::max(a.id, b.id), static_cast<TypeTag>(e)});
          }
        }
      }
    }
    snapshots.emplace_back(t, cfg.node_type_count, cfg.edge_type_count, std::move(records),
                           std::move(edges));
  }
  return TemporalSeries(std::move(snapshots));
}

}  // namespace htgcn
