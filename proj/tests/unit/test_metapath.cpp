#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "htgcn/datagen.hpp"
#include "htgcn/errors.hpp"
#include "htgcn/metapath.hpp"
#include "oracles.hpp"

using namespace htgcn;

namespace {

// papers are type 0, authors type 1, "writes" is edge type 0
NodeRecord paper(NodeId id) { return {id, 0, {static_cast<double>(id)}, std::nullopt}; }
NodeRecord author(NodeId id) { return {id, 1, {-static_cast<double>(id)}, std::nullopt}; }

const MetaPath kPap = MetaPath::parse("0-0-1-0-0");

TemporalSeries seed7_series() {
  GenConfig cfg;
  cfg.nodes_per_type = {24, 10, 4};
  cfg.p_in = 0.3;
  cfg.p_out = 0.05;
  cfg.time_steps = 2;
  cfg.feature_dim = 3;
  cfg.seed = 7;
  return generate_series(cfg);
}

// (u, a, v) by a double loop over the edge list.
std::set<PathInstance> join_oracle(const HeteroSnapshot& g, const MetaPath& mp) {
  std::set<PathInstance> out;
  auto ends = [&](const EdgeRecord& e, NodeId& far, NodeId& mid, TypeTag end_type) {
    for (int flip = 0; flip < 2; ++flip) {
      const NodeId x = flip ? e.dst : e.src;
      const NodeId y = flip ? e.src : e.dst;
      if (g.node(x).node_type == end_type && g.node(y).node_type == mp.anchor_type()) {
        far = x;
        mid = y;
        return true;
      }
    }
    return false;
  };
  for (const auto& e1 : g.edges()) {
    if (e1.edge_type != mp.edge_types[0]) continue;
    NodeId u = 0, a1 = 0;
    if (!ends(e1, u, a1, mp.head_type())) continue;
    for (const auto& e2 : g.edges()) {
      if (e2.edge_type != mp.edge_types[1]) continue;
      NodeId v = 0, a2 = 0;
      if (!ends(e2, v, a2, mp.tail_type())) continue;
      if (a1 == a2) out.insert({u, a1, v});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("meta-path parsing") {
  CHECK(kPap.node_types == std::vector<TypeTag>{0, 1, 0});
  CHECK(kPap.edge_types == std::vector<TypeTag>{0, 0});
  CHECK(kPap.to_string() == "0-0-1-0-0");
  const auto list = MetaPath::parse_list("0-0-1-0-0,0-1-2-1-0");
  REQUIRE(list.size() == 2);
  CHECK(list[1].anchor_type() == 2);
  CHECK_THROWS_AS(MetaPath::parse("0-0"), ConfigError);
  CHECK_THROWS_AS(MetaPath::parse("0-x-1"), ConfigError);
  CHECK_THROWS_AS(MetaPath::parse("0--1"), ConfigError);
  CHECK_THROWS_AS(MetaPath::parse("0-1-2-3"), ConfigError);
}

TEST_CASE("enumerate_instances") {
  SUBCASE("no middle-type nodes") {
    const HeteroSnapshot g(1, 2, 1, {paper(1), paper(2)}, {});
    CHECK(enumerate_instances(g, kPap).empty());
  }
  SUBCASE("one author with two papers") {
    const HeteroSnapshot g(1, 2, 1, {paper(1), paper(2), author(10)}, {{1, 10, 0}, {2, 10, 0}});
    auto inst = enumerate_instances(g, kPap);
    std::sort(inst.begin(), inst.end());
    const std::vector<PathInstance> expected{{1, 10, 1}, {1, 10, 2}, {2, 10, 1}, {2, 10, 2}};
    CHECK(inst == expected);
  }
  SUBCASE("invalid tags") {
    const HeteroSnapshot g(1, 2, 1, {paper(1), author(10)}, {});
    CHECK_THROWS_AS(enumerate_instances(g, MetaPath::parse("0-0-3-0-0")), UnknownTypeError);
    CHECK_THROWS_AS(enumerate_instances(g, MetaPath::parse("0-2-1-0-0")), UnknownTypeError);
    CHECK_THROWS_AS(enumerate_instances(g, MetaPath::parse("0-0-1-0-0-0-1")), ConfigError);
  }
  SUBCASE("seed-7 snapshot matches the edge-join oracle and is symmetric") {
    const auto series = seed7_series();
    for (const auto& mp : MetaPath::parse_list("0-0-1-0-0,0-1-2-1-0,1-2-2-2-1")) {
      const auto inst = enumerate_instances(series[0], mp);
      const std::set<PathInstance> got(inst.begin(), inst.end());
      CHECK(got.size() == inst.size());
      CHECK(got == join_oracle(series[0], mp));
      for (const auto& p : got) CHECK(got.contains({p.tail, p.anchor, p.head}));
    }
  }
}

TEST_CASE("shared_anchors") {
  std::mt19937_64 rng(1);
  SUBCASE("disjoint id sets give an empty pairing") {
    const HeteroSnapshot a(1, 2, 1, {paper(1), author(10)}, {{1, 10, 0}});
    const HeteroSnapshot b(2, 2, 1, {paper(2), author(11)}, {{2, 11, 0}});
    const auto pairing = shared_anchors(a, b, kPap, {}, rng);
    CHECK(pairing.anchor_ids.empty());
    CHECK(pairing.pairs.empty());
  }
  SUBCASE("one retained author, one paper before and two after") {
    const HeteroSnapshot a(1, 2, 1, {paper(1), author(10)}, {{1, 10, 0}});
    const HeteroSnapshot b(2, 2, 1, {paper(2), paper(3), author(10)}, {{2, 10, 0}, {3, 10, 0}});
    const auto pairing = shared_anchors(a, b, kPap, {}, rng);
    CHECK(pairing.anchor_ids == std::vector<NodeId>{10});
    CHECK(pairing.pairs == std::vector<AnchorPair>{{1, 2, 10}, {1, 3, 10}});
  }
  SUBCASE("self pairs are dropped unless requested") {
    const HeteroSnapshot a(1, 2, 1, {paper(1), author(10)}, {{1, 10, 0}});
    const HeteroSnapshot b(2, 2, 1, {paper(1), paper(3), author(10)}, {{1, 10, 0}, {3, 10, 0}});
    CHECK(shared_anchors(a, b, kPap, {}, rng).pairs == std::vector<AnchorPair>{{1, 3, 10}});
    PairingOptions keep;
    keep.keep_self_pairs = true;
    CHECK(shared_anchors(a, b, kPap, keep, rng).pairs.size() == 2);
  }
  SUBCASE("non-consecutive snapshots") {
    const HeteroSnapshot a(1, 2, 1, {paper(1), author(10)}, {});
    const HeteroSnapshot b(3, 2, 1, {paper(1), author(10)}, {});
    CHECK_THROWS_AS(shared_anchors(a, b, kPap, {}, rng), GraphError);
    CHECK_THROWS_AS(shared_anchors(b, a, kPap, {}, rng), GraphError);
  }
  SUBCASE("anchor changing type is not retained") {
    const HeteroSnapshot a(1, 2, 1, {paper(1), paper(10)}, {});
    const HeteroSnapshot b(2, 2, 1, {paper(1), author(10)}, {{1, 10, 0}});
    CHECK(shared_anchors(a, b, kPap, {}, rng).anchor_ids.empty());
  }
}

TEST_CASE("shared_anchors of a snapshot with itself keeps every middle-type node") {
  const auto series = seed7_series();
  const auto& g = series[0];
  PairingOptions opts;
  opts.require_consecutive = false;
  std::mt19937_64 rng(4);
  for (const auto& mp : MetaPath::parse_list("0-0-1-0-0,0-1-2-1-0")) {
    const auto pairing = shared_anchors(g, g, mp, opts, rng);
    std::vector<NodeId> all;
    for (std::size_t p : g.nodes_of_type(mp.anchor_type())) all.push_back(g.nodes()[p].id);
    std::sort(all.begin(), all.end());
    CHECK(pairing.anchor_ids == all);
  }
}

TEST_CASE("seed-7 pairing matches a brute-force intersection oracle") {
  const auto series = seed7_series();
  const auto& prev = series[0];
  const auto& cur = series[1];
  for (const auto& mp : MetaPath::parse_list("0-0-1-0-0,0-1-2-1-0")) {
    PairingOptions opts;
    opts.max_pairs_per_anchor = 1000000;  // no subsampling
    std::mt19937_64 rng(9);
    const auto pairing = shared_anchors(prev, cur, mp, opts, rng);

    // oracle from the enumerated instances of each snapshot
    std::map<NodeId, std::set<NodeId>> heads, tails;
    for (const auto& p : join_oracle(prev, mp)) heads[p.anchor].insert(p.head);
    for (const auto& p : join_oracle(cur, mp)) tails[p.anchor].insert(p.tail);
    std::vector<AnchorPair> expected;
    for (const auto& [anchor, hs] : heads) {
      if (!tails.contains(anchor)) continue;
      for (NodeId u : hs)
        for (NodeId v : tails[anchor])
          if (u != v) expected.push_back({u, v, anchor});
    }
    CHECK(pairing.pairs == expected);
    for (const auto& pr : pairing.pairs) {
      CHECK(prev.node(pr.prev_endpoint).node_type == mp.tail_type());
      CHECK(cur.node(pr.cur_endpoint).node_type == mp.tail_type());
      CHECK(prev.node(pr.anchor).node_type == mp.anchor_type());
      CHECK(cur.node(pr.anchor).node_type == mp.anchor_type());
    }
  }
}

TEST_CASE("pair cap subsamples deterministically and keeps order") {
  // one author with 8 distinct papers on each side: 64 candidate pairs
  std::vector<NodeRecord> a_nodes{author(100)}, b_nodes{author(100)};
  std::vector<EdgeRecord> a_edges, b_edges;
  for (NodeId i = 0; i < 8; ++i) {
    a_nodes.push_back(paper(i));
    a_edges.push_back({i, 100, 0});
    b_nodes.push_back(paper(i + 50));
    b_edges.push_back({i + 50, 100, 0});
  }
  const HeteroSnapshot a(1, 2, 1, a_nodes, a_edges);
  const HeteroSnapshot b(2, 2, 1, b_nodes, b_edges);
  PairingOptions opts;
  opts.max_pairs_per_anchor = 10;
  std::mt19937_64 r1(3), r2(3), r3(4);
  const auto p1 = shared_anchors(a, b, kPap, opts, r1).pairs;
  const auto p2 = shared_anchors(a, b, kPap, opts, r2).pairs;
  const auto p3 = shared_anchors(a, b, kPap, opts, r3).pairs;
  CHECK(p1.size() == 10);
  CHECK(p1 == p2);
  CHECK(p1 != p3);
  CHECK(std::is_sorted(p1.begin(), p1.end(), [](const AnchorPair& x, const AnchorPair& y) {
    return std::tie(x.anchor, x.prev_endpoint, x.cur_endpoint) <
           std::tie(y.anchor, y.prev_endpoint, y.cur_endpoint);
  }));
}

TEST_CASE("sample_pair_matrices") {
  std::mt19937_64 rng(2);
  const DenseMatrix z = oracle::random_matrix(5, 3, rng);
  const DenseMatrix x = oracle::random_matrix(4, 3, rng);

  SUBCASE("empty pairing") {
    const auto [zp, xc] = sample_pair_matrices(z, x, {});
    CHECK(zp.rows() == 0);
    CHECK(zp.cols() == 3);
    CHECK(xc.rows() == 0);
  }
  SUBCASE("single pair copies rows verbatim") {
    const auto [zp, xc] = sample_pair_matrices(z, x, {{4}, {1}});
    CHECK(std::equal(zp.row(0).begin(), zp.row(0).end(), z.row(4).begin()));
    CHECK(std::equal(xc.row(0).begin(), xc.row(0).end(), x.row(1).begin()));
  }
  SUBCASE("out-of-range rows and mismatched lists") {
    CHECK_THROWS_AS(sample_pair_matrices(z, x, {{5}, {0}}), GraphError);
    CHECK_THROWS_AS(sample_pair_matrices(z, x, {{0}, {4}}), GraphError);
    CHECK_THROWS_AS(sample_pair_matrices(z, x, {{0, 1}, {0}}), ShapeError);
  }
  SUBCASE("seed-7 pairing matches an index-lookup oracle") {
    const auto series = seed7_series();
    const auto& prev = series[0];
    const auto& cur = series[1];
    std::mt19937_64 prng(1);
    const auto pairing = shared_anchors(prev, cur, kPap, {}, prng);
    const auto rows = pair_rows(prev, cur, kPap, pairing);
    const DenseMatrix zprev = prev.feature_matrix(0);
    const DenseMatrix xcur = cur.feature_matrix(0);
    const auto [zp, xc] = sample_pair_matrices(zprev, xcur, rows);
    REQUIRE(zp.rows() == pairing.pairs.size());
    REQUIRE(xc.rows() == pairing.pairs.size());
    for (std::size_t p = 0; p < pairing.pairs.size(); ++p) {
      const auto& f_prev = prev.node(pairing.pairs[p].prev_endpoint).features;
      const auto& f_cur = cur.node(pairing.pairs[p].cur_endpoint).features;
      CHECK(std::equal(f_prev.begin(), f_prev.end(), zp.row(p).begin()));
      CHECK(std::equal(f_cur.begin(), f_cur.end(), xc.row(p).begin()));
    }
  }
}
