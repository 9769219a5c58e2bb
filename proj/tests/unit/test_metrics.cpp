#include <doctest.h>

#include <random>

#include "htgcn/datagen.hpp"
#include "htgcn/errors.hpp"
#include "htgcn/metrics.hpp"
#include "oracles.hpp"

using namespace htgcn;

namespace {

std::vector<int> random_labels(std::size_t n, int c, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, c - 1);
  std::vector<int> out(n);
  for (int& v : out) v = d(rng);
  return out;
}

DenseMatrix two_triangles() {
  DenseMatrix a(6, 6);
  auto link = [&](std::size_t i, std::size_t j) { a(i, j) = a(j, i) = 1.0; };
  link(0, 1), link(1, 2), link(0, 2), link(3, 4), link(4, 5), link(3, 5);
  return a;
}

}  // namespace

TEST_CASE("identical and permuted partitions") {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2, 2};
  CHECK(accuracy(truth, truth) == 1.0);
  CHECK(nmi(truth, truth) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ari(truth, truth) == 1.0);
  CHECK(macro_f1(truth, truth) == 1.0);
  CHECK(micro_f1(truth, truth) == 1.0);

  const std::vector<int> permuted{2, 2, 0, 0, 1, 1, 1};
  CHECK(accuracy(permuted, truth) == 1.0);
  CHECK(macro_f1(permuted, truth) == 1.0);
  CHECK(best_alignment(permuted, truth) == std::vector<int>{1, 2, 0});
  CHECK(apply_alignment(permuted, best_alignment(permuted, truth)) == truth);
}

TEST_CASE("6-point two-cluster case against the contingency oracle") {
  const std::vector<int> truth{0, 0, 0, 1, 1, 1};
  const std::vector<int> pred{0, 0, 1, 1, 1, 1};
  CHECK(std::abs(nmi(pred, truth) - oracle::contingency_nmi(pred, truth)) < 1e-12);
  CHECK(std::abs(ari(pred, truth) - oracle::pair_counting_ari(pred, truth)) < 1e-12);
  CHECK(accuracy(pred, truth) == doctest::Approx(5.0 / 6.0));
  // ARI by hand: index 4, expected 7 * 6 / 15, max (7 + 6) / 2
  CHECK(ari(pred, truth) == doctest::Approx((4.0 - 42.0 / 15.0) / (6.5 - 42.0 / 15.0)));
}

TEST_CASE("degenerate conventions") {
  const std::vector<int> one{0, 0, 0, 0};
  CHECK(nmi(one, one) == 0.0);
  CHECK(ari(one, one) == 1.0);
  CHECK(accuracy(one, one) == 1.0);
  CHECK_THROWS_AS(accuracy(std::vector<int>{0}, std::vector<int>{0, 1}), ShapeError);
  CHECK_THROWS_AS(nmi(std::vector<int>{}, std::vector<int>{}), ShapeError);
  CHECK_THROWS_AS(ari(std::vector<int>{-1}, std::vector<int>{0}), ShapeError);
  CHECK_THROWS_AS(accuracy(std::vector<int>{9}, std::vector<int>{0}), ConfigError);
}

TEST_CASE("metrics match independent oracles on random partitions") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int c = 2 + trial % 4;
    const std::size_t n = 10 + static_cast<std::size_t>(trial % 17);
    const auto truth = random_labels(n, c, rng);
    const auto pred = random_labels(n, c, rng);
    CHECK(std::abs(accuracy(pred, truth) - oracle::brute_accuracy(pred, truth)) < 1e-9);
    CHECK(std::abs(nmi(pred, truth) - oracle::contingency_nmi(pred, truth)) < 1e-9);
    CHECK(std::abs(ari(pred, truth) - oracle::pair_counting_ari(pred, truth)) < 1e-9);
    const auto [macro, micro] = oracle::aligned_f1(pred, truth);
    CHECK(std::abs(macro_f1(pred, truth) - macro) < 1e-9);
    CHECK(std::abs(micro_f1(pred, truth) - micro) < 1e-9);
    CHECK(micro_f1(pred, truth) == doctest::Approx(accuracy(pred, truth)));

    // aligned accuracy never loses to the identity labeling
    std::size_t raw = 0;
    for (std::size_t i = 0; i < n; ++i) raw += pred[i] == truth[i];
    CHECK(accuracy(pred, truth) >= static_cast<double>(raw) / static_cast<double>(n));

    // simultaneous reordering changes nothing
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> p2(n), t2(n);
    for (std::size_t i = 0; i < n; ++i) p2[i] = pred[order[i]], t2[i] = truth[order[i]];
    CHECK(accuracy(p2, t2) == accuracy(pred, truth));
    CHECK(std::abs(nmi(p2, t2) - nmi(pred, truth)) < 1e-12);
    CHECK(std::abs(ari(p2, t2) - ari(pred, truth)) < 1e-12);
  }
}

TEST_CASE("modularity") {
  const DenseMatrix a = two_triangles();
  CHECK(std::abs(modularity(a, std::vector<int>{0, 0, 0, 1, 1, 1}) - 0.5) < 1e-12);
  CHECK(std::abs(modularity(a, std::vector<int>(6, 0))) < 1e-12);
  CHECK_THROWS_AS(modularity(DenseMatrix(3, 3), std::vector<int>{0, 1, 2}), GraphError);
  CHECK_THROWS_AS(modularity(a, std::vector<int>{0, 1}), ShapeError);

  GenConfig cfg;
  cfg.nodes_per_type = {24, 10, 4};
  cfg.p_in = 0.3;
  cfg.p_out = 0.05;
  cfg.time_steps = 1;
  cfg.feature_dim = 2;
  cfg.seed = 7;
  const HeteroSnapshot g = generate_series(cfg)[0];
  const DenseMatrix collapsed = collapse_adjacency(g, 0);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto labels = random_labels(collapsed.rows(), 2 + trial % 4, rng);
    const double q = modularity(g, 0, labels);
    CHECK(std::abs(q - oracle::double_loop_modularity(collapsed, labels)) < 1e-12);
    CHECK(q >= -0.5);
    CHECK(q <= 1.0);
  }
}

TEST_CASE("metric report json") {
  MetricReport r;
  r.acc = 0.98934;
  r.nmi = 0.5;
  r.modularity = -0.01234;
  r.ari = 1.0;
  r.macro_f1 = 0.123456;
  r.micro_f1 = 0.98934;
  const auto j = r.to_json();
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"ACC", "NMI", "Modularity", "ARI", "Macro-F1", "Micro-F1"});
  CHECK(j["ACC"].get<double>() == 98.93);
  CHECK(j["Modularity"].get<double>() == -1.23);
  CHECK(j["Macro-F1"].get<double>() == 12.35);
  CHECK(round_percent(0.5) == 50.0);

  const std::vector<int> truth{0, 0, 1, 1};
  const auto rep = evaluate_partition(std::vector<int>{1, 1, 0, 0}, truth, 0.25);
  CHECK(rep.acc == 1.0);
  CHECK(rep.modularity == 0.25);
}
