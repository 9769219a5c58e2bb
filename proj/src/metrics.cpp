#include "htgcn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "htgcn/errors.hpp"
#include "htgcn/objective.hpp"

namespace htgcn {

namespace {

void check_pair(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError("metric inputs differ in length: " + std::to_string(pred.size()) + " vs " +
                     std::to_string(truth.size()));
  }
  if (pred.empty()) throw ShapeError("metric inputs are empty");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || truth[i] < 0) {
      throw ShapeError("metric inputs must be non-negative labels (index " + std::to_string(i) +
                       ")");
    }
  }
}

int class_count(std::span<const int> pred, std::span<const int> truth) {
  return 1 + std::max(*std::max_element(pred.begin(), pred.end()),
                      *std::max_element(truth.begin(), truth.end()));
}

double entropy(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    const double p = c / n;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

std::vector<int> best_alignment(std::span<const int> pred, std::span<const int> truth) {
  check_pair(pred, truth);
  const int k = class_count(pred, truth);
  if (k > kMaxPermutationClasses) {
    throw ConfigError("classes", std::to_string(k) + " clusters exceed the alignment limit of " +
                                     std::to_string(kMaxPermutationClasses));
  }
  const auto K = static_cast<std::size_t>(k);
  std::vector<long> agree(K * K, 0);  // agree[pred * K + truth]
  for (std::size_t i = 0; i < pred.size(); ++i)
    ++agree[static_cast<std::size_t>(pred[i]) * K + static_cast<std::size_t>(truth[i])];

  long best = -1;
  std::vector<int> best_perm;
  for_each_permutation(k, [&](const std::vector<int>& perm) {
    long total = 0;
    for (std::size_t c = 0; c < K; ++c) total += agree[c * K + static_cast<std::size_t>(perm[c])];
    if (total > best) {
      best = total;
      best_perm = perm;
    }
  });
  return best_perm;
}

std::vector<int> apply_alignment(std::span<const int> pred, std::span<const int> alignment) {
  std::vector<int> out(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    out[i] = alignment[static_cast<std::size_t>(pred[i])];
  return out;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  const auto aligned = apply_alignment(pred, best_alignment(pred, truth));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += aligned[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double nmi(std::span<const int> pred, std::span<const int> truth) {
  check_pair(pred, truth);
  const auto n = static_cast<double>(pred.size());
  std::map<int, double> a, b;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    a[pred[i]] += 1.0;
    b[truth[i]] += 1.0;
    joint[{pred[i], truth[i]}] += 1.0;
  }
  double mi = 0.0;
  for (const auto& [key, nij] : joint)
    mi += nij / n * std::log(n * nij / (a[key.first] * b[key.second]));
  const double denom = 0.5 * (entropy(a, n) + entropy(b, n));
  if (denom <= 0.0) return 0.0;
  return std::clamp(mi / denom, 0.0, 1.0);
}

double ari(std::span<const int> pred, std::span<const int> truth) {
  check_pair(pred, truth);
  std::map<int, double> a, b;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    a[pred[i]] += 1.0;
    b[truth[i]] += 1.0;
    joint[{pred[i], truth[i]}] += 1.0;
  }
  double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [_, c] : joint) sum_joint += choose2(c);
  for (const auto& [_, c] : a) sum_a += choose2(c);
  for (const auto& [_, c] : b) sum_b += choose2(c);
  const double total = choose2(static_cast<double>(pred.size()));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (sum_joint - expected) / denom;
}

double macro_f1(std::span<const int> pred, std::span<const int> truth) {
  const auto aligned = apply_alignment(pred, best_alignment(pred, truth));
  std::map<int, double> tp, fp, fn;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    tp[truth[i]];
    tp[aligned[i]];
    if (aligned[i] == truth[i]) {
      tp[truth[i]] += 1.0;
    } else {
      fp[aligned[i]] += 1.0;
      fn[truth[i]] += 1.0;
    }
  }
  double sum = 0.0;
  for (const auto& [c, t] : tp) {
    const double denom = 2.0 * t + fp[c] + fn[c];
    sum += denom > 0.0 ? 2.0 * t / denom : 0.0;
  }
  return sum / static_cast<double>(tp.size());
}

double micro_f1(std::span<const int> pred, std::span<const int> truth) {
  // Single-label: pooled precision = pooled recall = aligned accuracy.
  return accuracy(pred, truth);
}

double modularity(const DenseMatrix& adjacency, std::span<const int> labels) {
  if (adjacency.rows() != adjacency.cols() || adjacency.rows() != labels.size()) {
    throw ShapeError("modularity: adjacency " + adjacency.shape_string() + " with " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = labels.size();
  std::vector<double> degree(n, 0.0);
  double two_m = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    for (double v : adjacency.row(u)) degree[u] += v;
    two_m += degree[u];
  }
  if (two_m <= 0.0) throw GraphError("modularity: graph has no edges");

  std::map<int, double> internal, total_degree;
  for (std::size_t u = 0; u < n; ++u) {
    total_degree[labels[u]] += degree[u];
    for (std::size_t v = 0; v < n; ++v)
      if (labels[u] == labels[v]) internal[labels[u]] += adjacency(u, v);
  }
  double q = 0.0;
  for (const auto& [c, k] : total_degree) q += internal[c] / two_m - (k / two_m) * (k / two_m);
  return q;
}

double modularity(const HeteroSnapshot& snapshot, TypeTag target_type,
                  std::span<const int> pred_labels) {
  return modularity(collapse_adjacency(snapshot, target_type), pred_labels);
}

double round_percent(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

nlohmann::ordered_json MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["ACC"] = round_percent(acc);
  j["NMI"] = round_percent(nmi);
  j["Modularity"] = round_percent(modularity);
  j["ARI"] = round_percent(ari);
  j["Macro-F1"] = round_percent(macro_f1);
  j["Micro-F1"] = round_percent(micro_f1);
  return j;
}

MetricReport evaluate_partition(std::span<const int> pred, std::span<const int> truth,
                                double modularity_value) {
  MetricReport r;
  r.acc = accuracy(pred, truth);
  r.nmi = nmi(pred, truth);
  r.modularity = modularity_value;
  r.ari = ari(pred, truth);
  r.macro_f1 = macro_f1(pred, truth);
  r.micro_f1 = micro_f1(pred, truth);
  return r;
}

}  // namespace htgcn
