#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "htgcn/hetero_graph.hpp"

namespace htgcn {

// Maps each predicted cluster to a ground-truth label so that the number of
// agreements is maximal (brute force over permutations, at most 8 clusters).
// Returns alignment[pred] = label.
std::vector<int> best_alignment(std::span<const int> pred, std::span<const int> truth);
std::vector<int> apply_alignment(std::span<const int> pred, std::span<const int> alignment);

// ACC and both F1 scores align predictions first. NMI uses arithmetic-mean
// normalization and is 0 when both entropies vanish. ARI is 1 when its
// denominator vanishes (both partitions trivial).
double accuracy(std::span<const int> pred, std::span<const int> truth);
double nmi(std::span<const int> pred, std::span<const int> truth);
double ari(std::span<const int> pred, std::span<const int> truth);
double macro_f1(std::span<const int> pred, std::span<const int> truth);
double micro_f1(std::span<const int> pred, std::span<const int> truth);

// Newman-Girvan modularity of a labeling of all target-type nodes on the
// collapsed adjacency (edge multiplicities act as weights).
double modularity(const DenseMatrix& adjacency, std::span<const int> labels);
double modularity(const HeteroSnapshot& snapshot, TypeTag target_type,
                  std::span<const int> pred_labels);

struct MetricReport {
  double acc = 0.0;
  double nmi = 0.0;
  double modularity = 0.0;
  double ari = 0.0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;

  // {"ACC": 98.93, "NMI": ..., "Modularity": ..., "ARI": ..., "Macro-F1": ..., "Micro-F1": ...}
  // as percentages rounded to two decimals.
  nlohmann::ordered_json to_json() const;
};

// All six criteria; `modularity_value` is computed separately because it needs
// the full graph rather than the evaluated subset.
MetricReport evaluate_partition(std::span<const int> pred, std::span<const int> truth,
                                double modularity_value);

double round_percent(double fraction);

}  // namespace htgcn
