#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "htgcn/autodiff.hpp"

namespace htgcn {

// Largest community count the brute-force permutation search accepts.
inline constexpr int kMaxPermutationClasses = 8;

struct PermutationLoss {
  ad::Value loss;                // 1 x 1
  std::vector<int> permutation;  // ground-truth label c is scored against column permutation[c]
};

// min over permutations pi of -sum_i log probs[i, pi(labels[i])].
// labels has one entry per row of probs; rows with label -1 are skipped. The
// minimizing permutation is held fixed in the backward pass, and ties go to the
// lexicographically first permutation.
PermutationLoss perm_ce_loss(ad::Value probs, std::span<const int> labels, int classes);

// Calls f(perm) for every permutation of {0..n-1} in lexicographic order.
template <typename F>
void for_each_permutation(int n, F&& f) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    f(static_cast<const std::vector<int>&>(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace htgcn
