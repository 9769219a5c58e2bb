#include "htgcn/objective.hpp"

#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "htgcn/errors.hpp"

namespace htgcn {

namespace {

double safe_prob(double p) { return std::max(p, DBL_MIN); }

}  // namespace

PermutationLoss perm_ce_loss(ad::Value probs, std::span<const int> labels, int classes) {
  if (classes < 1) throw ConfigError("classes", "must be positive");
  if (classes > kMaxPermutationClasses) {
    throw ConfigError("classes", std::to_string(classes) +
                                     " communities exceed the brute-force limit of " +
                                     std::to_string(kMaxPermutationClasses) +
                                     "; label grouping for large C is not supported");
  }
  const DenseMatrix& p = probs.data();
  if (p.cols() != static_cast<std::size_t>(classes) || p.rows() != labels.size()) {
    throw ShapeError("perm_ce_loss: probabilities " + p.shape_string() + " with " +
                     std::to_string(labels.size()) + " labels and " + std::to_string(classes) +
                     " classes");
  }

  // cost[c][k]: loss contributed by nodes of true class c if c is scored as column k.
  const auto C = static_cast<std::size_t>(classes);
  std::vector<double> cost(C * C, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c < 0) continue;
    if (c >= classes) {
      throw ConfigError("labels", "label " + std::to_string(c) + " at row " + std::to_string(i) +
                                      " is not below " + std::to_string(classes));
    }
    for (std::size_t k = 0; k < C; ++k)
      cost[static_cast<std::size_t>(c) * C + k] -= std::log(safe_prob(p(i, k)));
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_perm;
  for_each_permutation(classes, [&](const std::vector<int>& perm) {
    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c) total += cost[c * C + static_cast<std::size_t>(perm[c])];
    if (total < best) {
      best = total;
      best_perm = perm;
    }
  });

  std::vector<int> lab(labels.begin(), labels.end());
  ad::Value loss = probs.tape().record(
      "perm_ce_loss", DenseMatrix(1, 1, best), {probs},
      [lab = std::move(lab), perm = best_perm](const ad::BackwardContext& c) {
        const double g = c.output_grad(0, 0);
        const DenseMatrix& pr = *c.inputs[0];
        DenseMatrix& gp = *c.input_grads[0];
        for (std::size_t i = 0; i < lab.size(); ++i) {
          if (lab[i] < 0) continue;
          const auto k = static_cast<std::size_t>(perm[static_cast<std::size_t>(lab[i])]);
          if (pr(i, k) > DBL_MIN) gp(i, k) -= g / pr(i, k);
        }
      });
  return {loss, best_perm};
}

}  // namespace htgcn
