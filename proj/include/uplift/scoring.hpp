#pragma once

#include <span>

#include "uplift/tree.hpp"
#include "uplift/types.hpp"

namespace uplift {

/// Bayesian score settings: uniform Beta(1,1) parameter prior and a structure
/// prior of kappa^K, K the number of free parameters.
struct ScoreParams {
  double kappa = 0.001;

  void validate() const;
  double log_kappa() const;
};

/// log of the Beta(1,1)-Bernoulli marginal likelihood, yes! no! / (yes + no + 1)!.
double leaf_log_marginal(const OutcomeCounts& c);

/// One leaf's contribution to a standard tree: marginal plus one parameter.
double leaf_log_score(const OutcomeCounts& c, const ScoreParams& params);

/// Leaf of a forced tree, scored as if it split on M: both cells' marginals
/// plus two parameters.
double forced_leaf_log_score(const CrossTab& c, const ScoreParams& params);

/// Sum of leaf scores. Standard leaves use pooled counts; forced leaves use
/// forced_leaf_log_score.
double tree_log_score(const Tree& tree, const ScoreParams& params = {});

/// Change in tree score from replacing a leaf holding `parent` by leaves
/// holding `children`. Throws if the children do not sum to the parent.
double split_delta(const OutcomeCounts& parent, std::span<const OutcomeCounts> children,
                   const ScoreParams& params);
double split_delta(const CrossTab& parent, std::span<const CrossTab> children,
                   const ScoreParams& params);

}  // namespace uplift
