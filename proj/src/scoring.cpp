#include "uplift/scoring.hpp"

#include <cmath>

namespace uplift {
namespace {

double accumulate_score(const Node& node, TreeForm form, const ScoreParams& params) {
  if (!node.is_leaf()) {
    double total = 0.0;
    for (const auto& child : node.children) total += accumulate_score(child, form, params);
    return total;
  }
  if (form == TreeForm::kForced) return forced_leaf_log_score(node.counts, params);
  return leaf_log_score(node.counts.pooled(), params);
}

}  // namespace

void ScoreParams::validate() const {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw Error("structure prior kappa must lie in (0, 1]");
}

double ScoreParams::log_kappa() const { return std::log(kappa); }

double leaf_log_marginal(const OutcomeCounts& c) {
  const auto yes = static_cast<double>(c.yes);
  const auto no = static_cast<double>(c.no);
  return std::lgamma(yes + 1.0) + std::lgamma(no + 1.0) - std::lgamma(yes + no + 2.0);
}

double leaf_log_score(const OutcomeCounts& c, const ScoreParams& params) {
  return leaf_log_marginal(c) + params.log_kappa();
}

// Same summation order as the two leaves of the materialized M split, so the
// forced score of a tree equals the score of its materialization bit for bit.
double forced_leaf_log_score(const CrossTab& c, const ScoreParams& params) {
  const double m0 = leaf_log_score(c.not_mailed, params);
  const double m1 = leaf_log_score(c.mailed, params);
  return m0 + m1;
}

double tree_log_score(const Tree& tree, const ScoreParams& params) {
  params.validate();
  return accumulate_score(tree.root(), tree.form(), params);
}

double split_delta(const OutcomeCounts& parent, std::span<const OutcomeCounts> children,
                   const ScoreParams& params) {
  OutcomeCounts sum;
  double after = 0.0;
  for (const auto& c : children) {
    sum += c;
    after += leaf_log_score(c, params);
  }
  if (sum != parent) throw Error("child counts do not sum to the parent counts");
  return after - leaf_log_score(parent, params);
}

double split_delta(const CrossTab& parent, std::span<const CrossTab> children,
                   const ScoreParams& params) {
  CrossTab sum;
  double after = 0.0;
  for (const auto& c : children) {
    sum += c;
    after += forced_leaf_log_score(c, params);
  }
  if (sum != parent) throw Error("child counts do not sum to the parent counts");
  return after - forced_leaf_log_score(parent, params);
}

}  // namespace uplift
