#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uplift/data.hpp"

namespace uplift {

/// Either a predictor (by schema index) or the treatment variable M.
class VariableRef {
 public:
  static constexpr VariableRef predictor(std::size_t j) { return VariableRef(j); }
  static constexpr VariableRef treatment() { return VariableRef(kTreatment); }

  constexpr bool is_treatment() const { return index_ == kTreatment; }
  constexpr std::size_t predictor_index() const { return index_; }

  /// Position in the learner's tie-break order: predictors first, then M.
  constexpr std::size_t order(const Schema& schema) const {
    return is_treatment() ? schema.num_predictors() : index_;
  }

  const VariableSpec& spec(const Schema& schema) const;

  friend constexpr bool operator==(const VariableRef&, const VariableRef&) = default;

 private:
  static constexpr std::size_t kTreatment = static_cast<std::size_t>(-1);
  constexpr explicit VariableRef(std::size_t index) : index_(index) {}
  std::size_t index_;
};

enum class SplitKind { kComplete, kBinary };

/// Complete splits send value v to child v. Binary splits send the
/// singled-out value to child 0 and every other value to child 1.
struct SplitRule {
  VariableRef variable = VariableRef::treatment();
  SplitKind kind = SplitKind::kComplete;
  ValueIndex value = 0;

  static SplitRule complete(VariableRef v) { return {v, SplitKind::kComplete, 0}; }
  static SplitRule binary(VariableRef v, ValueIndex singled_out) {
    return {v, SplitKind::kBinary, singled_out};
  }

  std::size_t num_children(const Schema& schema) const;
  std::size_t child_for(ValueIndex v) const {
    if (kind == SplitKind::kBinary) return v == value ? 0 : 1;
    return v;
  }

  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

/// Internal nodes carry a rule and children; leaves have neither. Every node
/// records the training counts that reached it.
struct Node {
  std::optional<SplitRule> rule;
  std::vector<Node> children;
  CrossTab counts;

  bool is_leaf() const { return !rule.has_value(); }

  static Node leaf(const CrossTab& counts) { return Node{std::nullopt, {}, counts}; }
  /// Internal node whose counts are the sum of its children's.
  static Node split(const SplitRule& rule, std::vector<Node> children);

  friend bool operator==(const Node&, const Node&) = default;
};

/// In forced form M never appears as an explicit split: each leaf stands for
/// an implicit complete split on M and predicts from its M-conditional cell.
enum class TreeForm { kStandard, kForced };

std::string_view to_string(TreeForm form);

enum class Estimator { kPosteriorMean, kMaximumLikelihood };

/// p(s1) from outcome counts. Posterior mean under a uniform prior is
/// (yes + 1) / (n + 2); the maximum-likelihood fraction is 0.5 on empty data.
double probability_yes(const OutcomeCounts& c, Estimator estimator = Estimator::kPosteriorMean);

class Tree {
 public:
  /// Throws uplift::Error if the structure is inconsistent with the schema or form.
  Tree(Schema schema, Node root, TreeForm form);

  const Schema& schema() const { return schema_; }
  const Node& root() const { return root_; }
  TreeForm form() const { return form_; }

  const Node& traverse(std::span<const ValueIndex> x, Treatment m) const;

  /// Probability of S = s1 for predictors x under treatment m.
  double predict(std::span<const ValueIndex> x, Treatment m,
                 Estimator estimator = Estimator::kPosteriorMean) const;

  std::size_t num_leaves() const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  Schema schema_;
  Node root_;
  TreeForm form_;
};

/// Probability a leaf assigns to s1 under treatment m, honoring the tree form.
double leaf_probability(const Node& leaf, TreeForm form, Treatment m,
                        Estimator estimator = Estimator::kPosteriorMean);

/// Replaces every leaf of a forced tree with a complete split on M whose two
/// leaves hold the M-conditional counts.
Tree materialize_m_splits(const Tree& forced);

/// Leaves in pre-order.
std::vector<const Node*> leaves(const Node& root);

/// JSON tree file. `metadata` entries are written under "metadata" and ignored on load.
std::string serialize(const Tree& tree, const std::map<std::string, std::string>& metadata = {});
Tree deserialize(std::string_view bytes);
/// As above, and rejects a file whose schema fingerprint differs from `expected`.
Tree deserialize(std::string_view bytes, const Schema& expected);

}  // namespace uplift
