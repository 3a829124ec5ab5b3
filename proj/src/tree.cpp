#include "uplift/tree.hpp"

#include <fmt/format.h>

#include <array>

namespace uplift {
namespace {

struct PathState {
  std::vector<std::vector<bool>> predictors;
  std::array<bool, 2> treatment{true, true};
};

bool any(const std::vector<bool>& v) {
  for (bool b : v) {
    if (b) return true;
  }
  return false;
}

void validate_node(const Node& node, const Schema& schema, TreeForm form, const PathState& state) {
  if (!node.children.empty() && node.is_leaf()) throw Error("leaf node with children");
  if (node.is_leaf()) {
    if (!state.treatment[0] && node.counts.not_mailed.total() != 0) {
      throw Error("unmailed records below the mailed branch of an M split");
    }
    if (!state.treatment[1] && node.counts.mailed.total() != 0) {
      throw Error("mailed records below the unmailed branch of an M split");
    }
    return;
  }
  const SplitRule& rule = *node.rule;
  if (rule.variable.is_treatment()) {
    if (form == TreeForm::kForced) throw Error("forced-form tree contains an explicit M split");
  } else if (rule.variable.predictor_index() >= schema.num_predictors()) {
    throw Error("split on an unknown predictor");
  }
  const auto& spec = rule.variable.spec(schema);
  if (rule.kind == SplitKind::kBinary && rule.value >= spec.arity()) {
    throw Error(fmt::format("binary split value out of range for '{}'", spec.name));
  }
  if (node.children.size() != rule.num_children(schema)) {
    throw Error(fmt::format("split on '{}' has {} children, expected {}", spec.name,
                            node.children.size(), rule.num_children(schema)));
  }

  CrossTab sum;
  for (const auto& child : node.children) sum += child.counts;
  if (sum != node.counts) throw Error("internal node counts differ from the sum of its children");

  for (std::size_t c = 0; c < node.children.size(); ++c) {
    PathState next = state;
    if (rule.variable.is_treatment()) {
      for (std::size_t v = 0; v < 2; ++v)
        next.treatment[v] = next.treatment[v] && rule.child_for(static_cast<ValueIndex>(v)) == c;
      if (!next.treatment[0] && !next.treatment[1]) throw Error("vacuous re-split on M");
    } else {
      auto& allowed = next.predictors[rule.variable.predictor_index()];
      for (std::size_t v = 0; v < allowed.size(); ++v) {
        allowed[v] = allowed[v] && rule.child_for(static_cast<ValueIndex>(v)) == c;
      }
      if (!any(allowed)) throw Error(fmt::format("vacuous split on '{}'", spec.name));
    }
    validate_node(node.children[c], schema, form, next);
  }
}

void collect_leaves(const Node& node, std::vector<const Node*>& out) {
  if (node.is_leaf()) {
    out.push_back(&node);
    return;
  }
  for (const auto& child : node.children) collect_leaves(child, out);
}

Node materialize(const Node& node) {
  if (node.is_leaf()) {
    CrossTab m0;
    m0.not_mailed = node.counts.not_mailed;
    CrossTab m1;
    m1.mailed = node.counts.mailed;
    return Node::split(SplitRule::complete(VariableRef::treatment()),
                       {Node::leaf(m0), Node::leaf(m1)});
  }
  std::vector<Node> children;
  children.reserve(node.children.size());
  for (const auto& child : node.children) children.push_back(materialize(child));
  return Node{node.rule, std::move(children), node.counts};
}

}  // namespace

const VariableSpec& VariableRef::spec(const Schema& schema) const {
  return is_treatment() ? schema.treatment() : schema.predictor(index_);
}

std::size_t SplitRule::num_children(const Schema& schema) const {
  return kind == SplitKind::kBinary ? 2 : variable.spec(schema).arity();
}

Node Node::split(const SplitRule& rule, std::vector<Node> children) {
  CrossTab sum;
  for (const auto& c : children) sum += c.counts;
  return Node{rule, std::move(children), sum};
}

std::string_view to_string(TreeForm form) {
  return form == TreeForm::kForced ? "forced" : "standard";
}

double probability_yes(const OutcomeCounts& c, Estimator estimator) {
  const auto yes = static_cast<double>(c.yes);
  const auto n = static_cast<double>(c.total());
  if (estimator == Estimator::kMaximumLikelihood) return c.total() == 0 ? 0.5 : yes / n;
  return (yes + 1.0) / (n + 2.0);
}

Tree::Tree(Schema schema, Node root, TreeForm form)
    : schema_(std::move(schema)), root_(std::move(root)), form_(form) {
  PathState state;
  for (const auto& p : schema_.predictors()) state.predictors.emplace_back(p.arity(), true);
  validate_node(root_, schema_, form_, state);
}

const Node& Tree::traverse(std::span<const ValueIndex> x, Treatment m) const {
  if (x.size() != schema_.num_predictors()) {
    throw Error(
        fmt::format("expected {} predictor values, got {}", schema_.num_predictors(), x.size()));
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] >= schema_.predictor(j).arity()) {
      throw Error(
          fmt::format("value index {} outside the arity of '{}'", x[j], schema_.predictor(j).name));
    }
  }
  if (index_of(m) > 1) throw Error("treatment value outside {m0, m1}");
  const Node* node = &root_;
  while (!node->is_leaf()) {
    const auto& rule = *node->rule;
    const ValueIndex v = rule.variable.is_treatment() ? static_cast<ValueIndex>(index_of(m))
                                                      : x[rule.variable.predictor_index()];
    node = &node->children[rule.child_for(v)];
  }
  return *node;
}

double Tree::predict(std::span<const ValueIndex> x, Treatment m, Estimator estimator) const {
  return leaf_probability(traverse(x, m), form_, m, estimator);
}

std::size_t Tree::num_leaves() const { return leaves(root_).size(); }

double leaf_probability(const Node& leaf, TreeForm form, Treatment m, Estimator estimator) {
  if (form == TreeForm::kForced) return probability_yes(leaf.counts[m], estimator);
  return probability_yes(leaf.counts.pooled(), estimator);
}

Tree materialize_m_splits(const Tree& forced) {
  if (forced.form() != TreeForm::kForced) throw Error("tree is already in standard form");
  return Tree(forced.schema(), materialize(forced.root()), TreeForm::kStandard);
}

std::vector<const Node*> leaves(const Node& root) {
  std::vector<const Node*> out;
  collect_leaves(root, out);
  return out;
}

}  // namespace uplift
