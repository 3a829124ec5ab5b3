#include "uplift/learn.hpp"

#include <fmt/format.h>

#include <memory>

namespace uplift {
namespace {

bool forced_scoring(LearnMode mode) { return mode == LearnMode::kForce; }

double candidate_delta(const CrossTab& parent, const std::vector<CrossTab>& children,
                       LearnMode mode, const ScoreParams& params) {
  if (forced_scoring(mode)) return split_delta(parent, children, params);
  std::vector<OutcomeCounts> pooled;
  pooled.reserve(children.size());
  for (const auto& c : children) pooled.push_back(c.pooled());
  return split_delta(parent.pooled(), pooled, params);
}

double leaf_score(const CrossTab& counts, LearnMode mode, const ScoreParams& params) {
  return forced_scoring(mode) ? forced_leaf_log_score(counts, params)
                              : leaf_log_score(counts.pooled(), params);
}

struct WorkNode {
  std::optional<SplitRule> rule;
  std::vector<std::unique_ptr<WorkNode>> children;
  std::vector<std::size_t> rows;
  CrossTab counts;
  std::optional<CandidateSplit> best;
};

CrossTab count_rows(const Dataset& data, std::span<const std::size_t> rows) {
  CrossTab c;
  for (auto i : rows) c.add(data[i].treatment, data[i].outcome);
  return c;
}

std::optional<CandidateSplit> best_of(std::vector<CandidateSplit> candidates,
                                      const Schema& schema) {
  std::optional<CandidateSplit> best;
  for (auto& c : candidates) {
    if (!best || better_candidate(c, 0, *best, 0, schema)) best = std::move(c);
  }
  return best;
}

std::unique_ptr<WorkNode> make_leaf(const Dataset& data, std::vector<std::size_t> rows,
                                    LearnMode mode, const ScoreParams& params) {
  auto node = std::make_unique<WorkNode>();
  node->counts = count_rows(data, rows);
  node->rows = std::move(rows);
  if (!node->rows.empty()) {
    node->best = best_of(enumerate_candidate_splits(data, node->rows, mode, params), data.schema());
  }
  return node;
}

void collect_work_leaves(WorkNode& node, std::vector<WorkNode*>& out) {
  if (!node.rule) {
    out.push_back(&node);
    return;
  }
  for (auto& child : node.children) collect_work_leaves(*child, out);
}

ValueIndex value_of(const Record& r, VariableRef v) {
  return v.is_treatment() ? static_cast<ValueIndex>(index_of(r.treatment))
                          : r.predictors[v.predictor_index()];
}

void apply_split(WorkNode& leaf, const CandidateSplit& split, const Dataset& data, LearnMode mode,
                 const ScoreParams& params) {
  const auto& rule = split.rule;
  std::vector<std::vector<std::size_t>> parts(rule.num_children(data.schema()));
  for (auto i : leaf.rows) parts[rule.child_for(value_of(data[i], rule.variable))].push_back(i);
  leaf.rule = rule;
  for (auto& part : parts) leaf.children.push_back(make_leaf(data, std::move(part), mode, params));
  leaf.rows.clear();
  leaf.rows.shrink_to_fit();
  leaf.best.reset();
}

Node to_node(const WorkNode& w) {
  if (!w.rule) return Node::leaf(w.counts);
  std::vector<Node> children;
  children.reserve(w.children.size());
  for (const auto& c : w.children) children.push_back(to_node(*c));
  return Node::split(*w.rule, std::move(children));
}

Node grow(const Dataset& data, std::vector<std::size_t> rows, LearnMode mode,
          const ScoreParams& params, GrowthTrace* trace) {
  params.validate();
  auto root = make_leaf(data, std::move(rows), mode, params);
  double score = leaf_score(root->counts, mode, params);
  if (trace) {
    trace->initial_score = score;
    trace->steps.clear();
  }
  for (;;) {
    std::vector<WorkNode*> leaves;
    collect_work_leaves(*root, leaves);
    std::size_t chosen = leaves.size();
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      if (!leaves[k]->best) continue;
      if (chosen == leaves.size() ||
          better_candidate(*leaves[k]->best, k, *leaves[chosen]->best, chosen, data.schema())) {
        chosen = k;
      }
    }
    if (chosen == leaves.size() || !(leaves[chosen]->best->delta > 0.0)) break;
    const CandidateSplit split = *leaves[chosen]->best;
    apply_split(*leaves[chosen], split, data, mode, params);
    score += split.delta;
    if (trace) trace->steps.push_back({chosen, split, score});
  }
  return to_node(*root);
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> rows(d.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

// ---- post-processing ----

bool is_last_split(const Node& n) {
  if (n.is_leaf()) return false;
  for (const auto& c : n.children) {
    if (!c.is_leaf()) return false;
  }
  return true;
}

bool splits_on_m(const Node& n) { return !n.is_leaf() && n.rule->variable.is_treatment(); }

double merge_delta(const Node& n, const ScoreParams& params) {
  double children = 0.0;
  for (const auto& c : n.children) children += leaf_log_score(c.counts.pooled(), params);
  return leaf_log_score(n.counts.pooled(), params) - children;
}

Node m_split_of(const Node& leaf) {
  CrossTab m0;
  m0.not_mailed = leaf.counts.not_mailed;
  CrossTab m1;
  m1.mailed = leaf.counts.mailed;
  return Node::split(SplitRule::complete(VariableRef::treatment()),
                     {Node::leaf(m0), Node::leaf(m1)});
}

double standard_score(const Node& n, const ScoreParams& params) {
  if (n.is_leaf()) return leaf_log_score(n.counts.pooled(), params);
  double total = 0.0;
  for (const auto& c : n.children) total += standard_score(c, params);
  return total;
}

bool every_leaf_under_m(const Node& n) {
  if (n.is_leaf()) return false;
  for (const auto& c : n.children) {
    if (c.is_leaf()) {
      if (!splits_on_m(n)) return false;
    } else if (!every_leaf_under_m(c)) {
      return false;
    }
  }
  return true;
}

class Postprocessor {
 public:
  Postprocessor(Node root, const ScoreParams& params, PostprocessTrace* trace)
      : root_(std::move(root)), params_(params), trace_(trace) {
    if (trace_) {
      *trace_ = {};
      trace_->scores.push_back(standard_score(root_, params_));
    }
  }

  Node run() {
    remove_m_splits(root_);
    for (;;) {
      bool changed = delete_last_splits(root_);
      changed = add_m_splits(root_, /*parent_is_m=*/false, /*m_on_path=*/false) || changed;
      if (!changed) break;
    }
    return std::move(root_);
  }

 private:
  void record() {
    if (trace_) trace_->scores.push_back(standard_score(root_, params_));
  }

  void remove_m_splits(Node& n) {
    if (n.is_leaf()) return;
    if (splits_on_m(n) && is_last_split(n)) {
      if (merge_delta(n, params_) > 0.0) {
        n = Node::leaf(n.counts);
        if (trace_) ++trace_->m_splits_removed;
        record();
      }
      return;
    }
    for (auto& c : n.children) remove_m_splits(c);
  }

  // Lastness is judged before any child is edited, so one pass never cascades.
  bool delete_last_splits(Node& n) {
    if (n.is_leaf()) return false;
    if (!splits_on_m(n) && is_last_split(n)) {
      if (merge_delta(n, params_) > 0.0) {
        n = Node::leaf(n.counts);
        if (trace_) ++trace_->splits_deleted;
        record();
        return true;
      }
      return false;
    }
    bool changed = false;
    for (auto& c : n.children) changed = delete_last_splits(c) || changed;
    return changed;
  }

  bool add_m_splits(Node& n, bool parent_is_m, bool m_on_path) {
    if (n.is_leaf()) {
      if (parent_is_m || m_on_path) return false;
      Node candidate = m_split_of(n);
      if (-merge_delta(candidate, params_) > 0.0) {
        n = std::move(candidate);
        if (trace_) ++trace_->m_splits_added;
        record();
        return true;
      }
      return false;
    }
    const bool is_m = splits_on_m(n);
    bool changed = false;
    for (auto& c : n.children) changed = add_m_splits(c, is_m, m_on_path || is_m) || changed;
    return changed;
  }

  Node root_;
  ScoreParams params_;
  PostprocessTrace* trace_;
};

}  // namespace

std::string_view to_string(LearnMode mode) {
  switch (mode) {
    case LearnMode::kNormal:
      return "normal";
    case LearnMode::kForce:
      return "force";
    case LearnMode::kSplitFirst:
      return "split_first";
  }
  return "unknown";
}

LearnMode parse_learn_mode(std::string_view name) {
  if (name == "normal") return LearnMode::kNormal;
  if (name == "force") return LearnMode::kForce;
  if (name == "split_first" || name == "split-first") return LearnMode::kSplitFirst;
  throw Error(fmt::format("unknown learning mode '{}'", name));
}

std::vector<CandidateSplit> enumerate_candidate_splits(const Dataset& data,
                                                       std::span<const std::size_t> rows,
                                                       LearnMode mode, const ScoreParams& params) {
  const auto& schema = data.schema();
  std::vector<std::vector<CrossTab>> tables(schema.num_predictors());
  for (std::size_t j = 0; j < tables.size(); ++j) tables[j].resize(schema.predictor(j).arity());
  CrossTab total;
  for (auto i : rows) {
    const auto& r = data[i];
    total.add(r.treatment, r.outcome);
    for (std::size_t j = 0; j < tables.size(); ++j)
      tables[j][r.predictors[j]].add(r.treatment, r.outcome);
  }

  std::vector<CandidateSplit> out;
  for (std::size_t j = 0; j < tables.size(); ++j) {
    std::vector<ValueIndex> observed;
    for (ValueIndex v = 0; v < tables[j].size(); ++v) {
      if (tables[j][v].total() > 0) observed.push_back(v);
    }
    if (observed.size() < 2) continue;
    // With two observed values both one-vs-rest splits cut the rows identically.
    if (observed.size() == 2) observed.resize(1);
    for (ValueIndex v : observed) {
      CrossTab rest;
      for (ValueIndex u = 0; u < tables[j].size(); ++u) {
        if (u != v) rest += tables[j][u];
      }
      CandidateSplit c;
      c.rule = SplitRule::binary(VariableRef::predictor(j), v);
      c.children = {tables[j][v], rest};
      c.delta = candidate_delta(total, c.children, mode, params);
      out.push_back(std::move(c));
    }
  }

  if (mode == LearnMode::kNormal && total.mailed.total() > 0 && total.not_mailed.total() > 0) {
    CrossTab m0;
    m0.not_mailed = total.not_mailed;
    CrossTab m1;
    m1.mailed = total.mailed;
    CandidateSplit c;
    c.rule = SplitRule::complete(VariableRef::treatment());
    c.children = {m0, m1};
    c.delta = candidate_delta(total, c.children, mode, params);
    out.push_back(std::move(c));
  }
  return out;
}

bool better_candidate(const CandidateSplit& a, std::size_t a_leaf, const CandidateSplit& b,
                      std::size_t b_leaf, const Schema& schema) {
  if (a.delta != b.delta) return a.delta > b.delta;
  const auto av = a.rule.variable.order(schema);
  const auto bv = b.rule.variable.order(schema);
  if (av != bv) return av < bv;
  if (a.rule.value != b.rule.value) return a.rule.value < b.rule.value;
  return a_leaf < b_leaf;
}

Tree grow_normal(const Dataset& train, const LearnConfig& config, GrowthTrace* trace) {
  if (train.empty()) throw Error("cannot learn from an empty dataset");
  return Tree(train.schema(), grow(train, all_rows(train), LearnMode::kNormal, config.score, trace),
              TreeForm::kStandard);
}

Tree grow_forced_tree(const Dataset& train, const LearnConfig& config, GrowthTrace* trace) {
  if (train.empty()) throw Error("cannot learn from an empty dataset");
  return Tree(train.schema(), grow(train, all_rows(train), LearnMode::kForce, config.score, trace),
              TreeForm::kForced);
}

Tree grow_force(const Dataset& train, const LearnConfig& config, GrowthTrace* trace) {
  return postprocess(materialize_m_splits(grow_forced_tree(train, config, trace)), config.score);
}

Tree grow_split_first(const Dataset& train, const LearnConfig& config) {
  if (train.empty()) throw Error("cannot learn from an empty dataset");
  std::vector<std::size_t> not_mailed;
  std::vector<std::size_t> mailed;
  for (std::size_t i = 0; i < train.size(); ++i) {
    (train[i].treatment == Treatment::kMailed ? mailed : not_mailed).push_back(i);
  }
  std::vector<Node> branches;
  branches.push_back(
      grow(train, std::move(not_mailed), LearnMode::kSplitFirst, config.score, nullptr));
  branches.push_back(grow(train, std::move(mailed), LearnMode::kSplitFirst, config.score, nullptr));
  return Tree(train.schema(),
              Node::split(SplitRule::complete(VariableRef::treatment()), std::move(branches)),
              TreeForm::kStandard);
}

Tree learn(const Dataset& train, const LearnConfig& config) {
  switch (config.mode) {
    case LearnMode::kNormal:
      return grow_normal(train, config);
    case LearnMode::kForce:
      return grow_force(train, config);
    case LearnMode::kSplitFirst:
      return grow_split_first(train, config);
  }
  throw Error("unknown learning mode");
}

Tree postprocess(const Tree& materialized, const ScoreParams& params, PostprocessTrace* trace) {
  params.validate();
  if (materialized.form() != TreeForm::kStandard || !every_leaf_under_m(materialized.root())) {
    throw Error("postprocess expects a materialized tree whose every leaf sits under an M split");
  }
  Postprocessor pp(materialized.root(), params, trace);
  return Tree(materialized.schema(), pp.run(), TreeForm::kStandard);
}

}  // namespace uplift
