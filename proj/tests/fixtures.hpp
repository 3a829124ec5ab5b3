#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "uplift/data.hpp"
#include "uplift/tree.hpp"

namespace uplift::testing {

inline VariableSpec binary_treatment() { return {"M", {"0", "1"}}; }
inline VariableSpec binary_outcome() { return {"S", {"0", "1"}}; }

inline Schema make_schema(std::vector<VariableSpec> predictors) {
  return Schema(std::move(predictors), binary_treatment(), binary_outcome());
}

inline CrossTab cross(std::uint64_t s1m1, std::uint64_t s0m1, std::uint64_t s1m0,
                      std::uint64_t s0m0) {
  CrossTab c;
  c.mailed = {s1m1, s0m1};
  c.not_mailed = {s1m0, s0m0};
  return c;
}

/// Leaf under the given branch of an M split holding (yes, no) in that cell.
inline Node cell_leaf(Treatment m, std::uint64_t yes, std::uint64_t no) {
  CrossTab c;
  c[m] = {yes, no};
  return Node::leaf(c);
}

inline Node m_split(Node m0_leaf, Node m1_leaf) {
  return Node::split(SplitRule::complete(VariableRef::treatment()),
                     {std::move(m0_leaf), std::move(m1_leaf)});
}

/// X1 in {1,2}, X2 in {1,2,3}.
inline Schema worked_schema() { return make_schema({{"X1", {"1", "2"}}, {"X2", {"1", "2", "3"}}}); }

/// Tree with the worked-example traversal: the root singles out X2 = 2, that
/// branch splits completely on X1, and X1 = 1 ends in an M split whose m0 leaf
/// predicts 0.2 and m1 leaf 0.4 under the posterior-mean rule. The rest of
/// the structure is filler with mailing lifts too small to pay for c = 0.5.
inline Tree worked_tree() {
  using enum Treatment;
  Node x1_is_1 = m_split(cell_leaf(kNotMailed, 1, 7), cell_leaf(kMailed, 3, 5));  // 2/10, 4/10
  Node x1_is_2 = Node::leaf(CrossTab{{2, 2}, {1, 1}});
  Node x2_is_2 = Node::split(SplitRule::complete(VariableRef::predictor(0)),
                             {std::move(x1_is_1), std::move(x1_is_2)});
  Node x2_not_2 = m_split(cell_leaf(kNotMailed, 1, 5), cell_leaf(kMailed, 2, 6));  // 1/4, 3/10
  return Tree(worked_schema(),
              Node::split(SplitRule::binary(VariableRef::predictor(1), 1),
                          {std::move(x2_is_2), std::move(x2_not_2)}),
              TreeForm::kStandard);
}

/// Adds `n` copies of a record.
inline void repeat(std::vector<Record>& out, std::size_t n, std::vector<ValueIndex> x, Treatment m,
                   Outcome s) {
  for (std::size_t i = 0; i < n; ++i) out.push_back(Record{x, m, s});
}

/// Random forced-form tree over `schema` with non-vacuous binary splits and
/// random leaf cross-tabs.
class RandomTreeBuilder {
 public:
  RandomTreeBuilder(const Schema& schema, std::uint64_t seed) : schema_(schema), rng_(seed) {}

  Node build(std::size_t max_depth) {
    std::vector<std::vector<bool>> allowed;
    for (const auto& p : schema_.predictors()) allowed.emplace_back(p.arity(), true);
    return grow(allowed, max_depth);
  }

 private:
  Node grow(std::vector<std::vector<bool>>& allowed, std::size_t depth) {
    std::uniform_int_distribution<int> coin(0, 2);
    if (depth == 0 || coin(rng_) == 0) return random_leaf();
    // Pick a (variable, value) that leaves something on both sides.
    std::vector<std::pair<std::size_t, ValueIndex>> options;
    for (std::size_t j = 0; j < allowed.size(); ++j) {
      std::size_t live = 0;
      for (bool b : allowed[j]) live += b ? 1 : 0;
      if (live < 2) continue;
      for (ValueIndex v = 0; v < allowed[j].size(); ++v) {
        if (allowed[j][v]) options.emplace_back(j, v);
      }
    }
    if (options.empty()) return random_leaf();
    const auto [j, v] =
        options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng_)];
    const auto saved = allowed[j];
    std::vector<Node> children;
    for (std::size_t c = 0; c < 2; ++c) {
      for (ValueIndex u = 0; u < saved.size(); ++u)
        allowed[j][u] = saved[u] && ((u == v) == (c == 0));
      children.push_back(grow(allowed, depth - 1));
    }
    allowed[j] = saved;
    return Node::split(SplitRule::binary(VariableRef::predictor(j), v), std::move(children));
  }

  Node random_leaf() {
    std::uniform_int_distribution<std::uint64_t> count(0, 40);
    return Node::leaf(cross(count(rng_), count(rng_), count(rng_), count(rng_)));
  }

  const Schema& schema_;
  std::mt19937_64 rng_;
};

/// Every assignment of predictor values for a small schema.
inline std::vector<std::vector<ValueIndex>> all_assignments(const Schema& schema) {
  std::vector<std::vector<ValueIndex>> out{{}};
  for (const auto& p : schema.predictors()) {
    std::vector<std::vector<ValueIndex>> next;
    for (const auto& prefix : out) {
      for (ValueIndex v = 0; v < p.arity(); ++v) {
        auto x = prefix;
        x.push_back(v);
        next.push_back(std::move(x));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace uplift::testing
