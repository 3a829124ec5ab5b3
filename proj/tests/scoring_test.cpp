#include "uplift/scoring.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace uplift {
namespace {

using namespace uplift::testing;

const ScoreParams kDefault{};

TEST(LeafLogMarginal, Examples) {
  EXPECT_EQ(leaf_log_marginal({0, 0}), 0.0);
  EXPECT_NEAR(leaf_log_marginal({1, 0}), std::log(0.5), 1e-12);
  EXPECT_NEAR(leaf_log_marginal({2, 1}), std::log(1.0 / 12.0), 1e-12);
  EXPECT_NEAR(leaf_log_marginal({2, 1}), -2.484907, 1e-6);
}

TEST(LeafLogMarginal, MatchesSequentialPredictiveOracle) {
  for (std::uint64_t yes = 0; yes <= 50; ++yes) {
    for (std::uint64_t no = 0; yes + no <= 50; ++no) {
      const double expected = oracle::sequential_log_marginal(yes, no);
      const double got = leaf_log_marginal({yes, no});
      if (expected == 0.0) {
        EXPECT_EQ(got, 0.0);
      } else {
        EXPECT_LE(std::abs(got - expected) / std::abs(expected), 1e-9) << yes << "," << no;
      }
    }
  }
}

TEST(LeafLogMarginal, Symmetric) {
  for (std::uint64_t a = 0; a < 40; ++a) {
    for (std::uint64_t b = 0; b < 40; ++b)
      EXPECT_EQ(leaf_log_marginal({a, b}), leaf_log_marginal({b, a}));
  }
}

TEST(TreeLogScore, Examples) {
  const auto schema = make_schema({{"x", {"a", "b"}}});
  const Tree one(schema, Node::leaf(cross(1, 0, 0, 0)), TreeForm::kStandard);
  EXPECT_NEAR(tree_log_score(one), -7.600902459542082, 1e-12);
  const Tree empty(schema, Node::leaf({}), TreeForm::kStandard);
  EXPECT_NEAR(tree_log_score(empty), std::log(0.001), 1e-12);
  const Tree two(schema,
                 Node::split(SplitRule::binary(VariableRef::predictor(0), 0),
                             {Node::leaf(cross(1, 1, 0, 0)), Node::leaf(cross(0, 0, 1, 1))}),
                 TreeForm::kStandard);
  EXPECT_NEAR(tree_log_score(two), -17.399029496420383, 1e-12);
  EXPECT_NEAR(tree_log_score(two), 2 * std::log(1.0 / 6) + 2 * std::log(0.001), 1e-12);
}

TEST(ForcedLeafLogScore, Examples) {
  EXPECT_NEAR(forced_leaf_log_score(cross(1, 0, 0, 1), kDefault), -15.201804919084164, 1e-12);
  EXPECT_NEAR(forced_leaf_log_score({}, kDefault), 2 * std::log(0.001), 1e-12);
}

TEST(ForcedScore, EqualsScoreOfMaterializedTree) {
  const auto schema = make_schema({{"a", {"0", "1", "2"}}, {"b", {"0", "1"}}, {"c", {"0", "1"}}});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomTreeBuilder builder(schema, seed);
    const Tree forced(schema, builder.build(5), TreeForm::kForced);
    EXPECT_EQ(tree_log_score(forced), tree_log_score(materialize_m_splits(forced)));
  }
}

TEST(TreeLogScore, DecreasingKappaLowersScore) {
  const auto schema = make_schema({{"a", {"0", "1", "2"}}, {"b", {"0", "1"}}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomTreeBuilder builder(schema, seed);
    const Tree t(schema, builder.build(3), TreeForm::kForced);
    double last = tree_log_score(t, {1.0});
    for (double kappa : {0.5, 0.1, 0.01, 0.001, 1e-6}) {
      const double s = tree_log_score(t, {kappa});
      EXPECT_LT(s, last);
      last = s;
    }
  }
}

TEST(TreeLogScore, SumOfLeafTermsPlusParameterPenalty) {
  const auto schema = make_schema({{"a", {"0", "1", "2"}}, {"b", {"0", "1"}}});
  RandomTreeBuilder builder(schema, 5);
  const Tree t = materialize_m_splits(Tree(schema, builder.build(3), TreeForm::kForced));
  double marginals = 0.0;
  for (const Node* leaf : leaves(t.root())) {
    marginals +=
        oracle::sequential_log_marginal(leaf->counts.pooled().yes, leaf->counts.pooled().no);
  }
  const double expected = marginals + static_cast<double>(t.num_leaves()) * std::log(0.001);
  EXPECT_NEAR(tree_log_score(t), expected, 1e-9 * std::abs(expected));
}

TEST(SplitDelta, Examples) {
  const std::vector<OutcomeCounts> halves{{1, 1}, {1, 1}};
  EXPECT_NEAR(split_delta(OutcomeCounts{2, 2}, halves, kDefault), -7.090076835776091, 1e-12);
  EXPECT_NEAR(split_delta(OutcomeCounts{2, 2}, halves, kDefault),
              std::log(1.0 / 36) - std::log(1.0 / 30) + std::log(0.001), 1e-12);

  const std::vector<OutcomeCounts> all_left{{7, 3}, {0, 0}};
  EXPECT_EQ(split_delta(OutcomeCounts{7, 3}, all_left, ScoreParams{1.0}), 0.0);

  const std::vector<OutcomeCounts> separated{{40, 10}, {10, 40}};
  const double delta = split_delta(OutcomeCounts{50, 50}, separated, kDefault);
  EXPECT_GT(delta, 0.0);
  const double lk = std::log(0.001);
  const double oracle_delta = oracle::sequential_log_marginal(40, 10) +
                              oracle::sequential_log_marginal(10, 40) + lk -
                              oracle::sequential_log_marginal(50, 50);
  EXPECT_NEAR(delta, oracle_delta, 1e-9);
}

TEST(SplitDelta, ForcedVariantAndErrors) {
  const std::vector<CrossTab> children{cross(3, 1, 0, 2), cross(1, 1, 1, 1)};
  const CrossTab parent = cross(4, 2, 1, 3);
  const double expected = forced_leaf_log_score(children[0], kDefault) +
                          forced_leaf_log_score(children[1], kDefault) -
                          forced_leaf_log_score(parent, kDefault);
  EXPECT_NEAR(split_delta(parent, children, kDefault), expected, 1e-12);
  EXPECT_THROW(split_delta(cross(5, 2, 1, 3), children, kDefault), Error);
  const std::vector<OutcomeCounts> halves{{1, 1}, {1, 1}};
  EXPECT_THROW(split_delta(OutcomeCounts{3, 2}, halves, kDefault), Error);
}

TEST(ScoreParams, KappaRange) {
  EXPECT_THROW(ScoreParams{0.0}.validate(), Error);
  EXPECT_THROW(ScoreParams{1.5}.validate(), Error);
  EXPECT_NO_THROW(ScoreParams{1.0}.validate());
}

}  // namespace
}  // namespace uplift
