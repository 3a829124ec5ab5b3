#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "uplift/data.hpp"
#include "uplift/scoring.hpp"
#include "uplift/tree.hpp"

namespace uplift {

/// kNormal: free greedy search over predictors and M.
/// kForce: M excluded from the search, leaves scored as if split on M, then
///         materialized and pruned by postprocess().
/// kSplitFirst: root split on M, an independent normal tree per branch.
enum class LearnMode { kNormal, kForce, kSplitFirst };

std::string_view to_string(LearnMode mode);
LearnMode parse_learn_mode(std::string_view name);

struct LearnConfig {
  LearnMode mode = LearnMode::kForce;
  ScoreParams score;
};

struct CandidateSplit {
  SplitRule rule;
  std::vector<CrossTab> children;
  double delta = 0.0;
};

/// One-vs-rest candidates over values observed among `rows`, one per distinct
/// record partition, each leaving at least one record on each side. M is a
/// candidate only in normal mode. Ordered by (variable, singled-out value).
std::vector<CandidateSplit> enumerate_candidate_splits(const Dataset& data,
                                                       std::span<const std::size_t> rows,
                                                       LearnMode mode, const ScoreParams& params);

/// Strict total order used to pick among candidates: larger delta first, then
/// lower variable order, lower singled-out value, lower leaf pre-order position.
bool better_candidate(const CandidateSplit& a, std::size_t a_leaf, const CandidateSplit& b,
                      std::size_t b_leaf, const Schema& schema);

struct GrowthStep {
  std::size_t leaf_position = 0;  // pre-order index among leaves when applied
  CandidateSplit split;
  double score_after = 0.0;
};

struct GrowthTrace {
  double initial_score = 0.0;
  std::vector<GrowthStep> steps;
};

Tree grow_normal(const Dataset& train, const LearnConfig& config, GrowthTrace* trace = nullptr);

/// The forced-form tree found by the FORCE search, before materialization.
Tree grow_forced_tree(const Dataset& train, const LearnConfig& config,
                      GrowthTrace* trace = nullptr);

/// grow_forced_tree, then materialize_m_splits, then postprocess.
Tree grow_force(const Dataset& train, const LearnConfig& config, GrowthTrace* trace = nullptr);

Tree grow_split_first(const Dataset& train, const LearnConfig& config);

/// Dispatches on config.mode.
Tree learn(const Dataset& train, const LearnConfig& config);

struct PostprocessTrace {
  std::vector<double> scores;  // scores[0] is the input score, then one entry per edit
  std::size_t m_splits_removed = 0;
  std::size_t splits_deleted = 0;
  std::size_t m_splits_added = 0;
};

/// Pruning pass applied to a materialized FORCE tree (every leaf's parent is
/// an M split). First drops each last M split whose removal raises the score.
/// Then repeats until nothing changes: delete each last non-M split whose
/// removal raises the score; add an M split under each leaf without an M
/// parent where that raises the score. Every edit is a strict improvement.
Tree postprocess(const Tree& materialized, const ScoreParams& params,
                 PostprocessTrace* trace = nullptr);

}  // namespace uplift
