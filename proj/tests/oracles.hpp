#pragma once

// Independent reference computations for tests. Nothing here calls the
// scoring or learning code it is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "uplift/data.hpp"

namespace uplift::oracle {

/// Beta(1,1)-Bernoulli marginal as a chain of sequential predictive
/// probabilities: the t-th observation has probability (k + 1) / (t + 2),
/// k the number of earlier observations equal to it.
inline double sequential_log_marginal(std::uint64_t yes, std::uint64_t no) {
  double log_p = 0.0;
  std::uint64_t seen_yes = 0;
  std::uint64_t seen_no = 0;
  // Interleave so the chain does not depend on a single ordering trick.
  while (seen_yes < yes || seen_no < no) {
    const double t = static_cast<double>(seen_yes + seen_no);
    if (seen_yes < yes && (seen_yes * no <= seen_no * yes || seen_no == no)) {
      log_p += std::log((static_cast<double>(seen_yes) + 1.0) / (t + 2.0));
      ++seen_yes;
    } else {
      log_p += std::log((static_cast<double>(seen_no) + 1.0) / (t + 2.0));
      ++seen_no;
    }
  }
  return log_p;
}

struct Cell {
  std::uint64_t yes = 0;
  std::uint64_t no = 0;
};

struct Cross {
  Cell m0;
  Cell m1;
};

using RecordPredicate = std::function<bool(const Record&)>;

/// Counts records by brute force.
inline Cross count_where(const Dataset& d, const RecordPredicate& keep) {
  Cross c;
  for (const auto& r : d.records()) {
    if (!keep(r)) continue;
    Cell& cell = r.treatment == Treatment::kMailed ? c.m1 : c.m0;
    (r.outcome == Outcome::kYes ? cell.yes : cell.no) += 1;
  }
  return c;
}

inline double standard_leaf(const Cross& c, double log_kappa) {
  return sequential_log_marginal(c.m0.yes + c.m1.yes, c.m0.no + c.m1.no) + log_kappa;
}

inline double forced_leaf(const Cross& c, double log_kappa) {
  return sequential_log_marginal(c.m0.yes, c.m0.no) + sequential_log_marginal(c.m1.yes, c.m1.no) +
         2.0 * log_kappa;
}

struct FirstSplit {
  bool on_treatment = false;
  std::size_t predictor = 0;
  ValueIndex value = 0;
  double delta = -std::numeric_limits<double>::infinity();
};

/// Exhaustive scoring of every root split: one-vs-rest per predictor value
/// with both sides nonempty (only value 0 for two-valued partitions), plus the
/// treatment split when `allow_treatment`. Ties within 1e-9 go to the earlier
/// candidate in (variable, value) order with the treatment last. Returns
/// nothing when no candidate has a positive delta.
inline std::optional<FirstSplit> best_first_split(const Dataset& d, bool forced,
                                                  bool allow_treatment, double kappa) {
  const double lk = std::log(kappa);
  const auto leaf = [&](const Cross& c) {
    return forced ? forced_leaf(c, lk) : standard_leaf(c, lk);
  };
  const double parent = leaf(count_where(d, [](const Record&) { return true; }));

  std::vector<FirstSplit> all;
  const auto& schema = d.schema();
  for (std::size_t j = 0; j < schema.num_predictors(); ++j) {
    std::vector<ValueIndex> observed;
    for (ValueIndex v = 0; v < schema.predictor(j).arity(); ++v) {
      bool seen = false;
      for (const auto& r : d.records()) seen = seen || r.predictors[j] == v;
      if (seen) observed.push_back(v);
    }
    if (observed.size() < 2) continue;
    if (observed.size() == 2) observed.resize(1);
    for (ValueIndex v : observed) {
      const auto in = count_where(d, [&](const Record& r) { return r.predictors[j] == v; });
      const auto out = count_where(d, [&](const Record& r) { return r.predictors[j] != v; });
      all.push_back({false, j, v, leaf(in) + leaf(out) - parent});
    }
  }
  if (allow_treatment) {
    const auto m0 =
        count_where(d, [](const Record& r) { return r.treatment == Treatment::kNotMailed; });
    const auto m1 =
        count_where(d, [](const Record& r) { return r.treatment == Treatment::kMailed; });
    if (m0.m0.yes + m0.m0.no > 0 && m1.m1.yes + m1.m1.no > 0) {
      all.push_back({true, 0, 0, leaf(m0) + leaf(m1) - parent});
    }
  }
  std::optional<FirstSplit> best;
  for (const auto& c : all) {
    if (!best || c.delta > best->delta + 1e-9) best = c;
  }
  if (!best || best->delta <= 0.0) return std::nullopt;
  return best;
}

}  // namespace uplift::oracle
