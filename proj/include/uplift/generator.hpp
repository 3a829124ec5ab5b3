#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "uplift/data.hpp"

namespace uplift {

/// Latent response behaviors. Only their mixture is identifiable from an experiment.
enum class Behavior : std::uint8_t { kAlwaysBuy, kPersuadable, kAntiPersuadable, kNeverBuy };

std::string_view to_string(Behavior b);

/// Subscription outcome of a person with behavior `b` under treatment `m`.
constexpr Outcome behavior_response(Behavior b, Treatment m) {
  switch (b) {
    case Behavior::kAlwaysBuy:
      return Outcome::kYes;
    case Behavior::kPersuadable:
      return m == Treatment::kMailed ? Outcome::kYes : Outcome::kNo;
    case Behavior::kAntiPersuadable:
      return m == Treatment::kNotMailed ? Outcome::kYes : Outcome::kNo;
    case Behavior::kNeverBuy:
      return Outcome::kNo;
  }
  return Outcome::kNo;
}

/// Population proportions of the four behaviors.
struct BehaviorMixture {
  double always_buy = 0.0;
  double persuadable = 0.0;
  double anti_persuadable = 0.0;
  double never_buy = 1.0;

  /// Throws unless every proportion is in [0,1] and they sum to 1 within 1e-12.
  void validate() const;
};

struct ResponseProbabilities {
  double mailed;      // p(s1 | m1)
  double not_mailed;  // p(s1 | m0)
};

/// p(s1|m1) = always + persuadable; p(s1|m0) = always + anti-persuadable.
ResponseProbabilities true_probabilities(const BehaviorMixture& mixture);

/// A cell of the predictor space: records whose predictors match every
/// (variable, value) pair. An empty predicate matches everything.
struct SegmentSpec {
  std::vector<std::pair<std::size_t, ValueIndex>> predicate;
  BehaviorMixture mixture;
  double weight = 1.0;

  bool matches(std::span<const ValueIndex> x) const;
};

struct GeneratorConfig {
  std::vector<VariableSpec> predictors;
  std::vector<SegmentSpec> segments;
  double mail_probability = 0.9;
  std::uint64_t population_size = 1;
  std::uint64_t seed = 0;
  VariableSpec treatment{"M", {"0", "1"}};
  VariableSpec outcome{"S", {"0", "1"}};

  /// Checks mixtures, weights, and that predicates partition the predictor space.
  void validate() const;
};

struct GroundTruth {
  std::size_t segment = 0;
  Behavior behavior = Behavior::kNeverBuy;
};

struct GeneratedData {
  Dataset dataset;
  std::vector<GroundTruth> truth;  // parallel to dataset rows; never given to a learner
};

/// Record i is drawn from its own random stream keyed by (seed, i).
GeneratedData generate(const GeneratorConfig& config);

/// Sidecar with columns row_index,segment_id,behavior.
void write_truth_csv(std::ostream& out, std::span<const GroundTruth> truth);

}  // namespace uplift
