#include "uplift/generator.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>
#include <set>

#include "uplift/random.hpp"

namespace uplift {
namespace {

constexpr std::uint64_t kMaxEnumeratedCells = 1ULL << 22;

bool in_unit_interval(double p) { return p >= 0.0 && p <= 1.0; }

Behavior draw_behavior(const BehaviorMixture& mix, double u) {
  double acc = mix.always_buy;
  if (u < acc) return Behavior::kAlwaysBuy;
  acc += mix.persuadable;
  if (u < acc) return Behavior::kPersuadable;
  acc += mix.anti_persuadable;
  if (u < acc) return Behavior::kAntiPersuadable;
  return Behavior::kNeverBuy;
}

}  // namespace

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::kAlwaysBuy:
      return "always_buy";
    case Behavior::kPersuadable:
      return "persuadable";
    case Behavior::kAntiPersuadable:
      return "anti_persuadable";
    case Behavior::kNeverBuy:
      return "never_buy";
  }
  return "unknown";
}

void BehaviorMixture::validate() const {
  for (double p : {always_buy, persuadable, anti_persuadable, never_buy}) {
    if (!in_unit_interval(p)) throw Error("behavior proportions must lie in [0,1]");
  }
  const double sum = always_buy + persuadable + anti_persuadable + never_buy;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(fmt::format("behavior proportions sum to {}, not 1", sum));
  }
}

ResponseProbabilities true_probabilities(const BehaviorMixture& mixture) {
  return {mixture.always_buy + mixture.persuadable, mixture.always_buy + mixture.anti_persuadable};
}

bool SegmentSpec::matches(std::span<const ValueIndex> x) const {
  for (const auto& [j, v] : predicate) {
    if (x[j] != v) return false;
  }
  return true;
}

void GeneratorConfig::validate() const {
  // Schema performs the per-variable checks.
  Schema schema(predictors, treatment, outcome);
  if (!in_unit_interval(mail_probability)) throw Error("mail_probability must lie in [0,1]");
  if (population_size < 1) throw Error("population_size must be at least 1");
  if (segments.empty()) throw Error("generator needs at least one segment");

  double weight_sum = 0.0;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    seg.mixture.validate();
    if (!(seg.weight >= 0.0)) throw Error(fmt::format("segment {} has negative weight", k));
    weight_sum += seg.weight;
    std::set<std::size_t> vars;
    for (const auto& [j, v] : seg.predicate) {
      if (j >= predictors.size()) throw Error(fmt::format("segment {} names unknown predictor", k));
      if (v >= predictors[j].arity()) {
        throw Error(fmt::format("segment {} uses a value outside '{}'", k, predictors[j].name));
      }
      if (!vars.insert(j).second) {
        throw Error(fmt::format("segment {} constrains '{}' twice", k, predictors[j].name));
      }
    }
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw Error(fmt::format("segment weights sum to {}, not 1", weight_sum));
  }

  std::uint64_t cells = 1;
  for (const auto& p : predictors) {
    cells *= p.arity();
    if (cells > kMaxEnumeratedCells) throw Error("predictor space too large to check segments");
  }
  std::vector<ValueIndex> x(predictors.size(), 0);
  for (std::uint64_t cell = 0; cell < cells; ++cell) {
    std::uint64_t rest = cell;
    for (std::size_t j = 0; j < predictors.size(); ++j) {
      x[j] = static_cast<ValueIndex>(rest % predictors[j].arity());
      rest /= predictors[j].arity();
    }
    std::size_t hits = 0;
    for (const auto& seg : segments) hits += seg.matches(x) ? 1 : 0;
    if (hits != 1) {
      throw Error(
          fmt::format("segment predicates must partition the predictor space ({} segments "
                      "match cell {})",
                      hits, cell));
    }
  }
}

GeneratedData generate(const GeneratorConfig& config) {
  config.validate();
  Schema schema(config.predictors, config.treatment, config.outcome);
  const auto n = static_cast<std::size_t>(config.population_size);
  std::vector<Record> records(n);
  std::vector<GroundTruth> truth(n);

  for (std::size_t i = 0; i < n; ++i) {
    auto rng = stream_for(config.seed, i);

    const double u_seg = rng.uniform();
    std::size_t k = config.segments.size() - 1;
    double acc = 0.0;
    for (std::size_t s = 0; s < config.segments.size(); ++s) {
      acc += config.segments[s].weight;
      if (u_seg < acc) {
        k = s;
        break;
      }
    }
    // Weight-zero trailing segments must never absorb rounding slack.
    while (config.segments[k].weight == 0.0 && k > 0) --k;
    const auto& seg = config.segments[k];

    Record& r = records[i];
    r.predictors.resize(config.predictors.size());
    for (std::size_t j = 0; j < config.predictors.size(); ++j) {
      r.predictors[j] = static_cast<ValueIndex>(rng.below(config.predictors[j].arity()));
    }
    for (const auto& [j, v] : seg.predicate) r.predictors[j] = v;

    const Behavior b = draw_behavior(seg.mixture, rng.uniform());
    r.treatment =
        rng.uniform() < config.mail_probability ? Treatment::kMailed : Treatment::kNotMailed;
    r.outcome = behavior_response(b, r.treatment);
    truth[i] = {k, b};
  }
  return {Dataset(std::move(schema), std::move(records)), std::move(truth)};
}

void write_truth_csv(std::ostream& out, std::span<const GroundTruth> truth) {
  out << "row_index,segment_id,behavior\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out << i << ',' << truth[i].segment << ',' << to_string(truth[i].behavior) << '\n';
  }
}

}  // namespace uplift
