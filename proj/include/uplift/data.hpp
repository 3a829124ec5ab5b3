#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uplift/types.hpp"

namespace uplift {

/// A categorical variable and its ordered value labels.
struct VariableSpec {
  std::string name;
  std::vector<std::string> values;

  std::size_t arity() const { return values.size(); }
  std::optional<ValueIndex> find(std::string_view label) const;

  friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

/// Predictors plus the binary treatment M (values: m0, m1) and outcome S (s0, s1).
class Schema {
 public:
  Schema(std::vector<VariableSpec> predictors, VariableSpec treatment, VariableSpec outcome);

  const std::vector<VariableSpec>& predictors() const { return predictors_; }
  const VariableSpec& predictor(std::size_t j) const { return predictors_.at(j); }
  std::size_t num_predictors() const { return predictors_.size(); }
  const VariableSpec& treatment() const { return treatment_; }
  const VariableSpec& outcome() const { return outcome_; }

  std::optional<std::size_t> find_predictor(std::string_view name) const;

  /// Stable 64-bit hash of names and value labels, hex encoded.
  std::string fingerprint() const;

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<VariableSpec> predictors_;
  VariableSpec treatment_;
  VariableSpec outcome_;
};

struct Record {
  std::vector<ValueIndex> predictors;
  Treatment treatment = Treatment::kNotMailed;
  Outcome outcome = Outcome::kNo;

  friend bool operator==(const Record&, const Record&) = default;
};

/// Immutable table of records conforming to a schema.
class Dataset {
 public:
  Dataset(Schema schema, std::vector<Record> records);

  const Schema& schema() const { return schema_; }
  std::span<const Record> records() const { return records_; }
  const Record& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Subset of rows in the given order, sharing the schema.
  Dataset select(std::span<const std::size_t> rows) const;
  /// Records whose treatment equals m.
  Dataset filter(Treatment m) const;

  CrossTab counts() const;

 private:
  Schema schema_;
  std::vector<Record> records_;
};

/// Names of the treatment and outcome columns and the CSV labels that map onto
/// (m0, m1) and (s0, s1).
struct SchemaConfig {
  std::string treatment_column = "M";
  std::string treatment_m0 = "0";
  std::string treatment_m1 = "1";
  std::string outcome_column = "S";
  std::string outcome_s0 = "0";
  std::string outcome_s1 = "1";
};

/// Reads a header-first comma-separated table. Predictor value sets are the
/// distinct labels observed, sorted lexicographically. Lines starting with '#'
/// before the header are ignored.
Dataset load_csv(std::istream& in, const SchemaConfig& config);

/// Reads a table that must conform to an existing schema (e.g. a test set for
/// a trained model). Column order may differ from the schema.
Dataset load_csv(std::istream& in, const Schema& schema);

void write_csv(std::ostream& out, const Dataset& d);

/// Deterministic shuffle-and-cut; train size is round(train_fraction * N).
std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double train_fraction,
                                             std::uint64_t seed);

}  // namespace uplift
