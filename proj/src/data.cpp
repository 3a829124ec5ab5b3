#include "uplift/data.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <string>

#include "uplift/random.hpp"

namespace uplift {
namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void check_variable(const VariableSpec& v) {
  if (v.name.empty()) throw Error("variable with empty name");
  if (v.arity() < 2) {
    throw Error(fmt::format("variable '{}' has fewer than 2 values", v.name));
  }
  std::set<std::string_view> seen;
  for (const auto& label : v.values) {
    if (!seen.insert(label).second) {
      throw Error(fmt::format("duplicate value '{}' in variable '{}'", label, v.name));
    }
  }
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      if (line.front() == '#') continue;
      t.header = split_fields(line);
      have_header = true;
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() != t.header.size()) {
      throw Error(fmt::format("ragged row on line {}: expected {} fields, found {}", line_no,
                              t.header.size(), fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw Error("missing CSV header");
  std::set<std::string_view> names;
  for (const auto& h : t.header) {
    if (!names.insert(h).second) throw Error(fmt::format("duplicate column '{}'", h));
  }
  return t;
}

std::optional<std::size_t> column_of(const Table& t, std::string_view name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - t.header.begin());
}

}  // namespace

std::optional<ValueIndex> VariableSpec::find(std::string_view label) const {
  const auto it = std::find(values.begin(), values.end(), label);
  if (it == values.end()) return std::nullopt;
  return static_cast<ValueIndex>(it - values.begin());
}

Schema::Schema(std::vector<VariableSpec> predictors, VariableSpec treatment, VariableSpec outcome)
    : predictors_(std::move(predictors)),
      treatment_(std::move(treatment)),
      outcome_(std::move(outcome)) {
  for (const auto& p : predictors_) check_variable(p);
  check_variable(treatment_);
  check_variable(outcome_);
  if (treatment_.arity() != 2) throw Error("treatment variable must be binary");
  if (outcome_.arity() != 2) throw Error("outcome variable must be binary");
  std::set<std::string_view> names;
  for (const auto& p : predictors_) names.insert(p.name);
  if (names.size() != predictors_.size() || names.contains(treatment_.name) ||
      names.contains(outcome_.name) || treatment_.name == outcome_.name) {
    throw Error("variable names must be distinct");
  }
}

std::optional<std::size_t> Schema::find_predictor(std::string_view name) const {
  for (std::size_t j = 0; j < predictors_.size(); ++j) {
    if (predictors_[j].name == name) return j;
  }
  return std::nullopt;
}

std::string Schema::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](char tag, const VariableSpec& v) {
    h = fnv1a(std::string_view(&tag, 1), h);
    h = fnv1a(v.name, h);
    for (const auto& label : v.values) {
      h = fnv1a("\x1f", h);
      h = fnv1a(label, h);
    }
    h = fnv1a("\x1e", h);
  };
  for (const auto& p : predictors_) mix('x', p);
  mix('m', treatment_);
  mix('s', outcome_);
  return fmt::format("{:016x}", h);
}

Dataset::Dataset(Schema schema, std::vector<Record> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  const auto n = schema_.num_predictors();
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.predictors.size() != n) {
      throw Error(fmt::format("record {} has {} predictor values, schema has {}", i,
                              r.predictors.size(), n));
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (r.predictors[j] >= schema_.predictor(j).arity()) {
        throw Error(fmt::format("record {}: value index {} out of range for '{}'", i,
                                r.predictors[j], schema_.predictor(j).name));
      }
    }
    if (index_of(r.treatment) > 1 || index_of(r.outcome) > 1) {
      throw Error(fmt::format("record {}: invalid treatment or outcome", i));
    }
  }
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  std::vector<Record> out;
  out.reserve(rows.size());
  for (auto i : rows) out.push_back(records_.at(i));
  return Dataset(schema_, std::move(out));
}

Dataset Dataset::filter(Treatment m) const {
  std::vector<Record> out;
  for (const auto& r : records_) {
    if (r.treatment == m) out.push_back(r);
  }
  return Dataset(schema_, std::move(out));
}

CrossTab Dataset::counts() const {
  CrossTab c;
  for (const auto& r : records_) c.add(r.treatment, r.outcome);
  return c;
}

Dataset load_csv(std::istream& in, const SchemaConfig& config) {
  const Table t = read_table(in);
  const auto m_col = column_of(t, config.treatment_column);
  if (!m_col) throw Error(fmt::format("treatment column not found: '{}'", config.treatment_column));
  const auto s_col = column_of(t, config.outcome_column);
  if (!s_col) throw Error(fmt::format("outcome column not found: '{}'", config.outcome_column));
  if (*m_col == *s_col) throw Error("treatment and outcome must be different columns");
  if (config.treatment_m0 == config.treatment_m1) {
    throw Error("treatment mapping must name two distinct values");
  }
  if (config.outcome_s0 == config.outcome_s1) {
    throw Error("outcome mapping must name two distinct values");
  }

  std::vector<std::size_t> predictor_cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c != *m_col && c != *s_col) predictor_cols.push_back(c);
  }

  std::vector<std::set<std::string>> observed(predictor_cols.size());
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < predictor_cols.size(); ++j)
      observed[j].insert(row[predictor_cols[j]]);
  }
  std::vector<VariableSpec> predictors;
  for (std::size_t j = 0; j < predictor_cols.size(); ++j) {
    predictors.push_back({t.header[predictor_cols[j]],
                          std::vector<std::string>(observed[j].begin(), observed[j].end())});
  }
  Schema schema(std::move(predictors),
                VariableSpec{config.treatment_column, {config.treatment_m0, config.treatment_m1}},
                VariableSpec{config.outcome_column, {config.outcome_s0, config.outcome_s1}});

  std::vector<Record> records;
  records.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    Record r;
    r.predictors.reserve(predictor_cols.size());
    for (std::size_t j = 0; j < predictor_cols.size(); ++j) {
      r.predictors.push_back(*schema.predictor(j).find(row[predictor_cols[j]]));
    }
    const auto m = schema.treatment().find(row[*m_col]);
    if (!m) {
      throw Error(
          fmt::format("unmapped treatment value '{}' on line {}", row[*m_col], t.line_numbers[i]));
    }
    const auto s = schema.outcome().find(row[*s_col]);
    if (!s) {
      throw Error(
          fmt::format("unmapped outcome value '{}' on line {}", row[*s_col], t.line_numbers[i]));
    }
    r.treatment = static_cast<Treatment>(*m);
    r.outcome = static_cast<Outcome>(*s);
    records.push_back(std::move(r));
  }
  return Dataset(std::move(schema), std::move(records));
}

Dataset load_csv(std::istream& in, const Schema& schema) {
  const Table t = read_table(in);
  const auto m_col = column_of(t, schema.treatment().name);
  if (!m_col) throw Error(fmt::format("treatment column not found: '{}'", schema.treatment().name));
  const auto s_col = column_of(t, schema.outcome().name);
  if (!s_col) throw Error(fmt::format("outcome column not found: '{}'", schema.outcome().name));
  if (t.header.size() != schema.num_predictors() + 2) {
    throw Error(
        fmt::format("expected {} columns, found {}", schema.num_predictors() + 2, t.header.size()));
  }
  std::vector<std::size_t> predictor_cols;
  for (const auto& p : schema.predictors()) {
    const auto c = column_of(t, p.name);
    if (!c) throw Error(fmt::format("predictor column not found: '{}'", p.name));
    predictor_cols.push_back(*c);
  }

  std::vector<Record> records;
  records.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    Record r;
    for (std::size_t j = 0; j < predictor_cols.size(); ++j) {
      const auto v = schema.predictor(j).find(row[predictor_cols[j]]);
      if (!v) {
        throw Error(fmt::format("unknown value '{}' for predictor '{}' on line {}",
                                row[predictor_cols[j]], schema.predictor(j).name,
                                t.line_numbers[i]));
      }
      r.predictors.push_back(*v);
    }
    const auto m = schema.treatment().find(row[*m_col]);
    if (!m) {
      throw Error(
          fmt::format("unmapped treatment value '{}' on line {}", row[*m_col], t.line_numbers[i]));
    }
    const auto s = schema.outcome().find(row[*s_col]);
    if (!s) {
      throw Error(
          fmt::format("unmapped outcome value '{}' on line {}", row[*s_col], t.line_numbers[i]));
    }
    r.treatment = static_cast<Treatment>(*m);
    r.outcome = static_cast<Outcome>(*s);
    records.push_back(std::move(r));
  }
  return Dataset(schema, std::move(records));
}

void write_csv(std::ostream& out, const Dataset& d) {
  const auto& schema = d.schema();
  for (const auto& p : schema.predictors()) out << p.name << ',';
  out << schema.treatment().name << ',' << schema.outcome().name << '\n';
  for (const auto& r : d.records()) {
    for (std::size_t j = 0; j < r.predictors.size(); ++j) {
      out << schema.predictor(j).values[r.predictors[j]] << ',';
    }
    out << schema.treatment().values[index_of(r.treatment)] << ','
        << schema.outcome().values[index_of(r.outcome)] << '\n';
  }
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double train_fraction,
                                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train fraction must lie strictly between 0 and 1");
  }
  if (d.empty()) throw Error("cannot split an empty dataset");
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto k = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[k]);
  }
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  std::vector<std::size_t> train(order.begin(),
                                 order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {d.select(train), d.select(test)};
}

}  // namespace uplift
