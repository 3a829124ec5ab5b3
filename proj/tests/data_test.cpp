#include "uplift/data.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "fixtures.hpp"

namespace uplift {
namespace {

Dataset parse(const std::string& csv, const SchemaConfig& config = {}) {
  std::istringstream in(csv);
  return load_csv(in, config);
}

TEST(LoadCsv, ThreeRowsTwoPredictors) {
  const auto d = parse("gender,mem,M,S\nf,low,0,1\nm,high,1,0\nf,high,1,1\n");
  EXPECT_EQ(d.size(), 3u);
  ASSERT_EQ(d.schema().num_predictors(), 2u);
  EXPECT_EQ(d.schema().predictor(0).name, "gender");
  EXPECT_EQ(d.schema().predictor(1).values, (std::vector<std::string>{"high", "low"}));
  EXPECT_EQ(d.schema().treatment().name, "M");
  EXPECT_EQ(d[0].treatment, Treatment::kNotMailed);
  EXPECT_EQ(d[0].outcome, Outcome::kYes);
  EXPECT_EQ(d[0].predictors, (std::vector<ValueIndex>{0, 1}));
  EXPECT_EQ(d[2].treatment, Treatment::kMailed);
}

TEST(LoadCsv, CustomLabelsAndColumnPositions) {
  SchemaConfig cfg;
  cfg.treatment_column = "mailed";
  cfg.treatment_m0 = "no";
  cfg.treatment_m1 = "yes";
  cfg.outcome_column = "subscribed";
  cfg.outcome_s0 = "N";
  cfg.outcome_s1 = "Y";
  const auto d = parse("subscribed,x,mailed\nY,a,yes\nN,b,no\n", cfg);
  EXPECT_EQ(d[0].treatment, Treatment::kMailed);
  EXPECT_EQ(d[0].outcome, Outcome::kYes);
  EXPECT_EQ(d[1].treatment, Treatment::kNotMailed);
  EXPECT_EQ(d[1].outcome, Outcome::kNo);
}

TEST(LoadCsv, SkipsLeadingCommentsAndCarriageReturns) {
  const auto d = parse("# provenance\nx,M,S\r\na,0,1\r\nb,1,0\r\n");
  EXPECT_EQ(d.size(), 2u);
}

TEST(LoadCsv, MissingTreatmentColumn) {
  try {
    parse("x,S\na,1\nb,0\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("treatment column not found"), std::string::npos);
  }
}

TEST(LoadCsv, UnmappedTreatmentValue) {
  try {
    parse("x,M,S\na,0,1\nb,2,0\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unmapped treatment value"), std::string::npos);
  }
}

TEST(LoadCsv, OtherErrors) {
  EXPECT_THROW(parse("x,M\na,0\nb,1\n"), Error);        // no outcome
  EXPECT_THROW(parse("x,M,S\na,0,1\nb,1\n"), Error);    // ragged
  EXPECT_THROW(parse("x,M,S\na,0,7\nb,1,0\n"), Error);  // unmapped outcome
  EXPECT_THROW(parse("x,M,S\na,0,1\na,1,0\n"), Error);  // constant predictor
  SchemaConfig same;
  same.treatment_m1 = "0";
  EXPECT_THROW(parse("x,M,S\na,0,1\nb,0,0\n", same), Error);  // degenerate mapping
  EXPECT_THROW(parse(""), Error);
}

TEST(LoadCsv, ConformsToExistingSchema) {
  const auto train = parse("x,y,M,S\na,p,0,1\nb,q,1,0\nc,p,1,1\n");
  std::istringstream in("M,S,y,x\n1,0,q,c\n0,0,p,a\n");
  const auto test = load_csv(in, train.schema());
  EXPECT_EQ(test.schema(), train.schema());
  EXPECT_EQ(test[0].predictors, (std::vector<ValueIndex>{2, 1}));

  std::istringstream unknown("x,y,M,S\nz,p,0,1\n");
  EXPECT_THROW(load_csv(unknown, train.schema()), Error);
}

TEST(LoadCsv, WriteThenReadPreservesRecords) {
  const auto d = parse("x,y,M,S\na,p,0,1\nb,q,1,0\nc,p,1,1\n");
  std::ostringstream out;
  write_csv(out, d);
  std::istringstream in(out.str());
  const auto back = load_csv(in, d.schema());
  EXPECT_TRUE(std::equal(d.records().begin(), d.records().end(), back.records().begin(),
                         back.records().end()));
}

TEST(Schema, Invariants) {
  using testing::binary_outcome;
  using testing::binary_treatment;
  EXPECT_THROW(Schema({{"x", {"a"}}}, binary_treatment(), binary_outcome()), Error);
  EXPECT_THROW(Schema({{"x", {"a", "a"}}}, binary_treatment(), binary_outcome()), Error);
  EXPECT_THROW(Schema({{"M", {"a", "b"}}}, binary_treatment(), binary_outcome()), Error);
  EXPECT_THROW(Schema({}, VariableSpec{"M", {"0", "1", "2"}}, binary_outcome()), Error);
}

TEST(Schema, FingerprintTracksNamesAndLabels) {
  const auto a = testing::make_schema({{"x", {"a", "b"}}});
  const auto b = testing::make_schema({{"x", {"a", "b"}}});
  const auto c = testing::make_schema({{"x", {"a", "c"}}});
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
  EXPECT_EQ(a.fingerprint().size(), 16u);
}

TEST(Dataset, RejectsNonconformingRecords) {
  const auto schema = testing::make_schema({{"x", {"a", "b"}}});
  EXPECT_THROW(Dataset(schema, {Record{{2}, Treatment::kMailed, Outcome::kYes}}), Error);
  EXPECT_THROW(Dataset(schema, {Record{{0, 1}, Treatment::kMailed, Outcome::kYes}}), Error);
}

Dataset ten_records() {
  std::vector<Record> rs;
  for (ValueIndex i = 0; i < 10; ++i) {
    rs.push_back({{i}, i % 2 ? Treatment::kMailed : Treatment::kNotMailed, Outcome::kNo});
  }
  std::vector<std::string> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(std::to_string(i));
  return Dataset(testing::make_schema({{"id", labels}}), rs);
}

TEST(SplitTrainTest, SizesFollowRoundedFraction) {
  const auto [train, test] = split_train_test(ten_records(), 0.7, 1);
  EXPECT_EQ(train.size(), 7u);
  EXPECT_EQ(test.size(), 3u);
}

TEST(SplitTrainTest, DeterministicGivenSeed) {
  const auto d = ten_records();
  const auto a = split_train_test(d, 0.7, 1);
  const auto b = split_train_test(d, 0.7, 1);
  EXPECT_TRUE(std::ranges::equal(a.first.records(), b.first.records()));
  EXPECT_TRUE(std::ranges::equal(a.second.records(), b.second.records()));
}

TEST(SplitTrainTest, PartitionProperty) {
  const auto d = ten_records();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [train, test] = split_train_test(d, 0.3 + 0.02 * static_cast<double>(seed), seed);
    std::vector<ValueIndex> ids;
    for (const auto& r : train.records()) ids.push_back(r.predictors[0]);
    for (const auto& r : test.records()) ids.push_back(r.predictors[0]);
    std::ranges::sort(ids);
    std::vector<ValueIndex> expected(10);
    for (ValueIndex i = 0; i < 10; ++i) expected[i] = i;
    EXPECT_EQ(ids, expected) << "seed " << seed;
  }
}

TEST(SplitTrainTest, Errors) {
  const Dataset empty(testing::make_schema({{"x", {"a", "b"}}}), {});
  EXPECT_THROW(split_train_test(empty, 0.7, 1), Error);
  EXPECT_THROW(split_train_test(ten_records(), 1.0, 1), Error);
  EXPECT_THROW(split_train_test(ten_records(), 0.0, 1), Error);
}

}  // namespace
}  // namespace uplift
