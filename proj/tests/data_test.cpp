#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "hol/data.hpp"
#include "hol/error.hpp"
#include "test_util.hpp"

namespace hol {
namespace {

CsvSchema interval_schema(int k = 0) {
  CsvSchema s;
  s.lo_column = "lo";
  s.hi_column = "hi";
  s.num_classes = k;
  return s;
}

TEST(LabelIntervalTest, PreciseAndContains) {
  EXPECT_TRUE(LabelInterval::precise(3).is_precise());
  const LabelInterval l{2, 4};
  EXPECT_FALSE(l.is_precise());
  EXPECT_TRUE(l.contains(2));
  EXPECT_TRUE(l.contains(4));
  EXPECT_FALSE(l.contains(5));
  EXPECT_EQ(l.width(), 3);
}

TEST(CsvTest, ThreeRowIntervalFile) {
  const auto table = parse_csv("x1,x2,lo,hi\n0.5,1,2,2\n1.5,2,1,3\n2.5,3,3,3\n");
  const auto data = dataset_from_table(table, interval_schema(3));
  EXPECT_EQ(data.size(), 3u);
  EXPECT_EQ(data.dims(), 2);
  EXPECT_EQ(data.count_precise(), 2u);
  EXPECT_EQ(data.labels[1], (LabelInterval{1, 3}));
  EXPECT_DOUBLE_EQ(data.features(2, 0), 2.5);
  EXPECT_EQ(data.feature_names, (std::vector<std::string>{"x1", "x2"}));
}

TEST(CsvTest, SingleLabelColumnGivesPreciseLabels) {
  CsvSchema s;
  s.label_column = "y";
  const auto data = dataset_from_table(parse_csv("a,y\n1,1\n2,2\n3,2\n"), s);
  EXPECT_EQ(data.count_precise(), 3u);
  EXPECT_EQ(data.num_classes, 2);
}

TEST(CsvTest, ReversedIntervalReportsRow) {
  try {
    dataset_from_table(parse_csv("x,lo,hi\n1,1,1\n2,3,1\n"), interval_schema(3));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("lo > hi at row 2"), std::string::npos) << e.what();
  }
}

TEST(CsvTest, LabelOutsideRangeRejected) {
  EXPECT_THROW(dataset_from_table(parse_csv("x,lo,hi\n1,1,4\n"), interval_schema(3)), ValidationError);
  EXPECT_THROW(dataset_from_table(parse_csv("x,lo,hi\n1,0,1\n"), interval_schema(3)), ValidationError);
}

TEST(CsvTest, NonNumericFeatureRejected) {
  try {
    dataset_from_table(parse_csv("x,lo,hi\n1,1,1\nabc,1,1\n"), interval_schema(2));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(CsvTest, MalformedRowReportsRow) {
  try {
    parse_csv("x,lo,hi\n1,1,1\n1,1\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(CsvTest, QuotedFieldsAndCrlf) {
  const auto t = parse_csv("name,v\r\n\"a,b\",1\r\n\"say \"\"hi\"\"\",2\r\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "a,b");
  EXPECT_EQ(t.rows[1][0], "say \"hi\"");
}

TEST(CsvTest, WriteThenLoadRoundTrip) {
  testing::TempDir dir;
  OrdinalDataset data;
  data.num_classes = 4;
  data.features.resize(2, 2);
  data.features << 0.1, -2.5, 1e-7, 3.0 / 7.0;
  data.labels = {{1, 3}, {4, 4}};
  data.group_ids = {7, std::nullopt};
  data.feature_names = {"a", "b"};
  write_csv(data, dir / "d.csv");
  CsvSchema s = interval_schema(4);
  s.group_column = "group";
  const auto back = load_csv(dir / "d.csv", s);
  EXPECT_EQ(back.labels, data.labels);
  EXPECT_EQ(back.group_ids, data.group_ids);
  EXPECT_EQ(back.features, data.features);
}

TEST(BinningTest, AbaloneRanges) {
  BinningSpec spec;
  spec.class_ranges = {{NumericRange::parse("(0,5]"), 1}, {NumericRange::parse("[8,11]"), 2},
                       {NumericRange::parse("[14,inf)"), 3}};
  spec.ambiguous_ranges = {{NumericRange::parse("[6,7]"), {1, 2}}, {NumericRange::parse("[12,13]"), {2, 3}}};
  const std::vector<double> rings = {6, 9, 1, 5, 7, 11, 12, 13, 14, 29, 0};
  const auto r = bin_numeric_target(rings, spec);
  EXPECT_EQ(r.labels[0], (LabelInterval{1, 2}));
  EXPECT_EQ(r.labels[1], LabelInterval::precise(2));
  EXPECT_EQ(r.labels[3], LabelInterval::precise(1));
  EXPECT_EQ(r.labels[6], (LabelInterval{2, 3}));
  EXPECT_EQ(r.labels[9], LabelInterval::precise(3));
  EXPECT_FALSE(r.labels[10].has_value());
  EXPECT_EQ(r.precise, 6u);
  EXPECT_EQ(r.interval, 4u);
  EXPECT_EQ(r.excluded, 1u);
}

TEST(BinningTest, AutoMpgHalfOpenBins) {
  BinningSpec spec;
  spec.class_ranges = {{NumericRange::parse("[9,18]"), 1}, {NumericRange::parse("(18,23]"), 2},
                       {NumericRange::parse("(23,31]"), 3}, {NumericRange::parse("(31,47]"), 4}};
  const std::vector<double> mpg = {20, 18, 18.1, 23, 31.5, 47, 47.1};
  const auto r = bin_numeric_target(mpg, spec);
  EXPECT_EQ(r.labels[0], LabelInterval::precise(2));
  EXPECT_EQ(r.labels[1], LabelInterval::precise(1));
  EXPECT_EQ(r.labels[2], LabelInterval::precise(2));
  EXPECT_EQ(r.labels[3], LabelInterval::precise(2));
  EXPECT_EQ(r.labels[4], LabelInterval::precise(4));
  EXPECT_EQ(r.labels[5], LabelInterval::precise(4));
  EXPECT_FALSE(r.labels[6].has_value());
}

TEST(BinningTest, TotalAndExclusive) {
  BinningSpec spec;
  spec.class_ranges = {{NumericRange::parse("(0,5]"), 1}, {NumericRange::parse("(7,10]"), 2}};
  spec.ambiguous_ranges = {{NumericRange::parse("(5,7]"), {1, 2}}};
  auto rng = make_rng(3, Stream::synthetic);
  std::vector<double> values;
  for (int i = 0; i < 500; ++i) values.push_back(-2.0 + 14.0 * uniform01(rng));
  const auto r = bin_numeric_target(values, spec);
  EXPECT_EQ(r.precise + r.interval + r.excluded, values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int hits = 0;
    for (const auto& c : spec.class_ranges) hits += c.range.contains(values[i]);
    for (const auto& a : spec.ambiguous_ranges) hits += a.range.contains(values[i]);
    EXPECT_LE(hits, 1);
    EXPECT_EQ(r.labels[i].has_value(), hits == 1);
  }
}

TEST(BinningTest, OverlappingRangesRejected) {
  BinningSpec spec;
  spec.class_ranges = {{NumericRange::parse("(0,5]"), 1}, {NumericRange::parse("[5,8]"), 2}};
  EXPECT_THROW(spec.validate(), ValidationError);
  spec.class_ranges[1].range = NumericRange::parse("(5,8]");
  EXPECT_NO_THROW(spec.validate());
  spec.ambiguous_ranges = {{NumericRange::parse("[4,6]"), {1, 2}}};
  EXPECT_THROW(spec.validate(), ValidationError);
}

TEST(BinningTest, RangeParseAndFormat) {
  const auto r = NumericRange::parse("[14, inf)");
  EXPECT_TRUE(r.lower_inclusive);
  EXPECT_FALSE(r.upper_inclusive);
  EXPECT_TRUE(std::isinf(r.upper));
  EXPECT_EQ(r.to_string(), "[14,inf)");
  EXPECT_THROW(NumericRange::parse("5,6"), ValidationError);
  EXPECT_THROW(NumericRange::parse("(6,5]"), ValidationError);
}

TEST(StandardizeTest, TwoPointPopulationStd) {
  OrdinalDataset train;
  train.features.resize(2, 2);
  train.features << 1, 4, 3, 4;
  train.labels = {LabelInterval::precise(1), LabelInterval::precise(2)};
  OrdinalDataset test = train;
  test.features.resize(1, 2);
  test.features << 2, 9;
  test.labels = {LabelInterval::precise(1)};
  const std::vector<OrdinalDataset> others = {test};
  const auto r = standardize(train, others);
  EXPECT_DOUBLE_EQ(r.train.features(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(r.train.features(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(r.train.features(0, 1), 0.0);  // constant column
  EXPECT_DOUBLE_EQ(r.others[0].features(0, 0), 0.0);  // equals the train mean
  EXPECT_DOUBLE_EQ(r.others[0].features(0, 1), 0.0);
}

TEST(StandardizeTest, MeanZeroUnitStd) {
  auto rng = make_rng(11, Stream::synthetic);
  const auto data = testing::random_ordinal(rng, 40, 3, 3, 0.3, 5.0);
  const auto r = standardize(data);
  for (int j = 0; j < 3; ++j) {
    const auto col = r.train.features.col(j);
    EXPECT_NEAR(col.mean(), 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt(col.array().square().mean()), 1.0, 1e-12);
  }
}

TEST(GroupKFoldTest, SingletonsLeaveOneOut) {
  OrdinalDataset data;
  data.features = RowMatrix::Zero(30, 1);
  data.labels.assign(30, LabelInterval::precise(1));
  const auto folds = group_kfold(data, 30, 5);
  ASSERT_EQ(folds.size(), 30u);
  for (const auto& f : folds) {
    EXPECT_EQ(f.validation.size(), 1u);
    EXPECT_EQ(f.train.size(), 29u);
  }
}

TEST(GroupKFoldTest, WholeGroupsPerFold) {
  OrdinalDataset data;
  data.features = RowMatrix::Zero(10, 1);
  data.labels.assign(10, LabelInterval::precise(1));
  for (int i = 0; i < 10; ++i) data.group_ids.emplace_back(i % 2 == 0 ? 100 : 200);
  const auto folds = group_kfold(data, 2, 9);
  for (const auto& f : folds) {
    ASSERT_EQ(f.validation.size(), 5u);
    std::set<std::int64_t> groups;
    for (int i : f.validation) groups.insert(*data.group_ids[static_cast<std::size_t>(i)]);
    EXPECT_EQ(groups.size(), 1u);
  }
}

TEST(GroupKFoldTest, PartitionBalanceAndDeterminism) {
  OrdinalDataset data;
  data.features = RowMatrix::Zero(57, 1);
  data.labels.assign(57, LabelInterval::precise(1));
  for (int i = 0; i < 57; ++i) {
    if (i % 5 == 0) data.group_ids.emplace_back(std::nullopt);
    else data.group_ids.emplace_back(i / 3);
  }
  const auto folds = group_kfold(data, 7, 42);
  EXPECT_EQ(folds.size(), 7u);
  std::vector<int> seen(57, 0);
  std::set<std::int64_t> group_set;
  std::vector<int> groups_per_fold;
  for (const auto& f : folds) {
    std::set<std::string> fold_groups;
    for (int i : f.validation) {
      ++seen[static_cast<std::size_t>(i)];
      const auto& g = data.group_ids[static_cast<std::size_t>(i)];
      fold_groups.insert(g ? "g" + std::to_string(*g) : "s" + std::to_string(i));
    }
    groups_per_fold.push_back(static_cast<int>(fold_groups.size()));
    EXPECT_EQ(f.train.size() + f.validation.size(), 57u);
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  const auto [lo, hi] = std::minmax_element(groups_per_fold.begin(), groups_per_fold.end());
  EXPECT_LE(*hi - *lo, 1);
  const auto again = group_kfold(data, 7, 42);
  for (std::size_t f = 0; f < folds.size(); ++f) EXPECT_EQ(folds[f].validation, again[f].validation);
}

TEST(GroupKFoldTest, TooFewGroups) {
  OrdinalDataset data;
  data.features = RowMatrix::Zero(4, 1);
  data.labels.assign(4, LabelInterval::precise(1));
  data.group_ids = {1, 1, 2, 2};
  EXPECT_THROW(group_kfold(data, 3, 0), ValidationError);
  EXPECT_THROW(group_kfold(data, 1, 0), ValidationError);
}

TEST(DatasetTest, ValidateCatchesBrokenInvariants) {
  OrdinalDataset data;
  data.num_classes = 3;
  data.features = RowMatrix::Zero(2, 1);
  data.labels = {LabelInterval::precise(1), LabelInterval{2, 3}};
  EXPECT_NO_THROW(data.validate());
  data.features(0, 0) = std::nan("");
  EXPECT_THROW(data.validate(), ValidationError);
  data.features(0, 0) = 0.0;
  data.labels[1] = {3, 2};
  EXPECT_THROW(data.validate(), ValidationError);
  data.labels[1] = {2, 4};
  EXPECT_THROW(data.validate(), ValidationError);
  data.num_classes = 1;
  EXPECT_THROW(data.validate(), ValidationError);
}

}  // namespace
}  // namespace hol
