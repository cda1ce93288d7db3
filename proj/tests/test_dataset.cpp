#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "msis/dataset.hpp"
#include "msis/funnel_sim.hpp"
#include "support.hpp"

namespace msis {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string header(std::size_t d) {
  std::string h = "id,timestamp";
  for (std::size_t j = 0; j < d; ++j) h += ",f" + std::to_string(j);
  return h + ",label_credit,label_draw_30,label_draw_90,label_mob1,label_mob3,label_mob6\n";
}

TEST(Csv, RoundTripSimulatorExamples) {
  test::TempDir dir("csv");
  const Population pop = generate(test::small_sim(1000, 12));
  const Examples examples = observe(pop);
  save_csv(examples, dir / "d.csv");
  EXPECT_EQ(load_csv(dir / "d.csv"), examples);

  const auto cf = pop.counterfactuals();
  save_counterfactual_csv(cf, dir / "cf.csv");
  EXPECT_EQ(load_counterfactual_csv(dir / "cf.csv"), cf);
}

TEST(Csv, EmptyLabelFieldIsAbsent) {
  test::TempDir dir("csv");
  write_text(dir / "a.csv", header(2) + "5,3,0.5,-1,1,0,0,,1,\n");
  const Examples e = load_csv(dir / "a.csv");
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].id, 5);
  EXPECT_EQ(e[0].timestamp, 3);
  EXPECT_EQ(e[0].features, (std::vector<double>{0.5, -1.0}));
  EXPECT_EQ(e[0].label(Target::kCredit), true);
  EXPECT_EQ(e[0].label(Target::kDraw90), false);
  EXPECT_FALSE(e[0].label(Target::kMob1));
  EXPECT_EQ(e[0].label(Target::kMob3), true);
  EXPECT_FALSE(e[0].label(Target::kMob6));
}

void expect_parse_error_at(const std::filesystem::path& path, const std::string& where) {
  try {
    load_csv(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
  }
}

TEST(Csv, MalformedRowsReportLine) {
  test::TempDir dir("csv");
  write_text(dir / "short.csv", header(2) + "1,0,0.1,0.2,1,0,0,,,\n2,0,0.1,1,0,0,,,\n");
  expect_parse_error_at(dir / "short.csv", ":3:");
  write_text(dir / "nan.csv", header(2) + "1,0,abc,0.2,1,0,0,,,\n");
  expect_parse_error_at(dir / "nan.csv", ":2:");
  write_text(dir / "credit.csv", header(1) + "1,0,0.1,1,,,,,\n1,0,0.1,,,,,,\n");
  expect_parse_error_at(dir / "credit.csv", ":3:");
  write_text(dir / "label.csv", header(1) + "1,0,0.1,2,,,,,\n");
  expect_parse_error_at(dir / "label.csv", ":2:");
  write_text(dir / "col.csv", "id,timestamp,f0,label_credit\n");
  expect_parse_error_at(dir / "col.csv", ":1:");
  EXPECT_THROW(load_csv(dir / "missing.csv"), ParseError);
}

TEST(Split, OutOfTimeArithmetic) {
  Examples ex = test::random_examples(100, 3, 1);
  for (std::size_t i = 0; i < ex.size(); ++i) ex[i].timestamp = static_cast<int>(i);
  const Split s = split_oot(ex, 80, 42);
  EXPECT_EQ(s.test.size(), 20u);
  EXPECT_EQ(s.train.size(), 64u);
  EXPECT_EQ(s.validation.size(), 16u);
  for (const auto& e : s.test) EXPECT_GE(e.timestamp, 80);
  for (const auto& e : s.train) EXPECT_LT(e.timestamp, 80);
  std::set<std::int64_t> ids;
  for (const Examples* part : {&s.train, &s.validation, &s.test}) {
    for (const auto& e : *part) ids.insert(e.id);
  }
  EXPECT_EQ(ids.size(), 100u);
  EXPECT_EQ(split_oot(ex, 80, 42).train, s.train);
}

TEST(Split, EmptySidesRejected) {
  Examples ex = test::random_examples(10, 2, 1);
  EXPECT_THROW(split_oot(ex, 1000, 1), ConfigError);
  EXPECT_THROW(split_oot(ex, 0, 1), ConfigError);
}

TEST(Standardize, ZeroMeanUnitVarianceAndConstantColumn) {
  Examples ex = test::random_examples(50, 3, 2);
  for (auto& e : ex) e.features[1] = 4.0;
  const Standardizer s = Standardizer::fit(ex);
  const Examples out = s.transform(ex);
  double mean0 = 0.0;
  double sq0 = 0.0;
  for (const auto& e : out) {
    EXPECT_EQ(e.features[1], 0.0);
    mean0 += e.features[0];
    sq0 += e.features[0] * e.features[0];
  }
  EXPECT_NEAR(mean0 / 50.0, 0.0, 1e-12);
  EXPECT_NEAR(sq0 / 50.0, 1.0, 1e-12);
  EXPECT_EQ(s.stddev()[1], Standardizer::kStdFloor);
}

TEST(Batches, SizesAndCoverage) {
  const Examples ex = test::random_examples(10, 2, 3);
  const auto bs = batches(ex, 4, 9, 0);
  ASSERT_EQ(bs.size(), 3u);
  EXPECT_EQ(bs[0].size(), 4u);
  EXPECT_EQ(bs[1].size(), 4u);
  EXPECT_EQ(bs[2].size(), 2u);
  std::set<std::int64_t> ids;
  for (const auto& b : bs) ids.insert(b.ids.begin(), b.ids.end());
  EXPECT_EQ(ids.size(), 10u);
  EXPECT_THROW(batches(ex, 0, 9), ConfigError);
}

TEST(Batches, OrderIsPureFunctionOfSeedAndEpoch) {
  EXPECT_EQ(epoch_order(50, 3, 7), epoch_order(50, 3, 7));
  EXPECT_NE(epoch_order(50, 3, 7), epoch_order(50, 3, 8));
  EXPECT_NE(epoch_order(50, 3, 7), epoch_order(50, 4, 7));
  auto sorted = epoch_order(50, 3, 7);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Batches, UnobservedSlotsArePoisoned) {
  const Examples ex = test::random_examples(6, 2, 4, false);
  const Batch b = make_batch(ex);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(b.mask_column(Target::kMob1)[i], 0.0);
    EXPECT_TRUE(std::isnan(b.label_column(Target::kMob1)[i]));
    EXPECT_THROW(b.label(Target::kMob1, i), ContractError);
    EXPECT_EQ(b.label(Target::kCredit, i), *ex[i].label(Target::kCredit) ? 1.0 : 0.0);
  }
  EXPECT_EQ(b.features(2, 1), ex[2].features[1]);
}

}  // namespace
}  // namespace msis
