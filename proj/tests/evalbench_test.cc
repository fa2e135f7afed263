//
// Copyright 2026 The PrivTree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "privtree/evalbench.h"
#include "privtree/markov.h"
#include "privtree/random.h"
#include "privtree/spatial.h"

namespace privtree {
namespace {

using ::testing::HasSubstr;

SpatialDomain Unit(size_t d) {
  return *Box::Create(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
}

TEST(WorkloadTest, SizeClassNames) {
  EXPECT_EQ(*ParseSizeClass("small"), SizeClass::kSmall);
  EXPECT_EQ(*ParseSizeClass("medium"), SizeClass::kMedium);
  EXPECT_EQ(*ParseSizeClass("large"), SizeClass::kLarge);
  EXPECT_FALSE(ParseSizeClass("huge").ok());
  EXPECT_EQ(SizeClassName(SizeClass::kLarge), "large");
}

TEST(WorkloadTest, VolumeFractionsStayInClass) {
  const SpatialDomain dom = *Box::Create({-3, 10}, {5, 12});
  for (SizeClass c : {SizeClass::kSmall, SizeClass::kMedium, SizeClass::kLarge}) {
    const auto [lo, hi] = VolumeFractionRange(c);
    const auto qs = *GenerateWorkload(dom, {c, 2000, 7});
    ASSERT_EQ(qs.size(), 2000u);
    double min_f = 1, max_f = 0;
    for (const auto& q : qs) {
      EXPECT_TRUE(dom.Covers({q.lo, q.hi}));
      const double f = VolumeFraction(dom, q);
      min_f = std::min(min_f, f);
      max_f = std::max(max_f, f);
      EXPECT_GE(f, lo * (1 - 1e-9));
      EXPECT_LT(f, hi);
    }
    // The log-uniform draw reaches both ends of the class.
    EXPECT_LT(min_f, lo * 1.1);
    EXPECT_GT(max_f, hi / 1.1);
  }
  EXPECT_EQ(VolumeFractionRange(SizeClass::kSmall),
            (std::pair<double, double>{1e-4, 1e-3}));
}

TEST(WorkloadTest, EmptyAndSeeded) {
  EXPECT_TRUE(GenerateWorkload(Unit(2), {SizeClass::kSmall, 0, 1})->empty());
  const auto a = *GenerateWorkload(Unit(3), {SizeClass::kMedium, 50, 9});
  const auto b = *GenerateWorkload(Unit(3), {SizeClass::kMedium, 50, 9});
  const auto c = *GenerateWorkload(Unit(3), {SizeClass::kMedium, 50, 10});
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].lo, b[i].lo);
    EXPECT_EQ(a[i].hi, b[i].hi);
  }
  EXPECT_NE(a[0].lo, c[0].lo);
  EXPECT_FALSE(GenerateWorkload(Unit(2), {SizeClass::kSmall, -1, 1}).ok());
}

TEST(VolumeFractionTest, ClipsToDomain) {
  const SpatialDomain dom = Unit(2);
  EXPECT_DOUBLE_EQ(VolumeFraction(dom, *RangeQuery::Create({0, 0}, {0.5, 0.5})),
                   0.25);
  EXPECT_DOUBLE_EQ(VolumeFraction(dom, *RangeQuery::Create({-1, 0}, {0.5, 2})),
                   0.5);
  EXPECT_DOUBLE_EQ(VolumeFraction(dom, *RangeQuery::Create({2, 2}, {3, 3})), 0);
}

TEST(MetricsTest, RelativeError) {
  EXPECT_DOUBLE_EQ(*RelativeError(110, 100, 50), 0.1);
  EXPECT_DOUBLE_EQ(*RelativeError(42, 42, 1), 0);
  EXPECT_DOUBLE_EQ(*RelativeError(5, 0, 50), 0.1);
  EXPECT_DOUBLE_EQ(*RelativeError(-5, 0, 50), 0.1);
  EXPECT_FALSE(RelativeError(1, 1, 0).ok());
  EXPECT_FALSE(RelativeError(1, -1, 1).ok());
  EXPECT_DOUBLE_EQ(DefaultSmoothing(200000), 200);
}

TEST(MetricsTest, TopKPrecision) {
  std::vector<std::string> a, b, half;
  for (int i = 0; i < 50; ++i) {
    a.push_back("s" + std::to_string(i));
    b.push_back("t" + std::to_string(i));
    half.push_back(i < 25 ? a.back() : b.back());
  }
  EXPECT_DOUBLE_EQ(*TopKPrecision(a, a, 50), 1.0);
  EXPECT_DOUBLE_EQ(*TopKPrecision(a, b, 50), 0.0);
  EXPECT_DOUBLE_EQ(*TopKPrecision(half, a, 50), 0.5);
  EXPECT_FALSE(TopKPrecision(a, a, 0).ok());
}

TEST(MetricsTest, TotalVariation) {
  EXPECT_DOUBLE_EQ(*TotalVariation(std::vector<double>{0.5, 0.5},
                                   std::vector<double>{0.5, 0.5}),
                   0);
  EXPECT_DOUBLE_EQ(*TotalVariation(std::vector<double>{1, 0},
                                   std::vector<double>{0, 1}),
                   1);
  EXPECT_DOUBLE_EQ(*TotalVariation(std::vector<double>{0.5, 0.5},
                                   std::vector<double>{0.75, 0.25}),
                   0.25);
  // Unnormalized counts and padding.
  EXPECT_DOUBLE_EQ(*TotalVariation(std::vector<double>{2, 2},
                                   std::vector<double>{3, 1, 0, 0}),
                   0.25);
  EXPECT_DOUBLE_EQ(*TotalVariation(std::vector<double>{1},
                                   std::vector<double>{0, 1}),
                   1);
  EXPECT_FALSE(TotalVariation(std::vector<double>{0, 0},
                              std::vector<double>{1}).ok());
  EXPECT_FALSE(TotalVariation(std::vector<double>{-1, 2},
                              std::vector<double>{1}).ok());
}

TEST(MetricsTest, LengthHistogram) {
  EXPECT_EQ(LengthHistogram({{}, {2, 3}, {2}, {3, 3}}),
            (std::vector<double>{1, 1, 2}));
  EXPECT_TRUE(LengthHistogram({}).empty() ||
              LengthHistogram({}) == std::vector<double>{0});
}

TEST(MetricsTest, MedianAndMean) {
  EXPECT_DOUBLE_EQ(Median({3, 1, 2}), 2);
  EXPECT_DOUBLE_EQ(Median({4, 1, 2, 3}), 2.5);
  EXPECT_DOUBLE_EQ(Mean(std::vector<double>{1, 2, 6}), 3);
}

TEST(MetricsTest, SignTest) {
  EXPECT_DOUBLE_EQ(SignTestPValue(0, 0), 1);
  EXPECT_DOUBLE_EQ(SignTestPValue(5, 5), 1);
  // Two-sided: 2 * 2^-20.
  EXPECT_NEAR(SignTestPValue(20, 0), 2 * std::pow(0.5, 20), 1e-18);
  EXPECT_NEAR(SignTestPValue(0, 20), 2 * std::pow(0.5, 20), 1e-18);
  // 2 * P[X >= 15] for X ~ Bin(20, 1/2) = 2 * 21700 / 2^20.
  EXPECT_NEAR(SignTestPValue(15, 5), 2 * 21700.0 / 1048576, 1e-12);
}

TEST(ScoreEstimatesTest, Summaries) {
  const auto r = *ScoreEstimates({110, 5, 50}, {100, 0, 50}, 50);
  EXPECT_EQ(r.errors.size(), 3u);
  EXPECT_DOUBLE_EQ(r.median_error, 0.1);
  EXPECT_NEAR(r.mean_error, 0.2 / 3, 1e-15);
  EXPECT_FALSE(ScoreEstimates({1}, {1, 2}, 1).ok());
  const auto j = ReportToJson(r);
  EXPECT_DOUBLE_EQ(j.at("median_relative_error").get<double>(), 0.1);
}

TEST(ExactRangeCountTest, Examples) {
  // Points at the centres of a 10 x 10 grid.
  std::vector<double> c;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      c.push_back((i + 0.5) / 10);
      c.push_back((j + 0.5) / 10);
    }
  }
  const SpatialDataset data = *SpatialDataset::Create(Unit(2), c);
  EXPECT_EQ(*ExactRangeCount(data, *RangeQuery::Create({0, 0}, {1, 1})), 100);
  EXPECT_EQ(*ExactRangeCount(data, *RangeQuery::Create({0.5, 0}, {1, 1})), 50);
  EXPECT_EQ(*ExactRangeCount(data, *RangeQuery::Create({0.01, 0}, {0.02, 1})), 0);
  EXPECT_EQ(*ExactRangeCount(data, *RangeQuery::Create({0.3, 0.3}, {0.3, 0.3})),
            0);
  EXPECT_EQ(ExactRangeCount(data, *RangeQuery::Create({0}, {1})).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(ExactRangeCountTest, MatchesOracleAndNoiselessTree) {
  Rng rng(4);
  std::vector<double> c;
  for (int i = 0; i < 3000; ++i) {
    // Quantized so that boundaries are hit.
    c.push_back(rng.UniformInt(17) / 16.0);
    c.push_back(rng.Uniform01());
  }
  const SpatialDataset data = *SpatialDataset::Create(Unit(2), c);
  ReleaseOptions opt;
  opt.build.noiseless = true;
  const DecompTree tree = *ReleasePrivTree(data, 1, rng, opt);
  for (size_t id = 0; id < tree.size(); ++id) {
    const Box& r = tree.node(id).region;
    const RangeQuery q = *RangeQuery::Create(r.lo, r.hi);
    // On a cell, the half-open count is the cell's own count.
    EXPECT_EQ(*ExactRangeCount(data, q), oracle::CountInBox(data, r.lo, r.hi));
    EXPECT_NEAR(*RangeCount(tree, q), *ExactRangeCount(data, q), 1e-9);
  }
}

SequenceDataset Seqs() {
  const Alphabet ab = *Alphabet::Create({"A", "B"});
  return *TruncateSequences(ab, {{2, 3}, {3}, {2, 2, 3}, {2, 2, 2, 3}}, 10);
}

TEST(ExactStringCountTest, Examples) {
  const SequenceDataset d = Seqs();
  EXPECT_EQ(*ExactStringCount(d, std::vector<int>{2}), 6);
  EXPECT_EQ(*ExactStringCount(d, std::vector<int>{2, 2}), 3);
  EXPECT_EQ(*ExactStringCount(d, std::vector<int>{2, 3}), 3);
  EXPECT_EQ(*ExactStringCount(d, std::vector<int>{3, kEndSymbol}), 4);
  EXPECT_EQ(*ExactStringCount(d, std::vector<int>{3, 2}), 0);
  EXPECT_FALSE(ExactStringCount(d, std::vector<int>{}).ok());
  EXPECT_FALSE(ExactStringCount(d, std::vector<int>{kStartSymbol}).ok());
}

TEST(ExactTopKTest, Ranking) {
  const auto top = *ExactTopKStrings(Seqs(), 4);
  ASSERT_EQ(top.size(), 4u);
  EXPECT_EQ(top[0].symbols, (std::vector<int>{2}));
  EXPECT_EQ(top[0].estimate, 6);
  EXPECT_EQ(top[1].symbols, (std::vector<int>{3}));
  // Ties at 3 broken shorter first, then by symbol order: AA before AB.
  EXPECT_EQ(top[2].symbols, (std::vector<int>{2, 2}));
  EXPECT_EQ(top[3].symbols, (std::vector<int>{2, 3}));
}

TEST(FormatTableTest, AlignsColumns) {
  const std::string t = FormatTable({"a", "long"}, {{"xyz", "1"}, {"b", "22"}});
  EXPECT_THAT(t, HasSubstr("a    long"));
  EXPECT_THAT(t, HasSubstr("xyz  1"));
}

TEST(RunTrialsTest, IndependentOfJobCount) {
  auto fn = [](int trial, Rng& rng) -> absl::StatusOr<double> {
    return trial * 1000.0 + rng.Uniform01();
  };
  const auto one = *RunTrials<double>(16, 1, 5, fn);
  const auto four = *RunTrials<double>(16, 4, 5, fn);
  EXPECT_EQ(one, four);
  Rng expected = Rng(5).Split(3);
  EXPECT_EQ(one[3], 3000.0 + expected.Uniform01());
}

TEST(RunTrialsTest, ReturnsFirstErrorByIndex) {
  auto fn = [](int trial, Rng&) -> absl::StatusOr<int> {
    if (trial == 2) return absl::InvalidArgumentError("two");
    if (trial == 5) return absl::InternalError("five");
    return trial;
  };
  const auto s = RunTrials<int>(8, 3, 0, fn).status();
  EXPECT_EQ(s.code(), absl::StatusCode::kInvalidArgument);
}

TEST(GaussianMixtureTest, Deterministic) {
  const SpatialDataset a = *GaussianMixture2D(1000, 3);
  const SpatialDataset b = *GaussianMixture2D(1000, 3);
  EXPECT_EQ(a.coords(), b.coords());
  EXPECT_EQ(a.size(), 1000u);
  EXPECT_EQ(a.domain(), Unit(2));
}

TEST(EvaluateSpatialTest, SmallRunIsConsistentAndJobIndependent) {
  const SpatialDataset data = *GaussianMixture2D(20000, 1);
  SpatialEvalOptions opt;
  opt.num_queries = 100;
  opt.trials = 4;
  opt.seed = 3;
  const auto serial = *EvaluateSpatial(data, opt);
  opt.jobs = 4;
  const auto parallel = *EvaluateSpatial(data, opt);
  ASSERT_EQ(serial.trials.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(serial.trials[i].privtree_median, parallel.trials[i].privtree_median);
    EXPECT_EQ(serial.trials[i].grid_median, parallel.trials[i].grid_median);
    EXPECT_EQ(serial.trials[i].privtree_nodes, parallel.trials[i].privtree_nodes);
  }
  EXPECT_EQ(serial.privtree_wins + serial.grid_wins <= 4, true);
  EXPECT_EQ(SpatialEvalToJson(serial)["trials"].size(), 4u);
  EXPECT_THAT(SpatialEvalToTable(serial), HasSubstr("privtree"));
}

}  // namespace
}  // namespace privtree
