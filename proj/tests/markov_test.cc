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
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "privtree/evalbench.h"
#include "privtree/markov.h"
#include "privtree/random.h"

namespace privtree {
namespace {

using ::testing::ElementsAre;

constexpr int A = 2, B = 3;

Alphabet AB() { return *Alphabet::Create({"A", "B"}); }

// Four sequences consistent with the worked PST example: A occurs 6 times,
// AA three times (once in the third sequence, twice in the fourth).
SequenceDataset WorkedExample() {
  return *TruncateSequences(AB(), {{A, B}, {B}, {A, A, B}, {A, A, A, B}}, 10);
}

PstSplitRule SplitRootAndA() {
  return [](const PstNode& n) {
    return n.predictor.empty() || n.predictor == std::vector<int>{A};
  };
}

PstSplitRule AlwaysSplit() {
  return [](const PstNode&) { return true; };
}

SequenceDataset RandomData(Rng& rng, int alphabet_size, int n, int max_len,
                           int l_max) {
  std::vector<std::string> symbols;
  for (int i = 0; i < alphabet_size; ++i) symbols.push_back(std::string(1, 'a' + i));
  std::vector<std::vector<int>> raw(n);
  for (auto& s : raw) {
    const int len = static_cast<int>(rng.UniformInt(max_len + 1));
    // Skewed symbol choice so that histograms are uneven.
    for (int j = 0; j < len; ++j) {
      const uint64_t r = rng.UniformInt(alphabet_size * (alphabet_size + 1) / 2);
      int x = 0;
      for (uint64_t acc = alphabet_size; r >= acc; acc += alphabet_size - ++x) {}
      s.push_back(2 + x);
    }
  }
  return *TruncateSequences(*Alphabet::Create(symbols), raw, l_max);
}

TEST(AlphabetTest, ReservedAndDuplicateTokens) {
  EXPECT_FALSE(Alphabet::Create({}).ok());
  EXPECT_FALSE(Alphabet::Create({"A", "A"}).ok());
  EXPECT_FALSE(Alphabet::Create({"$"}).ok());
  EXPECT_FALSE(Alphabet::Create({"&", "B"}).ok());
  EXPECT_FALSE(Alphabet::Create({""}).ok());
  const Alphabet a = AB();
  EXPECT_EQ(a.size(), 2);
  EXPECT_EQ(a.num_ids(), 4);
  EXPECT_EQ(*a.Id("B"), B);
  EXPECT_EQ(a.Token(kStartSymbol), "$");
  EXPECT_EQ(a.Token(kEndSymbol), "&");
  EXPECT_FALSE(a.Id("C").ok());
}

TEST(TruncateTest, Examples) {
  const auto d3 = *TruncateSequences(AB(), {{A, B, A, B}}, 3);
  EXPECT_THAT(d3.sequences[0], ElementsAre(A, B, A));
  EXPECT_TRUE(d3.open_ended[0]);
  EXPECT_THAT(d3.WithSentinels(0), ElementsAre(kStartSymbol, A, B, A));

  const auto d10 = *TruncateSequences(AB(), {{A, B}}, 10);
  EXPECT_FALSE(d10.open_ended[0]);
  EXPECT_THAT(d10.WithSentinels(0), ElementsAre(kStartSymbol, A, B, kEndSymbol));

  const auto d2 = *TruncateSequences(AB(), {{A, B}}, 2);
  EXPECT_THAT(d2.sequences[0], ElementsAre(A, B));
  EXPECT_TRUE(d2.open_ended[0]);
}

TEST(TruncateTest, Errors) {
  EXPECT_FALSE(TruncateSequences(AB(), {{A}}, 0).ok());
  EXPECT_FALSE(TruncateSequences(AB(), {{A, 7}}, 5).ok());
  EXPECT_FALSE(TruncateSequences(AB(), {{kEndSymbol}}, 5).ok());
}

TEST(ScoreTest, Examples) {
  // ids: $, &, A, B
  EXPECT_EQ(PstScore(std::vector<double>{0, 0, 1, 1}), 1);
  EXPECT_EQ(PstScore(std::vector<double>{0, 4, 0, 0}), 0);
  EXPECT_EQ(PstScore(std::vector<double>{0, 0, 2, 1}), 1);
  EXPECT_EQ(PstScore(std::vector<double>{}), 0);
  EXPECT_EQ(Magnitude(std::vector<double>{0, 1, 2, 3}), 6);
}

TEST(PrivatePstTest, BudgetSplitAndScales) {
  const SequenceDataset data = *TruncateSequences(AB(), {{A, B}}, 10);
  Rng rng(1);
  const Pst pst = *BuildPrivatePst(data, 1, rng);
  EXPECT_NEAR(pst.params().epsilon_tree, 1.0 / 3, 1e-15);
  EXPECT_NEAR(pst.params().epsilon_hist, 2.0 / 3, 1e-15);
  EXPECT_NEAR(pst.params().tree.lambda, 75, 1e-9);
  EXPECT_NEAR(pst.params().tree.delta, 75 * std::log(3.0), 1e-9);
  EXPECT_NEAR(pst.params().hist_scale, 15, 1e-12);
  EXPECT_EQ(pst.fanout(), 3);
}

TEST(PrivatePstTest, RejectsBadBudget) {
  Rng rng(1);
  EXPECT_FALSE(BuildPrivatePst(WorkedExample(), 0, rng).ok());
  PstBuildOptions opt;
  opt.tree_budget_ratio = 1.5;
  EXPECT_FALSE(BuildPrivatePst(WorkedExample(), 1, rng, opt).ok());
}

TEST(WorkedExampleTest, ExactHistogramsMatchSuffixCounts) {
  const SequenceDataset data = WorkedExample();
  const Pst pst = GrowExactPst(data, SplitRootAndA());
  // root, $, A, B, $A, AA, BA
  ASSERT_EQ(pst.size(), 7u);
  for (const PstNode& n : pst.nodes()) {
    EXPECT_EQ(n.hist, oracle::SuffixHistogram(data, n.predictor));
  }
  EXPECT_EQ(pst.node(0).hist[A], 6);
  EXPECT_EQ(Magnitude(pst.node(0).hist), 14);
  const PstNode& aa = pst.node(pst.FindLongestSuffix(std::vector<int>{A, A}));
  EXPECT_THAT(aa.predictor, ElementsAre(A, A));
  EXPECT_EQ(Magnitude(aa.hist), 3);
  EXPECT_EQ(aa.hist[A], 1);
}

TEST(WorkedExampleTest, EstimatesFromExactTree) {
  const Pst pst = GrowExactPst(WorkedExample(), SplitRootAndA());
  EXPECT_DOUBLE_EQ(*EstimateStringCount(pst, std::vector<int>{A}), 6);
  EXPECT_DOUBLE_EQ(*EstimateStringCount(pst, std::vector<int>{A, B}), 3);
  EXPECT_DOUBLE_EQ(*EstimateStringCount(pst, std::vector<int>{B, A}), 0);
  EXPECT_FALSE(EstimateStringCount(pst, std::vector<int>{}).ok());
  EXPECT_FALSE(EstimateStringCount(pst, std::vector<int>{kStartSymbol}).ok());
  EXPECT_FALSE(EstimateStringCount(pst, std::vector<int>{kEndSymbol, A}).ok());
}

TEST(WorkedExampleTest, NoiselessPrivateBuildKeepsQuotedValues) {
  PstBuildOptions opt;
  opt.noiseless = true;
  Rng rng(0);
  const Pst pst = *BuildPrivatePst(WorkedExample(), 1, rng, opt);
  EXPECT_EQ(pst.node(0).hist[A], 6);
  EXPECT_DOUBLE_EQ(*EstimateStringCount(pst, std::vector<int>{A, B}), 3);
}

TEST(WorkedExampleTest, LongestSuffixNodes) {
  const Pst pst = GrowExactPst(WorkedExample(), SplitRootAndA());
  auto pred = [&](std::vector<int> s) {
    return pst.node(*LongestSuffixNode(pst, s)).predictor;
  };
  EXPECT_THAT(pred({kStartSymbol}), ElementsAre(kStartSymbol));
  EXPECT_THAT(pred({kStartSymbol, A}), ElementsAre(kStartSymbol, A));
  EXPECT_THAT(pred({kStartSymbol, A, A, A, A}), ElementsAre(A, A));
  EXPECT_THAT(pred({kStartSymbol, A, B}), ElementsAre(B));
  EXPECT_FALSE(LongestSuffixNode(pst, std::vector<int>{A}).ok());
  const Pst root_only = GrowExactPst(WorkedExample(), [](const PstNode&) {
    return false;
  });
  EXPECT_EQ(*LongestSuffixNode(root_only, std::vector<int>{kStartSymbol}), 0);
}

TEST(WorkedExampleTest, TopOne) {
  const Pst pst = GrowExactPst(WorkedExample(), SplitRootAndA());
  const auto top = *TopKStrings(pst, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_THAT(top[0].symbols, ElementsAre(A));
  EXPECT_DOUBLE_EQ(top[0].estimate, 6);
  EXPECT_FALSE(TopKStrings(pst, 0).ok());
}

TEST(PstPropertyTest, ScoreMonotoneOnRandomTrees) {
  Rng rng(2718);
  int pairs = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int sigma = 1 + static_cast<int>(rng.UniformInt(3));
    const SequenceDataset data =
        RandomData(rng, sigma, 1 + rng.UniformInt(15), 8, 6);
    const Pst pst = GrowExactPst(data, AlwaysSplit(), 4);
    for (const PstNode& n : pst.nodes()) {
      if (n.is_leaf()) continue;
      for (int c = 0; c < pst.fanout(); ++c) {
        ++pairs;
        ASSERT_LE(PstScore(pst.node(n.first_child + c).hist), PstScore(n.hist))
            << "trial " << trial;
      }
    }
  }
  EXPECT_GT(pairs, 10000);
}

TEST(PstPropertyTest, MatchesRecursiveOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const SequenceDataset data = RandomData(rng, 3, 40, 9, 7);
    const double cut = static_cast<double>(rng.UniformInt(6));
    const auto rule = [&](const std::vector<double>& h, int depth) {
      return PstScore(h) - depth > cut;
    };
    const Pst pst = GrowExactPst(
        data, [&](const PstNode& n) { return rule(n.hist, n.depth); }, 5);
    std::vector<oracle::PstCell> got;
    for (const PstNode& n : pst.nodes()) {
      EXPECT_EQ(n.depth, static_cast<int>(n.predictor.size()));
      got.push_back({n.predictor, n.hist, n.is_leaf()});
    }
    std::sort(got.begin(), got.end());
    const auto expected = oracle::RecursivePst(data, 5, rule);
    ASSERT_EQ(got.size(), expected.size()) << "trial " << trial;
    for (size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].predictor, expected[i].predictor);
      EXPECT_EQ(got[i].hist, expected[i].hist);
      EXPECT_EQ(got[i].leaf, expected[i].leaf);
    }
  }
}

TEST(PstPropertyTest, StartPrefixedNodesNeverSplit) {
  Rng rng(6);
  const SequenceDataset data = RandomData(rng, 2, 50, 6, 6);
  const Pst pst = GrowExactPst(data, AlwaysSplit(), 6);
  for (const PstNode& n : pst.nodes()) {
    if (n.starts_with_start()) EXPECT_TRUE(n.is_leaf());
    if (!n.is_leaf()) {
      EXPECT_THAT(pst.node(n.first_child).predictor.front(), kStartSymbol);
    }
  }
}

TEST(PstPropertyTest, ConservationAndLeafAccounting) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const SequenceDataset data = RandomData(rng, 3, 30, 10, 6);
    double symbols = 0;
    for (size_t i = 0; i < data.sequences.size(); ++i) {
      symbols += data.WithSentinels(i).size() - 1;
    }
    const Pst pst = GrowExactPst(
        data, [&](const PstNode& n) { return PstScore(n.hist) > 2; });
    EXPECT_EQ(Magnitude(pst.node(0).hist), symbols);
    Histogram leaf_sum(data.alphabet.num_ids(), 0.0);
    for (const PstNode& n : pst.nodes()) {
      if (!n.is_leaf()) continue;
      for (size_t x = 0; x < leaf_sum.size(); ++x) leaf_sum[x] += n.hist[x];
    }
    EXPECT_EQ(leaf_sum, pst.node(0).hist);
  }
}

TEST(PstPropertyTest, ScoreSensitivityIsAtMostLmax) {
  Rng rng(8);
  constexpr int kLmax = 5;
  for (int trial = 0; trial < 200; ++trial) {
    const SequenceDataset d = RandomData(rng, 2, 20, 7, kLmax);
    std::vector<std::vector<int>> plus = d.sequences;
    std::vector<int> extra;
    const int len = static_cast<int>(rng.UniformInt(kLmax + 1));
    for (int j = 0; j < len; ++j) extra.push_back(2 + rng.UniformInt(2));
    plus.push_back(extra);
    const SequenceDataset d2 = *TruncateSequences(d.alphabet, plus, kLmax);
    const auto split_all = [](const std::vector<double>&, int) { return true; };
    const auto a = oracle::RecursivePst(d, 4, split_all);
    const auto b = oracle::RecursivePst(d2, 4, split_all);
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      const double diff = oracle::Score(b[i].hist) - oracle::Score(a[i].hist);
      EXPECT_GE(diff, 0);
      EXPECT_LE(diff, kLmax);
    }
  }
}

TEST(PrivatePstTest, NoiselessLeafSumsAndClamping) {
  Rng rng(9);
  const SequenceDataset data = RandomData(rng, 3, 2000, 6, 8);
  PstBuildOptions opt;
  opt.noiseless = true;
  Rng build(1);
  const Pst pst = *BuildPrivatePst(data, 50, build, opt);
  ASSERT_GT(pst.size(), 1u);
  for (const PstNode& n : pst.nodes()) {
    EXPECT_EQ(n.hist, oracle::SuffixHistogram(data, n.predictor));
  }
  Rng noisy_rng(2);
  const Pst noisy = *BuildPrivatePst(data, 1, noisy_rng);
  for (const PstNode& n : noisy.nodes()) {
    EXPECT_EQ(n.hist[kStartSymbol], 0);
    for (double v : n.hist) EXPECT_GE(v, 0);
  }
}

std::vector<ScoredString> BruteForceRanking(const Pst& pst, int max_len) {
  std::vector<ScoredString> all;
  std::vector<std::vector<int>> layer = {{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& s : layer) {
      for (int x = 2; x < pst.alphabet().num_ids(); ++x) {
        auto t = s;
        t.push_back(x);
        all.push_back({t, *EstimateStringCount(pst, t)});
        next.push_back(std::move(t));
      }
    }
    layer = std::move(next);
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.estimate != b.estimate) return a.estimate > b.estimate;
    if (a.symbols.size() != b.symbols.size()) {
      return a.symbols.size() < b.symbols.size();
    }
    return a.symbols < b.symbols;
  });
  return all;
}

TEST(TopKTest, MatchesBruteForceOnNoisyTrees) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const SequenceDataset data = RandomData(rng, 3, 500, 6, 5);
    Rng build(trial);
    const Pst pst = *BuildPrivatePst(data, 20, build);
    const auto ranking = BruteForceRanking(pst, 5);
    const int k = 25;
    const auto top = *TopKStrings(pst, k);
    ASSERT_EQ(top.size(), static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
      const double tol = 1e-9 * std::max(1.0, ranking[i].estimate);
      EXPECT_NEAR(top[i].estimate, ranking[i].estimate, tol);
      EXPECT_NEAR(top[i].estimate, *EstimateStringCount(pst, top[i].symbols),
                  tol);
    }
  }
}

TEST(TopKTest, ReturnsEverythingWhenKIsLarge) {
  const Pst pst = GrowExactPst(
      *TruncateSequences(AB(), {{A, B}, {B, B}}, 2), AlwaysSplit(), 2);
  EXPECT_EQ(TopKStrings(pst, 100)->size(), 2u + 4u);
}

TEST(TopKTest, UniformSingleSymbolTiesBreakBySymbolOrder) {
  const Alphabet abc = *Alphabet::Create({"A", "B", "C"});
  const SequenceDataset data =
      *TruncateSequences(abc, {{2}, {3}, {4}, {2}, {3}, {4}}, 1);
  const Pst pst = GrowExactPst(data, [](const PstNode&) { return false; });
  const auto top = *TopKStrings(pst, 3);
  ASSERT_EQ(top.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_THAT(top[i].symbols, ElementsAre(2 + i));
    EXPECT_EQ(top[i].estimate, 2);
  }
}

TEST(TopKTest, FullExactTreeGivesExactCountsAndPerfectPrecision) {
  Rng rng(11);
  // max_len + 1 <= l_max so that no sequence is truncated.
  const SequenceDataset data = RandomData(rng, 3, 300, 5, 6);
  const Pst pst = GrowExactPst(data, AlwaysSplit(), 6);
  const auto exact = *ExactTopKStrings(data, 200);
  for (const auto& s : exact) {
    EXPECT_NEAR(*EstimateStringCount(pst, s.symbols), s.estimate,
                1e-9 * s.estimate);
  }
  // Choose k at a strict drop in the exact counts so the set is unambiguous.
  int k = 10;
  while (exact[k - 1].estimate == exact[k].estimate) ++k;
  const auto mined = *TopKStrings(pst, k);
  std::vector<std::string> got, want;
  for (int i = 0; i < k; ++i) {
    got.push_back(SymbolsToString(data.alphabet, mined[i].symbols, " "));
    want.push_back(SymbolsToString(data.alphabet, exact[i].symbols, " "));
  }
  EXPECT_EQ(*TopKPrecision(got, want, k), 1.0);
}

Pst HandBuilt(std::vector<Histogram> hists, bool split_root) {
  std::vector<PstNode> nodes(1);
  nodes[0].hist = hists[0];
  if (split_root) {
    nodes[0].first_child = 1;
    for (int y : {kStartSymbol, A, B}) {
      PstNode c;
      c.predictor = {y};
      c.depth = 1;
      c.hist = hists[nodes.size()];
      nodes.push_back(c);
    }
  }
  return Pst(AB(), std::move(nodes), 6, {});
}

TEST(GenerateTest, AllEndHistogramsGiveEmptySequences) {
  const Pst pst = HandBuilt({{0, 5, 0, 0}}, false);
  Rng rng(1);
  const auto seqs = *GenerateSequences(pst, 100, rng);
  ASSERT_EQ(seqs.size(), 100u);
  for (const auto& s : seqs) EXPECT_TRUE(s.empty());
}

TEST(GenerateTest, DeterministicChain) {
  // $ -> A, A -> B, B -> END.
  const Pst pst = HandBuilt(
      {{0, 1, 1, 1}, {0, 0, 4, 0}, {0, 0, 0, 4}, {0, 4, 0, 0}}, true);
  Rng rng(2);
  const auto seqs = *GenerateSequences(pst, 50, rng);
  for (const auto& s : seqs) {
    EXPECT_THAT(s, ElementsAre(A, B));
  }
}

TEST(GenerateTest, LengthCutoffAndDrops) {
  const Pst loop = HandBuilt({{0, 0, 3, 0}}, false);
  Rng rng(3);
  const auto looped = *GenerateSequences(loop, 10, rng);
  ASSERT_EQ(looped.size(), 10u);
  for (const auto& s : looped) {
    EXPECT_EQ(s.size(), 6u);
  }
  // B leads to a zero-magnitude node, so every sequence through B is dropped.
  const Pst dead = HandBuilt(
      {{0, 1, 1, 1}, {0, 0, 1, 1}, {0, 1, 0, 0}, {0, 0, 0, 0}}, true);
  const auto kept = *GenerateSequences(dead, 10000, rng);
  EXPECT_LT(kept.size(), 10000u);
  for (const auto& s : kept) EXPECT_THAT(s, ElementsAre(A));
  const Pst empty = HandBuilt({{0, 0, 0, 0}}, false);
  EXPECT_EQ(GenerateSequences(empty, 1, rng).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(GenerateTest, FirstSymbolFollowsStartHistogram) {
  const Pst pst = GrowExactPst(WorkedExample(), SplitRootAndA());
  const PstNode& start = pst.node(pst.FindLongestSuffix(
      std::vector<int>{kStartSymbol}));
  const double expect = start.hist[A] / Magnitude(start.hist);
  EXPECT_DOUBLE_EQ(expect, 0.75);
  Rng rng(4);
  const auto seqs = *GenerateSequences(pst, 100000, rng);
  int starts_a = 0;
  for (const auto& s : seqs) starts_a += !s.empty() && s[0] == A;
  EXPECT_NEAR(static_cast<double>(starts_a) / seqs.size(), expect, 0.01);
}

TEST(GenerateTest, DeterministicForSeed) {
  const Pst pst = GrowExactPst(WorkedExample(), SplitRootAndA());
  Rng a(5), b(5);
  EXPECT_EQ(*GenerateSequences(pst, 200, a), *GenerateSequences(pst, 200, b));
}

TEST(SequenceIoTest, ReadAndEncode) {
  std::istringstream in("# comment\nb a b\n\nc\n");
  const auto raw = *ReadTokenSequences(in);
  ASSERT_EQ(raw.size(), 3u);
  EXPECT_TRUE(raw[1].empty());
  const auto [alphabet, seqs] = *EncodeSequences(raw);
  EXPECT_THAT(alphabet.symbols(), ElementsAre("a", "b", "c"));
  EXPECT_THAT(seqs[0], ElementsAre(3, 2, 3));
  EXPECT_EQ(SymbolsToString(alphabet, seqs[0], " "), "b a b");
  std::istringstream bad("a $ b\n");
  EXPECT_EQ(ReadTokenSequences(bad).status().code(), absl::StatusCode::kDataLoss);
}

TEST(SequenceIoTest, JsonRoundTripWithoutExactHistograms) {
  Rng rng(12);
  const SequenceDataset data = RandomData(rng, 3, 500, 6, 5);
  Rng build(3);
  const Pst pst = *BuildPrivatePst(data, 5, build);
  const nlohmann::json j = PstToJson(pst);
  const Pst back = *PstFromJson(j);
  EXPECT_EQ(PstToJson(back), j);
  const std::vector<int> q = {2, 3, 2};
  EXPECT_DOUBLE_EQ(*EstimateStringCount(back, q), *EstimateStringCount(pst, q));
  EXPECT_FALSE(PstFromJson(nlohmann::json::object()).ok());
}

}  // namespace
}  // namespace privtree
