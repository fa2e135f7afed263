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

#ifndef PRIVTREE_MARKOV_H_
#define PRIVTREE_MARKOV_H_

#include <functional>
#include <istream>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"
#include "json.hpp"
#include "privtree/privacy.h"
#include "privtree/random.h"

namespace privtree {

// Reserved symbol ids. Alphabet symbols are numbered from 2 in alphabet
// order.
inline constexpr int kStartSymbol = 0;  // '$'
inline constexpr int kEndSymbol = 1;    // '&'

class Alphabet {
 public:
  // Symbols must be distinct, nonempty, and different from "$" and "&".
  static absl::StatusOr<Alphabet> Create(std::vector<std::string> symbols);

  // |Sigma|, excluding the two sentinels.
  int size() const { return static_cast<int>(tokens_.size()) - 2; }
  // Number of ids including the sentinels.
  int num_ids() const { return static_cast<int>(tokens_.size()); }
  absl::StatusOr<int> Id(absl::string_view token) const;
  const std::string& Token(int id) const { return tokens_[id]; }
  std::vector<std::string> symbols() const {
    return {tokens_.begin() + 2, tokens_.end()};
  }

 private:
  std::vector<std::string> tokens_;
  absl::flat_hash_map<std::string, int> ids_;
};

// Sequences over an alphabet, without sentinels. A sequence flagged
// open-ended was truncated and has no END.
struct SequenceDataset {
  Alphabet alphabet;
  std::vector<std::vector<int>> sequences;
  std::vector<bool> open_ended;
  int l_max = 0;

  // '$' x_1 ... x_l ['&'] for sequence i.
  std::vector<int> WithSentinels(size_t i) const;
};

// Keeps a sequence whose length counting END is at most l_max; otherwise cuts
// it to its first l_max symbols and drops END.
absl::StatusOr<SequenceDataset> TruncateSequences(
    Alphabet alphabet, const std::vector<std::vector<int>>& raw, int l_max);

// Counts indexed by symbol id; the START entry is always 0.
using Histogram = std::vector<double>;

// Magnitude minus the largest count (0 for an empty histogram).
double PstScore(absl::Span<const double> hist);
double Magnitude(absl::Span<const double> hist);

struct PstNode {
  // Context symbols in sequence order; children prepend one symbol.
  std::vector<int> predictor;
  Histogram hist;
  int depth = 0;
  // |Sigma| + 1 contiguous children: START first, then alphabet order.
  int first_child = -1;

  bool is_leaf() const { return first_child < 0; }
  bool starts_with_start() const {
    return !predictor.empty() && predictor.front() == kStartSymbol;
  }
};

struct PstParams {
  double epsilon = 0;       // total budget
  double epsilon_tree = 0;  // spent on the structure
  double epsilon_hist = 0;  // spent on leaf histograms
  PrivacyParams tree;       // lambda, delta, theta of the structure phase
  double hist_scale = 0;    // Laplace scale of leaf histogram noise
};

class Pst {
 public:
  Pst() = default;
  Pst(Alphabet alphabet, std::vector<PstNode> nodes, int l_max,
      PstParams params);

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<PstNode>& nodes() const { return nodes_; }
  const PstNode& node(int id) const { return nodes_[id]; }
  size_t size() const { return nodes_.size(); }
  int root() const { return 0; }
  int fanout() const { return alphabet_.size() + 1; }
  int l_max() const { return l_max_; }
  const PstParams& params() const { return params_; }

  // Child of `id` extending its predictor by `symbol` (START or a Sigma
  // symbol); -1 for leaves or END.
  int ChildFor(int id, int symbol) const;
  // Deepest node whose predictor is a suffix of `context`.
  int FindLongestSuffix(absl::Span<const int> context) const;

 private:
  Alphabet alphabet_;
  std::vector<PstNode> nodes_;
  int l_max_ = 0;
  PstParams params_;
};

// Decides whether to split a node given its exact histogram. Only called on
// nodes whose predictor does not start with START and whose depth is below
// the cap.
using PstSplitRule = std::function<bool(const PstNode& node)>;

// Grows a PST breadth-first under `rule`, keeping exact histograms on every
// node. NOT PRIVATE; used for oracles and as the engine of the private build.
Pst GrowExactPst(const SequenceDataset& data, const PstSplitRule& rule,
                 int depth_cap = 40);

struct PstBuildOptions {
  // Fraction of epsilon spent on the structure; 0 selects 1 / beta.
  double tree_budget_ratio = 0;
  double theta = 0;
  int depth_cap = 40;
  // NOT PRIVATE. Laplace draws replaced by 0 (bias and floor kept).
  bool noiseless = false;
};

// PrivTree over prediction suffix trees. Score PstScore with sensitivity
// l_max, never splits predictors starting with START, then publishes leaf
// histograms with Laplace noise of scale l_max / epsilon_hist. Internal
// histograms are sums over leaves; negative counts are reset to zero.
absl::StatusOr<Pst> BuildPrivatePst(const SequenceDataset& data,
                                    double epsilon, Rng& rng,
                                    const PstBuildOptions& options = {});

// Deepest node whose predictor is a suffix of `s`; `s` must begin with START.
absl::StatusOr<int> LongestSuffixNode(const Pst& pst,
                                      absl::Span<const int> s);

// Multiplicative-chain estimate of the number of occurrences of `query`
// (symbols of Sigma, optionally ending with END). Zero when a visited node
// has zero magnitude.
absl::StatusOr<double> EstimateStringCount(const Pst& pst,
                                           absl::Span<const int> query);

struct ScoredString {
  std::vector<int> symbols;
  double estimate = 0;
};

// The k strings over Sigma (length <= l_max) with the largest estimates,
// ordered by estimate, then shorter first, then by symbol order.
absl::StatusOr<std::vector<ScoredString>> TopKStrings(const Pst& pst, int k);

// Samples sequences (without sentinels). Each sequence stops at END or after
// l_max symbols. A sequence that reaches a zero-magnitude node is dropped, so
// fewer than `count` sequences may be returned.
absl::StatusOr<std::vector<std::vector<int>>> GenerateSequences(const Pst& pst,
                                                                int count,
                                                                Rng& rng);

// Newline-delimited records of whitespace-separated tokens; '#' lines are
// comments. Blank lines are empty sequences.
absl::StatusOr<std::vector<std::vector<std::string>>> ReadTokenSequences(
    std::istream& in);

// Alphabet of all tokens (sorted) and the id-encoded sequences.
absl::StatusOr<std::pair<Alphabet, std::vector<std::vector<int>>>>
EncodeSequences(const std::vector<std::vector<std::string>>& raw);

std::string SymbolsToString(const Alphabet& alphabet,
                            absl::Span<const int> symbols,
                            absl::string_view sep = "");

nlohmann::json PstToJson(const Pst& pst);
absl::StatusOr<Pst> PstFromJson(const nlohmann::json& j);

}  // namespace privtree

#endif  // PRIVTREE_MARKOV_H_
