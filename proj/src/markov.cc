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

#include "privtree/markov.h"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "privtree/laplace.h"
#include "privtree/status_macros.h"

namespace privtree {

absl::StatusOr<Alphabet> Alphabet::Create(std::vector<std::string> symbols) {
  if (symbols.empty()) {
    return absl::InvalidArgumentError("alphabet must have at least one symbol");
  }
  Alphabet a;
  a.tokens_ = {"$", "&"};
  a.ids_["$"] = kStartSymbol;
  a.ids_["&"] = kEndSymbol;
  for (std::string& s : symbols) {
    if (s.empty() || s == "$" || s == "&") {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid alphabet symbol '", s, "'"));
    }
    const int id = static_cast<int>(a.tokens_.size());
    if (!a.ids_.emplace(s, id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate alphabet symbol '", s, "'"));
    }
    a.tokens_.push_back(std::move(s));
  }
  return a;
}

absl::StatusOr<int> Alphabet::Id(absl::string_view token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("symbol '", token, "' is not in the alphabet"));
  }
  return it->second;
}

std::vector<int> SequenceDataset::WithSentinels(size_t i) const {
  std::vector<int> s;
  s.reserve(sequences[i].size() + 2);
  s.push_back(kStartSymbol);
  s.insert(s.end(), sequences[i].begin(), sequences[i].end());
  if (!open_ended[i]) s.push_back(kEndSymbol);
  return s;
}

absl::StatusOr<SequenceDataset> TruncateSequences(
    Alphabet alphabet, const std::vector<std::vector<int>>& raw, int l_max) {
  if (l_max < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("l_max must be at least 1, got ", l_max));
  }
  SequenceDataset data{std::move(alphabet), {}, {}, l_max};
  for (const auto& s : raw) {
    for (int x : s) {
      if (x < 2 || x >= data.alphabet.num_ids()) {
        return absl::InvalidArgumentError(
            absl::StrCat("symbol id ", x, " is not an alphabet symbol"));
      }
    }
    if (static_cast<int>(s.size()) + 1 <= l_max) {
      data.sequences.push_back(s);
      data.open_ended.push_back(false);
    } else {
      data.sequences.emplace_back(s.begin(), s.begin() + l_max);
      data.open_ended.push_back(true);
    }
  }
  return data;
}

double Magnitude(absl::Span<const double> hist) {
  return std::accumulate(hist.begin(), hist.end(), 0.0);
}

double PstScore(absl::Span<const double> hist) {
  if (hist.empty()) return 0;
  return Magnitude(hist) - *std::max_element(hist.begin(), hist.end());
}

Pst::Pst(Alphabet alphabet, std::vector<PstNode> nodes, int l_max,
         PstParams params)
    : alphabet_(std::move(alphabet)),
      nodes_(std::move(nodes)),
      l_max_(l_max),
      params_(params) {}

int Pst::ChildFor(int id, int symbol) const {
  const PstNode& n = nodes_[id];
  if (n.is_leaf() || symbol == kEndSymbol) return -1;
  return n.first_child + (symbol == kStartSymbol ? 0 : symbol - 1);
}

int Pst::FindLongestSuffix(absl::Span<const int> context) const {
  int id = root();
  for (size_t j = context.size(); j-- > 0;) {
    const int next = ChildFor(id, context[j]);
    if (next < 0) break;
    id = next;
  }
  return id;
}

Pst GrowExactPst(const SequenceDataset& data, const PstSplitRule& rule,
                 int depth_cap) {
  const int num_ids = data.alphabet.num_ids();
  const int fanout = data.alphabet.size() + 1;
  std::vector<std::vector<int>> full(data.sequences.size());
  struct Position {
    uint32_t seq, pos;
  };
  std::vector<Position> positions;
  for (size_t i = 0; i < full.size(); ++i) {
    full[i] = data.WithSentinels(i);
    for (size_t p = 1; p < full[i].size(); ++p) {
      positions.push_back({static_cast<uint32_t>(i), static_cast<uint32_t>(p)});
    }
  }
  std::vector<Position> scratch(positions.size());
  std::vector<int> child_of(positions.size());

  std::vector<PstNode> nodes(1);
  struct Pending {
    int node;
    size_t begin, end;
  };
  std::deque<Pending> frontier{{0, 0, positions.size()}};
  while (!frontier.empty()) {
    const Pending p = frontier.front();
    frontier.pop_front();
    {
      PstNode& n = nodes[p.node];
      n.hist.assign(num_ids, 0.0);
      for (size_t i = p.begin; i < p.end; ++i) {
        n.hist[full[positions[i].seq][positions[i].pos]] += 1.0;
      }
      if (n.starts_with_start() || n.depth >= depth_cap || !rule(n)) continue;
    }
    const size_t len = nodes[p.node].predictor.size();
    std::vector<size_t> bucket(fanout + 1, 0);
    for (size_t i = p.begin; i < p.end; ++i) {
      const int y = full[positions[i].seq][positions[i].pos - len - 1];
      child_of[i] = y == kStartSymbol ? 0 : y - 1;
      ++bucket[child_of[i] + 1];
    }
    for (int c = 0; c < fanout; ++c) bucket[c + 1] += bucket[c];
    std::vector<size_t> cursor(bucket.begin(), bucket.end() - 1);
    for (size_t i = p.begin; i < p.end; ++i) {
      scratch[p.begin + cursor[child_of[i]]++] = positions[i];
    }
    std::copy(scratch.begin() + p.begin, scratch.begin() + p.end,
              positions.begin() + p.begin);

    const int first = static_cast<int>(nodes.size());
    nodes[p.node].first_child = first;
    const std::vector<int> parent_predictor = nodes[p.node].predictor;
    const int depth = nodes[p.node].depth + 1;
    for (int c = 0; c < fanout; ++c) {
      PstNode child;
      child.predictor.reserve(parent_predictor.size() + 1);
      child.predictor.push_back(c == 0 ? kStartSymbol : c + 1);
      child.predictor.insert(child.predictor.end(), parent_predictor.begin(),
                             parent_predictor.end());
      child.depth = depth;
      nodes.push_back(std::move(child));
      frontier.push_back(
          {first + c, p.begin + bucket[c], p.begin + bucket[c + 1]});
    }
  }
  PstParams params;
  return Pst(data.alphabet, std::move(nodes), data.l_max, params);
}

absl::StatusOr<Pst> BuildPrivatePst(const SequenceDataset& data,
                                    double epsilon, Rng& rng,
                                    const PstBuildOptions& options) {
  if (data.alphabet.size() < 1) {
    return absl::InvalidArgumentError("alphabet is empty");
  }
  if (!(epsilon > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (data.l_max < 1) return absl::InvalidArgumentError("l_max must be >= 1");
  const int beta = data.alphabet.size() + 1;
  const double ratio = options.tree_budget_ratio == 0
                           ? 1.0 / beta
                           : options.tree_budget_ratio;
  if (!(ratio > 0 && ratio < 1)) {
    return absl::InvalidArgumentError(
        "tree budget ratio must lie strictly between 0 and 1");
  }
  PstParams params;
  params.epsilon = epsilon;
  params.epsilon_tree = epsilon * ratio;
  params.epsilon_hist = epsilon - params.epsilon_tree;
  ASSIGN_OR_RETURN(params.tree,
                   PrivTreeParams(params.epsilon_tree, beta, options.theta,
                                  static_cast<double>(data.l_max)));
  params.hist_scale = data.l_max / params.epsilon_hist;
  ASSIGN_OR_RETURN(const LaplaceDistribution tree_noise,
                   LaplaceDistribution::Create(params.tree.lambda));
  ASSIGN_OR_RETURN(const LaplaceDistribution hist_noise,
                   LaplaceDistribution::Create(params.hist_scale));

  const PrivacyParams& tp = params.tree;
  Pst exact = GrowExactPst(
      data,
      [&](const PstNode& n) {
        const double b =
            BiasedCount(PstScore(n.hist), n.depth, tp.theta, tp.delta);
        const double noisy =
            options.noiseless ? b : b + tree_noise.Sample(rng);
        return noisy > tp.theta;
      },
      options.depth_cap);

  std::vector<PstNode> nodes = exact.nodes();
  const int num_ids = data.alphabet.num_ids();
  for (PstNode& n : nodes) {
    if (!n.is_leaf()) continue;
    for (int x = 1; x < num_ids; ++x) {
      if (!options.noiseless) n.hist[x] += hist_noise.Sample(rng);
    }
  }
  for (size_t i = nodes.size(); i-- > 0;) {
    PstNode& n = nodes[i];
    if (n.is_leaf()) continue;
    std::fill(n.hist.begin(), n.hist.end(), 0.0);
    for (int c = 0; c < beta; ++c) {
      const Histogram& h = nodes[n.first_child + c].hist;
      for (int x = 1; x < num_ids; ++x) n.hist[x] += h[x];
    }
  }
  for (PstNode& n : nodes) {
    for (double& v : n.hist) v = std::max(v, 0.0);
  }
  return Pst(data.alphabet, std::move(nodes), data.l_max, params);
}

namespace {

absl::Status CheckSymbols(const Pst& pst, absl::Span<const int> s,
                          bool allow_end_last) {
  for (size_t i = 0; i < s.size(); ++i) {
    const int x = s[i];
    const bool ok = (x >= 2 && x < pst.alphabet().num_ids()) ||
                    (allow_end_last && x == kEndSymbol && i + 1 == s.size());
    if (!ok) {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid symbol id ", x, " at position ", i));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<int> LongestSuffixNode(const Pst& pst,
                                      absl::Span<const int> s) {
  if (s.empty() || s.front() != kStartSymbol) {
    return absl::InvalidArgumentError("sequence must begin with START");
  }
  RETURN_IF_ERROR(CheckSymbols(pst, s.subspan(1), false));
  return pst.FindLongestSuffix(s);
}

absl::StatusOr<double> EstimateStringCount(const Pst& pst,
                                           absl::Span<const int> query) {
  if (query.empty()) {
    return absl::InvalidArgumentError("query string must be nonempty");
  }
  RETURN_IF_ERROR(CheckSymbols(pst, query, true));
  double ans = pst.node(pst.root()).hist[query[0]];
  for (size_t i = 1; i < query.size() && ans > 0; ++i) {
    const PstNode& v = pst.node(pst.FindLongestSuffix(query.subspan(0, i)));
    const double mag = Magnitude(v.hist);
    if (mag <= 0) return 0.0;
    ans *= v.hist[query[i]] / mag;
  }
  return ans;
}

namespace {

// Strict weak order of the top-k ranking: larger estimate first, then
// shorter, then lexicographic by symbol id.
bool RanksBefore(const ScoredString& a, const ScoredString& b) {
  if (a.estimate != b.estimate) return a.estimate > b.estimate;
  if (a.symbols.size() != b.symbols.size()) {
    return a.symbols.size() < b.symbols.size();
  }
  return a.symbols < b.symbols;
}

}  // namespace

absl::StatusOr<std::vector<ScoredString>> TopKStrings(const Pst& pst, int k) {
  if (k < 1) return absl::InvalidArgumentError("k must be at least 1");
  auto worse = [](const ScoredString& a, const ScoredString& b) {
    return RanksBefore(b, a);
  };
  std::priority_queue<ScoredString, std::vector<ScoredString>, decltype(worse)>
      frontier(worse);
  const int num_ids = pst.alphabet().num_ids();
  const Histogram& root_hist = pst.node(pst.root()).hist;
  for (int x = 2; x < num_ids; ++x) frontier.push({{x}, root_hist[x]});

  std::vector<ScoredString> out;
  while (!frontier.empty() && static_cast<int>(out.size()) < k) {
    ScoredString top = frontier.top();
    frontier.pop();
    if (static_cast<int>(top.symbols.size()) < pst.l_max()) {
      const PstNode& v = pst.node(pst.FindLongestSuffix(top.symbols));
      const double mag = Magnitude(v.hist);
      for (int x = 2; x < num_ids; ++x) {
        ScoredString ext{top.symbols, mag > 0 ? top.estimate * v.hist[x] / mag
                                              : 0.0};
        ext.symbols.push_back(x);
        frontier.push(std::move(ext));
      }
    }
    out.push_back(std::move(top));
  }
  return out;
}

absl::StatusOr<std::vector<std::vector<int>>> GenerateSequences(const Pst& pst,
                                                                int count,
                                                                Rng& rng) {
  if (count < 0) return absl::InvalidArgumentError("count must be >= 0");
  if (pst.size() == 0 || Magnitude(pst.node(pst.root()).hist) <= 0) {
    return absl::FailedPreconditionError(
        "root histogram has zero magnitude; nothing to sample from");
  }
  const int num_ids = pst.alphabet().num_ids();
  std::vector<std::vector<int>> out;
  out.reserve(count);
  std::vector<int> s;
  for (int i = 0; i < count; ++i) {
    s.assign(1, kStartSymbol);
    bool dropped = false;
    while (static_cast<int>(s.size()) - 1 < pst.l_max()) {
      const PstNode& v = pst.node(pst.FindLongestSuffix(s));
      const double mag = Magnitude(v.hist);
      if (mag <= 0) {
        dropped = true;
        break;
      }
      double u = rng.Uniform01() * mag;
      int next = num_ids - 1;
      for (int x = 1; x < num_ids; ++x) {
        if (v.hist[x] <= 0) continue;
        if (u < v.hist[x]) {
          next = x;
          break;
        }
        u -= v.hist[x];
        next = x;
      }
      if (next == kEndSymbol) break;
      s.push_back(next);
    }
    if (!dropped) out.emplace_back(s.begin() + 1, s.end());
  }
  return out;
}

absl::StatusOr<std::vector<std::vector<std::string>>> ReadTokenSequences(
    std::istream& in) {
  std::vector<std::vector<std::string>> out;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const absl::string_view text = absl::StripAsciiWhitespace(line);
    if (!text.empty() && text.front() == '#') continue;
    std::vector<std::string> tokens =
        absl::StrSplit(text, absl::ByAnyChar(" \t"), absl::SkipEmpty());
    for (const std::string& t : tokens) {
      if (t == "$" || t == "&") {
        return absl::DataLossError(absl::StrCat(
            "line ", line_no, ": reserved token '", t, "' in input"));
      }
    }
    out.push_back(std::move(tokens));
  }
  return out;
}

absl::StatusOr<std::pair<Alphabet, std::vector<std::vector<int>>>>
EncodeSequences(const std::vector<std::vector<std::string>>& raw) {
  std::vector<std::string> symbols;
  for (const auto& s : raw) symbols.insert(symbols.end(), s.begin(), s.end());
  std::sort(symbols.begin(), symbols.end());
  symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
  ASSIGN_OR_RETURN(Alphabet alphabet, Alphabet::Create(std::move(symbols)));
  std::vector<std::vector<int>> encoded;
  encoded.reserve(raw.size());
  for (const auto& s : raw) {
    std::vector<int> ids;
    ids.reserve(s.size());
    for (const std::string& t : s) {
      ASSIGN_OR_RETURN(const int id, alphabet.Id(t));
      ids.push_back(id);
    }
    encoded.push_back(std::move(ids));
  }
  return std::make_pair(std::move(alphabet), std::move(encoded));
}

std::string SymbolsToString(const Alphabet& alphabet,
                            absl::Span<const int> symbols,
                            absl::string_view sep) {
  return absl::StrJoin(symbols, sep, [&](std::string* out, int id) {
    out->append(alphabet.Token(id));
  });
}

nlohmann::json PstToJson(const Pst& pst) {
  const Alphabet& a = pst.alphabet();
  nlohmann::json j;
  j["alphabet"] = a.symbols();
  j["l_max"] = pst.l_max();
  const PstParams& p = pst.params();
  j["params"] = {{"epsilon", p.epsilon},
                 {"epsilon_tree", p.epsilon_tree},
                 {"epsilon_hist", p.epsilon_hist},
                 {"lambda", p.tree.lambda},
                 {"theta", p.tree.theta},
                 {"delta", p.tree.delta},
                 {"hist_scale", p.hist_scale}};
  nlohmann::json nodes = nlohmann::json::array();
  for (size_t id = 0; id < pst.size(); ++id) {
    const PstNode& n = pst.node(id);
    nlohmann::json node;
    node["id"] = id;
    std::vector<std::string> predictor;
    for (int x : n.predictor) predictor.push_back(a.Token(x));
    node["predictor"] = predictor;
    nlohmann::json children = nlohmann::json::object();
    if (!n.is_leaf()) {
      children["$"] = n.first_child;
      for (int x = 2; x < a.num_ids(); ++x) {
        children[a.Token(x)] = n.first_child + x - 1;
      }
    }
    node["children"] = std::move(children);
    nlohmann::json hist = nlohmann::json::object();
    for (int x = 1; x < a.num_ids(); ++x) hist[a.Token(x)] = n.hist[x];
    node["hist"] = std::move(hist);
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

absl::StatusOr<Pst> PstFromJson(const nlohmann::json& j) {
  try {
    ASSIGN_OR_RETURN(
        Alphabet alphabet,
        Alphabet::Create(j.at("alphabet").get<std::vector<std::string>>()));
    const int l_max = j.at("l_max").get<int>();
    PstParams params;
    const auto& jp = j.at("params");
    params.epsilon = jp.value("epsilon", 0.0);
    params.epsilon_tree = jp.value("epsilon_tree", 0.0);
    params.epsilon_hist = jp.value("epsilon_hist", 0.0);
    params.tree.lambda = jp.value("lambda", 0.0);
    params.tree.theta = jp.value("theta", 0.0);
    params.tree.delta = jp.value("delta", 0.0);
    params.tree.epsilon = params.epsilon_tree;
    params.tree.beta = alphabet.size() + 1;
    params.hist_scale = jp.value("hist_scale", 0.0);

    const auto& jn = j.at("nodes");
    std::vector<PstNode> nodes(jn.size());
    const int fanout = alphabet.size() + 1;
    for (size_t i = 0; i < jn.size(); ++i) {
      const auto& x = jn[i];
      if (x.at("id").get<size_t>() != i) {
        return absl::DataLossError("node ids must be dense and in order");
      }
      PstNode& n = nodes[i];
      for (const auto& t : x.at("predictor")) {
        ASSIGN_OR_RETURN(const int id, alphabet.Id(t.get<std::string>()));
        n.predictor.push_back(id);
      }
      n.depth = static_cast<int>(n.predictor.size());
      const auto& children = x.at("children");
      if (!children.empty()) {
        if (static_cast<int>(children.size()) != fanout) {
          return absl::DataLossError(
              absl::StrCat("node ", i, " must have ", fanout, " children"));
        }
        n.first_child = children.at("$").get<int>();
        for (int s = 2; s < alphabet.num_ids(); ++s) {
          if (children.at(alphabet.Token(s)).get<int>() != n.first_child + s - 1) {
            return absl::DataLossError("children must be contiguous");
          }
        }
        if (n.first_child <= static_cast<int>(i) ||
            n.first_child + fanout > static_cast<int>(jn.size())) {
          return absl::DataLossError("child ids out of range");
        }
      }
      n.hist.assign(alphabet.num_ids(), 0.0);
      if (x.contains("hist")) {
        for (const auto& [token, count] : x.at("hist").items()) {
          ASSIGN_OR_RETURN(const int id, alphabet.Id(token));
          if (id == kStartSymbol) {
            return absl::DataLossError("histograms cannot count START");
          }
          n.hist[id] = count.get<double>();
        }
      }
    }
    if (nodes.empty()) return absl::DataLossError("PST has no nodes");
    return Pst(std::move(alphabet), std::move(nodes), l_max, params);
  } catch (const nlohmann::json::exception& e) {
    return absl::DataLossError(absl::StrCat("malformed PST JSON: ", e.what()));
  }
}

}  // namespace privtree
