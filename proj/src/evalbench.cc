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

#include "privtree/evalbench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/hash/hash.h"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "boost/math/distributions/binomial.hpp"
#include "privtree/status_macros.h"

namespace privtree {

absl::StatusOr<SizeClass> ParseSizeClass(absl::string_view name) {
  if (name == "small") return SizeClass::kSmall;
  if (name == "medium") return SizeClass::kMedium;
  if (name == "large") return SizeClass::kLarge;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown size class '", name,
                   "' (expected small, medium or large)"));
}

std::string SizeClassName(SizeClass c) {
  switch (c) {
    case SizeClass::kSmall:
      return "small";
    case SizeClass::kMedium:
      return "medium";
    case SizeClass::kLarge:
      return "large";
  }
  return "unknown";
}

std::pair<double, double> VolumeFractionRange(SizeClass c) {
  switch (c) {
    case SizeClass::kSmall:
      return {1e-4, 1e-3};
    case SizeClass::kMedium:
      return {1e-3, 1e-2};
    case SizeClass::kLarge:
      return {1e-2, 1e-1};
  }
  return {0, 0};
}

absl::StatusOr<std::vector<RangeQuery>> GenerateWorkload(
    const SpatialDomain& domain, const WorkloadSpec& spec) {
  if (spec.count < 0) {
    return absl::InvalidArgumentError("query count must be >= 0");
  }
  const size_t d = domain.dims();
  if (d == 0) return absl::InvalidArgumentError("domain has no dimensions");
  const auto [f_lo, f_hi] = VolumeFractionRange(spec.size_class);
  Rng rng(spec.seed);
  std::vector<RangeQuery> out;
  out.reserve(spec.count);
  std::vector<double> w(d);
  for (int i = 0; i < spec.count; ++i) {
    const double f = f_lo * std::pow(f_hi / f_lo, rng.Uniform01());
    for (double& x : w) x = rng.Uniform01();
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    RangeQuery q;
    q.lo.resize(d);
    q.hi.resize(d);
    for (size_t j = 0; j < d; ++j) {
      const double width = domain.hi[j] - domain.lo[j];
      const double side = std::pow(f, w[j] / total) * width;
      q.lo[j] = domain.lo[j] + rng.Uniform01() * (width - side);
      q.hi[j] = std::min(q.lo[j] + side, domain.hi[j]);
    }
    out.push_back(std::move(q));
  }
  return out;
}

double VolumeFraction(const SpatialDomain& domain, const RangeQuery& q) {
  double f = 1;
  for (size_t j = 0; j < domain.dims(); ++j) {
    const double lo = std::max(q.lo[j], domain.lo[j]);
    const double hi = std::min(q.hi[j], domain.hi[j]);
    if (hi <= lo) return 0;
    f *= (hi - lo) / (domain.hi[j] - domain.lo[j]);
  }
  return f;
}

absl::StatusOr<int64_t> ExactRangeCount(const SpatialDataset& data,
                                        const RangeQuery& q) {
  const size_t d = data.dims();
  if (q.dims() != d) {
    return absl::FailedPreconditionError(absl::StrCat(
        "query has ", q.dims(), " dimensions, data has ", d));
  }
  const SpatialDomain& dom = data.domain();
  int64_t count = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    bool inside = true;
    for (size_t j = 0; j < d && inside; ++j) {
      const bool upper_closed = p[j] == dom.hi[j] && q.hi[j] >= dom.hi[j];
      inside = p[j] >= q.lo[j] && (p[j] < q.hi[j] || upper_closed);
    }
    count += inside;
  }
  return count;
}

double DefaultSmoothing(size_t n) { return 0.001 * static_cast<double>(n); }

absl::StatusOr<double> RelativeError(double estimate, double exact,
                                     double delta) {
  if (!(delta > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("smoothing must be positive, got ", delta));
  }
  if (exact < 0) {
    return absl::InvalidArgumentError("exact answer must be nonnegative");
  }
  return std::abs(estimate - exact) / std::max(exact, delta);
}

absl::StatusOr<double> TopKPrecision(absl::Span<const std::string> returned,
                                     absl::Span<const std::string> exact,
                                     int k) {
  if (k < 1) return absl::InvalidArgumentError("k must be at least 1");
  const absl::flat_hash_set<std::string> truth(exact.begin(), exact.end());
  const absl::flat_hash_set<std::string> got(returned.begin(), returned.end());
  int hits = 0;
  for (const std::string& s : got) hits += truth.contains(s);
  return static_cast<double>(hits) / k;
}

absl::StatusOr<double> TotalVariation(absl::Span<const double> p,
                                      absl::Span<const double> q) {
  double sp = 0, sq = 0;
  for (double x : p) {
    if (x < 0) return absl::InvalidArgumentError("negative weight");
    sp += x;
  }
  for (double x : q) {
    if (x < 0) return absl::InvalidArgumentError("negative weight");
    sq += x;
  }
  if (!(sp > 0) || !(sq > 0)) {
    return absl::InvalidArgumentError("distribution has zero total weight");
  }
  double l1 = 0;
  for (size_t i = 0; i < std::max(p.size(), q.size()); ++i) {
    const double a = i < p.size() ? p[i] / sp : 0;
    const double b = i < q.size() ? q[i] / sq : 0;
    l1 += std::abs(a - b);
  }
  return 0.5 * l1;
}

std::vector<double> LengthHistogram(
    const std::vector<std::vector<int>>& sequences) {
  std::vector<double> h;
  for (const auto& s : sequences) {
    if (s.size() >= h.size()) h.resize(s.size() + 1, 0.0);
    h[s.size()] += 1;
  }
  return h;
}

absl::StatusOr<int64_t> ExactStringCount(const SequenceDataset& data,
                                         absl::Span<const int> query) {
  if (query.empty()) return absl::InvalidArgumentError("empty query");
  for (size_t i = 0; i < query.size(); ++i) {
    const int x = query[i];
    const bool ok = (x >= 2 && x < data.alphabet.num_ids()) ||
                    (x == kEndSymbol && i + 1 == query.size());
    if (!ok) {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid symbol id ", x, " at position ", i));
    }
  }
  int64_t count = 0;
  for (size_t i = 0; i < data.sequences.size(); ++i) {
    const std::vector<int> s = data.WithSentinels(i);
    if (s.size() < query.size()) continue;
    for (size_t p = 0; p + query.size() <= s.size(); ++p) {
      count += std::equal(query.begin(), query.end(), s.begin() + p);
    }
  }
  return count;
}

absl::StatusOr<std::vector<ScoredString>> ExactTopKStrings(
    const SequenceDataset& data, int k) {
  if (k < 1) return absl::InvalidArgumentError("k must be at least 1");
  absl::flat_hash_map<std::vector<int>, int64_t> counts;
  for (const auto& s : data.sequences) {
    for (size_t p = 0; p < s.size(); ++p) {
      std::vector<int> sub;
      for (size_t e = p; e < s.size() &&
                         static_cast<int>(sub.size()) < data.l_max;
           ++e) {
        sub.push_back(s[e]);
        ++counts[sub];
      }
    }
  }
  std::vector<ScoredString> all;
  all.reserve(counts.size());
  for (auto& [symbols, c] : counts) {
    all.push_back({symbols, static_cast<double>(c)});
  }
  auto before = [](const ScoredString& a, const ScoredString& b) {
    if (a.estimate != b.estimate) return a.estimate > b.estimate;
    if (a.symbols.size() != b.symbols.size()) {
      return a.symbols.size() < b.symbols.size();
    }
    return a.symbols < b.symbols;
  };
  const size_t keep = std::min<size_t>(k, all.size());
  std::partial_sort(all.begin(), all.begin() + keep, all.end(), before);
  all.resize(keep);
  return all;
}

double SignTestPValue(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0) return 1.0;
  const boost::math::binomial_distribution<double> b(n, 0.5);
  const int tail = std::min(wins, losses);
  return std::min(1.0, 2 * boost::math::cdf(b, tail));
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + mid));
}

double Mean(absl::Span<const double> v) {
  if (v.empty()) return 0;
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

absl::StatusOr<EvalReport> ScoreEstimates(std::vector<double> estimates,
                                          std::vector<double> exact,
                                          double delta) {
  if (estimates.size() != exact.size()) {
    return absl::InvalidArgumentError("estimate and exact counts differ");
  }
  EvalReport r;
  r.errors.reserve(exact.size());
  for (size_t i = 0; i < exact.size(); ++i) {
    ASSIGN_OR_RETURN(const double e,
                     RelativeError(estimates[i], exact[i], delta));
    r.errors.push_back(e);
  }
  r.estimates = std::move(estimates);
  r.exact = std::move(exact);
  r.mean_error = Mean(r.errors);
  r.median_error = Median(r.errors);
  return r;
}

nlohmann::json ReportToJson(const EvalReport& r) {
  return {{"estimates", r.estimates},
          {"exact", r.exact},
          {"relative_errors", r.errors},
          {"mean_relative_error", r.mean_error},
          {"median_relative_error", r.median_error}};
}

std::string FormatTable(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width(header.size());
  for (size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
  for (const auto& row : rows) {
    for (size_t j = 0; j < row.size() && j < width.size(); ++j) {
      width[j] = std::max(width[j], row[j].size());
    }
  }
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t j = 0; j < width.size(); ++j) {
      const std::string& c = j < cells.size() ? cells[j] : "";
      absl::StrAppend(&out, j == 0 ? "" : "  ", c,
                      std::string(width[j] - c.size(), ' '));
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out.push_back('\n');
  };
  line(header);
  std::vector<std::string> rule;
  for (size_t w : width) rule.push_back(std::string(w, '-'));
  line(rule);
  for (const auto& row : rows) line(row);
  return out;
}

absl::StatusOr<SpatialDataset> GaussianMixture2D(size_t n, uint64_t seed) {
  struct Component {
    double weight, x, y, sd;
  };
  static constexpr Component kComponents[] = {{0.4, 0.30, 0.30, 0.05},
                                              {0.3, 0.70, 0.60, 0.08},
                                              {0.2, 0.50, 0.85, 0.03},
                                              {0.1, 0.20, 0.75, 0.02}};
  Rng rng(seed);
  auto normal = [&rng] {
    // Box-Muller; one of the pair is discarded.
    const double r = std::sqrt(-2 * std::log(rng.Uniform01()));
    return r * std::cos(2 * M_PI * rng.Uniform01());
  };
  std::vector<double> coords;
  coords.reserve(2 * n);
  while (coords.size() < 2 * n) {
    double u = rng.Uniform01();
    const Component* c = &kComponents[0];
    for (const Component& k : kComponents) {
      c = &k;
      if (u < k.weight) break;
      u -= k.weight;
    }
    const double x = c->x + c->sd * normal();
    const double y = c->y + c->sd * normal();
    if (x < 0 || x > 1 || y < 0 || y > 1) continue;
    coords.push_back(x);
    coords.push_back(y);
  }
  ASSIGN_OR_RETURN(SpatialDomain domain, Box::Create({0, 0}, {1, 1}));
  return SpatialDataset::Create(std::move(domain), std::move(coords));
}

absl::StatusOr<SpatialEvalSummary> EvaluateSpatial(
    const SpatialDataset& data, const SpatialEvalOptions& options) {
  if (!(options.epsilon > 0)) {
    return absl::InvalidArgumentError("epsilon must be positive");
  }
  if (options.num_queries < 1) {
    return absl::InvalidArgumentError("need at least one query");
  }
  // The workload stream is derived from the seed but kept apart from the
  // per-trial streams.
  const WorkloadSpec spec{options.size_class, options.num_queries,
                          MixSeed(options.seed ^ 0x776f726b6c6f6164ULL)};
  ASSIGN_OR_RETURN(const std::vector<RangeQuery> workload,
                   GenerateWorkload(data.domain(), spec));
  std::vector<double> exact;
  exact.reserve(workload.size());
  for (const RangeQuery& q : workload) {
    ASSIGN_OR_RETURN(const int64_t c, ExactRangeCount(data, q));
    exact.push_back(static_cast<double>(c));
  }
  const double delta =
      options.delta > 0 ? options.delta : DefaultSmoothing(data.size());

  auto score = [&](const DecompTree& tree) -> absl::StatusOr<EvalReport> {
    std::vector<double> est;
    est.reserve(workload.size());
    for (const RangeQuery& q : workload) {
      ASSIGN_OR_RETURN(const double a, RangeCount(tree, q));
      est.push_back(a);
    }
    return ScoreEstimates(std::move(est), exact, delta);
  };

  std::function<absl::StatusOr<SpatialTrial>(int, Rng&)> trial =
      [&](int i, Rng& rng) -> absl::StatusOr<SpatialTrial> {
    SpatialTrial t;
    t.trial = i;
    Rng tree_rng = rng.Split(0);
    Rng grid_rng = rng.Split(1);
    const auto start = std::chrono::steady_clock::now();
    ASSIGN_OR_RETURN(const DecompTree tree,
                     ReleasePrivTree(data, options.epsilon, tree_rng,
                                     options.privtree));
    t.privtree_build_seconds = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
    t.privtree_nodes = tree.size();
    ASSIGN_OR_RETURN(const EvalReport pr, score(tree));
    ASSIGN_OR_RETURN(const DecompTree grid,
                     BuildUniformGrid(data, options.epsilon, grid_rng));
    ASSIGN_OR_RETURN(const EvalReport gr, score(grid));
    t.privtree_median = pr.median_error;
    t.privtree_mean = pr.mean_error;
    t.grid_median = gr.median_error;
    t.grid_mean = gr.mean_error;
    return t;
  };

  SpatialEvalSummary summary;
  summary.num_points = data.size();
  ASSIGN_OR_RETURN(summary.trials,
                   RunTrials(options.trials, options.jobs, options.seed, trial));
  for (const SpatialTrial& t : summary.trials) {
    summary.privtree_wins += t.privtree_median < t.grid_median;
    summary.grid_wins += t.grid_median < t.privtree_median;
  }
  summary.sign_test_p =
      SignTestPValue(summary.privtree_wins, summary.grid_wins);
  return summary;
}

nlohmann::json SpatialEvalToJson(const SpatialEvalSummary& s) {
  nlohmann::json trials = nlohmann::json::array();
  for (const SpatialTrial& t : s.trials) {
    trials.push_back({{"trial", t.trial},
                      {"privtree_median_re", t.privtree_median},
                      {"privtree_mean_re", t.privtree_mean},
                      {"ug_median_re", t.grid_median},
                      {"ug_mean_re", t.grid_mean},
                      {"privtree_nodes", t.privtree_nodes},
                      {"privtree_build_seconds", t.privtree_build_seconds}});
  }
  return {{"num_points", s.num_points},
          {"trials", std::move(trials)},
          {"privtree_wins", s.privtree_wins},
          {"ug_wins", s.grid_wins},
          {"sign_test_p", s.sign_test_p}};
}

std::string SpatialEvalToTable(const SpatialEvalSummary& s) {
  std::vector<std::vector<std::string>> rows;
  for (const SpatialTrial& t : s.trials) {
    rows.push_back({absl::StrCat(t.trial),
                    absl::StrFormat("%.4f", t.privtree_median),
                    absl::StrFormat("%.4f", t.grid_median),
                    absl::StrCat(t.privtree_nodes),
                    absl::StrFormat("%.3f", t.privtree_build_seconds)});
  }
  std::string out = FormatTable(
      {"trial", "privtree_median_re", "ug_median_re", "nodes", "build_s"},
      rows);
  absl::StrAppend(&out, "privtree wins ", s.privtree_wins, ", ug wins ",
                  s.grid_wins, ", sign test p = ",
                  absl::StrFormat("%.3g", s.sign_test_p), "\n");
  return out;
}

}  // namespace privtree
