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

#ifndef PRIVTREE_EVALBENCH_H_
#define PRIVTREE_EVALBENCH_H_

#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"
#include "json.hpp"
#include "privtree/markov.h"
#include "privtree/random.h"
#include "privtree/spatial.h"

namespace privtree {

// Range-query size classes by volume fraction of the domain:
// small [1e-4, 1e-3), medium [1e-3, 1e-2), large [1e-2, 1e-1).
enum class SizeClass { kSmall, kMedium, kLarge };

absl::StatusOr<SizeClass> ParseSizeClass(absl::string_view name);
std::string SizeClassName(SizeClass c);
std::pair<double, double> VolumeFractionRange(SizeClass c);

struct WorkloadSpec {
  SizeClass size_class = SizeClass::kMedium;
  int count = 0;
  uint64_t seed = 0;
};

// Each box has a log-uniform volume fraction f in the class range. Side j
// covers the fraction f^(w_j / sum w) of its dimension for uniform random
// weights w, and the box is placed uniformly inside the domain.
absl::StatusOr<std::vector<RangeQuery>> GenerateWorkload(
    const SpatialDomain& domain, const WorkloadSpec& spec);

// Volume of the query clipped to the domain, over the domain volume.
double VolumeFraction(const SpatialDomain& domain, const RangeQuery& q);

// Brute-force count of points inside [lo, hi] of the query, under the
// half-open cell convention: lo <= x < hi, with hi closed where it meets
// the domain's upper face.
absl::StatusOr<int64_t> ExactRangeCount(const SpatialDataset& data,
                                        const RangeQuery& q);

// 0.1% of the dataset cardinality.
double DefaultSmoothing(size_t n);

// |estimate - exact| / max(exact, delta).
absl::StatusOr<double> RelativeError(double estimate, double exact,
                                     double delta);

// |returned ∩ exact| / k.
absl::StatusOr<double> TopKPrecision(absl::Span<const std::string> returned,
                                     absl::Span<const std::string> exact,
                                     int k);

// Half the L1 distance after normalizing each weight vector to sum 1. The
// shorter vector is padded with zeros.
absl::StatusOr<double> TotalVariation(absl::Span<const double> p,
                                      absl::Span<const double> q);

// Frequencies of sequence lengths 0 .. max length (unnormalized).
std::vector<double> LengthHistogram(
    const std::vector<std::vector<int>>& sequences);

// Occurrences of `query` (Sigma symbols, optionally ending with END) in
// the sentinel-wrapped sequences.
absl::StatusOr<int64_t> ExactStringCount(const SequenceDataset& data,
                                         absl::Span<const int> query);

// The k most frequent strings over Sigma of length <= l_max, ranked like
// TopKStrings: count, then shorter, then symbol order.
absl::StatusOr<std::vector<ScoredString>> ExactTopKStrings(
    const SequenceDataset& data, int k);

// Two-sided exact sign test p-value for `wins` against `losses` (ties
// dropped).
double SignTestPValue(int wins, int losses);

double Median(std::vector<double> values);
double Mean(absl::Span<const double> values);

struct EvalReport {
  std::vector<double> estimates;
  std::vector<double> exact;
  std::vector<double> errors;
  double mean_error = 0;
  double median_error = 0;
};

absl::StatusOr<EvalReport> ScoreEstimates(std::vector<double> estimates,
                                          std::vector<double> exact,
                                          double delta);

nlohmann::json ReportToJson(const EvalReport& report);

// Aligned plain-text table; every row must have header.size() cells.
std::string FormatTable(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows);

// Runs fn(trial, rng) for trial = 0 .. num_trials - 1 on up to `jobs`
// threads. Trial i always gets Rng(seed).Split(i), so results do not depend
// on the number of jobs. Returns the first error by trial index.
template <typename T>
absl::StatusOr<std::vector<T>> RunTrials(
    int num_trials, int jobs, uint64_t seed,
    const std::function<absl::StatusOr<T>(int, Rng&)>& fn) {
  if (num_trials < 0) return absl::InvalidArgumentError("negative trials");
  if (jobs < 1) return absl::InvalidArgumentError("jobs must be >= 1");
  std::vector<absl::StatusOr<T>> results(
      num_trials, absl::StatusOr<T>(absl::UnknownError("not run")));
  const Rng master(seed);
  auto work = [&](int worker) {
    for (int i = worker; i < num_trials; i += jobs) {
      Rng rng = master.Split(static_cast<uint64_t>(i));
      results[i] = fn(i, rng);
    }
  };
  std::vector<std::thread> threads;
  for (int w = 1; w < jobs && w < num_trials; ++w) threads.emplace_back(work, w);
  work(0);
  for (std::thread& t : threads) t.join();
  std::vector<T> out;
  out.reserve(num_trials);
  for (auto& r : results) {
    if (!r.ok()) return r.status();
    out.push_back(*std::move(r));
  }
  return out;
}

// Synthetic points in the unit square drawn from a fixed mixture of four
// Gaussians of different spreads (samples outside the square are redrawn).
absl::StatusOr<SpatialDataset> GaussianMixture2D(size_t n, uint64_t seed);

struct SpatialEvalOptions {
  double epsilon = 1;
  SizeClass size_class = SizeClass::kMedium;
  int num_queries = 1000;
  int trials = 20;
  int jobs = 1;
  uint64_t seed = 0;
  ReleaseOptions privtree;
  // 0 selects DefaultSmoothing(n).
  double delta = 0;
};

struct SpatialTrial {
  int trial = 0;
  double privtree_median = 0;
  double privtree_mean = 0;
  double grid_median = 0;
  double grid_mean = 0;
  double privtree_build_seconds = 0;
  size_t privtree_nodes = 0;
};

struct SpatialEvalSummary {
  size_t num_points = 0;
  std::vector<SpatialTrial> trials;
  // Trials in which PrivTree's median error is strictly below the grid's.
  int privtree_wins = 0;
  int grid_wins = 0;
  double sign_test_p = 1;
};

// PrivTree against the uniform grid on one workload shared by every trial
// (exact answers are computed once).
absl::StatusOr<SpatialEvalSummary> EvaluateSpatial(
    const SpatialDataset& data, const SpatialEvalOptions& options);

nlohmann::json SpatialEvalToJson(const SpatialEvalSummary& summary);
std::string SpatialEvalToTable(const SpatialEvalSummary& summary);

}  // namespace privtree

#endif  // PRIVTREE_EVALBENCH_H_
