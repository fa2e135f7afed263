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

#ifndef PRIVTREE_SVT_AUDIT_H_
#define PRIVTREE_SVT_AUDIT_H_

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "privtree/svt.h"

namespace privtree {

// Integral over the real line of exp(log_integrand(x)), returned in log
// space. The integrand must be smooth between consecutive breakpoints and
// decay at least like exp(-|x| / tail_scale) outside them. Uses adaptive
// 15-point Gauss-Kronrod on each piece; the tails are mapped onto (0, 1] by
// x = b -/+ tail_scale * ln(u). Fails with kInternal if the estimated
// relative error exceeds `rel_tol`.
absl::StatusOr<double> LogIntegrate(
    const std::function<double(double)>& log_integrand,
    std::vector<double> breakpoints, double tail_scale,
    double upper_limit = std::numeric_limits<double>::infinity(),
    double rel_tol = 1e-10);

// Probability of one output pattern of a single-threshold SVT run, as a
// function of the exact query answers. The noisy threshold theta + Lap(
// threshold_scale) must exceed each `below` answer's noisy value and be
// exceeded by each `above` one. `released` pairs (answer, value) stand for
// noisy answers published with the given value: each contributes the
// density of the value and forces the threshold below it.
struct SvtEvent {
  double theta = 0;
  double threshold_scale = 1;
  double query_scale = 1;
  std::vector<double> above;
  std::vector<double> below;
  std::vector<std::pair<double, double>> released;
};

// ln Pr[event] (a log density when `released` is nonempty).
absl::StatusOr<double> LogEventProbability(const SvtEvent& event);

// Log ratio Pr[D1 -> E] / Pr[D3 -> E] for the binary variant with
// D1 = {a, b}, D3 = {b, b}, k / 2 queries count(a) then k / 2 count(b), and E
// = k / 2 ones followed by k / 2 zeros. k must be even and at least 2.
absl::StatusOr<double> BinarySvtLogRatio(int k, double theta, double lambda);

// Same construction for the vanilla variant with t = 1 and theta = 0:
// D1 = {a, b}, D3 = {a, a}, k - 1 queries count(a) then count(b), and E =
// k - 1 placeholders followed by the released value 1. The ratio has the
// closed form exp(k / lambda).
absl::StatusOr<double> VanillaSvtLogRatio(int k, double lambda);
// The same ratio evaluated by quadrature over the threshold.
absl::StatusOr<double> VanillaSvtLogRatioByQuadrature(int k, double lambda);

// A pair of datasets, a query stream, and an output pattern of the
// improved variant.
struct AuditScenario {
  std::string name;
  TupleDataset d;
  TupleDataset d_prime;
  std::vector<std::string> query_labels;  // count queries by label
  std::vector<int> outputs;               // observed bits
  double theta = 0;
};

// Exact ln(Pr[d -> outputs] / Pr[d_prime -> outputs]) for the improved
// variant. The pattern must be one the variant can produce: at most t ones,
// and if exactly t, the last bit is the t-th one.
absl::StatusOr<double> ImprovedSvtLogRatio(const AuditScenario& scenario,
                                           double lambda, int t);

// Neighbouring pairs in both directions, every query stream over {a, b} of
// length at most `max_exhaustive_k` with every valid output pattern, plus
// the binary and vanilla counterexample streams at k = 16.
std::vector<AuditScenario> ImprovedSvtBattery(int t, int max_exhaustive_k = 4);

struct AuditRecord {
  std::string variant;
  int k = 0;
  double lambda = 0;
  double theta = 0;
  int t = 1;
  double log_ratio = 0;
  // Log-ratio bound implied by the privacy claim at epsilon = 2 / lambda.
  double claimed_bound = 0;
  std::string verdict;  // "SATISFIES" or "VIOLATES"
};

std::string Verdict(double log_ratio, double bound);

absl::StatusOr<AuditRecord> AuditBinary(int k, double theta, double lambda);
absl::StatusOr<AuditRecord> AuditVanilla(int k, double lambda);
// Largest log ratio over ImprovedSvtBattery(t).
absl::StatusOr<AuditRecord> AuditImproved(double lambda, int t,
                                          int max_exhaustive_k = 4);

// Binary (k = 16, theta = 1, lambda = 2), vanilla (k = 8, lambda = 2), and
// the improved battery for lambda in {1, 2, 4} and t in {1, 2, 3}.
absl::StatusOr<std::vector<AuditRecord>> DefaultAudit();

nlohmann::json AuditToJson(const std::vector<AuditRecord>& records);

}  // namespace privtree

#endif  // PRIVTREE_SVT_AUDIT_H_
