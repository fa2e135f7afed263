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

#ifndef PRIVTREE_PRIVACY_H_
#define PRIVTREE_PRIVACY_H_

#include "absl/status/statusor.h"
#include "absl/types/span.h"

namespace privtree {

// Parameters of a PrivTree run. `gamma` duplicates delta / lambda and is
// checked on construction.
struct PrivacyParams {
  double epsilon = 0;
  double lambda = 0;
  double theta = 0;
  double delta = 0;
  double gamma = 0;
  int beta = 2;

  static absl::StatusOr<PrivacyParams> Create(double epsilon, double lambda,
                                              double theta, double delta,
                                              int beta);
};

// Smallest noise scale satisfying the PrivTree guarantee at decay ratio
// gamma = delta / lambda: ((2 e^gamma - 1) / (e^gamma - 1)) / epsilon.
absl::StatusOr<double> MinPrivTreeLambda(double epsilon, double gamma);

// Parameters with delta = lambda ln(beta) and the minimum admissible lambda,
// ((2 beta - 1) / (beta - 1)) * sensitivity / epsilon, times `slack` (>= 1).
// `sensitivity` is 1 for point counts and l_max for prediction-suffix-tree
// scores.
absl::StatusOr<PrivacyParams> PrivTreeParams(double epsilon, int beta,
                                             double theta,
                                             double sensitivity = 1.0,
                                             double slack = 1.0);

// Score used by the split test: max(theta - delta, c - depth * delta).
double BiasedCount(double count, int depth, double theta, double delta);

// Sequential composition: the total budget of running each component.
absl::StatusOr<double> ComposeBudgets(absl::Span<const double> budgets);

// Privacy cost of one split decision whose score drops from x to x - 1:
//   ln(Pr[x + Lap(lambda) > theta] / Pr[x - 1 + Lap(lambda) > theta]).
// Evaluated piecewise from closed-form tails; exactly 1/lambda for
// x <= theta.
absl::StatusOr<double> Rho(double x, double theta, double lambda);

// Exponential-decay upper bound on Rho: 1/lambda below theta + 1, and
// (1/lambda) exp((theta + 1 - x) / lambda) above.
absl::StatusOr<double> RhoUpper(double x, double theta, double lambda);

namespace internal {
// Unchecked kernels behind Rho and RhoUpper; lambda must be positive.
double RhoKernel(double x, double theta, double lambda);
double RhoUpperKernel(double x, double theta, double lambda);
}  // namespace internal

}  // namespace privtree

#endif  // PRIVTREE_PRIVACY_H_
