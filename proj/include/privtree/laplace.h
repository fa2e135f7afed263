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

#ifndef PRIVTREE_LAPLACE_H_
#define PRIVTREE_LAPLACE_H_

#include "absl/status/statusor.h"
#include "privtree/random.h"

namespace privtree {

// Zero-centred Laplace distribution with density exp(-|x|/scale)/(2 scale).
// The scale is validated once at construction; the accessors below are then
// total functions, suitable for inner loops and integrands.
class LaplaceDistribution {
 public:
  static absl::StatusOr<LaplaceDistribution> Create(double scale);

  double scale() const { return scale_; }

  // Inverse-CDF transform of a single uniform draw.
  double Sample(Rng& rng) const;
  double Quantile(double u) const;

  double Pdf(double x) const;
  double Cdf(double x) const;
  // Pr[X > x].
  double Survival(double x) const;
  double LogCdf(double x) const;
  double LogSurvival(double x) const;

 private:
  explicit LaplaceDistribution(double scale) : scale_(scale) {}
  double scale_;
};

// Draws one sample from Lap(scale). Fails on a nonpositive or non-finite
// scale.
absl::StatusOr<double> SampleLaplace(double scale, Rng& rng);

// 1/2 e^{x/scale} for x <= 0, 1 - 1/2 e^{-x/scale} otherwise.
absl::StatusOr<double> LaplaceCdf(double x, double scale);

}  // namespace privtree

#endif  // PRIVTREE_LAPLACE_H_
