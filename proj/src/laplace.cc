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

#include "privtree/laplace.h"

#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "privtree/status_macros.h"

namespace privtree {

absl::StatusOr<LaplaceDistribution> LaplaceDistribution::Create(double scale) {
  if (!(scale > 0) || !std::isfinite(scale)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Laplace scale must be positive and finite, got ", scale));
  }
  return LaplaceDistribution(scale);
}

double LaplaceDistribution::Quantile(double u) const {
  if (u < 0.5) return scale_ * std::log(2.0 * u);
  return -scale_ * std::log(2.0 * (1.0 - u));
}

double LaplaceDistribution::Sample(Rng& rng) const {
  return Quantile(rng.Uniform01());
}

double LaplaceDistribution::Pdf(double x) const {
  return std::exp(-std::abs(x) / scale_) / (2.0 * scale_);
}

double LaplaceDistribution::Cdf(double x) const {
  if (x <= 0) return 0.5 * std::exp(x / scale_);
  return 1.0 - 0.5 * std::exp(-x / scale_);
}

double LaplaceDistribution::Survival(double x) const { return Cdf(-x); }

double LaplaceDistribution::LogCdf(double x) const {
  if (x <= 0) return x / scale_ - M_LN2;
  return std::log1p(-0.5 * std::exp(-x / scale_));
}

double LaplaceDistribution::LogSurvival(double x) const { return LogCdf(-x); }

absl::StatusOr<double> SampleLaplace(double scale, Rng& rng) {
  ASSIGN_OR_RETURN(const LaplaceDistribution dist,
                   LaplaceDistribution::Create(scale));
  return dist.Sample(rng);
}

absl::StatusOr<double> LaplaceCdf(double x, double scale) {
  ASSIGN_OR_RETURN(const LaplaceDistribution dist,
                   LaplaceDistribution::Create(scale));
  return dist.Cdf(x);
}

}  // namespace privtree
