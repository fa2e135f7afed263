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

#include "privtree/privacy.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace privtree {
namespace {

absl::Status CheckLambda(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    return absl::InvalidArgumentError(
        absl::StrCat("lambda must be positive and finite, got ", lambda));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<PrivacyParams> PrivacyParams::Create(double epsilon,
                                                    double lambda, double theta,
                                                    double delta, int beta) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (absl::Status s = CheckLambda(lambda); !s.ok()) return s;
  if (!(delta >= 0) || !std::isfinite(delta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must be nonnegative, got ", delta));
  }
  if (!std::isfinite(theta)) {
    return absl::InvalidArgumentError("theta must be finite");
  }
  if (beta < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("fanout beta must be at least 2, got ", beta));
  }
  PrivacyParams p;
  p.epsilon = epsilon;
  p.lambda = lambda;
  p.theta = theta;
  p.delta = delta;
  p.gamma = delta / lambda;
  p.beta = beta;
  return p;
}

absl::StatusOr<double> MinPrivTreeLambda(double epsilon, double gamma) {
  if (!(epsilon > 0)) {
    return absl::InvalidArgumentError("epsilon must be positive");
  }
  if (!(gamma > 0)) {
    return absl::InvalidArgumentError("gamma must be positive");
  }
  const double eg = std::exp(gamma);
  return (2.0 * eg - 1.0) / (eg - 1.0) / epsilon;
}

absl::StatusOr<PrivacyParams> PrivTreeParams(double epsilon, int beta,
                                             double theta, double sensitivity,
                                             double slack) {
  if (beta < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("fanout beta must be at least 2, got ", beta));
  }
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (!(sensitivity > 0)) {
    return absl::InvalidArgumentError("sensitivity must be positive");
  }
  if (!(slack >= 1.0)) {
    return absl::InvalidArgumentError("lambda slack multiplier must be >= 1");
  }
  const double b = static_cast<double>(beta);
  const double lambda = slack * (2.0 * b - 1.0) / (b - 1.0) * sensitivity /
                        epsilon;
  PrivacyParams p;
  p.epsilon = epsilon;
  p.lambda = lambda;
  p.theta = theta;
  p.gamma = std::log(b);
  p.delta = lambda * p.gamma;
  p.beta = beta;
  return p;
}

double BiasedCount(double count, int depth, double theta, double delta) {
  return std::max(theta - delta, count - depth * delta);
}

absl::StatusOr<double> ComposeBudgets(absl::Span<const double> budgets) {
  if (budgets.empty()) {
    return absl::InvalidArgumentError("cannot compose an empty budget list");
  }
  double total = 0;
  for (double b : budgets) {
    if (!(b > 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("budgets must be positive, got ", b));
    }
    total += b;
  }
  return total;
}

namespace internal {

double RhoKernel(double x, double theta, double lambda) {
  // With a = theta - x the two probabilities are the Laplace survival values
  // S(a) and S(a + 1).
  const double a = theta - x;
  if (a >= 0) return 1.0 / lambda;
  if (a > -1) {
    // S(a) = 1 - e^{a/l}/2 and S(a+1) = e^{-(a+1)/l}/2.
    return std::log1p(-0.5 * std::exp(a / lambda)) + M_LN2 + (a + 1) / lambda;
  }
  // Both arguments nonpositive. With alpha = e^{(a+1)/l}/2 the ratio is
  // (1 - alpha e^{-1/l}) / (1 - alpha) = 1 - alpha expm1(-1/l) / (1 - alpha).
  const double alpha = 0.5 * std::exp((a + 1) / lambda);
  return std::log1p(-alpha * std::expm1(-1.0 / lambda) / (1.0 - alpha));
}

double RhoUpperKernel(double x, double theta, double lambda) {
  if (x < theta + 1) return 1.0 / lambda;
  return std::exp((theta + 1 - x) / lambda) / lambda;
}

}  // namespace internal

absl::StatusOr<double> Rho(double x, double theta, double lambda) {
  if (absl::Status s = CheckLambda(lambda); !s.ok()) return s;
  return internal::RhoKernel(x, theta, lambda);
}

absl::StatusOr<double> RhoUpper(double x, double theta, double lambda) {
  if (absl::Status s = CheckLambda(lambda); !s.ok()) return s;
  return internal::RhoUpperKernel(x, theta, lambda);
}

}  // namespace privtree
