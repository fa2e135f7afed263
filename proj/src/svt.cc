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

#include "privtree/svt.h"

#include <algorithm>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "privtree/laplace.h"
#include "privtree/status_macros.h"

namespace privtree {
namespace {

absl::Status CheckConfig(const SvtConfig& c) {
  if (!(c.lambda > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("lambda must be positive, got ", c.lambda));
  }
  if (c.t < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("t must be at least 1, got ", c.t));
  }
  return absl::OkStatus();
}

// Laplace noise that can be switched off.
class Noise {
 public:
  Noise(const LaplaceDistribution& d, bool off) : dist_(d), off_(off) {}
  double operator()(Rng& rng) const { return off_ ? 0.0 : dist_.Sample(rng); }

 private:
  LaplaceDistribution dist_;
  bool off_;
};

// Shared loop of the bit-output variants. `threshold_scale` is used for
// every threshold draw; `redraw` makes the threshold fresh after each 1.
absl::StatusOr<SvtBits> RunBits(absl::Span<const double> answers,
                                const SvtConfig& c, double threshold_scale,
                                double query_scale, bool redraw, int budget,
                                Rng& rng) {
  RETURN_IF_ERROR(CheckConfig(c));
  ASSIGN_OR_RETURN(const LaplaceDistribution td,
                   LaplaceDistribution::Create(threshold_scale));
  ASSIGN_OR_RETURN(const LaplaceDistribution qd,
                   LaplaceDistribution::Create(query_scale));
  const Noise threshold_noise(td, c.noiseless);
  const Noise query_noise(qd, c.noiseless);
  SvtBits out;
  double noisy_theta = c.theta + threshold_noise(rng);
  out.threshold_draws = 1;
  int ones = 0;
  for (double q : answers) {
    const bool above = q + query_noise(rng) > noisy_theta;
    out.bits.push_back(above ? 1 : 0);
    if (!above) continue;
    if (++ones >= budget) break;
    if (redraw) {
      noisy_theta = c.theta + threshold_noise(rng);
      ++out.threshold_draws;
    }
  }
  return out;
}

}  // namespace

CountQuery LabelCount(std::string label) {
  CountQuery q;
  q.name = absl::StrCat("count(", label, ")");
  q.evaluate = [label = std::move(label)](const TupleDataset& d) {
    return static_cast<int>(std::count(d.begin(), d.end(), label));
  };
  return q;
}

std::vector<double> EvaluateQueries(absl::Span<const CountQuery> queries,
                                    const TupleDataset& data) {
  std::vector<double> out;
  out.reserve(queries.size());
  for (const CountQuery& q : queries) out.push_back(q.evaluate(data));
  return out;
}

absl::StatusOr<SvtBits> BinarySvt(absl::Span<const double> answers,
                                  const SvtConfig& config, Rng& rng) {
  const int never = static_cast<int>(answers.size()) + 1;
  return RunBits(answers, config, config.lambda, config.lambda,
                 /*redraw=*/false, never, rng);
}

absl::StatusOr<SvtBits> ReducedSvt(absl::Span<const double> answers,
                                   const SvtConfig& config, Rng& rng) {
  const double s = config.t * config.lambda;
  return RunBits(answers, config, s, s, /*redraw=*/true, config.t, rng);
}

absl::StatusOr<SvtBits> ImprovedSvt(absl::Span<const double> answers,
                                    const SvtConfig& config, Rng& rng) {
  return RunBits(answers, config, config.lambda, config.t * config.lambda,
                 /*redraw=*/false, config.t, rng);
}

absl::StatusOr<SvtValues> VanillaSvt(absl::Span<const double> answers,
                                     const SvtConfig& config, Rng& rng) {
  RETURN_IF_ERROR(CheckConfig(config));
  ASSIGN_OR_RETURN(const LaplaceDistribution td,
                   LaplaceDistribution::Create(config.lambda));
  ASSIGN_OR_RETURN(const LaplaceDistribution qd,
                   LaplaceDistribution::Create(config.t * config.lambda));
  const Noise threshold_noise(td, config.noiseless);
  const Noise query_noise(qd, config.noiseless);
  SvtValues out;
  const double noisy_theta = config.theta + threshold_noise(rng);
  out.threshold_draws = 1;
  int released = 0;
  for (double q : answers) {
    const double noisy = q + query_noise(rng);
    if (noisy > noisy_theta) {
      out.outputs.push_back(noisy);
      if (++released >= config.t) break;
    } else {
      out.outputs.push_back(std::nullopt);
    }
  }
  return out;
}

}  // namespace privtree
