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

#ifndef PRIVTREE_SVT_H_
#define PRIVTREE_SVT_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "privtree/random.h"

namespace privtree {

// A dataset of labelled tuples and a sensitivity-1 count query over it.
using TupleDataset = std::vector<std::string>;

struct CountQuery {
  std::string name;
  std::function<int(const TupleDataset&)> evaluate;
};

// Number of tuples equal to `label`.
CountQuery LabelCount(std::string label);

std::vector<double> EvaluateQueries(absl::Span<const CountQuery> queries,
                                    const TupleDataset& data);

struct SvtConfig {
  double theta = 0;
  double lambda = 1;
  // Answer budget; ignored by the binary variant.
  int t = 1;
  // NOT PRIVATE. Every Laplace draw is replaced by 0.
  bool noiseless = false;
};

struct SvtBits {
  std::vector<int> bits;
  int threshold_draws = 0;
};

struct SvtValues {
  // A released noisy answer, or nullopt for the placeholder.
  std::vector<std::optional<double>> outputs;
  int threshold_draws = 0;
};

// All four variants take the exact answers q_i(D) of the query stream.

// One threshold draw at scale lambda, query noise at scale lambda, never
// halts.
absl::StatusOr<SvtBits> BinarySvt(absl::Span<const double> answers,
                                  const SvtConfig& config, Rng& rng);

// One threshold draw at scale lambda, query noise at scale t * lambda,
// releases noisy answers above the threshold and halts after t of them.
absl::StatusOr<SvtValues> VanillaSvt(absl::Span<const double> answers,
                                     const SvtConfig& config, Rng& rng);

// Threshold and query noise at scale t * lambda; the threshold is redrawn
// after every 1; halts after t ones.
absl::StatusOr<SvtBits> ReducedSvt(absl::Span<const double> answers,
                                   const SvtConfig& config, Rng& rng);

// One threshold draw at scale lambda, query noise at scale t * lambda, halts
// after t ones.
absl::StatusOr<SvtBits> ImprovedSvt(absl::Span<const double> answers,
                                    const SvtConfig& config, Rng& rng);

}  // namespace privtree

#endif  // PRIVTREE_SVT_H_
