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

#ifndef PRIVTREE_SPATIAL_IO_H_
#define PRIVTREE_SPATIAL_IO_H_

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "privtree/spatial.h"

namespace privtree {

// Parses comma-separated decimal rows. Blank lines and lines starting with
// '#' are skipped. When `columns` is set every row must have exactly that
// many fields. Errors carry the 1-based line number.
absl::StatusOr<std::vector<std::vector<double>>> ParseCsvRows(
    std::istream& in, std::optional<size_t> columns = std::nullopt);

// Reads one point per line. Without an explicit domain the bounding box of
// the data is used, which itself leaks information about the data.
absl::StatusOr<SpatialDataset> ReadPointsCsv(
    std::istream& in, std::optional<SpatialDomain> domain = std::nullopt);
absl::StatusOr<SpatialDataset> ReadPointsCsvFile(
    const std::string& path, std::optional<SpatialDomain> domain = std::nullopt);

// Bounding box of the points, widened to unit width in degenerate dimensions.
absl::StatusOr<SpatialDomain> InferDomain(
    const std::vector<std::vector<double>>& rows);

// Query rows "lo1,...,lod,hi1,...,hid".
absl::StatusOr<std::vector<RangeQuery>> ReadWorkloadCsv(std::istream& in,
                                                        size_t dims);
absl::StatusOr<std::vector<RangeQuery>> ReadWorkloadCsvFile(
    const std::string& path, size_t dims);

// {kind, fanout, params:{epsilon,lambda,theta,delta}, nodes:[{id, depth, lo,
// hi, children, noisy_count?}]}. Only released counts are written.
nlohmann::json TreeToJson(const DecompTree& tree);
absl::StatusOr<DecompTree> TreeFromJson(const nlohmann::json& j);

}  // namespace privtree

#endif  // PRIVTREE_SPATIAL_IO_H_
