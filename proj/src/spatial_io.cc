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

#include "privtree/spatial_io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "privtree/status_macros.h"

namespace privtree {
namespace {

absl::StatusOr<std::ifstream> OpenForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return in;
}

const char* KindName(TreeKind kind) {
  switch (kind) {
    case TreeKind::kPrivTree:
      return "privtree";
    case TreeKind::kSimpleTree:
      return "simpletree";
    case TreeKind::kUniformGrid:
      return "ug";
  }
  return "privtree";
}

}  // namespace

absl::StatusOr<std::vector<std::vector<double>>> ParseCsvRows(
    std::istream& in, std::optional<size_t> columns) {
  std::vector<std::vector<double>> rows;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const absl::string_view text = absl::StripAsciiWhitespace(line);
    if (text.empty() || text.front() == '#') continue;
    std::vector<double> row;
    for (absl::string_view field : absl::StrSplit(text, ',')) {
      field = absl::StripAsciiWhitespace(field);
      double v = 0;
      const auto [ptr, ec] =
          std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() ||
          ptr != field.data() + field.size() || !std::isfinite(v)) {
        return absl::DataLossError(absl::StrCat(
            "line ", line_no, ": malformed numeric field '", field, "'"));
      }
      row.push_back(v);
    }
    if (columns.has_value() && row.size() != *columns) {
      return absl::DataLossError(absl::StrCat("line ", line_no, ": expected ",
                                              *columns, " fields, found ",
                                              row.size()));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      return absl::DataLossError(absl::StrCat(
          "line ", line_no, ": expected ", rows.front().size(),
          " fields, found ", row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

absl::StatusOr<SpatialDomain> InferDomain(
    const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) {
    return absl::DataLossError("cannot infer a domain from an empty dataset");
  }
  std::vector<double> lo = rows.front(), hi = rows.front();
  for (const auto& r : rows) {
    for (size_t k = 0; k < r.size(); ++k) {
      lo[k] = std::min(lo[k], r[k]);
      hi[k] = std::max(hi[k], r[k]);
    }
  }
  for (size_t k = 0; k < lo.size(); ++k) {
    if (!(hi[k] > lo[k])) hi[k] = lo[k] + 1.0;
  }
  return Box::Create(std::move(lo), std::move(hi));
}

absl::StatusOr<SpatialDataset> ReadPointsCsv(
    std::istream& in, std::optional<SpatialDomain> domain) {
  std::optional<size_t> columns;
  if (domain.has_value()) columns = domain->dims();
  ASSIGN_OR_RETURN(const auto rows, ParseCsvRows(in, columns));
  if (!domain.has_value()) {
    ASSIGN_OR_RETURN(domain, InferDomain(rows));
  }
  std::vector<double> coords;
  coords.reserve(rows.size() * domain->dims());
  for (const auto& r : rows) coords.insert(coords.end(), r.begin(), r.end());
  auto data = SpatialDataset::Create(*std::move(domain), std::move(coords));
  if (!data.ok()) return absl::DataLossError(data.status().message());
  return data;
}

absl::StatusOr<SpatialDataset> ReadPointsCsvFile(
    const std::string& path, std::optional<SpatialDomain> domain) {
  ASSIGN_OR_RETURN(std::ifstream in, OpenForRead(path));
  return ReadPointsCsv(in, std::move(domain));
}

absl::StatusOr<std::vector<RangeQuery>> ReadWorkloadCsv(std::istream& in,
                                                        size_t dims) {
  ASSIGN_OR_RETURN(const auto rows, ParseCsvRows(in));
  std::vector<RangeQuery> queries;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 2 * dims) {
      return absl::FailedPreconditionError(absl::StrCat(
          "query ", i + 1, " has ", r.size(), " fields; expected ", 2 * dims,
          " for a ", dims, "-dimensional tree"));
    }
    auto q = RangeQuery::Create({r.begin(), r.begin() + dims},
                                {r.begin() + dims, r.end()});
    if (!q.ok()) {
      return absl::DataLossError(
          absl::StrCat("query ", i + 1, ": ", q.status().message()));
    }
    queries.push_back(*std::move(q));
  }
  return queries;
}

absl::StatusOr<std::vector<RangeQuery>> ReadWorkloadCsvFile(
    const std::string& path, size_t dims) {
  ASSIGN_OR_RETURN(std::ifstream in, OpenForRead(path));
  return ReadWorkloadCsv(in, dims);
}

nlohmann::json TreeToJson(const DecompTree& tree) {
  nlohmann::json j;
  j["kind"] = KindName(tree.kind());
  j["fanout"] = tree.fanout();
  const PrivacyParams& p = tree.params();
  j["params"] = {{"epsilon", p.epsilon},
                 {"lambda", p.lambda},
                 {"theta", p.theta},
                 {"delta", p.delta}};
  nlohmann::json nodes = nlohmann::json::array();
  for (size_t id = 0; id < tree.size(); ++id) {
    const TreeNode& n = tree.node(id);
    nlohmann::json node = {{"id", id},
                           {"depth", n.depth},
                           {"lo", n.region.lo},
                           {"hi", n.region.hi}};
    std::vector<int> children;
    for (int c = 0; c < n.num_children; ++c) children.push_back(n.first_child + c);
    node["children"] = children;
    if (!n.is_leaf() && n.split_mask != 0) {
      node["split_mask"] = n.split_mask;
      node["bins"] = n.bins;
    }
    if (n.noisy_count.has_value()) node["noisy_count"] = *n.noisy_count;
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

absl::StatusOr<DecompTree> TreeFromJson(const nlohmann::json& j) {
  try {
    TreeKind kind = TreeKind::kPrivTree;
    const std::string kind_name = j.value("kind", std::string("privtree"));
    if (kind_name == "simpletree") {
      kind = TreeKind::kSimpleTree;
    } else if (kind_name == "ug") {
      kind = TreeKind::kUniformGrid;
    } else if (kind_name != "privtree") {
      return absl::DataLossError(absl::StrCat("unknown tree kind ", kind_name));
    }
    PrivacyParams params;
    const auto& jp = j.at("params");
    params.epsilon = jp.at("epsilon").get<double>();
    params.lambda = jp.at("lambda").get<double>();
    params.theta = jp.at("theta").get<double>();
    params.delta = jp.at("delta").get<double>();
    params.gamma = params.lambda > 0 ? params.delta / params.lambda : 0;
    const int fanout = j.at("fanout").get<int>();
    params.beta = fanout;

    const auto& jn = j.at("nodes");
    std::vector<TreeNode> nodes(jn.size());
    for (size_t i = 0; i < jn.size(); ++i) {
      const auto& x = jn[i];
      if (x.at("id").get<size_t>() != i) {
        return absl::DataLossError("node ids must be dense and in order");
      }
      TreeNode& n = nodes[i];
      n.region.lo = x.at("lo").get<std::vector<double>>();
      n.region.hi = x.at("hi").get<std::vector<double>>();
      n.depth = x.at("depth").get<int>();
      const auto children = x.at("children").get<std::vector<int>>();
      if (!children.empty()) {
        n.first_child = children.front();
        n.num_children = static_cast<int>(children.size());
        for (size_t c = 0; c < children.size(); ++c) {
          if (children[c] != n.first_child + static_cast<int>(c) ||
              children[c] <= static_cast<int>(i) ||
              children[c] >= static_cast<int>(jn.size())) {
            return absl::DataLossError(absl::StrCat(
                "node ", i, ": children must be a contiguous id range after "
                "the parent"));
          }
        }
        n.split_mask = x.value("split_mask", 0u);
        n.bins = x.value("bins", 0);
      }
      if (x.contains("noisy_count")) {
        n.noisy_count = x.at("noisy_count").get<double>();
      }
      if (n.region.lo.size() != nodes[0].region.lo.size() ||
          n.region.hi.size() != n.region.lo.size()) {
        return absl::DataLossError(
            absl::StrCat("node ", i, ": inconsistent dimensionality"));
      }
    }
    if (nodes.empty()) return absl::DataLossError("tree has no nodes");
    for (const TreeNode& n : nodes) {
      if (n.split_mask == 0) continue;
      const int k = __builtin_popcount(n.split_mask);
      const double expected = std::pow(n.bins, k);
      if (n.bins < 2 || expected != n.num_children) {
        return absl::DataLossError("child layout does not match child count");
      }
      for (int c = 0; c < n.num_children; ++c) {
        if (!n.region.Covers(nodes[n.first_child + c].region)) {
          return absl::DataLossError("child region escapes its parent");
        }
      }
    }
    return DecompTree(kind, std::move(nodes), fanout, params);
  } catch (const nlohmann::json::exception& e) {
    return absl::DataLossError(absl::StrCat("malformed tree JSON: ", e.what()));
  }
}

}  // namespace privtree
