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

#ifndef PRIVTREE_SPATIAL_H_
#define PRIVTREE_SPATIAL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "privtree/privacy.h"
#include "privtree/random.h"

namespace privtree {

// Axis-aligned box [lo, hi) in d dimensions. Used both for tree regions and
// for query rectangles.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  // Requires lo[i] < hi[i] in every dimension.
  static absl::StatusOr<Box> Create(std::vector<double> lo,
                                    std::vector<double> hi);

  size_t dims() const { return lo.size(); }
  double Volume() const;
  // Volume of the intersection with `other`; 0 when disjoint.
  double IntersectionVolume(const Box& other) const;
  bool Intersects(const Box& other) const;
  // True when `other` lies entirely inside this box.
  bool Covers(const Box& other) const;
  bool operator==(const Box& other) const = default;
};

using SpatialDomain = Box;

// A range-count query. Unlike a domain, lo[i] == hi[i] is allowed.
struct RangeQuery {
  std::vector<double> lo;
  std::vector<double> hi;

  static absl::StatusOr<RangeQuery> Create(std::vector<double> lo,
                                           std::vector<double> hi);
  size_t dims() const { return lo.size(); }
};

// Point membership under the half-open convention: lo <= x < hi per
// dimension, except that the upper face of `domain` is closed.
bool CellContains(const Box& cell, absl::Span<const double> point,
                  const Box& domain);

// Points stored row-major in a flat buffer.
class SpatialDataset {
 public:
  // Every point must lie in [lo, hi] of `domain`.
  static absl::StatusOr<SpatialDataset> Create(SpatialDomain domain,
                                               std::vector<double> coords);

  const SpatialDomain& domain() const { return domain_; }
  size_t dims() const { return domain_.dims(); }
  size_t size() const { return dims() == 0 ? 0 : coords_.size() / dims(); }
  absl::Span<const double> point(size_t i) const {
    return absl::MakeConstSpan(coords_).subspan(i * dims(), dims());
  }
  const std::vector<double>& coords() const { return coords_; }

 private:
  SpatialDataset(SpatialDomain domain, std::vector<double> coords)
      : domain_(std::move(domain)), coords_(std::move(coords)) {}

  SpatialDomain domain_;
  std::vector<double> coords_;
};

// One node of a released decomposition. Exact point counts are never stored
// here; they exist only inside the builders.
struct TreeNode {
  Box region;
  int depth = 0;
  // Children occupy the contiguous id range [first_child, first_child +
  // num_children). They form a regular grid: `bins` cells along every
  // dimension set in `split_mask`, child offset = sum_j bin_j * bins^j over
  // the split dimensions in ascending order. split_mask == 0 on an internal
  // node means the layout is unknown and children are scanned linearly.
  int first_child = -1;
  int num_children = 0;
  uint32_t split_mask = 0;
  int bins = 0;
  std::optional<double> noisy_count;

  bool is_leaf() const { return num_children == 0; }
};

enum class TreeKind { kPrivTree, kSimpleTree, kUniformGrid };

class DecompTree {
 public:
  DecompTree() = default;
  DecompTree(TreeKind kind, std::vector<TreeNode> nodes, int fanout,
             PrivacyParams params);

  TreeKind kind() const { return kind_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(int id) const { return nodes_[id]; }
  int root() const { return 0; }
  int fanout() const { return fanout_; }
  const PrivacyParams& params() const { return params_; }
  const SpatialDomain& domain() const { return nodes_[0].region; }
  size_t size() const { return nodes_.size(); }
  size_t NumLeaves() const;
  // Number of levels: max depth + 1.
  int Height() const;

  // True once every leaf carries a noisy count.
  bool has_counts() const { return has_counts_; }
  // Released count of a node: its own noisy count when present, otherwise
  // the sum over its leaves.
  double NodeCount(int id) const { return totals_[id]; }

  // Child of internal node `id` whose cell contains `point`.
  int LocateChild(int id, absl::Span<const double> point) const;
  // Leaf whose cell contains `point` (point assumed inside the domain).
  int LocateLeaf(absl::Span<const double> point) const;

  // Ids of children of `id` whose cells intersect [lo, hi].
  void IntersectingChildren(int id, absl::Span<const double> lo,
                            absl::Span<const double> hi,
                            std::vector<int>& out) const;

  void set_noisy_count(int id, std::optional<double> value) {
    nodes_[id].noisy_count = value;
  }
  // Recomputes derived internal counts after leaf counts change.
  void RefreshTotals();

 private:
  TreeKind kind_ = TreeKind::kPrivTree;
  std::vector<TreeNode> nodes_;
  int fanout_ = 0;
  PrivacyParams params_;
  std::vector<double> totals_;
  bool has_counts_ = false;
};

struct BuildOptions {
  // Nodes at this depth are never split. Data-independent, so it does not
  // affect the privacy guarantee; it keeps bisection away from the limits
  // of double precision.
  int depth_cap = 40;
  // Dimensions bisected per level, round robin; 0 means all of them.
  int split_dims = 0;
  // NOT PRIVATE. Replaces every Laplace draw by 0. For oracle tests only.
  bool noiseless = false;
};

// PrivTree decomposition. Nodes are visited in BFS order; each draws
// b(v) + Lap(lambda) and splits when the draw exceeds theta. The returned
// tree carries regions and structure only.
absl::StatusOr<DecompTree> BuildPrivTree(const SpatialDataset& data,
                                         const PrivacyParams& params, Rng& rng,
                                         const BuildOptions& options = {});

// Height-limited private quadtree: every node gets c(v) + Lap(lambda) and
// splits when that exceeds theta and depth < h - 1. epsilon-DP for
// lambda >= h / epsilon.
absl::StatusOr<DecompTree> BuildSimpleTree(const SpatialDataset& data,
                                           double lambda, double theta, int h,
                                           Rng& rng,
                                           const BuildOptions& options = {});

// Publishes c(leaf) + Lap(1 / epsilon_counts) on every leaf; internal counts
// become sums over their leaves.
absl::StatusOr<DecompTree> AttachNoisyCounts(DecompTree tree,
                                             const SpatialDataset& data,
                                             double epsilon_counts, Rng& rng,
                                             bool noiseless = false);

struct ReleaseOptions {
  double theta = 0;
  // Share of epsilon spent on the structure; the rest goes to leaf counts.
  double budget_split = 0.5;
  BuildOptions build;
};

// PrivTree structure at budget_split * epsilon (fanout 2^s for s split
// dimensions per level) followed by leaf counts at the remaining budget.
absl::StatusOr<DecompTree> ReleasePrivTree(const SpatialDataset& data,
                                           double epsilon, Rng& rng,
                                           const ReleaseOptions& options = {});

// Top-down traversal answer. Leaves that partially overlap the query
// contribute their count scaled by the overlapped volume fraction. The query
// is clipped to the tree's domain.
absl::StatusOr<double> RangeCount(const DecompTree& tree, const RangeQuery& q);

// Bins per dimension of the uniform grid: ceil((n eps / 10)^(2 / (d + 2))),
// at least 1.
int UniformGridBins(size_t n, double epsilon, size_t dims);

// Uniform grid baseline as a depth-1 tree with m^d leaves, each with noise
// of scale 1 / epsilon.
absl::StatusOr<DecompTree> BuildUniformGrid(const SpatialDataset& data,
                                            double epsilon, Rng& rng,
                                            bool noiseless = false);

// Exact point count of every node of `tree` on `data`, indexed by node id.
// Builder and evaluation plumbing; never part of a release.
std::vector<int64_t> ExactNodeCounts(const DecompTree& tree,
                                     const SpatialDataset& data);

}  // namespace privtree

#endif  // PRIVTREE_SPATIAL_H_
