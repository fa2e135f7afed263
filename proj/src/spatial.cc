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

#include "privtree/spatial.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "privtree/laplace.h"
#include "privtree/status_macros.h"

namespace privtree {

absl::StatusOr<Box> Box::Create(std::vector<double> lo,
                                std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("box bounds must be nonempty and of equal length, got ",
                     lo.size(), " and ", hi.size()));
  }
  for (size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i])) {
      return absl::InvalidArgumentError(absl::StrCat(
          "box requires finite lo < hi in dimension ", i, ", got [", lo[i],
          ", ", hi[i], ")"));
    }
  }
  return Box{std::move(lo), std::move(hi)};
}

double Box::Volume() const {
  double v = 1.0;
  for (size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

double Box::IntersectionVolume(const Box& other) const {
  double v = 1.0;
  for (size_t i = 0; i < lo.size(); ++i) {
    const double a = std::max(lo[i], other.lo[i]);
    const double b = std::min(hi[i], other.hi[i]);
    if (b <= a) return 0.0;
    v *= b - a;
  }
  return v;
}

bool Box::Intersects(const Box& other) const {
  for (size_t i = 0; i < lo.size(); ++i) {
    if (!(other.lo[i] < hi[i] && other.hi[i] > lo[i])) return false;
  }
  return true;
}

bool Box::Covers(const Box& other) const {
  for (size_t i = 0; i < lo.size(); ++i) {
    if (other.lo[i] < lo[i] || other.hi[i] > hi[i]) return false;
  }
  return true;
}

absl::StatusOr<RangeQuery> RangeQuery::Create(std::vector<double> lo,
                                              std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size()) {
    return absl::InvalidArgumentError(
        "query bounds must be nonempty and of equal length");
  }
  for (size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i]) {
      return absl::InvalidArgumentError(
          absl::StrCat("query requires lo <= hi in dimension ", i));
    }
  }
  return RangeQuery{std::move(lo), std::move(hi)};
}

bool CellContains(const Box& cell, absl::Span<const double> point,
                  const Box& domain) {
  for (size_t i = 0; i < cell.dims(); ++i) {
    const double x = point[i];
    if (x < cell.lo[i]) return false;
    if (x >= cell.hi[i] && !(x == cell.hi[i] && x == domain.hi[i])) {
      return false;
    }
  }
  return true;
}

absl::StatusOr<SpatialDataset> SpatialDataset::Create(
    SpatialDomain domain, std::vector<double> coords) {
  const size_t d = domain.dims();
  if (d == 0) return absl::InvalidArgumentError("domain has no dimensions");
  if (coords.size() % d != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "coordinate buffer of size ", coords.size(), " is not a multiple of ",
        d));
  }
  for (size_t i = 0; i < coords.size(); ++i) {
    const size_t k = i % d;
    const double x = coords[i];
    if (!(x >= domain.lo[k] && x <= domain.hi[k])) {
      return absl::FailedPreconditionError(absl::StrCat(
          "point ", i / d, " lies outside the domain in dimension ", k, ": ",
          x));
    }
  }
  return SpatialDataset(std::move(domain), std::move(coords));
}

DecompTree::DecompTree(TreeKind kind, std::vector<TreeNode> nodes, int fanout,
                       PrivacyParams params)
    : kind_(kind),
      nodes_(std::move(nodes)),
      fanout_(fanout),
      params_(params) {
  RefreshTotals();
}

size_t DecompTree::NumLeaves() const {
  return std::count_if(nodes_.begin(), nodes_.end(),
                       [](const TreeNode& n) { return n.is_leaf(); });
}

int DecompTree::Height() const {
  int h = 0;
  for (const TreeNode& n : nodes_) h = std::max(h, n.depth + 1);
  return h;
}

void DecompTree::RefreshTotals() {
  totals_.assign(nodes_.size(), 0.0);
  has_counts_ = !nodes_.empty();
  // Children always have larger ids than their parent.
  for (size_t i = nodes_.size(); i-- > 0;) {
    const TreeNode& n = nodes_[i];
    if (n.noisy_count.has_value()) {
      totals_[i] = *n.noisy_count;
      continue;
    }
    if (n.is_leaf()) {
      has_counts_ = false;
      continue;
    }
    double sum = 0;
    for (int c = 0; c < n.num_children; ++c) sum += totals_[n.first_child + c];
    totals_[i] = sum;
  }
}

namespace {

// Iterates the split dimensions of a mask in ascending order.
template <typename F>
void ForEachSplitDim(uint32_t mask, F f) {
  int j = 0;
  for (int k = 0; mask != 0; ++k, mask >>= 1) {
    if (mask & 1u) f(k, j++);
  }
}

}  // namespace

int DecompTree::LocateChild(int id, absl::Span<const double> point) const {
  const TreeNode& n = nodes_[id];
  if (n.split_mask == 0) {
    for (int c = 0; c < n.num_children; ++c) {
      if (CellContains(nodes_[n.first_child + c].region, point, domain())) {
        return n.first_child + c;
      }
    }
    return n.first_child;
  }
  int offset = 0;
  int stride = 1;
  ForEachSplitDim(n.split_mask, [&](int k, int) {
    const double lo = n.region.lo[k];
    const double w = n.region.hi[k] - lo;
    int b = static_cast<int>(std::floor((point[k] - lo) / w * n.bins));
    b = std::clamp(b, 0, n.bins - 1);
    auto cell = [&](int bin) -> const Box& {
      return nodes_[n.first_child + bin * stride].region;
    };
    while (b > 0 && point[k] < cell(b).lo[k]) --b;
    while (b < n.bins - 1 && point[k] >= cell(b).hi[k]) ++b;
    offset += b * stride;
    stride *= n.bins;
  });
  return n.first_child + offset;
}

int DecompTree::LocateLeaf(absl::Span<const double> point) const {
  int id = 0;
  while (!nodes_[id].is_leaf()) id = LocateChild(id, point);
  return id;
}

void DecompTree::IntersectingChildren(int id, absl::Span<const double> lo,
                                      absl::Span<const double> hi,
                                      std::vector<int>& out) const {
  const TreeNode& n = nodes_[id];
  if (n.split_mask == 0) {
    Box q{std::vector<double>(lo.begin(), lo.end()),
          std::vector<double>(hi.begin(), hi.end())};
    for (int c = 0; c < n.num_children; ++c) {
      if (nodes_[n.first_child + c].region.Intersects(q)) {
        out.push_back(n.first_child + c);
      }
    }
    return;
  }
  struct Span1D {
    int first, last, stride;
  };
  std::vector<Span1D> ranges;
  int stride = 1;
  bool empty = false;
  ForEachSplitDim(n.split_mask, [&](int k, int) {
    auto cell = [&](int bin) -> const Box& {
      return nodes_[n.first_child + bin * stride].region;
    };
    const double base = n.region.lo[k];
    const double w = n.region.hi[k] - base;
    int b0 = std::clamp(
        static_cast<int>(std::floor((lo[k] - base) / w * n.bins)), 0,
        n.bins - 1);
    while (b0 > 0 && cell(b0 - 1).hi[k] > lo[k]) --b0;
    while (b0 < n.bins - 1 && cell(b0).hi[k] <= lo[k]) ++b0;
    int b1 = std::clamp(
        static_cast<int>(std::floor((hi[k] - base) / w * n.bins)), 0,
        n.bins - 1);
    while (b1 < n.bins - 1 && cell(b1 + 1).lo[k] < hi[k]) ++b1;
    while (b1 > 0 && cell(b1).lo[k] >= hi[k]) --b1;
    if (cell(b0).hi[k] <= lo[k] || cell(b1).lo[k] >= hi[k] || b0 > b1) {
      empty = true;
    }
    ranges.push_back({b0, b1, stride});
    stride *= n.bins;
  });
  if (empty) return;
  std::vector<int> bin(ranges.size());
  for (size_t j = 0; j < ranges.size(); ++j) bin[j] = ranges[j].first;
  while (true) {
    int offset = 0;
    for (size_t j = 0; j < ranges.size(); ++j) offset += bin[j] * ranges[j].stride;
    out.push_back(n.first_child + offset);
    size_t j = 0;
    for (; j < ranges.size(); ++j) {
      if (bin[j] < ranges[j].last) {
        ++bin[j];
        break;
      }
      bin[j] = ranges[j].first;
    }
    if (j == ranges.size()) break;
  }
}

namespace {

TreeNode MakeNode(const Box& region, int depth) {
  TreeNode n;
  n.region = region;
  n.depth = depth;
  return n;
}

struct Decision {
  bool split = false;
  std::optional<double> noisy_count;
};

absl::Status ValidateOptions(const BuildOptions& options, size_t dims) {
  if (options.depth_cap < 0) {
    return absl::InvalidArgumentError("depth cap must be nonnegative");
  }
  if (options.split_dims < 0 ||
      options.split_dims > static_cast<int>(dims) || dims > 31) {
    return absl::InvalidArgumentError(absl::StrCat(
        "split_dims must lie in [0, ", dims, "], got ", options.split_dims));
  }
  return absl::OkStatus();
}

// Shared BFS bisection loop. `decide(count, depth, can_split)` returns the
// split decision and an optional released count for the node.
template <typename Decide>
DecompTree BuildByBisection(const SpatialDataset& data,
                            const BuildOptions& options, TreeKind kind,
                            const PrivacyParams& params, Decide decide) {
  const int d = static_cast<int>(data.dims());
  const int s = options.split_dims == 0 ? d : options.split_dims;
  const int fanout = 1 << s;

  std::vector<TreeNode> nodes;
  nodes.push_back(MakeNode(data.domain(), 0));

  std::vector<uint32_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0u);
  std::vector<uint32_t> scratch(perm.size());
  std::vector<int> child_of(perm.size());
  std::vector<size_t> bucket(fanout + 1);
  std::vector<int> dims(s);
  std::vector<double> mids(s);

  struct Pending {
    int node;
    size_t begin, end;
  };
  std::deque<Pending> frontier{{0, 0, perm.size()}};
  while (!frontier.empty()) {
    const Pending p = frontier.front();
    frontier.pop_front();
    const int depth = nodes[p.node].depth;
    const Decision decision =
        decide(static_cast<double>(p.end - p.begin), depth,
               depth < options.depth_cap);
    nodes[p.node].noisy_count = decision.noisy_count;
    if (!decision.split) continue;

    for (int j = 0; j < s; ++j) dims[j] = (depth * s + j) % d;
    std::sort(dims.begin(), dims.end());
    uint32_t mask = 0;
    const Box parent = nodes[p.node].region;
    for (int j = 0; j < s; ++j) {
      mask |= 1u << dims[j];
      mids[j] = 0.5 * (parent.lo[dims[j]] + parent.hi[dims[j]]);
    }

    // Counting sort of the node's points into child buckets.
    std::fill(bucket.begin(), bucket.end(), 0);
    for (size_t i = p.begin; i < p.end; ++i) {
      const absl::Span<const double> x = data.point(perm[i]);
      int c = 0;
      for (int j = 0; j < s; ++j) c |= (x[dims[j]] >= mids[j] ? 1 : 0) << j;
      child_of[i] = c;
      ++bucket[c + 1];
    }
    for (int c = 0; c < fanout; ++c) bucket[c + 1] += bucket[c];
    std::vector<size_t> cursor(bucket.begin(), bucket.end() - 1);
    for (size_t i = p.begin; i < p.end; ++i) {
      scratch[p.begin + cursor[child_of[i]]++] = perm[i];
    }
    std::copy(scratch.begin() + p.begin, scratch.begin() + p.end,
              perm.begin() + p.begin);

    const int first = static_cast<int>(nodes.size());
    nodes[p.node].first_child = first;
    nodes[p.node].num_children = fanout;
    nodes[p.node].split_mask = mask;
    nodes[p.node].bins = 2;
    for (int c = 0; c < fanout; ++c) {
      TreeNode child = MakeNode(parent, depth + 1);
      for (int j = 0; j < s; ++j) {
        if ((c >> j) & 1) {
          child.region.lo[dims[j]] = mids[j];
        } else {
          child.region.hi[dims[j]] = mids[j];
        }
      }
      nodes.push_back(std::move(child));
      frontier.push_back(
          {first + c, p.begin + bucket[c], p.begin + bucket[c + 1]});
    }
  }
  return DecompTree(kind, std::move(nodes), fanout, params);
}

}  // namespace

absl::StatusOr<DecompTree> BuildPrivTree(const SpatialDataset& data,
                                         const PrivacyParams& params, Rng& rng,
                                         const BuildOptions& options) {
  RETURN_IF_ERROR(ValidateOptions(options, data.dims()));
  ASSIGN_OR_RETURN(const LaplaceDistribution noise,
                   LaplaceDistribution::Create(params.lambda));
  const int s =
      options.split_dims == 0 ? static_cast<int>(data.dims()) : options.split_dims;
  if (params.beta != (1 << s)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "params fanout ", params.beta, " does not match the tree fanout ",
        1 << s));
  }
  return BuildByBisection(
      data, options, TreeKind::kPrivTree, params,
      [&](double count, int depth, bool can_split) {
        if (!can_split) return Decision{};
        const double b =
            BiasedCount(count, depth, params.theta, params.delta);
        const double noisy = options.noiseless ? b : b + noise.Sample(rng);
        return Decision{noisy > params.theta, std::nullopt};
      });
}

absl::StatusOr<DecompTree> BuildSimpleTree(const SpatialDataset& data,
                                           double lambda, double theta, int h,
                                           Rng& rng,
                                           const BuildOptions& options) {
  if (h < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("height limit h must be at least 1, got ", h));
  }
  RETURN_IF_ERROR(ValidateOptions(options, data.dims()));
  ASSIGN_OR_RETURN(const LaplaceDistribution noise,
                   LaplaceDistribution::Create(lambda));
  PrivacyParams params;
  params.epsilon = h / lambda;
  params.lambda = lambda;
  params.theta = theta;
  const int s =
      options.split_dims == 0 ? static_cast<int>(data.dims()) : options.split_dims;
  params.beta = 1 << s;
  DecompTree tree = BuildByBisection(
      data, options, TreeKind::kSimpleTree, params,
      [&](double count, int depth, bool can_split) {
        const double noisy =
            options.noiseless ? count : count + noise.Sample(rng);
        return Decision{noisy > theta && depth < h - 1 && can_split, noisy};
      });
  return tree;
}

std::vector<int64_t> ExactNodeCounts(const DecompTree& tree,
                                     const SpatialDataset& data) {
  std::vector<int64_t> counts(tree.size(), 0);
  for (size_t i = 0; i < data.size(); ++i) {
    const absl::Span<const double> x = data.point(i);
    int id = tree.root();
    ++counts[id];
    while (!tree.node(id).is_leaf()) {
      id = tree.LocateChild(id, x);
      ++counts[id];
    }
  }
  return counts;
}

absl::StatusOr<DecompTree> AttachNoisyCounts(DecompTree tree,
                                             const SpatialDataset& data,
                                             double epsilon_counts, Rng& rng,
                                             bool noiseless) {
  if (!(epsilon_counts > 0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "count budget must be positive, got ", epsilon_counts));
  }
  if (tree.size() == 0 || !(tree.domain() == data.domain())) {
    return absl::FailedPreconditionError(
        "tree domain does not match the dataset domain");
  }
  ASSIGN_OR_RETURN(const LaplaceDistribution noise,
                   LaplaceDistribution::Create(1.0 / epsilon_counts));
  const std::vector<int64_t> counts = ExactNodeCounts(tree, data);
  for (size_t id = 0; id < tree.size(); ++id) {
    if (!tree.node(id).is_leaf()) {
      tree.set_noisy_count(id, std::nullopt);
      continue;
    }
    const double c = static_cast<double>(counts[id]);
    tree.set_noisy_count(id, noiseless ? c : c + noise.Sample(rng));
  }
  tree.RefreshTotals();
  return tree;
}

absl::StatusOr<DecompTree> ReleasePrivTree(const SpatialDataset& data,
                                           double epsilon, Rng& rng,
                                           const ReleaseOptions& options) {
  if (!(epsilon > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (!(options.budget_split > 0 && options.budget_split < 1)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "budget split must lie strictly between 0 and 1, got ",
        options.budget_split));
  }
  const size_t d = data.dims();
  const int s = options.build.split_dims == 0 ? static_cast<int>(d)
                                              : options.build.split_dims;
  if (s < 1 || s > static_cast<int>(d) || s > 20) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot split ", s, " of ", d, " dimensions per level"));
  }
  const double eps_tree = epsilon * options.budget_split;
  ASSIGN_OR_RETURN(const PrivacyParams params,
                   PrivTreeParams(eps_tree, 1 << s, options.theta));
  ASSIGN_OR_RETURN(DecompTree tree,
                   BuildPrivTree(data, params, rng, options.build));
  return AttachNoisyCounts(std::move(tree), data, epsilon - eps_tree, rng,
                           options.build.noiseless);
}

absl::StatusOr<double> RangeCount(const DecompTree& tree,
                                  const RangeQuery& q) {
  if (tree.size() == 0) return absl::FailedPreconditionError("empty tree");
  const Box& domain = tree.domain();
  if (q.dims() != domain.dims()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "query has ", q.dims(), " dimensions, tree has ", domain.dims()));
  }
  if (!tree.has_counts()) {
    return absl::FailedPreconditionError("tree has no noisy counts attached");
  }
  Box box{q.lo, q.hi};
  for (size_t i = 0; i < box.dims(); ++i) {
    box.lo[i] = std::max(box.lo[i], domain.lo[i]);
    box.hi[i] = std::min(box.hi[i], domain.hi[i]);
    if (box.lo[i] >= box.hi[i]) return 0.0;
  }

  double answer = 0;
  std::vector<int> stack{tree.root()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const TreeNode& n = tree.node(id);
    if (box.Covers(n.region)) {
      answer += tree.NodeCount(id);
    } else if (n.is_leaf()) {
      answer += *n.noisy_count * n.region.IntersectionVolume(box) /
                n.region.Volume();
    } else {
      tree.IntersectingChildren(id, box.lo, box.hi, stack);
    }
  }
  return answer;
}

int UniformGridBins(size_t n, double epsilon, size_t dims) {
  const double v = std::pow(static_cast<double>(n) * epsilon / 10.0,
                            2.0 / (static_cast<double>(dims) + 2.0));
  const double r = std::round(v);
  const double m = std::abs(v - r) <= 1e-9 * std::max(1.0, r) ? r : std::ceil(v);
  return std::max(1, static_cast<int>(m));
}

absl::StatusOr<DecompTree> BuildUniformGrid(const SpatialDataset& data,
                                            double epsilon, Rng& rng,
                                            bool noiseless) {
  if (!(epsilon > 0)) {
    return absl::InvalidArgumentError("epsilon must be positive");
  }
  const size_t d = data.dims();
  const int m = UniformGridBins(std::max<size_t>(data.size(), 1), epsilon, d);
  const double cells = std::pow(static_cast<double>(m), static_cast<double>(d));
  if (cells > 5e7) {
    return absl::InvalidArgumentError(
        absl::StrCat("uniform grid with ", m, "^", d, " cells is too large"));
  }
  const Box& domain = data.domain();
  std::vector<TreeNode> nodes(1, MakeNode(domain, 0));
  const int num_cells = static_cast<int>(cells);
  if (m > 1) {
    nodes[0].first_child = 1;
    nodes[0].num_children = num_cells;
    nodes[0].split_mask = (1u << d) - 1;
    nodes[0].bins = m;
    std::vector<int> bin(d, 0);
    for (int c = 0; c < num_cells; ++c) {
      TreeNode cell = MakeNode(domain, 1);
      int rest = c;
      for (size_t k = 0; k < d; ++k) {
        const int b = rest % m;
        rest /= m;
        const double w = domain.hi[k] - domain.lo[k];
        cell.region.lo[k] = domain.lo[k] + w * b / m;
        cell.region.hi[k] = b == m - 1 ? domain.hi[k]
                                       : domain.lo[k] + w * (b + 1) / m;
      }
      nodes.push_back(std::move(cell));
    }
  }
  PrivacyParams params;
  params.epsilon = epsilon;
  params.lambda = 1.0 / epsilon;
  params.beta = num_cells;
  DecompTree tree(TreeKind::kUniformGrid, std::move(nodes), num_cells, params);
  ASSIGN_OR_RETURN(const LaplaceDistribution noise,
                   LaplaceDistribution::Create(1.0 / epsilon));
  const std::vector<int64_t> counts = ExactNodeCounts(tree, data);
  for (size_t id = 0; id < tree.size(); ++id) {
    if (!tree.node(id).is_leaf()) continue;
    const double c = static_cast<double>(counts[id]);
    tree.set_noisy_count(id, noiseless ? c : c + noise.Sample(rng));
  }
  tree.RefreshTotals();
  return tree;
}

}  // namespace privtree
