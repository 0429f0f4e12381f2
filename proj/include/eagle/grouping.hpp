// Copyright 2026 The EAGLE Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EAGLE_GROUPING_HPP_
#define EAGLE_GROUPING_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "eagle/core.hpp"
#include "eagle/dataio.hpp"
#include "eagle/embeddings.hpp"
#include "eagle/parallel.hpp"
#include "eagle/rng.hpp"

namespace eagle {

enum class GroupingRule { kRandom, kHierarchical };

struct GroupingConfig {
  GroupingRule rule = GroupingRule::kRandom;
  std::size_t group_size = 4;  // random rule
  std::size_t depth = 3;       // hierarchical rule: 2^depth groups
  double feature_noise_sigma = 0.0;
  std::size_t kmeans_max_iters = 50;
  std::uint64_t seed = 0;
};

struct GroupedDataset {
  AggregatedDataset data;
  GroundTruthAssignment truth;
};

/// Builds {X, Y1, Y2} from an explicit partition. Y2 is the list merge of the
/// member label sets: the binary pattern plus per-(group, label) counts.
inline GroupedDataset aggregate_groups(const XmcDataset& ds, std::span<const std::vector<std::size_t>> groups) {
  ds.validate();
  const std::size_t n = ds.num_samples(), m = groups.size(), l = ds.labels.cols();
  std::vector<SparseMatrix::Triplet> y1, y2;
  GroundTruthAssignment truth;
  std::vector<char> seen(n, 0);
  for (std::size_t j = 0; j < m; ++j) {
    std::map<std::size_t, double> counts;
    for (auto i : groups[j]) {
      if (i >= n) throw BoundsError("aggregate_groups: sample index out of range");
      if (seen[i]++) throw IntegrityError("aggregate_groups: sample " + std::to_string(i) + " in two groups");
      y1.push_back({i, j, 1.0});
      for (auto k : ds.labels.row(i).indices) {
        counts[k] += 1.0;
        truth.add(j, k, i);
      }
    }
    for (const auto& [k, c] : counts) y2.push_back({j, k, c});
  }
  auto [binary, multiplicity] = split_multiplicity(SparseMatrix::from_triplets(m, l, std::move(y2)));
  return {AggregatedDataset(ds.features, SparseMatrix::from_triplets(n, m, std::move(y1)), std::move(binary),
                            std::move(multiplicity)),
          std::move(truth)};
}

/// A uniform permutation of the samples cut into consecutive blocks of g; the
/// last block keeps the remainder.
inline GroupedDataset random_grouping(const XmcDataset& ds, std::size_t g, std::uint64_t seed) {
  const std::size_t n = ds.num_samples();
  if (g == 0) throw ConfigError("random_grouping: group size must be >= 1");
  if (g > n)
    throw ConfigError("random_grouping: group size " + std::to_string(g) + " exceeds sample count " +
                      std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t b = 0; b < n; b += g) {
    std::vector<std::size_t> grp(perm.begin() + static_cast<std::ptrdiff_t>(b),
                                 perm.begin() + static_cast<std::ptrdiff_t>(std::min(n, b + g)));
    std::sort(grp.begin(), grp.end());
    groups.push_back(std::move(grp));
  }
  return aggregate_groups(ds, groups);
}

namespace detail {

/// Unit-normalized rows used for clustering, optionally perturbed densely.
class ClusterRows {
 public:
  ClusterRows(const SparseMatrix& x, double noise_sigma, std::uint64_t seed) : sparse_(normalize_rows(x)) {
    if (noise_sigma > 0.0) {
      dense_ = DenseMatrix(x.rows(), x.cols());
      for (std::size_t i = 0; i < x.rows(); ++i) {
        Rng rng(Rng::split(seed, i));
        auto r = dense_->row(i);
        for (double& v : r) v = noise_sigma * rng.normal();
        sparse_row_axpy(sparse_, i, 1.0, r);
        const DenseVector unit = proj(r, DenseVector(r.begin(), r.end()));
        std::copy(unit.begin(), unit.end(), r.begin());
      }
    }
  }

  std::size_t dim() const noexcept { return sparse_.cols(); }

  double dot(std::size_t i, std::span<const double> c) const {
    return dense_ ? eagle::dot(dense_->row(i), c) : sparse_row_dot(sparse_, i, c);
  }

  void add_to(std::size_t i, std::span<double> out) const {
    if (dense_) {
      const auto r = dense_->row(i);
      for (std::size_t c = 0; c < r.size(); ++c) out[c] += r[c];
    } else {
      sparse_row_axpy(sparse_, i, 1.0, out);
    }
  }

  DenseVector densify(std::size_t i) const {
    DenseVector v(dim(), 0.0);
    add_to(i, v);
    return v;
  }

 private:
  SparseMatrix sparse_;
  std::optional<DenseMatrix> dense_;
};

/// Balanced spherical 2-means over `items` (ascending sample ids). Returns
/// (left, right) with sizes ceil/floor of |items|/2 in some order; each side
/// ascending.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> balanced_split(
    const ClusterRows& rows, std::span<const std::size_t> items, std::size_t max_iters, Rng& rng) {
  const std::size_t s = items.size();
  auto farthest_from = [&](std::span<const double> c) {
    std::size_t best = 0;
    double best_sim = rows.dot(items[0], c);
    for (std::size_t p = 1; p < s; ++p) {
      const double sim = rows.dot(items[p], c);
      if (sim < best_sim) {
        best_sim = sim;
        best = p;
      }
    }
    return best;
  };
  const std::size_t start = rng.uniform_index(s);
  const std::size_t first = farthest_from(rows.densify(items[start]));
  DenseVector c1 = rows.densify(items[first]);
  DenseVector c2 = rows.densify(items[farthest_from(c1)]);

  std::vector<double> margin(s);
  std::vector<std::size_t> order(s);
  std::vector<char> side(s, 2), prev;
  for (std::size_t iter = 0; iter < std::max<std::size_t>(1, max_iters); ++iter) {
    parallel_for(s, [&](std::size_t p) { margin[p] = rows.dot(items[p], c1) - rows.dot(items[p], c2); });
    const auto nearer_first = static_cast<std::size_t>(std::count_if(margin.begin(), margin.end(), [](double x) { return x >= 0.0; }));
    const std::size_t target = nearer_first >= s - nearer_first ? (s + 1) / 2 : s / 2;
    // Surplus points closest to the boundary (smallest margin) move across.
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return margin[a] > margin[b]; });
    std::fill(side.begin(), side.end(), 2);
    for (std::size_t r = 0; r < target; ++r) side[order[r]] = 1;
    if (side == prev) break;
    prev = side;
    DenseVector s1(rows.dim(), 0.0), s2(rows.dim(), 0.0);
    for (std::size_t p = 0; p < s; ++p) rows.add_to(items[p], side[p] == 1 ? std::span<double>(s1) : std::span<double>(s2));
    c1 = proj(s1, c1);
    c2 = proj(s2, c2);
  }
  std::vector<std::size_t> left, right;
  for (std::size_t p = 0; p < s; ++p) (side[p] == 1 ? left : right).push_back(items[p]);
  return {std::move(left), std::move(right)};
}

}  // namespace detail

/// Recursive balanced 2-means for `depth` levels; the 2^depth leaves become
/// groups in left-to-right order.
inline GroupedDataset hierarchical_grouping(const XmcDataset& ds, std::size_t depth, double feature_noise_sigma,
                                            std::size_t kmeans_max_iters, std::uint64_t seed) {
  const std::size_t n = ds.num_samples();
  if (feature_noise_sigma < 0.0) throw ConfigError("hierarchical_grouping: feature noise must be >= 0");
  if (depth >= 63 || (std::size_t{1} << depth) > n)
    throw ConfigError("hierarchical_grouping: depth " + std::to_string(depth) + " needs 2^depth <= n = " +
                      std::to_string(n));
  const detail::ClusterRows rows(ds.features, feature_noise_sigma, Rng::split(seed, 0xFEA7));
  std::vector<std::vector<std::size_t>> level(1, std::vector<std::size_t>(n));
  std::iota(level[0].begin(), level[0].end(), std::size_t{0});
  for (std::size_t t = 0; t < depth; ++t) {
    std::vector<std::vector<std::size_t>> next;
    next.reserve(level.size() * 2);
    for (std::size_t node = 0; node < level.size(); ++node) {
      Rng rng(Rng::split(Rng::split(seed, t + 1), node));
      auto [left, right] = detail::balanced_split(rows, level[node], kmeans_max_iters, rng);
      next.push_back(std::move(left));
      next.push_back(std::move(right));
    }
    level = std::move(next);
  }
  return aggregate_groups(ds, level);
}

inline GroupedDataset make_groups(const XmcDataset& ds, const GroupingConfig& cfg) {
  switch (cfg.rule) {
    case GroupingRule::kRandom:
      return random_grouping(ds, cfg.group_size, cfg.seed);
    case GroupingRule::kHierarchical:
      return hierarchical_grouping(ds, cfg.depth, cfg.feature_noise_sigma, cfg.kmeans_max_iters, cfg.seed);
  }
  throw ConfigError("make_groups: unknown rule");
}

// ---------------------------------------------------------------------------

struct SynthDataset {
  XmcDataset data;
  LabelEmbeddings truth;
  std::vector<std::size_t> sample_label;
};

inline constexpr std::size_t kMaxSeparationAttempts = 100000;

/// l unit embeddings with pairwise distance >= sep, and n single-label samples
/// x_i = proj(e*_k + eps_i) with eps_i ~ N(0, noise^2 I). With noise == 0 each
/// x_i is a copy of its label embedding.
inline SynthDataset synth_clustered_dataset(std::size_t n, std::size_t d, std::size_t l, double sep, double noise,
                                            std::uint64_t seed) {
  if (d == 0 || l == 0) throw ConfigError("synth_clustered_dataset: d and l must be >= 1");
  if (l > 1024) throw ConfigError("synth_clustered_dataset: at most 1024 labels");
  if (!(sep > 0.0)) throw ConfigError("synth_clustered_dataset: sep must be > 0");
  if (noise < 0.0) throw ConfigError("synth_clustered_dataset: noise must be >= 0");
  if (sep > 2.0 + 1e-12) throw ConfigError("synth_clustered_dataset: no two unit vectors are farther apart than 2");
  Rng rng(seed);
  auto random_unit = [&] {
    DenseVector v(d);
    for (;;) {
      for (double& x : v) x = rng.normal();
      if (norm(v) > kNormFloor) return proj(v, v);
    }
  };
  LabelEmbeddings truth(l, d);
  if (sep >= 2.0 - 1e-12) {
    // Only antipodal pairs reach distance 2.
    if (l > 2) throw ConfigError("synth_clustered_dataset: separation 2 admits at most 2 labels");
    const DenseVector u = random_unit();
    truth.set_row(0, u);
    if (l == 2) {
      DenseVector v(u);
      for (double& x : v) x = -x;
      truth.set_row(1, v);
    }
  } else {
    std::size_t attempts = 0;
    for (std::size_t k = 0; k < l;) {
      if (++attempts > kMaxSeparationAttempts)
        throw ConfigError("synth_clustered_dataset: could not place " + std::to_string(l) +
                          " embeddings with separation " + format_real(sep) + " in dimension " + std::to_string(d));
      const DenseVector cand = random_unit();
      bool ok = true;
      for (std::size_t q = 0; q < k && ok; ++q) ok = distance(cand, truth.row(q)) >= sep;
      if (ok) truth.set_row(k++, cand);
    }
  }

  std::vector<SparseMatrix::Triplet> feats, labels;
  std::vector<std::size_t> sample_label(n);
  DenseVector x(d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = rng.uniform_index(l);
    sample_label[i] = k;
    labels.push_back({i, k, 1.0});
    const auto e = truth.row(k);
    if (noise == 0.0) {
      std::copy(e.begin(), e.end(), x.begin());
    } else {
      for (std::size_t c = 0; c < d; ++c) x[c] = e[c] + noise * rng.normal();
      x = proj(x, e);
    }
    for (std::size_t c = 0; c < d; ++c)
      if (x[c] != 0.0) feats.push_back({i, c, x[c]});
  }
  return {{SparseMatrix::from_triplets(n, d, std::move(feats)), SparseMatrix::from_triplets(n, l, std::move(labels))},
          std::move(truth),
          std::move(sample_label)};
}

}  // namespace eagle

#endif  // EAGLE_GROUPING_HPP_
