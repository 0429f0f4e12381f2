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

// Group-robust label representations.
//
// For a label k with positive groups M_k, the target embedding is
//
//     argmax_{|e| = 1}  sum_{j in M_k}  max_{i in N_j}  cos(x_i, e)
//
// i.e. every positive group should contain at least one sample close to the
// label. GRLR approximates it by alternating (a) pick the member of each
// group with the largest inner product against the current iterate and
// (b) step the iterate toward the normalized sum of the picks:
//
//     e^0 = proj(sum_{j in M_k} sum_{i in N_j} x_i)
//     g^t = proj(sum_j x_{pick_j(e^{t-1})})
//     e^t = proj(e^{t-1} + lambda * g^t)
//
// Policies fixed here:
//   * ties in a group pick the lowest sample index only;
//   * features are L2-normalized for learning unless turned off;
//   * a zero initial sum falls back to a member of the label's first group,
//     rotated by the label index so labels sharing identical groups start
//     from different members;
//   * a zero aggregate g^t (or blend) keeps the previous iterate.

#ifndef EAGLE_GRLR_HPP_
#define EAGLE_GRLR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eagle/core.hpp"
#include "eagle/dataio.hpp"
#include "eagle/embeddings.hpp"
#include "eagle/parallel.hpp"

namespace eagle {

struct GrlrConfig {
  std::size_t iters = 20;
  double lambda = 0.1;
  /// Select and aggregate with unit-normalized feature rows.
  bool normalize_features = true;
  /// Keep e^0..e^T and the per-iteration picks in the trace.
  bool record_iterates = false;

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("GrlrConfig: lambda must be > 0");
  }
};

struct GrlrStep {
  double objective = 0.0;  // objective at e^t
  double step_norm = 0.0;  // |e^t - e^{t-1}|
  std::optional<double> alpha;  // fraction of groups whose pick carries the label
};

struct GrlrTrace {
  double initial_objective = 0.0;
  std::vector<GrlrStep> steps;
  std::vector<DenseVector> iterates;                 // e^0..e^T, when recorded
  std::vector<std::vector<std::size_t>> selections;  // picks per iteration (iteration t uses e^{t-1})
};

struct GrlrResult {
  DenseVector embedding;
  GrlrTrace trace;
};

/// Feature rows as seen by selection and aggregation: raw, or scaled to unit
/// norm without copying the matrix.
class FeatureView {
 public:
  FeatureView(const SparseMatrix& x, bool normalize) : x_(&x), scale_(x.rows(), 1.0) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double nr = sparse_row_norm(x, i);
      if (!(nr > 0.0))
        scale_[i] = 0.0;
      else if (normalize)
        scale_[i] = 1.0 / nr;
    }
  }

  std::size_t dim() const noexcept { return x_->cols(); }
  bool is_zero(std::size_t i) const { return scale_[i] == 0.0; }
  double dot(std::size_t i, std::span<const double> e) const { return scale_[i] * sparse_row_dot(*x_, i, e); }
  void add_to(std::size_t i, std::span<double> out) const { sparse_row_axpy(*x_, i, scale_[i], out); }

 private:
  const SparseMatrix* x_;
  std::vector<double> scale_;
};

namespace detail {

inline void require_label(const AggregatedDataset& ds, std::size_t k) {
  if (k >= ds.num_labels()) throw BoundsError("label " + std::to_string(k) + " out of range");
  if (ds.label_groups(k).empty()) throw EmptyLabelError("label " + std::to_string(k) + " has no positive group");
}

inline void require_unit(std::span<const double> e, std::size_t dim) {
  if (e.size() != dim) throw InvalidInput("embedding dimension mismatch");
  if (!all_finite(e) || std::abs(norm(e) - 1.0) > kUnitTolerance) throw InvalidInput("embedding must be unit-norm");
}

/// Sum over every member of every positive group, in group-major order.
inline DenseVector label_sum(const FeatureView& view, const AggregatedDataset& ds, std::size_t k) {
  DenseVector s(view.dim(), 0.0);
  for (auto j : ds.label_groups(k))
    for (auto i : ds.members(j)) view.add_to(i, s);
  return s;
}

inline DenseVector label_fallback(const FeatureView& view, const AggregatedDataset& ds, std::size_t k) {
  const DenseVector axis = basis_vector(view.dim(), 0);
  bool first = true;
  for (auto j : ds.label_groups(k)) {
    const auto mem = ds.members(j);
    if (mem.empty()) continue;
    const std::size_t start = first ? k % mem.size() : 0;
    first = false;
    for (std::size_t r = 0; r < mem.size(); ++r) {
      const std::size_t i = mem[(start + r) % mem.size()];
      if (view.is_zero(i)) continue;
      DenseVector v(view.dim(), 0.0);
      view.add_to(i, v);
      return proj(v, axis);
    }
  }
  return axis;
}

/// Lowest-index member maximizing the inner product with e; nullopt for an empty group.
inline std::optional<std::size_t> pick(const FeatureView& view, std::span<const std::size_t> members,
                                       std::span<const double> e) {
  if (members.empty()) return std::nullopt;
  std::size_t best = members[0];
  double best_v = view.dot(best, e);
  for (std::size_t p = 1; p < members.size(); ++p) {
    const double v = view.dot(members[p], e);
    if (v > best_v) {
      best_v = v;
      best = members[p];
    }
  }
  return best;
}

struct Aggregate {
  DenseVector direction;
  std::vector<std::size_t> picks;  // one per nonempty group, in M_k order
  std::size_t good = 0;
};

inline Aggregate aggregate(const FeatureView& view, const AggregatedDataset& ds, std::size_t k,
                           std::span<const double> e, const GroundTruthAssignment* truth) {
  Aggregate a;
  DenseVector sum(view.dim(), 0.0);
  for (auto j : ds.label_groups(k)) {
    const auto best = pick(view, ds.members(j), e);
    if (!best) continue;
    view.add_to(*best, sum);
    a.picks.push_back(*best);
    if (truth && truth->carries(j, k, *best)) ++a.good;
  }
  a.direction = proj(sum, e);
  return a;
}

/// proj(e + lambda * g); a direction equal to e leaves e fixed (a positive multiple of e).
inline DenseVector blend(std::span<const double> e, std::span<const double> g, double lambda) {
  if (std::equal(e.begin(), e.end(), g.begin(), g.end())) return DenseVector(e.begin(), e.end());
  DenseVector v(e.size());
  for (std::size_t c = 0; c < e.size(); ++c) v[c] = e[c] + lambda * g[c];
  return proj(v, e);
}

/// max over nonzero members of cos(x_i, e); 0 if every member is zero.
inline double group_max_cosine(const AggregatedDataset& ds, std::size_t j, std::span<const double> e, double norm_e) {
  bool any = false;
  double best = 0.0;
  for (auto i : ds.members(j)) {
    const double nx = sparse_row_norm(ds.features(), i);
    if (!(nx > 0.0)) continue;
    const double c = std::clamp(sparse_row_dot(ds.features(), i, e) / (nx * norm_e), -1.0, 1.0);
    if (!any || c > best) best = c;
    any = true;
  }
  return any ? best : 0.0;
}

inline double objective_unchecked(std::span<const double> e, std::size_t k, const AggregatedDataset& ds) {
  const double ne = norm(e);
  double s = 0.0;
  for (auto j : ds.label_groups(k)) s += group_max_cosine(ds, j, e, ne);
  return s;
}

inline DenseVector run_grlr(const FeatureView& view, const AggregatedDataset& ds, std::size_t k, const GrlrConfig& cfg,
                            const GroundTruthAssignment* truth, GrlrTrace* trace) {
  DenseVector e = proj(label_sum(view, ds, k), label_fallback(view, ds, k));
  if (trace) {
    trace->initial_objective = objective_unchecked(e, k, ds);
    if (cfg.record_iterates) trace->iterates.push_back(e);
  }
  const double groups = static_cast<double>(ds.label_groups(k).size());
  for (std::size_t t = 1; t <= cfg.iters; ++t) {
    Aggregate a = aggregate(view, ds, k, e, truth);
    DenseVector next = blend(e, a.direction, cfg.lambda);
    if (trace) {
      GrlrStep step;
      step.objective = objective_unchecked(next, k, ds);
      step.step_norm = distance(next, e);
      if (truth) step.alpha = static_cast<double>(a.good) / groups;
      trace->steps.push_back(step);
      if (cfg.record_iterates) {
        trace->iterates.push_back(next);
        trace->selections.push_back(std::move(a.picks));
      }
    }
    e = std::move(next);
  }
  return e;
}

}  // namespace detail

/// Objective value of a unit embedding for label k: sum over M_k of the best
/// member cosine. Groups whose members are all zero contribute 0.
inline double eq2_objective(std::span<const double> e, std::size_t k, const AggregatedDataset& ds) {
  detail::require_label(ds, k);
  detail::require_unit(e, ds.dim());
  return detail::objective_unchecked(e, k, ds);
}

/// Row k of (Y1 Y2)^T X before normalization, accumulated sparsely.
inline DenseMatrix pifa_unnormalized(const AggregatedDataset& ds, bool normalize_features = false) {
  const FeatureView view(ds.features(), normalize_features);
  DenseMatrix out(ds.num_labels(), ds.dim());
  parallel_for(ds.num_labels(), [&](std::size_t k) {
    const DenseVector s = detail::label_sum(view, ds, k);
    std::copy(s.begin(), s.end(), out.row(k).begin());
  });
  return out;
}

/// Unit-normalized rows of (Y1 Y2)^T X. Labels with no positive group are flagged empty.
inline LabelEmbeddings pifa_embedding(const AggregatedDataset& ds, bool normalize_features = false) {
  const FeatureView view(ds.features(), normalize_features);
  LabelEmbeddings emb(ds.num_labels(), ds.dim());
  parallel_for(ds.num_labels(), [&](std::size_t k) {
    if (ds.label_groups(k).empty()) {
      emb.mark_empty(k);
      return;
    }
    emb.set_row(k, proj(detail::label_sum(view, ds, k), detail::label_fallback(view, ds, k)));
  });
  return emb;
}

/// Runs GRLR for one label. `truth`, when given, fills alpha_t in the trace.
inline GrlrResult grlr(std::size_t k, const AggregatedDataset& ds, const GrlrConfig& cfg = {},
                       const GroundTruthAssignment* truth = nullptr) {
  cfg.validate();
  detail::require_label(ds, k);
  const FeatureView view(ds.features(), cfg.normalize_features);
  GrlrResult r;
  r.embedding = detail::run_grlr(view, ds, k, cfg, truth, &r.trace);
  return r;
}

/// GRLR for every label, in parallel over labels.
inline LabelEmbeddings learn_all_embeddings(const AggregatedDataset& ds, const GrlrConfig& cfg = {}) {
  cfg.validate();
  const FeatureView view(ds.features(), cfg.normalize_features);
  LabelEmbeddings emb(ds.num_labels(), ds.dim());
  parallel_for(ds.num_labels(), [&](std::size_t k) {
    if (ds.label_groups(k).empty()) {
      emb.mark_empty(k);
      return;
    }
    emb.set_row(k, detail::run_grlr(view, ds, k, cfg, nullptr, nullptr));
  });
  return emb;
}

struct OneStepResult {
  DenseVector direction;
  std::optional<double> alpha;
};

/// The pure aggregation step: proj of the summed per-group picks under e,
/// with no blending. This is g^t of GRLR when e = e^{t-1}.
inline OneStepResult one_step_aggregate(std::span<const double> e, std::size_t k, const AggregatedDataset& ds,
                                        const GroundTruthAssignment* truth = nullptr, bool normalize_features = true) {
  detail::require_label(ds, k);
  detail::require_unit(e, ds.dim());
  const FeatureView view(ds.features(), normalize_features);
  auto a = detail::aggregate(view, ds, k, e, truth);
  OneStepResult r{std::move(a.direction), std::nullopt};
  if (truth) r.alpha = static_cast<double>(a.good) / static_cast<double>(ds.label_groups(k).size());
  return r;
}

inline constexpr std::size_t kMaxCombinations = 1000000;

struct BruteForceResult {
  DenseVector embedding;
  double objective = 0.0;
  std::size_t combinations = 0;
};

/// Exact search over one representative per positive group. Each choice
/// proposes e = proj(sum of chosen raw rows), scored by eq2_objective. For
/// unit-norm features the best proposal is the global optimum of the
/// objective; otherwise it is exact over the proposal family only.
inline BruteForceResult brute_force_embedding(std::size_t k, const AggregatedDataset& ds) {
  detail::require_label(ds, k);
  std::vector<std::span<const std::size_t>> groups;
  std::size_t total = 1;
  for (auto j : ds.label_groups(k)) {
    const auto mem = ds.members(j);
    if (mem.empty()) continue;
    if (total > kMaxCombinations / mem.size())
      throw InfeasibleError("brute_force_embedding: more than " + std::to_string(kMaxCombinations) +
                            " combinations for label " + std::to_string(k));
    total *= mem.size();
    groups.push_back(mem);
  }
  const FeatureView raw(ds.features(), false);
  BruteForceResult best;
  best.combinations = total;
  bool found = false;
  std::vector<std::size_t> digit(groups.size(), 0);
  DenseVector sum(ds.dim());
  for (std::size_t c = 0; c < total; ++c) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t g = 0; g < groups.size(); ++g) raw.add_to(groups[g][digit[g]], sum);
    if (norm(sum) > kNormFloor) {
      DenseVector e = proj(sum, sum);
      const double obj = detail::objective_unchecked(e, k, ds);
      if (!found || obj > best.objective) {
        best.objective = obj;
        best.embedding = std::move(e);
        found = true;
      }
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (++digit[g] < groups[g].size()) break;
      digit[g] = 0;
    }
  }
  if (!found) {
    best.embedding = detail::label_fallback(raw, ds, k);
    best.objective = detail::objective_unchecked(best.embedding, k, ds);
  }
  return best;
}

}  // namespace eagle

#endif  // EAGLE_GRLR_HPP_
