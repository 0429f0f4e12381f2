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

#ifndef EAGLE_ASSIGN_HPP_
#define EAGLE_ASSIGN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "eagle/core.hpp"
#include "eagle/dataio.hpp"
#include "eagle/embeddings.hpp"
#include "eagle/grlr.hpp"
#include "eagle/parallel.hpp"
#include "eagle/rng.hpp"

namespace eagle {

struct AssignmentChoice {
  std::size_t group;
  std::size_t label;
  std::size_t sample;
  /// The label's embedding was empty; the group's lowest-index sample was used.
  bool fallback = false;

  bool operator==(const AssignmentChoice&) const = default;
};

struct AssignmentResult {
  SparseMatrix filtered_labels;              // n x l, binary
  std::vector<AssignmentChoice> choices;     // ordered by (group, label)
  std::size_t num_fallbacks = 0;

  const AssignmentChoice* find(std::size_t group, std::size_t label) const {
    auto it = std::lower_bound(choices.begin(), choices.end(), std::pair{group, label},
                               [](const AssignmentChoice& c, const std::pair<std::size_t, std::size_t>& key) {
                                 return c.group != key.first ? c.group < key.first : c.label < key.second;
                               });
    if (it == choices.end() || it->group != group || it->label != label) return nullptr;
    return &*it;
  }
};

namespace detail {

inline AssignmentResult collect(const AggregatedDataset& ds, std::vector<std::vector<AssignmentChoice>> per_group) {
  AssignmentResult r;
  std::vector<SparseMatrix::Triplet> t;
  for (auto& g : per_group)
    for (auto& c : g) {
      t.push_back({c.sample, c.label, 1.0});
      r.num_fallbacks += c.fallback ? 1 : 0;
      r.choices.push_back(c);
    }
  // Overlapping groups could hand a sample the same label twice; keep it binary.
  for (auto& x : t) x.value = 1.0;
  SparseMatrix counted = SparseMatrix::from_triplets(ds.num_samples(), ds.num_labels(), std::move(t));
  std::vector<double> ones(counted.nnz(), 1.0);
  r.filtered_labels = SparseMatrix::from_csr(counted.rows(), counted.cols(), counted.row_offsets(),
                                             counted.col_indices(), std::move(ones));
  return r;
}

inline void require_members(const AggregatedDataset& ds, std::size_t j) {
  if (ds.members(j).empty() && !ds.group_labels(j).empty())
    throw IntegrityError("group " + std::to_string(j) + " has labels but no samples");
}

}  // namespace detail

/// Assigns each label of each group to the member with the largest inner
/// product against the label embedding (ties to the lowest sample index).
inline AssignmentResult eagle_assign(const AggregatedDataset& ds, const LabelEmbeddings& emb,
                                     bool normalize_features = true) {
  if (emb.num_labels() != ds.num_labels() || emb.dim() != ds.dim())
    throw InvalidInput("eagle_assign: embeddings are " + std::to_string(emb.num_labels()) + "x" +
                       std::to_string(emb.dim()) + " but dataset has " + std::to_string(ds.num_labels()) +
                       " labels of dimension " + std::to_string(ds.dim()));
  const FeatureView view(ds.features(), normalize_features);
  std::vector<std::vector<AssignmentChoice>> per_group(ds.num_groups());
  parallel_for(ds.num_groups(), [&](std::size_t j) {
    detail::require_members(ds, j);
    const auto mem = ds.members(j);
    for (auto k : ds.group_labels(j)) {
      if (emb.is_empty(k))
        per_group[j].push_back({j, k, mem[0], true});
      else
        per_group[j].push_back({j, k, *detail::pick(view, mem, emb.row(k)), false});
    }
  });
  return detail::collect(ds, std::move(per_group));
}

/// Uniformly random member per (group, label); the chance-level reference.
inline AssignmentResult random_assignment(const AggregatedDataset& ds, std::uint64_t seed) {
  std::vector<std::vector<AssignmentChoice>> per_group(ds.num_groups());
  parallel_for(ds.num_groups(), [&](std::size_t j) {
    detail::require_members(ds, j);
    Rng rng(Rng::split(seed, j));
    const auto mem = ds.members(j);
    for (auto k : ds.group_labels(j)) per_group[j].push_back({j, k, mem[rng.uniform_index(mem.size())], false});
  });
  return detail::collect(ds, std::move(per_group));
}

struct PipelineResult {
  XmcDataset filtered;  // {X, Y_filter}
  LabelEmbeddings embeddings;
  AssignmentResult assignment;
};

/// Learn every label embedding, then assign. iters == 0 assigns with the
/// initial embeddings only.
inline PipelineResult eagle_pipeline(const AggregatedDataset& ds, const GrlrConfig& cfg = {}) {
  PipelineResult r;
  r.embeddings = learn_all_embeddings(ds, cfg);
  r.assignment = eagle_assign(ds, r.embeddings, cfg.normalize_features);
  r.filtered = {ds.features(), r.assignment.filtered_labels};
  return r;
}

inline void write_choices_csv(std::ostream& os, const AssignmentResult& r) {
  os << "group,label,sample\n";
  for (const auto& c : r.choices) os << c.group << ',' << c.label << ',' << c.sample << '\n';
}

/// Soft-assignment mask g * softmax_columns(tau * X L^T) for one group of g
/// instances. tau = 0 gives all ones; large tau approaches a hard argmax per
/// label column.
inline DenseMatrix miml_mask(const DenseMatrix& group_features, const LabelEmbeddings& emb, double tau) {
  const std::size_t g = group_features.rows(), l = emb.num_labels();
  if (g == 0) throw InvalidInput("miml_mask: empty group");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidInput("miml_mask: tau must be finite and >= 0");
  if (group_features.cols() != emb.dim()) throw InvalidInput("miml_mask: feature/embedding dimension mismatch");
  if (!all_finite(group_features.data()) || !all_finite(emb.matrix().data()))
    throw InvalidInput("miml_mask: non-finite input");
  DenseMatrix mask(g, l);
  std::vector<double> logits(g);
  const double size = static_cast<double>(g);
  for (std::size_t k = 0; k < l; ++k) {
    for (std::size_t i = 0; i < g; ++i) logits[i] = tau * dot(group_features.row(i), emb.row(k));
    const double top = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& v : logits) z += (v = std::exp(v - top));
    for (std::size_t i = 0; i < g; ++i) mask(i, k) = size * logits[i] / z;
  }
  return mask;
}

}  // namespace eagle

#endif  // EAGLE_ASSIGN_HPP_
