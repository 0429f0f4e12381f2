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

#ifndef EAGLE_EVAL_HPP_
#define EAGLE_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "eagle/assign.hpp"
#include "eagle/core.hpp"
#include "eagle/dataio.hpp"
#include "eagle/embeddings.hpp"
#include "eagle/linear_assignment.hpp"
#include "eagle/parallel.hpp"

namespace eagle {

struct ScoredLabel {
  std::size_t label;
  double score;

  bool operator==(const ScoredLabel&) const = default;
};

/// Higher score first, then lower label index.
inline bool ranks_before(const ScoredLabel& a, const ScoredLabel& b) {
  return a.score != b.score ? a.score > b.score : a.label < b.label;
}

struct RankedPrediction {
  std::vector<std::vector<ScoredLabel>> rows;  // one ranking per sample
  std::vector<std::size_t> zero_rows;          // samples whose feature row had zero norm

  std::size_t num_samples() const noexcept { return rows.size(); }
};

/// Mean over samples of |top-k ∩ truth| / k. Short rankings count the missing
/// slots as misses.
inline double precision_at_k(const RankedPrediction& pred, const SparseMatrix& truth, std::size_t k) {
  if (k == 0) throw InvalidInput("precision_at_k: k must be >= 1");
  if (pred.rows.empty()) throw InvalidInput("precision_at_k: empty prediction set");
  if (truth.rows() != pred.rows.size())
    throw InvalidInput("precision_at_k: " + std::to_string(pred.rows.size()) + " rankings for " +
                       std::to_string(truth.rows()) + " truth rows");
  for (double v : truth.values())
    if (v != 1.0) throw InvalidInput("precision_at_k: truth matrix is not binary");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.rows.size(); ++i) {
    const auto& r = pred.rows[i];
    const auto row = truth.row(i);
    std::size_t hits = 0;
    for (std::size_t t = 0; t < std::min(k, r.size()); ++t) {
      if (!std::isfinite(r[t].score)) throw InvalidInput("precision_at_k: non-finite score");
      hits += std::binary_search(row.indices.begin(), row.indices.end(), r[t].label) ? 1 : 0;
    }
    total += static_cast<double>(hits) / static_cast<double>(k);
  }
  return total / static_cast<double>(pred.rows.size());
}

/// Fraction of (group, label) choices landing on a sample that truly carries
/// the label. With permutation_tolerant, the best global relabelling of the
/// predicted labels is applied first (Hungarian for l <= 64, greedy above),
/// and the result is never below the identity score.
inline double assignment_accuracy(const AssignmentResult& result, const GroundTruthAssignment& truth,
                                  bool permutation_tolerant) {
  if (result.choices.empty()) throw InvalidInput("assignment_accuracy: no choices to score");
  std::size_t l = 0, correct = 0;
  for (const auto& c : result.choices) {
    if (!truth.carriers(c.group, c.label))
      throw InvalidInput("assignment_accuracy: truth has no entry for group " + std::to_string(c.group) +
                         ", label " + std::to_string(c.label));
    correct += truth.carries(c.group, c.label, c.sample) ? 1 : 0;
    l = std::max(l, c.label + 1);
  }
  for (const auto& [key, _] : truth.pairs()) l = std::max(l, key.second + 1);
  const double total = static_cast<double>(result.choices.size());
  const double identity = static_cast<double>(correct) / total;
  if (!permutation_tolerant) return identity;

  // w(k, k') = choices made for label k whose sample carries k' in that group.
  DenseMatrix w(l, l);
  const auto& pairs = truth.pairs();
  for (const auto& c : result.choices) {
    for (auto it = pairs.lower_bound({c.group, 0}); it != pairs.end() && it->first.first == c.group; ++it)
      if (std::binary_search(it->second.begin(), it->second.end(), c.sample)) w(c.label, it->first.second) += 1.0;
  }
  double best = 0.0;
  if (l <= 64) {
    DenseMatrix cost(l, l);
    for (std::size_t a = 0; a < l; ++a)
      for (std::size_t b = 0; b < l; ++b) cost(a, b) = -w(a, b);
    const auto perm = min_cost_assignment(cost);
    for (std::size_t a = 0; a < l; ++a) best += w(a, perm[a]);
  } else {
    std::vector<std::tuple<double, std::size_t, std::size_t>> cells;
    for (std::size_t a = 0; a < l; ++a)
      for (std::size_t b = 0; b < l; ++b)
        if (w(a, b) > 0.0) cells.emplace_back(-w(a, b), a, b);
    std::sort(cells.begin(), cells.end());
    std::vector<bool> row_used(l), col_used(l);
    for (const auto& [neg, a, b] : cells)
      if (!row_used[a] && !col_used[b]) row_used[a] = col_used[b] = true, best -= neg;
  }
  return std::max(identity, best / total);
}

/// Scores every (sample, label) by cosine and keeps the top k. Labels with an
/// empty embedding are never ranked. A zero feature row scores every label 0,
/// is ranked by label index and is reported in zero_rows.
inline RankedPrediction nearest_embedding_classifier(const SparseMatrix& x, const LabelEmbeddings& emb, std::size_t k) {
  if (k == 0) throw InvalidInput("nearest_embedding_classifier: k must be >= 1");
  if (x.cols() != emb.dim())
    throw InvalidInput("nearest_embedding_classifier: features have dimension " + std::to_string(x.cols()) +
                       " but embeddings have " + std::to_string(emb.dim()));
  RankedPrediction pred;
  pred.rows.resize(x.rows());
  std::vector<std::uint8_t> zero(x.rows(), 0);
  parallel_for(x.rows(), [&](std::size_t i) {
    const double nx = sparse_row_norm(x, i);
    std::vector<ScoredLabel> all;
    all.reserve(emb.num_labels());
    for (std::size_t lab = 0; lab < emb.num_labels(); ++lab) {
      if (emb.is_empty(lab)) continue;
      const double en = norm(emb.row(lab));
      all.push_back({lab, nx > 0.0 && en > 0.0 ? sparse_row_dot(x, i, emb.row(lab)) / (nx * en) : 0.0});
    }
    zero[i] = nx > 0.0 ? 0 : 1;
    const std::size_t keep = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), ranks_before);
    all.resize(keep);
    pred.rows[i] = std::move(all);
  });
  for (std::size_t i = 0; i < zero.size(); ++i)
    if (zero[i]) pred.zero_rows.push_back(i);
  return pred;
}

struct Metric {
  std::string name;
  std::size_t k = 0;
  double value = 0.0;
};

inline void write_metrics_csv(std::ostream& os, const std::vector<Metric>& metrics) {
  os << "metric,k,value\n";
  for (const auto& m : metrics) os << m.name << ',' << m.k << ',' << format_real(m.value) << '\n';
}

}  // namespace eagle

#endif  // EAGLE_EVAL_HPP_
