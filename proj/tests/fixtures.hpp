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


// Shared datasets for the test suites.

#ifndef EAGLE_TESTS_FIXTURES_HPP_
#define EAGLE_TESTS_FIXTURES_HPP_

#include <cstdint>
#include <vector>

#include "eagle/eagle.hpp"

namespace eagle::testing {

inline SparseMatrix sparse_from_rows(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  std::vector<SparseMatrix::Triplet> t;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c)
      if (rows[i][c] != 0.0) t.push_back({i, c, rows[i][c]});
  return SparseMatrix::from_triplets(rows.size(), cols, std::move(t));
}

inline SparseMatrix binary_from_lists(const std::vector<std::vector<std::size_t>>& lists, std::size_t cols) {
  std::vector<SparseMatrix::Triplet> t;
  for (std::size_t i = 0; i < lists.size(); ++i)
    for (auto c : lists[i]) t.push_back({i, c, 1.0});
  auto m = SparseMatrix::from_triplets(lists.size(), cols, std::move(t));
  return split_multiplicity(m).first;
}

/// n/2 groups {2j, 2j+1}; even samples are +x and carry label 0, odd samples
/// are -x and carry label 1, x the first basis vector of R^2.
inline GroupedDataset cancelling_toy(std::size_t groups = 3) {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<std::size_t>> y;
  for (std::size_t j = 0; j < groups; ++j) {
    x.push_back({1.0, 0.0});
    y.push_back({0});
    x.push_back({-1.0, 0.0});
    y.push_back({1});
  }
  XmcDataset ds{sparse_from_rows(x, 2), binary_from_lists(y, 2)};
  std::vector<std::vector<std::size_t>> parts;
  for (std::size_t j = 0; j < groups; ++j) parts.push_back({2 * j, 2 * j + 1});
  return aggregate_groups(ds, parts);
}

/// Random sparse features (density ~0.5, values in (-2, 2)) with 1-3 labels per row.
inline XmcDataset random_xmc(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t l) {
  Rng rng(seed);
  std::vector<std::vector<double>> x(n, std::vector<double>(d, 0.0));
  std::vector<std::vector<std::size_t>> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t c = 0; c < d; ++c)
      if (rng.uniform() < 0.5) x[i][c] = 4.0 * rng.uniform() - 2.0, any = true;
    if (!any) x[i][rng.uniform_index(d)] = 1.0;
    const std::size_t count = 1 + rng.uniform_index(std::min<std::size_t>(3, l));
    for (std::size_t t = 0; t < count; ++t) y[i].push_back(rng.uniform_index(l));
  }
  return {sparse_from_rows(x, d), binary_from_lists(y, l)};
}

/// Positive groups for label 0 only: m in [1,4] groups of 1-3 unit-norm
/// samples in dimension 2-4.
inline AggregatedDataset tiny_instance(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t m = 1 + rng.uniform_index(4), d = 2 + rng.uniform_index(3);
  std::vector<std::vector<double>> x;
  std::vector<std::vector<std::size_t>> y1;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t size = 1 + rng.uniform_index(3);
    for (std::size_t a = 0; a < size; ++a) {
      DenseVector v(d);
      for (double& c : v) c = rng.normal();
      x.push_back(proj(v, basis_vector(d, 0)));
      y1.push_back({j});
    }
  }
  std::vector<std::vector<std::size_t>> y2(m, std::vector<std::size_t>{0});
  return AggregatedDataset(sparse_from_rows(x, d), binary_from_lists(y1, m), binary_from_lists(y2, 1));
}

}  // namespace eagle::testing

#endif  // EAGLE_TESTS_FIXTURES_HPP_
