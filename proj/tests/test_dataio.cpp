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


#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "eagle/eagle.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace eagle {
namespace {

using testing::binary_from_lists;
using testing::sparse_from_rows;

TEST(ParseXmc, TwoByThreeExample) {
  const auto ds = parse_xmc(std::string("2 3 2\n0 0:1.0 2:2.0\n1 1:0.5\n"));
  EXPECT_EQ(oracle::to_dense(ds.features), (oracle::Dense{{1, 0, 2}, {0, 0.5, 0}}));
  EXPECT_EQ(oracle::to_dense(ds.labels), (oracle::Dense{{1, 0}, {0, 1}}));
}

TEST(ParseXmc, SingleCell) {
  const auto ds = parse_xmc(std::string("1 1 1\n0 0:1\n"));
  EXPECT_EQ(ds.features.rows(), 1u);
  EXPECT_EQ(ds.features.at(0, 0), 1.0);
  EXPECT_EQ(ds.labels.at(0, 0), 1.0);
}

TEST(ParseXmc, LabelsSortedAndDeduplicated) {
  const auto ds = parse_xmc(std::string("1 2 4\n3,1,3 1:2\n"));
  EXPECT_EQ(ds.labels.col_indices(), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(ds.labels.values(), (std::vector<double>{1.0, 1.0}));
}

TEST(ParseXmc, ErrorsNameTheLine) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_xmc(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("2 3 2\n0 0:1\n5 1:1\n"), 3u);  // label beyond l
  EXPECT_EQ(line_of("1 3 2\n0 7:1\n"), 2u);        // feature beyond d
  EXPECT_EQ(line_of("1 3 2\n0 1:abc\n"), 2u);      // non-numeric value
  EXPECT_EQ(line_of("1 3\n0 1:1\n"), 1u);          // header with two counts
  EXPECT_EQ(line_of("x 3 2\n"), 1u);
  EXPECT_EQ(line_of("2 3 2\n0 1:1\n"), 3u);        // missing row
  EXPECT_NE(line_of("1 3 2\n0 1:1\n1 1:1\n"), 0u);  // extra row
}

TEST(WriteXmc, EmptyLabelRowStartsWithSpace) {
  XmcDataset ds{sparse_from_rows({{0, 2.5}}, 2), binary_from_lists({{}}, 3)};
  EXPECT_EQ(write_xmc(ds), "1 2 3\n 1:2.5\n");
  EXPECT_EQ(parse_xmc(write_xmc(ds)), ds);
}

TEST(WriteXmc, RoundTripExample) {
  const std::string text = "2 3 2\n0 0:1 2:2\n1 1:0.5\n";
  EXPECT_EQ(write_xmc(parse_xmc(text)), text);
}

TEST(WriteXmc, RandomRoundTripIsFixedPoint) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.uniform_index(8), d = 1 + rng.uniform_index(6), l = 1 + rng.uniform_index(5);
    std::vector<SparseMatrix::Triplet> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d; ++c)
        if (rng.uniform() < 0.4) x.push_back({i, c, rng.normal() * std::pow(10.0, rng.normal() * 3)});
      for (std::size_t k = 0; k < l; ++k)
        if (rng.uniform() < 0.3) y.push_back({i, k, 1.0});
    }
    XmcDataset ds{SparseMatrix::from_triplets(n, d, x), SparseMatrix::from_triplets(n, l, y)};
    const std::string once = write_xmc(ds);
    const auto back = parse_xmc(once);
    EXPECT_EQ(back, ds);
    EXPECT_EQ(write_xmc(back), once);
  }
}

TEST(SparseFile, RoundTripWithMultiplicities) {
  const auto m = SparseMatrix::from_triplets(3, 4, {{0, 1, 1.0}, {0, 3, 2.0}, {2, 0, 1.0}});
  std::stringstream ss;
  write_sparse(ss, m);
  EXPECT_EQ(ss.str(), "3 4\n1:1 3:2\n\n0:1\n");
  EXPECT_EQ(parse_sparse(ss), m);
  std::stringstream bad("1 2\n5:1\n");
  EXPECT_THROW(parse_sparse(bad), ParseError);
}

TEST(AggregatedDataset, DerivedIndexSets) {
  auto ds = AggregatedDataset(sparse_from_rows({{1, 0}, {0, 1}, {1, 1}}, 2), binary_from_lists({{1}, {0}, {1}}, 2),
                              binary_from_lists({{0}, {0, 1}}, 2));
  EXPECT_EQ(std::vector<std::size_t>(ds.members(1).begin(), ds.members(1).end()), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(std::vector<std::size_t>(ds.label_groups(0).begin(), ds.label_groups(0).end()),
            (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(std::vector<std::size_t>(ds.group_labels(1).begin(), ds.group_labels(1).end()),
            (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(ds.group_of(2), 1u);
  EXPECT_DOUBLE_EQ(ds.average_group_size(), 1.5);
}

TEST(AggregatedDataset, SampleInTwoGroupsIsIntegrityError) {
  EXPECT_THROW(AggregatedDataset(sparse_from_rows({{1}, {1}}, 1), binary_from_lists({{0, 1}, {1}}, 2),
                                 binary_from_lists({{0}, {0}}, 1)),
               IntegrityError);
  EXPECT_THROW(AggregatedDataset(sparse_from_rows({{1}, {1}}, 1), binary_from_lists({{0}, {}}, 2),
                                 binary_from_lists({{0}, {0}}, 1)),
               IntegrityError);
}

TEST(AggregatedDataset, ShapeMismatchIsInvalidInput) {
  EXPECT_THROW(AggregatedDataset(sparse_from_rows({{1}}, 1), binary_from_lists({{0}, {0}}, 1),
                                 binary_from_lists({{0}}, 1)),
               InvalidInput);
  EXPECT_THROW(AggregatedDataset(sparse_from_rows({{1}}, 1), binary_from_lists({{0}}, 1),
                                 binary_from_lists({{0}, {0}}, 1)),
               InvalidInput);
}

TEST(TruthCsv, RoundTrip) {
  GroundTruthAssignment t;
  t.add(0, 1, 3);
  t.add(0, 1, 2);
  t.add(2, 0, 5);
  std::stringstream ss;
  write_truth_csv(ss, t);
  EXPECT_EQ(ss.str(), "group,label,sample\n0,1,2\n0,1,3\n2,0,5\n");
  EXPECT_EQ(parse_truth_csv(ss), t);
  std::stringstream bad("group,label,sample\n1,2\n");
  EXPECT_THROW(parse_truth_csv(bad), ParseError);
}

TEST(Diagnostics, OrthogonalPairAndDisjointGroups) {
  LabelEmbeddings truth(2, 2);
  truth.set_row(0, DenseVector{1, 0});
  truth.set_row(1, DenseVector{0, 1});
  auto agg = AggregatedDataset(sparse_from_rows({{1, 0}, {0, 1}}, 2), binary_from_lists({{0}, {1}}, 2),
                               binary_from_lists({{0}, {1}}, 2));
  const std::vector<DenseVector> noise(2, DenseVector{0, 0});
  const auto d = diagnostics(truth, agg, noise);
  EXPECT_DOUBLE_EQ(d.delta, std::sqrt(2.0));
  EXPECT_EQ(d.q, 0.0);
  EXPECT_EQ(d.f1, 0.0);
  EXPECT_TRUE(d.f1_exact);
}

TEST(Diagnostics, CancellingToyOverlapIsOne) {
  const auto toy = testing::cancelling_toy();
  LabelEmbeddings truth(2, 2);
  truth.set_row(0, DenseVector{1, 0});
  truth.set_row(1, DenseVector{-1, 0});
  const std::vector<DenseVector> noise(6, DenseVector{0, 0});
  EXPECT_EQ(diagnostics(truth, toy.data, noise).q, 1.0);
}

TEST(Diagnostics, SubsetEnumerationMatchesHandValues) {
  // Three noise vectors: (3,0), (-3,0), (0,1). By hand:
  //   size 1: max norm 3;  size 2: |(3,1)|/2 = sqrt(10)/2;  size 3: |(0,1)|/3.
  // f(gamma) is the running maximum over sizes <= gamma * 3.
  LabelEmbeddings truth(1, 2);
  truth.set_row(0, DenseVector{1, 0});
  auto agg = AggregatedDataset(sparse_from_rows({{1, 0}, {1, 0}, {1, 0}}, 2), binary_from_lists({{0}, {1}, {2}}, 3),
                               binary_from_lists({{0}, {0}, {0}}, 1));
  const std::vector<DenseVector> noise{{3, 0}, {-3, 0}, {0, 1}};
  const auto d = diagnostics(truth, agg, noise);
  ASSERT_TRUE(d.f_gamma_oracle.has_value());
  const auto& f = *d.f_gamma_oracle;
  ASSERT_EQ(f.size(), 3u);
  EXPECT_DOUBLE_EQ(f.at(1.0 / 3.0), 3.0);
  EXPECT_DOUBLE_EQ(f.at(2.0 / 3.0), 3.0);
  EXPECT_DOUBLE_EQ(f.at(1.0), 3.0);
  EXPECT_DOUBLE_EQ(d.f1, 3.0);
  EXPECT_DOUBLE_EQ(d.delta, INFINITY);
}

TEST(Diagnostics, LargeSetsAreApproximate) {
  LabelEmbeddings truth(1, 1);
  truth.set_row(0, DenseVector{1});
  std::vector<std::vector<double>> x(20, std::vector<double>{1});
  std::vector<std::vector<std::size_t>> y1(20, std::vector<std::size_t>{0});
  auto agg = AggregatedDataset(sparse_from_rows(x, 1), binary_from_lists(y1, 1), binary_from_lists({{0}}, 1));
  std::vector<DenseVector> noise(20, DenseVector{0.5});
  const auto d = diagnostics(truth, agg, noise);
  EXPECT_FALSE(d.f1_exact);
  EXPECT_FALSE(d.f_gamma_oracle.has_value());
  EXPECT_DOUBLE_EQ(d.f1, 0.5);
}

TEST(Diagnostics, RejectsNonUnitEmbeddings) {
  LabelEmbeddings truth(1, 2);
  truth.set_row(0, DenseVector{2, 0});
  auto agg = AggregatedDataset(sparse_from_rows({{1, 0}}, 2), binary_from_lists({{0}}, 1), binary_from_lists({{0}}, 1));
  const std::vector<DenseVector> noise(1, DenseVector{0, 0});
  EXPECT_THROW(diagnostics(truth, agg, noise), InvalidInput);
}

}  // namespace
}  // namespace eagle
