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

#ifndef EAGLE_DATAIO_HPP_
#define EAGLE_DATAIO_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eagle/core.hpp"
#include "eagle/embeddings.hpp"

namespace eagle {

/// Clean XMC data: features X (n x d) and binary labels Y (n x l).
struct XmcDataset {
  SparseMatrix features;
  SparseMatrix labels;

  std::size_t num_samples() const noexcept { return features.rows(); }

  void validate() const {
    if (features.rows() != labels.rows()) throw InvalidInput("XmcDataset: features/labels row mismatch");
    for (double v : labels.values())
      if (v != 1.0) throw InvalidInput("XmcDataset: label matrix must be binary");
  }

  bool operator==(const XmcDataset&) const = default;
};

/// {X, Y1, Y2}: samples grouped into intermediate nodes, labels observed per
/// group. Index sets are materialized once at construction:
///   members(j)      = N_j, samples in group j (ascending)
///   label_groups(k) = M_k, groups carrying label k (ascending)
///   group_labels(j) = L_j, labels of group j (ascending)
class AggregatedDataset {
 public:
  AggregatedDataset() = default;

  /// `multiplicity`, when given, holds list-merge counts with the same
  /// pattern as `group_to_label`. Each sample must belong to exactly one group.
  AggregatedDataset(SparseMatrix features, SparseMatrix sample_to_group, SparseMatrix group_to_label,
                    std::optional<SparseMatrix> multiplicity = std::nullopt)
      : features_(std::move(features)),
        y1_(std::move(sample_to_group)),
        y2_(std::move(group_to_label)),
        multiplicity_(std::move(multiplicity)) {
    if (y1_.rows() != features_.rows())
      throw InvalidInput("AggregatedDataset: Y1 has " + std::to_string(y1_.rows()) + " rows but X has " +
                         std::to_string(features_.rows()));
    if (y2_.rows() != y1_.cols())
      throw InvalidInput("AggregatedDataset: Y2 has " + std::to_string(y2_.rows()) + " rows but Y1 has " +
                         std::to_string(y1_.cols()) + " groups");
    for (double v : y1_.values())
      if (v != 1.0) throw InvalidInput("AggregatedDataset: Y1 must be binary");
    for (double v : y2_.values())
      if (v != 1.0) throw InvalidInput("AggregatedDataset: Y2 must be binary");
    group_of_.resize(y1_.rows());
    for (std::size_t i = 0; i < y1_.rows(); ++i) {
      const auto r = y1_.row(i);
      if (r.size() != 1)
        throw IntegrityError("AggregatedDataset: sample " + std::to_string(i) + " belongs to " +
                             std::to_string(r.size()) + " groups (expected exactly one)");
      group_of_[i] = r.indices[0];
    }
    if (multiplicity_) {
      const auto& mu = *multiplicity_;
      if (mu.rows() != y2_.rows() || mu.cols() != y2_.cols() || mu.row_offsets() != y2_.row_offsets() ||
          mu.col_indices() != y2_.col_indices())
        throw InvalidInput("AggregatedDataset: multiplicity pattern differs from Y2");
      for (double v : mu.values())
        if (!(v >= 1.0) || v != std::floor(v)) throw InvalidInput("AggregatedDataset: multiplicity must be a positive integer");
    }
    members_ = y1_.transpose();
    label_groups_ = y2_.transpose();
  }

  const SparseMatrix& features() const noexcept { return features_; }
  const SparseMatrix& sample_to_group() const noexcept { return y1_; }
  const SparseMatrix& group_to_label() const noexcept { return y2_; }
  const std::optional<SparseMatrix>& multiplicity() const noexcept { return multiplicity_; }

  std::size_t num_samples() const noexcept { return features_.rows(); }
  std::size_t dim() const noexcept { return features_.cols(); }
  std::size_t num_groups() const noexcept { return y1_.cols(); }
  std::size_t num_labels() const noexcept { return y2_.cols(); }

  std::span<const std::size_t> members(std::size_t j) const { return members_.row(j).indices; }
  std::span<const std::size_t> label_groups(std::size_t k) const { return label_groups_.row(k).indices; }
  std::span<const std::size_t> group_labels(std::size_t j) const { return y2_.row(j).indices; }
  std::size_t group_of(std::size_t i) const { return group_of_.at(i); }

  /// g-bar = nnz(Y1) / m.
  double average_group_size() const {
    return num_groups() == 0 ? 0.0 : static_cast<double>(y1_.nnz()) / static_cast<double>(num_groups());
  }

  /// Same grouping and labels over a different feature matrix with the same rows.
  AggregatedDataset with_features(SparseMatrix features) const {
    return AggregatedDataset(std::move(features), y1_, y2_, multiplicity_);
  }

 private:
  SparseMatrix features_;
  SparseMatrix y1_;
  SparseMatrix y2_;
  std::optional<SparseMatrix> multiplicity_;
  SparseMatrix members_;
  SparseMatrix label_groups_;
  std::vector<std::size_t> group_of_;
};

/// For each positive (group, label) pair, the member samples that truly carry
/// the label. The synthetic groupers record every carrier; assignment is
/// counted correct if it lands on any of them.
class GroundTruthAssignment {
 public:
  void add(std::size_t group, std::size_t label, std::size_t sample) {
    auto& c = carriers_[{group, label}];
    auto it = std::lower_bound(c.begin(), c.end(), sample);
    if (it == c.end() || *it != sample) c.insert(it, sample);
  }

  /// Carriers of (group, label), or nullptr when the pair is not covered.
  const std::vector<std::size_t>* carriers(std::size_t group, std::size_t label) const {
    auto it = carriers_.find({group, label});
    return it == carriers_.end() ? nullptr : &it->second;
  }

  bool carries(std::size_t group, std::size_t label, std::size_t sample) const {
    const auto* c = carriers(group, label);
    return c && std::binary_search(c->begin(), c->end(), sample);
  }

  std::size_t num_pairs() const noexcept { return carriers_.size(); }

  const std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>>& pairs() const noexcept {
    return carriers_;
  }

  bool operator==(const GroundTruthAssignment&) const = default;

 private:
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> carriers_;
};

// ---------------------------------------------------------------------------
// Text formats.

namespace detail {

inline std::size_t parse_count(std::string_view tok, std::size_t line, const char* what) {
  std::size_t v = 0;
  const auto* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, v);
  if (tok.empty() || ec != std::errc() || p != end)
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(tok) + "'");
  return v;
}

inline double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, v);
  if (tok.empty() || ec != std::errc() || p != end || !std::isfinite(v))
    throw ParseError(line, "invalid value '" + std::string(tok) + "'");
  return v;
}

inline std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

/// "c:v" tokens of one row into triplets; indices must be < cols.
inline void parse_pairs(std::span<const std::string_view> toks, std::size_t row, std::size_t cols, std::size_t line,
                        std::vector<SparseMatrix::Triplet>& out) {
  for (auto tok : toks) {
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) throw ParseError(line, "expected index:value, got '" + std::string(tok) + "'");
    const std::size_t c = parse_count(tok.substr(0, colon), line, "index");
    if (c >= cols)
      throw ParseError(line, "index " + std::to_string(c) + " out of declared bound " + std::to_string(cols));
    out.push_back({row, c, parse_real(tok.substr(colon + 1), line)});
  }
}

inline void write_pairs(std::ostream& os, const SparseMatrix::RowView& r, bool leading_space) {
  for (std::size_t p = 0; p < r.size(); ++p) {
    if (p > 0 || leading_space) os << ' ';
    os << r.indices[p] << ':' << format_real(r.values[p]);
  }
}

inline std::vector<std::size_t> parse_header(std::istream& in, std::size_t expected) {
  std::string line;
  if (!read_line(in, line)) throw ParseError(1, "missing header");
  const auto toks = split_spaces(line);
  if (toks.size() != expected)
    throw ParseError(1, "header must hold " + std::to_string(expected) + " counts, got '" + line + "'");
  std::vector<std::size_t> out;
  for (auto t : toks) out.push_back(parse_count(t, 1, "header count"));
  return out;
}

inline void check_no_extra_rows(std::istream& in, std::size_t line_no) {
  std::string line;
  while (read_line(in, line)) {
    ++line_no;
    if (!split_spaces(line).empty()) throw ParseError(line_no, "more rows than declared in header");
  }
}

}  // namespace detail

/// Reads "n d l" then n lines of "k1,k2,... f1:v1 f2:v2 ...". Labels are
/// sorted and deduplicated; duplicate features are summed.
inline XmcDataset parse_xmc(std::istream& in) {
  const auto hdr = detail::parse_header(in, 3);
  const std::size_t n = hdr[0], d = hdr[1], l = hdr[2];
  std::vector<SparseMatrix::Triplet> feats, labels;
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t line_no = i + 2;
    if (!detail::read_line(in, line))
      throw ParseError(line_no, "expected " + std::to_string(n) + " rows, found " + std::to_string(i));
    std::string_view sv(line);
    std::string_view label_part;
    if (!sv.empty() && sv.front() != ' ') {
      const auto sp = sv.find(' ');
      const auto head = sv.substr(0, sp);
      if (std::find(head.begin(), head.end(), ':') == head.end()) {
        label_part = head;
        sv = sp == std::string_view::npos ? std::string_view() : sv.substr(sp);
      }
    }
    std::vector<std::size_t> ks;
    std::size_t b = 0;
    while (b < label_part.size()) {
      const auto c = label_part.find(',', b);
      const auto tok = label_part.substr(b, c == std::string_view::npos ? std::string_view::npos : c - b);
      const std::size_t k = detail::parse_count(tok, line_no, "label");
      if (k >= l)
        throw ParseError(line_no, "label " + std::to_string(k) + " out of declared bound " + std::to_string(l));
      ks.push_back(k);
      if (c == std::string_view::npos) break;
      b = c + 1;
      if (b == label_part.size()) throw ParseError(line_no, "trailing comma in label list");
    }
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (auto k : ks) labels.push_back({i, k, 1.0});
    const auto toks = detail::split_spaces(sv);
    detail::parse_pairs(toks, i, d, line_no, feats);
  }
  detail::check_no_extra_rows(in, n + 1);
  return {SparseMatrix::from_triplets(n, d, std::move(feats)), SparseMatrix::from_triplets(n, l, std::move(labels))};
}

inline XmcDataset parse_xmc(const std::string& text) {
  std::istringstream in(text);
  return parse_xmc(in);
}

inline void write_xmc(std::ostream& os, const XmcDataset& ds) {
  ds.validate();
  os << ds.features.rows() << ' ' << ds.features.cols() << ' ' << ds.labels.cols() << '\n';
  for (std::size_t i = 0; i < ds.features.rows(); ++i) {
    const auto lab = ds.labels.row(i);
    for (std::size_t p = 0; p < lab.size(); ++p) {
      if (p) os << ',';
      os << lab.indices[p];
    }
    detail::write_pairs(os, ds.features.row(i), true);
    os << '\n';
  }
}

inline std::string write_xmc(const XmcDataset& ds) {
  std::ostringstream os;
  write_xmc(os, ds);
  return os.str();
}

/// Generic sparse file: "rows cols" then one line of "c:v ..." per row.
/// Used on disk for Y1 and Y2 (Y2 values carry list-merge multiplicities).
inline SparseMatrix parse_sparse(std::istream& in) {
  const auto hdr = detail::parse_header(in, 2);
  const std::size_t rows = hdr[0], cols = hdr[1];
  std::vector<SparseMatrix::Triplet> t;
  std::string line;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!detail::read_line(in, line))
      throw ParseError(i + 2, "expected " + std::to_string(rows) + " rows, found " + std::to_string(i));
    const auto toks = detail::split_spaces(line);
    detail::parse_pairs(toks, i, cols, i + 2, t);
  }
  detail::check_no_extra_rows(in, rows + 1);
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

inline void write_sparse(std::ostream& os, const SparseMatrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    detail::write_pairs(os, m.row(i), false);
    os << '\n';
  }
}

/// Splits a count matrix into its binary pattern and, if any count exceeds
/// one, the multiplicity matrix.
inline std::pair<SparseMatrix, std::optional<SparseMatrix>> split_multiplicity(const SparseMatrix& counts) {
  std::vector<double> ones(counts.nnz(), 1.0);
  SparseMatrix binary =
      SparseMatrix::from_csr(counts.rows(), counts.cols(), counts.row_offsets(), counts.col_indices(), ones);
  const bool repeated = std::any_of(counts.values().begin(), counts.values().end(), [](double v) { return v != 1.0; });
  if (!repeated) return {std::move(binary), std::nullopt};
  return {std::move(binary), counts};
}

/// Y2 as written to disk: multiplicities when present, else the binary matrix.
inline const SparseMatrix& group_label_counts(const AggregatedDataset& ds) {
  return ds.multiplicity() ? *ds.multiplicity() : ds.group_to_label();
}

inline void write_truth_csv(std::ostream& os, const GroundTruthAssignment& truth) {
  os << "group,label,sample\n";
  for (const auto& [key, samples] : truth.pairs())
    for (auto i : samples) os << key.first << ',' << key.second << ',' << i << '\n';
}

inline GroundTruthAssignment parse_truth_csv(std::istream& in) {
  std::string line;
  if (!detail::read_line(in, line) || line != "group,label,sample")
    throw ParseError(1, "expected header 'group,label,sample'");
  GroundTruthAssignment truth;
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string_view sv(line);
    const auto c1 = sv.find(','), c2 = sv.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos) throw ParseError(line_no, "expected 3 fields");
    truth.add(detail::parse_count(sv.substr(0, c1), line_no, "group"),
              detail::parse_count(sv.substr(c1 + 1, c2 - c1 - 1), line_no, "label"),
              detail::parse_count(sv.substr(c2 + 1), line_no, "sample"));
  }
  return truth;
}

// ---------------------------------------------------------------------------
// Data diagnostics against known ground truth.

/// Largest index set for which the subset-maximum noise influence is
/// computed exactly (2^15 subsets).
inline constexpr std::size_t kMaxEnumeratedNoise = 15;

struct DatasetDiagnostics {
  /// Minimum pairwise distance between non-empty ground-truth embeddings (+inf with < 2 labels).
  double delta = std::numeric_limits<double>::infinity();
  /// Maximum |M_k1 & M_k2| / min(|M_k1|, |M_k2|) over label pairs with nonempty M.
  double q = 0.0;
  /// Maximum subset-averaged noise norm over all subsets.
  double f1 = 0.0;
  /// False when f1 is only the full-set lower bound (too many noise vectors to enumerate).
  bool f1_exact = true;
  /// gamma = s/|M| -> max over subsets of size <= s; only populated when exact.
  std::optional<std::map<double, double>> f_gamma_oracle;
};

/// `noise` holds one noise vector per sample, in sample order.
inline DatasetDiagnostics diagnostics(const LabelEmbeddings& truth, const AggregatedDataset& agg,
                                      std::span<const DenseVector> noise) {
  if (!truth.rows_unit_norm()) throw InvalidInput("diagnostics: ground-truth embeddings must be unit-norm");
  if (truth.num_labels() != agg.num_labels()) throw InvalidInput("diagnostics: label count mismatch");
  if (noise.size() != agg.num_samples()) throw InvalidInput("diagnostics: one noise vector per sample required");
  DatasetDiagnostics out;

  const std::size_t l = truth.num_labels();
  for (std::size_t a = 0; a < l; ++a) {
    if (truth.is_empty(a)) continue;
    for (std::size_t b = a + 1; b < l; ++b)
      if (!truth.is_empty(b)) out.delta = std::min(out.delta, distance(truth.row(a), truth.row(b)));
  }

  // Pairwise group overlaps via per-group label co-occurrence.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> overlap;
  for (std::size_t j = 0; j < agg.num_groups(); ++j) {
    const auto ls = agg.group_labels(j);
    for (std::size_t x = 0; x < ls.size(); ++x)
      for (std::size_t y = x + 1; y < ls.size(); ++y) ++overlap[{ls[x], ls[y]}];
  }
  for (const auto& [key, count] : overlap) {
    const auto ma = agg.label_groups(key.first).size(), mb = agg.label_groups(key.second).size();
    out.q = std::max(out.q, static_cast<double>(count) / static_cast<double>(std::min(ma, mb)));
  }

  const std::size_t m = noise.size();
  const std::size_t dim = m ? noise[0].size() : 0;
  for (const auto& e : noise)
    if (e.size() != dim) throw InvalidInput("diagnostics: noise vectors differ in dimension");
  if (m == 0) return out;
  if (m <= kMaxEnumeratedNoise) {
    std::vector<double> best(m + 1, 0.0);
    DenseVector sum(dim);
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
      std::fill(sum.begin(), sum.end(), 0.0);
      std::size_t size = 0;
      for (std::size_t i = 0; i < m; ++i)
        if (mask & (1u << i)) {
          ++size;
          for (std::size_t c = 0; c < dim; ++c) sum[c] += noise[i][c];
        }
      best[size] = std::max(best[size], norm(sum) / static_cast<double>(size));
    }
    std::map<double, double> f;
    double running = 0.0;
    for (std::size_t s = 1; s <= m; ++s) {
      running = std::max(running, best[s]);
      f[static_cast<double>(s) / static_cast<double>(m)] = running;
    }
    out.f1 = running;
    out.f_gamma_oracle = std::move(f);
  } else {
    DenseVector sum(dim, 0.0);
    for (const auto& e : noise)
      for (std::size_t c = 0; c < dim; ++c) sum[c] += e[c];
    out.f1 = norm(sum) / static_cast<double>(m);
    out.f1_exact = false;
  }
  return out;
}

}  // namespace eagle

#endif  // EAGLE_DATAIO_HPP_
