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

#ifndef EAGLE_EMBEDDINGS_HPP_
#define EAGLE_EMBEDDINGS_HPP_

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "eagle/core.hpp"

namespace eagle {

/// One embedding row per label. A row is either unit-norm or flagged empty
/// (the label had no positive group), in which case it is all zeros.
class LabelEmbeddings {
 public:
  LabelEmbeddings() = default;
  LabelEmbeddings(std::size_t num_labels, std::size_t dim) : rows_(num_labels, dim), empty_(num_labels, 0) {}

  std::size_t num_labels() const noexcept { return rows_.rows(); }
  std::size_t dim() const noexcept { return rows_.cols(); }

  std::span<const double> row(std::size_t k) const { return rows_.row(k); }
  std::span<double> row(std::size_t k) { return rows_.row(k); }

  bool is_empty(std::size_t k) const { return empty_.at(k) != 0; }

  void set_row(std::size_t k, std::span<const double> v) {
    if (v.size() != dim()) throw InvalidInput("LabelEmbeddings::set_row: dimension mismatch");
    std::copy(v.begin(), v.end(), rows_.row(k).begin());
    empty_.at(k) = 0;
  }

  void mark_empty(std::size_t k) {
    auto r = rows_.row(k);
    std::fill(r.begin(), r.end(), 0.0);
    empty_.at(k) = 1;
  }

  const DenseMatrix& matrix() const noexcept { return rows_; }

  /// True when every non-empty row has unit norm within `tol`.
  bool rows_unit_norm(double tol = kUnitTolerance) const {
    for (std::size_t k = 0; k < num_labels(); ++k)
      if (!is_empty(k) && std::abs(norm(row(k)) - 1.0) > tol) return false;
    return true;
  }

  bool operator==(const LabelEmbeddings&) const = default;

 private:
  DenseMatrix rows_;
  std::vector<std::uint8_t> empty_;
};

// ---------------------------------------------------------------------------
// LEMB binary container, little-endian:
//   "LEMB" | u32 version | u64 l | u64 d | l*d f64 row-major | l u8 empty flags

inline constexpr std::uint32_t kLembVersion = 1;

namespace detail {

template <class U>
void put_le(std::ostream& os, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  os.write(bytes.data(), bytes.size());
}

template <class U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw InvalidInput("LEMB: truncated input");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace detail

inline void write_lemb(std::ostream& os, const LabelEmbeddings& emb) {
  os.write("LEMB", 4);
  detail::put_le<std::uint32_t>(os, kLembVersion);
  detail::put_le<std::uint64_t>(os, emb.num_labels());
  detail::put_le<std::uint64_t>(os, emb.dim());
  for (double v : emb.matrix().data()) detail::put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
  for (std::size_t k = 0; k < emb.num_labels(); ++k) os.put(emb.is_empty(k) ? 1 : 0);
}

inline LabelEmbeddings read_lemb(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "LEMB") throw InvalidInput("LEMB: bad magic");
  const auto version = detail::get_le<std::uint32_t>(is);
  if (version != kLembVersion) throw InvalidInput("LEMB: unsupported version " + std::to_string(version));
  const auto l = detail::get_le<std::uint64_t>(is);
  const auto d = detail::get_le<std::uint64_t>(is);
  LabelEmbeddings emb(l, d);
  DenseMatrix rows(l, d);
  for (double& v : rows.data()) v = std::bit_cast<double>(detail::get_le<std::uint64_t>(is));
  for (std::size_t k = 0; k < l; ++k) {
    const auto flag = detail::get_le<std::uint8_t>(is);
    if (flag > 1) throw InvalidInput("LEMB: bad empty-label flag");
    if (flag)
      emb.mark_empty(k);
    else
      emb.set_row(k, rows.row(k));
  }
  return emb;
}

}  // namespace eagle

#endif  // EAGLE_EMBEDDINGS_HPP_
