/*
 * Copyright 2026 The kgar Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Dense and sparse kernels shared by the autodiff tape and the model code.
// Everything here is a plain function of its inputs; gradients live in
// autodiff.hpp.

#pragma once

#include <algorithm>
#include <concepts>
#include <cmath>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include "kgar/types.hpp"

namespace kgar {

// ================================================================
// elementwise activations
// ================================================================

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

template <typename Derived>
auto leaky_relu(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar slope) {
  using T = typename Derived::Scalar;
  return x.unaryExpr([slope](T v) { return v >= T(0) ? v : slope * v; });
}

template <std::floating_point T>
T sigmoid(T v) {
  // Split by sign so exp never overflows.
  if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
  const T e = std::exp(v);
  return e / (T(1) + e);
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using T = typename Derived::Scalar;
  return x.unaryExpr([](T v) { return sigmoid(v); });
}

/// log(sigmoid(v)) without cancellation.
template <std::floating_point T>
T log_sigmoid(T v) {
  return v >= T(0) ? -std::log1p(std::exp(-v)) : v - std::log1p(std::exp(v));
}

// ================================================================
// softmax
// ================================================================

/// Max-subtracted softmax over a contiguous range, in place.
template <typename T>
void softmax_inplace(std::span<T> values) {
  if (values.empty()) return;
  const T mx = *std::max_element(values.begin(), values.end());
  T sum = 0;
  for (auto& v : values) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : values) v /= sum;
}

/// Row-wise softmax.
template <typename Derived>
RowMatrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& x) {
  using T = typename Derived::Scalar;
  RowMatrix<T> out = x;
  for (Index r = 0; r < out.rows(); ++r)
    softmax_inplace(std::span<T>(out.row(r).data(), static_cast<std::size_t>(out.cols())));
  return out;
}

/// Row-wise softmax restricted to `mask` (nonzero = active). Inactive entries
/// are exactly 0. Throws if a row has no active entry.
template <typename Derived, typename MaskDerived>
RowMatrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& x,
                                                 const Eigen::MatrixBase<MaskDerived>& mask) {
  using T = typename Derived::Scalar;
  if (x.rows() != mask.rows() || x.cols() != mask.cols())
    throw DimensionError("softmax_rows: mask shape " + shape_str(mask) + " vs input " + shape_str(x));
  RowMatrix<T> out = RowMatrix<T>::Zero(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    T mx = -std::numeric_limits<T>::infinity();
    bool any = false;
    for (Index c = 0; c < x.cols(); ++c)
      if (mask(r, c)) {
        mx = std::max(mx, x(r, c));
        any = true;
      }
    if (!any) throw DimensionError("softmax_rows: row " + std::to_string(r) + " has no active entries");
    T sum = 0;
    for (Index c = 0; c < x.cols(); ++c)
      if (mask(r, c)) sum += out(r, c) = std::exp(x(r, c) - mx);
    for (Index c = 0; c < x.cols(); ++c) out(r, c) /= sum;
  }
  return out;
}

// ================================================================
// dropout
// ================================================================

/// Inverted-dropout keep mask: each entry is 0 with probability `rate`,
/// otherwise 1/(1-rate).
template <typename T, typename Rng>
RowMatrix<T> dropout_mask(Index rows, Index cols, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must be in [0,1)");
  RowMatrix<T> mask(rows, cols);
  const T keep = T(1) / T(1 - rate);
  // Compare raw 64-bit draws against rate·2^64; drop when below.
  static_assert(Rng::min() == 0 && Rng::max() == ~std::uint64_t{0}, "dropout_mask needs a full 64-bit engine");
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(rate, 64));
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng() < threshold ? T(0) : keep;
  return mask;
}

// ================================================================
// coordinate-format sparse matrix
// ================================================================

template <typename T>
class CooMatrix {
 public:
  struct Entry {
    Index row;
    Index col;
    T value;
  };

  CooMatrix() = default;
  CooMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  /// Sorts by (row, col); rejects duplicates and out-of-range coordinates.
  CooMatrix(Index rows, Index cols, std::vector<Entry> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      const auto& e = entries_[k];
      if (e.row < 0 || e.row >= rows_ || e.col < 0 || e.col >= cols_)
        throw DimensionError("sparse entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                             ") outside " + shape_str(rows_, cols_));
      if (k > 0 && entries_[k - 1].row == e.row && entries_[k - 1].col == e.col)
        throw DimensionError("duplicate sparse coordinate (" + std::to_string(e.row) + "," +
                             std::to_string(e.col) + ")");
    }
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t nonzeros() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  RowMatrix<T> densify() const {
    RowMatrix<T> d = RowMatrix<T>::Zero(rows_, cols_);
    for (const auto& e : entries_) d(e.row, e.col) = e.value;
    return d;
  }

  static CooMatrix identity(Index n) {
    std::vector<Entry> e;
    for (Index i = 0; i < n; ++i) e.push_back({i, i, T(1)});
    return CooMatrix(n, n, std::move(e));
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Entry> entries_;
};

using SparseMatrix = CooMatrix<Scalar>;

/// S·D, or Sᵀ·D when `transpose` is set. S is never densified.
template <typename T, typename Derived>
RowMatrix<T> sparse_dense_matmul(const CooMatrix<T>& s, const Eigen::MatrixBase<Derived>& d,
                                 bool transpose = false) {
  const Index inner = transpose ? s.rows() : s.cols();
  const Index outer = transpose ? s.cols() : s.rows();
  if (inner != d.rows())
    throw DimensionError("sparse_dense_matmul: sparse " + shape_str(s.rows(), s.cols()) +
                         (transpose ? "^T" : "") + " vs dense " + shape_str(d));
  RowMatrix<T> out = RowMatrix<T>::Zero(outer, d.cols());
  for (const auto& e : s.entries()) {
    if (transpose)
      out.row(e.col) += e.value * d.row(e.row);
    else
      out.row(e.row) += e.value * d.row(e.col);
  }
  return out;
}

// ================================================================
// block-diagonal weights
// ================================================================

/// Dense diag(Q_1, ..., Q_B).
template <typename T>
RowMatrix<T> assemble_block_diagonal(std::span<const RowMatrix<T>> blocks) {
  if (blocks.empty()) throw DimensionError("assemble_block_diagonal: no blocks");
  const Index br = blocks[0].rows(), bc = blocks[0].cols();
  for (const auto& q : blocks)
    if (q.rows() != br || q.cols() != bc)
      throw DimensionError("assemble_block_diagonal: block " + shape_str(q) + " vs " + shape_str(br, bc));
  const auto nb = static_cast<Index>(blocks.size());
  RowMatrix<T> w = RowMatrix<T>::Zero(br * nb, bc * nb);
  for (Index b = 0; b < nb; ++b) w.block(b * br, b * bc, br, bc) = blocks[static_cast<std::size_t>(b)];
  return w;
}

/// X · diag(Q_1..Q_B), where the blocks are stacked vertically in `stacked`
/// (B·(Din/B) rows, Dout/B cols) starting at row `offset`. Computed blockwise;
/// the zero blocks are never touched.
template <typename XDerived, typename QDerived>
RowMatrix<typename XDerived::Scalar> block_diagonal_product(const Eigen::MatrixBase<XDerived>& x,
                                                            const Eigen::MatrixBase<QDerived>& stacked,
                                                            Index num_blocks, Index offset = 0) {
  using T = typename XDerived::Scalar;
  const Index bin = x.cols() / num_blocks;
  const Index bout = stacked.cols();
  if (bin * num_blocks != x.cols() || offset + bin * num_blocks > stacked.rows())
    throw DimensionError("block_diagonal_product: input " + shape_str(x) + " vs stacked blocks " +
                         shape_str(stacked) + " with B=" + std::to_string(num_blocks));
  RowMatrix<T> out(x.rows(), bout * num_blocks);
  for (Index b = 0; b < num_blocks; ++b)
    out.middleCols(b * bout, bout).noalias() =
        x.middleCols(b * bin, bin) * stacked.middleRows(offset + b * bin, bin);
  return out;
}

}  // namespace kgar
