// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "bgan/core/ops.hpp"
#include "bgan/core/rng.hpp"

namespace bgan::nmt {

using ad::Index;
using ad::Mat;
using ad::Tensor;

/// L×d code with a validity mask. Masked rows are zero.
template <typename S>
struct LatentCode {
  Mat<S> rows;
  std::vector<bool> mask;

  Index length() const { return rows.rows(); }
  Index width() const { return rows.cols(); }
  Index valid() const {
    Index n = 0;
    for (bool m : mask) n += m ? 1 : 0;
    return n;
  }
};

/// Scales each unmasked row to unit L2 norm; rows with norm below `eps`
/// stay zero.
template <typename S>
LatentCode<S> spherical_normalize(LatentCode<S> c, S eps = S(1e-8)) {
  for (Index r = 0; r < c.length(); ++r) {
    if (!c.mask[static_cast<std::size_t>(r)]) continue;
    const S n = c.rows.row(r).norm();
    if (n < eps) {
      c.rows.row(r).setZero();
    } else {
      c.rows.row(r) /= n;
    }
  }
  return c;
}

/// Adds i.i.d. N(0, sigma²) to the unmasked rows.
template <typename S>
LatentCode<S> add_code_noise(LatentCode<S> c, double sigma, Rng& rng) {
  if (sigma < 0) throw std::invalid_argument("code noise sigma must be nonnegative");
  if (sigma == 0) return c;
  for (Index r = 0; r < c.length(); ++r) {
    if (!c.mask[static_cast<std::size_t>(r)]) continue;
    for (Index k = 0; k < c.width(); ++k) c.rows(r, k) += static_cast<S>(sigma * rng.normal());
  }
  return c;
}

/// A batch of codes as packed valid rows (one block per item), the form the
/// attention layers consume. `width` is the padded length the items expose
/// as LatentCode.
template <typename S>
struct CodeBatch {
  Tensor<S> rows;
  std::vector<int> lengths;
  int width = 0;

  std::size_t size() const { return lengths.size(); }

  Index offset(std::size_t item) const {
    Index at = 0;
    for (std::size_t i = 0; i < item; ++i) at += lengths[i];
    return at;
  }

  LatentCode<S> item(std::size_t i) const {
    LatentCode<S> c;
    c.rows = Mat<S>::Zero(width, rows.cols());
    c.rows.topRows(lengths[i]) = rows.value().middleRows(offset(i), lengths[i]);
    c.mask.assign(static_cast<std::size_t>(width), false);
    for (int r = 0; r < lengths[i]; ++r) c.mask[static_cast<std::size_t>(r)] = true;
    return c;
  }

  /// Value copy of a subset of items (no gradient path).
  CodeBatch select(std::span<const std::size_t> items) const {
    CodeBatch out;
    Index total = 0;
    for (auto i : items) total += lengths[i];
    Mat<S> packed(total, rows.cols());
    Index at = 0;
    for (auto i : items) {
      packed.middleRows(at, lengths[i]) = rows.value().middleRows(offset(i), lengths[i]);
      at += lengths[i];
      out.lengths.push_back(lengths[i]);
    }
    out.rows = ad::constant<S>(std::move(packed));
    out.width = width;
    return out;
  }
};

/// Packs the unmasked rows of each code (in order) into a constant batch.
template <typename S>
CodeBatch<S> pack_codes(std::span<const LatentCode<S>> codes) {
  CodeBatch<S> out;
  Index total = 0;
  for (const auto& c : codes) {
    total += c.valid();
    out.width = std::max(out.width, static_cast<int>(c.length()));
  }
  const Index d = codes.empty() ? 0 : codes.front().width();
  Mat<S> packed(total, d);
  Index at = 0;
  for (const auto& c : codes) {
    int n = 0;
    for (Index r = 0; r < c.length(); ++r) {
      if (c.mask[static_cast<std::size_t>(r)]) {
        packed.row(at++) = c.rows.row(r);
        ++n;
      }
    }
    out.lengths.push_back(n);
  }
  out.rows = ad::constant<S>(std::move(packed));
  return out;
}

/// Noise on every packed row, added as a constant (the gradient path to the
/// clean code is kept).
template <typename S>
CodeBatch<S> add_code_noise(const CodeBatch<S>& c, double sigma, Rng& rng) {
  if (sigma < 0) throw std::invalid_argument("code noise sigma must be nonnegative");
  if (sigma == 0) return c;
  Mat<S> noise(c.rows.rows(), c.rows.cols());
  for (Index i = 0; i < noise.size(); ++i) noise.data()[i] = static_cast<S>(sigma * rng.normal());
  CodeBatch<S> out = c;
  out.rows = ad::add(c.rows, ad::constant<S>(std::move(noise)));
  return out;
}

}  // namespace bgan::nmt
