// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>

#include "bgan/core/autograd.hpp"
#include "bgan/core/rng.hpp"

namespace bgan::gan {

using ad::Index;
using ad::Mat;
using ad::RowVec;
using ad::Tensor;

inline constexpr double kSpectralEps = 1e-12;

/// Left/right power-iteration vectors for an m×n weight (u has m entries,
/// v has n), stored as 1×m and 1×n rows.
template <typename S>
struct SpectralState {
  RowVec<S> u;
  RowVec<S> v;

  static SpectralState random(Index rows, Index cols, Rng& rng) {
    SpectralState st;
    st.u.resize(rows);
    st.v.resize(cols);
    for (Index i = 0; i < rows; ++i) st.u(i) = static_cast<S>(rng.normal());
    for (Index i = 0; i < cols; ++i) st.v(i) = static_cast<S>(rng.normal());
    st.u /= std::max<S>(st.u.norm(), S(kSpectralEps));
    st.v /= std::max<S>(st.v.norm(), S(kSpectralEps));
    return st;
  }
};

namespace detail {

// A vector whose norm collapses keeps its previous direction, so a zero
// weight does not poison the state for later steps.
template <typename S, typename Expr>
void assign_unit(RowVec<S>& target, const Expr& candidate) {
  const S n = candidate.norm();
  if (n > S(kSpectralEps)) target = candidate / n;
}

}  // namespace detail

/// σ̂ = uᵀ·W·v for the current state.
template <typename S>
S spectral_sigma(const Mat<S>& w, const SpectralState<S>& st) {
  return (st.u * w * st.v.transpose())(0, 0);
}

/// Runs `iters` power-iteration updates on `st` and returns σ̂.
template <typename S>
S power_iterate(const Mat<S>& w, SpectralState<S>& st, int iters) {
  if (iters < 1) throw std::invalid_argument("power iteration count must be at least 1");
  if (st.u.size() != w.rows() || st.v.size() != w.cols()) {
    throw ad::DimensionError("spectral state " + ad::shape_str(st.u.size(), st.v.size()) + " for weight " +
                             ad::shape_str(w.rows(), w.cols()));
  }
  for (int i = 0; i < iters; ++i) {
    detail::assign_unit<S>(st.v, st.u * w);
    detail::assign_unit<S>(st.u, st.v * w.transpose());
  }
  return spectral_sigma(w, st);
}

/// W / σ̂ after `iters` updates of the persistent state. A zero matrix
/// comes back as zero.
template <typename S>
Mat<S> spectral_normalize(const Mat<S>& w, SpectralState<S>& st, int iters) {
  const S sigma = power_iterate(w, st, iters);
  return w / std::max<S>(sigma, S(kSpectralEps));
}

/// Differentiable W / (uᵀWv) with u and v held constant.
template <typename S>
Tensor<S> spectral_weight(const Tensor<S>& w, const SpectralState<S>& st) {
  if (st.u.size() != w.rows() || st.v.size() != w.cols()) {
    throw ad::DimensionError("spectral state " + ad::shape_str(st.u.size(), st.v.size()) + " for weight " +
                             ad::shape_str(w.rows(), w.cols()));
  }
  const S sigma = std::max<S>(spectral_sigma(w.value(), st), S(kSpectralEps));
  Mat<S> out = w.value() / sigma;
  Mat<S> uv = st.u.transpose() * st.v;
  return ad::make_result<S>(std::move(out), {w}, [sigma, uv = std::move(uv)](ad::Node<S>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    // d/dW of W/σ with σ = uᵀWv: G/σ − ⟨G, W⟩/σ² · u vᵀ
    const S inner = (self.grad.array() * p.value.array()).sum();
    p.accumulate((self.grad / sigma - (inner / (sigma * sigma)) * uv).eval());
  });
}

}  // namespace bgan::gan
