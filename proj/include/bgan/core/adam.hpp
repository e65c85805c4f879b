// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "bgan/core/autograd.hpp"

namespace bgan::ad {

struct AdamOptions {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update over every trainable parameter, then
/// zeroes the gradients. Increments the store's step counter.
template <typename S>
void adam_step(ParamStore<S>& store, const AdamOptions& opt) {
  store.bump_step();
  const double t = static_cast<double>(store.step());
  const S b1 = static_cast<S>(opt.beta1);
  const S b2 = static_cast<S>(opt.beta2);
  const S correction1 = static_cast<S>(1.0 - std::pow(opt.beta1, t));
  const S correction2 = static_cast<S>(1.0 - std::pow(opt.beta2, t));
  const S lr = static_cast<S>(opt.lr);
  const S eps = static_cast<S>(opt.eps);
  for (auto& [_, p] : store) {
    if (!p.requires_grad) continue;
    p.adam_m = b1 * p.adam_m + (S(1) - b1) * p.grad;
    p.adam_v = b2 * p.adam_v + (S(1) - b2) * p.grad.cwiseAbs2();
    const auto m_hat = p.adam_m.array() / correction1;
    const auto v_hat = p.adam_v.array() / correction2;
    p.value.array() -= lr * m_hat / (v_hat.sqrt() + eps);
    p.grad.setZero();
  }
}

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
template <typename S>
S clip_grad_norm(ParamStore<S>& store, S max_norm) {
  S sq = 0;
  for (const auto& [_, p] : store) {
    if (p.requires_grad) sq += p.grad.squaredNorm();
  }
  const S norm = std::sqrt(sq);
  if (norm > max_norm && norm > S(0)) {
    const S factor = max_norm / norm;
    for (auto& [_, p] : store) {
      if (p.requires_grad) p.grad *= factor;
    }
  }
  return norm;
}

}  // namespace bgan::ad
