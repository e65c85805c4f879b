// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "bgan/core/autograd.hpp"

namespace bgan::ad {

/// One independent attention problem inside packed Q/K/V row blocks.
struct AttentionSegment {
  Index q_begin = 0;
  Index q_len = 0;
  Index k_begin = 0;
  Index k_len = 0;
};

/// Receives the attention weights of each (segment, head) pair, stored at
/// index segment * heads + head, shape q_len × k_len.
template <typename S>
struct AttentionProbe {
  std::vector<Mat<S>> weights;
};

/// Scaled dot-product multi-head attention over packed sequences.
///
/// `q` is Nq×d, `k` and `v` are Nk×d; each segment attends only within its
/// own key block. Heads split the d columns evenly. With `causal`, query i
/// of a segment sees keys j ≤ i + (k_len − q_len). Query rows not covered by
/// a segment produce zeros.
template <typename S>
Tensor<S> multi_head_attention(const Tensor<S>& q, const Tensor<S>& k, const Tensor<S>& v,
                               std::span<const AttentionSegment> segments, int heads,
                               bool causal, AttentionProbe<S>* probe = nullptr) {
  const Index d = q.cols();
  if (k.cols() != d || v.cols() != d || k.rows() != v.rows()) {
    throw DimensionError("attention: q " + shape_str(q.rows(), q.cols()) + ", k " +
                         shape_str(k.rows(), k.cols()) + ", v " + shape_str(v.rows(), v.cols()));
  }
  if (heads <= 0 || d % heads != 0) {
    throw DimensionError("attention: width " + std::to_string(d) + " not divisible by " +
                         std::to_string(heads) + " heads");
  }
  const Index dh = d / heads;
  const S inv_sqrt = S(1) / std::sqrt(static_cast<S>(dh));

  Mat<S> out = Mat<S>::Zero(q.rows(), d);
  std::vector<Mat<S>> probs;
  probs.reserve(segments.size() * static_cast<std::size_t>(heads));
  for (const auto& seg : segments) {
    if (seg.q_begin + seg.q_len > q.rows() || seg.k_begin + seg.k_len > k.rows() || seg.k_len <= 0) {
      throw DimensionError("attention: segment outside packed inputs");
    }
    for (int h = 0; h < heads; ++h) {
      const auto qh = q.value().block(seg.q_begin, h * dh, seg.q_len, dh);
      const auto kh = k.value().block(seg.k_begin, h * dh, seg.k_len, dh);
      const auto vh = v.value().block(seg.k_begin, h * dh, seg.k_len, dh);
      Mat<S> scores = (qh * kh.transpose()) * inv_sqrt;
      for (Index i = 0; i < seg.q_len; ++i) {
        const Index visible =
            causal ? std::min(seg.k_len, i + (seg.k_len - seg.q_len) + 1) : seg.k_len;
        auto row = scores.row(i);
        const S m = row.head(visible).maxCoeff();
        row.head(visible) = (row.head(visible).array() - m).exp().matrix();
        row.head(visible) /= row.head(visible).sum();
        row.tail(seg.k_len - visible).setZero();
      }
      out.block(seg.q_begin, h * dh, seg.q_len, dh) = scores * vh;
      probs.push_back(std::move(scores));
    }
  }
  if (probe != nullptr) probe->weights = probs;

  std::vector<AttentionSegment> segs(segments.begin(), segments.end());
  return make_result<S>(
      std::move(out), {q, k, v},
      [segs = std::move(segs), probs = std::move(probs), heads, dh, inv_sqrt](Node<S>& self) {
        auto& pq = *self.parents[0];
        auto& pk = *self.parents[1];
        auto& pv = *self.parents[2];
        Mat<S> gq = Mat<S>::Zero(pq.value.rows(), pq.value.cols());
        Mat<S> gk = Mat<S>::Zero(pk.value.rows(), pk.value.cols());
        Mat<S> gv = Mat<S>::Zero(pv.value.rows(), pv.value.cols());
        std::size_t at = 0;
        for (const auto& seg : segs) {
          for (int h = 0; h < heads; ++h, ++at) {
            const Mat<S>& p = probs[at];
            const auto go = self.grad.block(seg.q_begin, h * dh, seg.q_len, dh);
            const auto qh = pq.value.block(seg.q_begin, h * dh, seg.q_len, dh);
            const auto kh = pk.value.block(seg.k_begin, h * dh, seg.k_len, dh);
            const auto vh = pv.value.block(seg.k_begin, h * dh, seg.k_len, dh);
            gv.block(seg.k_begin, h * dh, seg.k_len, dh) += p.transpose() * go;
            Mat<S> dp = go * vh.transpose();
            Eigen::Matrix<S, Eigen::Dynamic, 1> dots = dp.cwiseProduct(p).rowwise().sum();
            Mat<S> ds = (dp.colwise() - dots).cwiseProduct(p) * inv_sqrt;
            gq.block(seg.q_begin, h * dh, seg.q_len, dh) += ds * kh;
            gk.block(seg.k_begin, h * dh, seg.k_len, dh) += ds.transpose() * qh;
          }
        }
        pq.accumulate(gq);
        pk.accumulate(gk);
        pv.accumulate(gv);
      });
}

}  // namespace bgan::ad
