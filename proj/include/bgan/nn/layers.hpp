// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameter-holding building blocks shared by the translation unit, the
// latent GAN and the evaluation language model. Each block registers its
// tensors in a ParamStore under a path prefix and keeps pointers to them;
// the store must outlive the block.

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "bgan/core/attention.hpp"
#include "bgan/core/ops.hpp"
#include "bgan/core/rng.hpp"

namespace bgan::nn {

using ad::Index;
using ad::Mat;
using ad::ParamStore;
using ad::Parameter;
using ad::Tensor;

template <typename S>
Mat<S> gaussian(Rng& rng, Index rows, Index cols, double stddev) {
  Mat<S> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(stddev * rng.normal());
  return m;
}

/// Sinusoidal position table, `len` × `width`.
template <typename S>
Mat<S> positional_encoding(Index len, Index width) {
  Mat<S> pe(len, width);
  for (Index pos = 0; pos < len; ++pos) {
    for (Index i = 0; i < width; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(width));
      const double angle = static_cast<double>(pos) * rate;
      pe(pos, i) = static_cast<S>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return pe;
}

/// Position rows for packed sequences: each segment restarts at position 0.
template <typename S>
Mat<S> packed_positions(std::span<const int> lengths, Index width) {
  Index total = 0;
  int longest = 0;
  for (int l : lengths) {
    total += l;
    longest = std::max(longest, l);
  }
  const Mat<S> table = positional_encoding<S>(longest, width);
  Mat<S> out(total, width);
  Index at = 0;
  for (int l : lengths) {
    out.middleRows(at, l) = table.topRows(l);
    at += l;
  }
  return out;
}

/// Self-attention segments for packed sequences of the given lengths.
inline std::vector<ad::AttentionSegment> self_segments(std::span<const int> lengths) {
  std::vector<ad::AttentionSegment> segs;
  Index at = 0;
  for (int l : lengths) {
    segs.push_back({at, l, at, l});
    at += l;
  }
  return segs;
}

/// Queries of lengths `q` attending to key blocks of lengths `k`, pairwise.
inline std::vector<ad::AttentionSegment> cross_segments(std::span<const int> q, std::span<const int> k) {
  std::vector<ad::AttentionSegment> segs;
  Index qa = 0;
  Index ka = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    segs.push_back({qa, q[i], ka, k[i]});
    qa += q[i];
    ka += k[i];
  }
  return segs;
}

template <typename S>
struct Linear {
  Parameter<S>* weight = nullptr;  // in × out
  Parameter<S>* bias = nullptr;    // 1 × out, optional

  static Linear create(ParamStore<S>& store, const std::string& path, Index in, Index out, Rng& rng,
                       bool with_bias = true) {
    Linear l;
    l.weight = &store.add(path + ".weight", gaussian<S>(rng, in, out, 1.0 / std::sqrt(static_cast<double>(in))));
    if (with_bias) l.bias = &store.add(path + ".bias", Mat<S>::Zero(1, out), true, 1);
    return l;
  }

  Tensor<S> operator()(const Tensor<S>& x) const {
    Tensor<S> y = ad::matmul(x, ad::leaf(*weight));
    return bias != nullptr ? ad::add_row(y, ad::leaf(*bias)) : y;
  }
};

template <typename S>
struct LayerNorm {
  Parameter<S>* gain = nullptr;
  Parameter<S>* bias = nullptr;
  S eps = S(1e-5);

  static LayerNorm create(ParamStore<S>& store, const std::string& path, Index width) {
    LayerNorm n;
    n.gain = &store.add(path + ".gain", Mat<S>::Ones(1, width), true, 1);
    n.bias = &store.add(path + ".bias", Mat<S>::Zero(1, width), true, 1);
    return n;
  }

  Tensor<S> operator()(const Tensor<S>& x) const {
    return ad::layer_norm(x, ad::leaf(*gain), ad::leaf(*bias), eps);
  }
};

template <typename S>
struct FeedForward {
  Linear<S> up;
  Linear<S> down;

  static FeedForward create(ParamStore<S>& store, const std::string& path, Index width, Index hidden,
                            Rng& rng) {
    return {Linear<S>::create(store, path + ".up", width, hidden, rng),
            Linear<S>::create(store, path + ".down", hidden, width, rng)};
  }

  Tensor<S> operator()(const Tensor<S>& x) const { return down(ad::gelu(up(x))); }
};

/// Multi-head attention with separate query/key/value/output projections.
template <typename S>
struct Attention {
  Linear<S> query;
  Linear<S> key;
  Linear<S> value;
  Linear<S> output;
  int heads = 1;

  static Attention create(ParamStore<S>& store, const std::string& path, Index width, int heads, Rng& rng) {
    return {Linear<S>::create(store, path + ".query", width, width, rng),
            Linear<S>::create(store, path + ".key", width, width, rng),
            Linear<S>::create(store, path + ".value", width, width, rng),
            Linear<S>::create(store, path + ".output", width, width, rng), heads};
  }

  Tensor<S> operator()(const Tensor<S>& queries, const Tensor<S>& memory,
                       std::span<const ad::AttentionSegment> segments, bool causal,
                       ad::AttentionProbe<S>* probe = nullptr) const {
    Tensor<S> mixed = ad::multi_head_attention(query(queries), key(memory), value(memory), segments,
                                               heads, causal, probe);
    return output(mixed);
  }
};

}  // namespace bgan::nn
