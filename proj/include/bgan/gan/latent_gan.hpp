// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Generator and discriminator over sequences of latent code rows, and the
// hinge objective. Both consume and produce the packed CodeBatch layout of
// the translation unit.

#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "bgan/gan/spectral_norm.hpp"
#include "bgan/nmt/latent_code.hpp"
#include "bgan/nn/layers.hpp"

namespace bgan::gan {

using nmt::CodeBatch;

struct GanConfig {
  int d_model = 64;  // code width
  int d_z = 32;
  int t_gen = 37;    // T_max + 2
  int heads = 4;
  int ff_mult = 4;
  int blocks = 2;
};

/// batch × t_gen × d_z standard normal draws, stored as (batch·t_gen) × d_z.
template <typename S>
struct NoiseSample {
  Mat<S> z;
  int batch = 0;
  int t_gen = 0;

  Mat<S> item(int i) const { return z.middleRows(static_cast<Index>(i) * t_gen, t_gen); }
};

template <typename S>
NoiseSample<S> sample_z(int batch, int t_gen, int d_z, Rng& rng) {
  if (batch < 1 || t_gen < 1 || d_z < 1) throw std::invalid_argument("sample_z: extents must be positive");
  NoiseSample<S> out;
  out.batch = batch;
  out.t_gen = t_gen;
  out.z = nn::gaussian<S>(rng, static_cast<Index>(batch) * t_gen, d_z, 1.0);
  return out;
}

/// Linear layer whose weight is divided by its estimated spectral norm on
/// every forward pass. The power-iteration vectors live in the store as
/// non-trainable entries so they are checkpointed with the weights.
template <typename S>
struct SpectralLinear {
  nn::Linear<S> base;
  ad::Parameter<S>* u = nullptr;
  ad::Parameter<S>* v = nullptr;

  static SpectralLinear create(ad::ParamStore<S>& store, const std::string& path, Index in, Index out, Rng& rng) {
    SpectralLinear l;
    l.base = nn::Linear<S>::create(store, path, in, out, rng);
    const auto st = SpectralState<S>::random(in, out, rng);
    l.u = &store.add(path + ".sn_u", Mat<S>(st.u), false, 1);
    l.v = &store.add(path + ".sn_v", Mat<S>(st.v), false, 1);
    return l;
  }

  SpectralState<S> state() const { return {u->value, v->value}; }

  S power_iterate(int iters) {
    auto st = state();
    const S sigma = gan::power_iterate(base.weight->value, st, iters);
    u->value = st.u;
    v->value = st.v;
    return sigma;
  }

  Mat<S> normalized_weight() const {
    auto st = state();
    return base.weight->value / std::max<S>(spectral_sigma(base.weight->value, st), S(kSpectralEps));
  }

  Tensor<S> operator()(const Tensor<S>& x) const {
    Tensor<S> y = ad::matmul(x, spectral_weight(ad::leaf(*base.weight), state()));
    return ad::add_row(y, ad::leaf(*base.bias));
  }
};

/// Mean over the rows of each segment: B × d from packed rows.
template <typename S>
Tensor<S> segment_mean(const Tensor<S>& rows, std::span<const int> lengths) {
  Mat<S> pool = Mat<S>::Zero(static_cast<Index>(lengths.size()), rows.rows());
  Index at = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] > 0) {
      pool.row(static_cast<Index>(i)).segment(at, lengths[i]).setConstant(S(1) / static_cast<S>(lengths[i]));
    }
    at += lengths[i];
  }
  if (at != rows.rows()) throw ad::DimensionError("segment_mean: lengths do not cover the rows");
  return ad::matmul(ad::constant<S>(std::move(pool)), rows);
}

/// The first lengths[i] rows of item i, for each item; gradients flow back
/// to the kept rows. Used to show the critic fakes at the lengths of the
/// reals they are compared with, so length alone cannot separate them.
template <typename S>
CodeBatch<S> truncate_codes(const CodeBatch<S>& codes, std::span<const int> lengths) {
  if (lengths.size() != codes.size()) {
    throw ad::DimensionError("truncate_codes: " + std::to_string(lengths.size()) + " lengths for " +
                             std::to_string(codes.size()) + " codes");
  }
  std::vector<int> ids;
  CodeBatch<S> out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const int len = std::min(lengths[i], codes.lengths[i]);
    if (len < 1) throw ad::ContractError("truncate_codes: empty item");
    const auto at = static_cast<int>(codes.offset(i));
    for (int r = 0; r < len; ++r) ids.push_back(at + r);
    out.lengths.push_back(len);
  }
  out.rows = ad::gather_rows(codes.rows, ids);
  out.width = codes.width;
  return out;
}

template <typename S>
class Generator {
 public:
  Generator(const GanConfig& cfg, Rng& init) : cfg_(cfg) {
    const Index d = cfg.d_model;
    input_ = nn::Linear<S>::create(store_, "input", cfg.d_z, d, init);
    for (int b = 0; b < cfg.blocks; ++b) {
      const std::string p = "block" + std::to_string(b);
      blocks_.push_back({nn::LayerNorm<S>::create(store_, p + ".ln_attn", d),
                         nn::Attention<S>::create(store_, p + ".self_attn", d, cfg.heads, init),
                         nn::LayerNorm<S>::create(store_, p + ".ln_ffn", d),
                         nn::FeedForward<S>::create(store_, p + ".ffn", d, static_cast<Index>(cfg.ff_mult) * d, init)});
    }
    final_norm_ = nn::LayerNorm<S>::create(store_, "final_ln", d);
    output_ = nn::Linear<S>::create(store_, "output", d, d, init);
  }

  Generator(const Generator&) = delete;
  Generator& operator=(const Generator&) = delete;

  const GanConfig& config() const { return cfg_; }
  ad::ParamStore<S>& params() { return store_; }
  const ad::ParamStore<S>& params() const { return store_; }

  NoiseSample<S> sample(int batch, Rng& rng) const { return sample_z<S>(batch, cfg_.t_gen, cfg_.d_z, rng); }

  /// One full-mask unit-row code of t_gen rows per noise item.
  CodeBatch<S> operator()(const NoiseSample<S>& z) const {
    if (z.t_gen != cfg_.t_gen || z.z.cols() != cfg_.d_z) {
      throw ad::DimensionError("generator: noise " + ad::shape_str(z.t_gen, z.z.cols()) + " per item, expected " +
                               ad::shape_str(cfg_.t_gen, cfg_.d_z));
    }
    const std::vector<int> lengths(static_cast<std::size_t>(z.batch), cfg_.t_gen);
    Tensor<S> x = input_(ad::constant<S>(z.z));
    x = ad::add(x, ad::constant<S>(nn::packed_positions<S>(lengths, cfg_.d_model)));
    const auto segs = nn::self_segments(lengths);
    for (const auto& b : blocks_) {
      const Tensor<S> h = b.ln_attn(x);
      x = ad::add(x, b.attn(h, h, segs, false));
      x = ad::add(x, b.ffn(b.ln_ffn(x)));
    }
    CodeBatch<S> out;
    out.rows = ad::normalize_rows(output_(final_norm_(x)));
    out.lengths = lengths;
    out.width = cfg_.t_gen;
    return out;
  }

 private:
  struct Block {
    nn::LayerNorm<S> ln_attn;
    nn::Attention<S> attn;
    nn::LayerNorm<S> ln_ffn;
    nn::FeedForward<S> ffn;
  };

  GanConfig cfg_;
  ad::ParamStore<S> store_;
  nn::Linear<S> input_;
  std::vector<Block> blocks_;
  nn::LayerNorm<S> final_norm_;
  nn::Linear<S> output_;
};

/// Self-attention critic. Every linear map is spectrally normalized; there
/// is no LayerNorm. Scores come from a masked mean over positions.
template <typename S>
class Discriminator {
 public:
  Discriminator(const GanConfig& cfg, Rng& init) : cfg_(cfg) {
    const Index d = cfg.d_model;
    for (int b = 0; b < cfg.blocks; ++b) {
      const std::string p = "block" + std::to_string(b);
      Block blk;
      blk.query = SpectralLinear<S>::create(store_, p + ".self_attn.query", d, d, init);
      blk.key = SpectralLinear<S>::create(store_, p + ".self_attn.key", d, d, init);
      blk.value = SpectralLinear<S>::create(store_, p + ".self_attn.value", d, d, init);
      blk.output = SpectralLinear<S>::create(store_, p + ".self_attn.output", d, d, init);
      blk.up = SpectralLinear<S>::create(store_, p + ".ffn.up", d, static_cast<Index>(cfg.ff_mult) * d, init);
      blk.down = SpectralLinear<S>::create(store_, p + ".ffn.down", static_cast<Index>(cfg.ff_mult) * d, d, init);
      blocks_.push_back(blk);
    }
    head_ = SpectralLinear<S>::create(store_, "head", d, 1, init);
  }

  Discriminator(const Discriminator&) = delete;
  Discriminator& operator=(const Discriminator&) = delete;

  ad::ParamStore<S>& params() { return store_; }
  const ad::ParamStore<S>& params() const { return store_; }

  /// One power-iteration update per spectrally normalized layer.
  void update_spectral_state(int iters = 1) {
    for (auto* l : layers()) l->power_iterate(iters);
  }

  /// Every spectrally normalized layer, in a fixed order.
  std::vector<SpectralLinear<S>*> layers() {
    std::vector<SpectralLinear<S>*> out;
    for (auto& b : blocks_) {
      for (auto* l : {&b.query, &b.key, &b.value, &b.output, &b.up, &b.down}) out.push_back(l);
    }
    out.push_back(&head_);
    return out;
  }

  /// B × 1 scores for the items of `codes`.
  Tensor<S> operator()(const CodeBatch<S>& codes) const {
    Tensor<S> x = ad::add(codes.rows, ad::constant<S>(nn::packed_positions<S>(codes.lengths, cfg_.d_model)));
    const auto segs = nn::self_segments(codes.lengths);
    for (const auto& b : blocks_) {
      const Tensor<S> mixed = ad::multi_head_attention(b.query(x), b.key(x), b.value(x), segs, cfg_.heads, false);
      x = ad::add(x, b.output(mixed));
      x = ad::add(x, b.down(ad::gelu(b.up(x))));
    }
    return head_(segment_mean(x, codes.lengths));
  }

 private:
  struct Block {
    SpectralLinear<S> query, key, value, output, up, down;
  };

  GanConfig cfg_;
  ad::ParamStore<S> store_;
  std::vector<Block> blocks_;
  SpectralLinear<S> head_;
};

/// mean(max(0, 1 − real)) + mean(max(0, 1 + fake)), minimized by D.
template <typename S>
Tensor<S> d_loss(const Tensor<S>& real_scores, const Tensor<S>& fake_scores) {
  if (real_scores.value().size() == 0 || fake_scores.value().size() == 0) {
    throw ad::ContractError("d_loss: empty score batch");
  }
  const Tensor<S> real_term = ad::mean(ad::relu(ad::add_scalar(ad::scale(real_scores, S(-1)), S(1))));
  const Tensor<S> fake_term = ad::mean(ad::relu(ad::add_scalar(fake_scores, S(1))));
  return ad::add(real_term, fake_term);
}

/// −mean(fake), minimized by G.
template <typename S>
Tensor<S> g_loss(const Tensor<S>& fake_scores) {
  if (fake_scores.value().size() == 0) throw ad::ContractError("g_loss: empty score batch");
  return ad::scale(ad::mean(fake_scores), S(-1));
}

}  // namespace bgan::gan
