// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bgan/core/ops.hpp"
#include "bgan/nmt/latent_code.hpp"
#include "bgan/nn/layers.hpp"
#include "bgan/text/corpus.hpp"

namespace bgan::nmt {

using text::Batch;
using text::Lang;
using text::Sentence;
using text::Vocab;

struct ModelConfig {
  int vocab_size = 0;
  int d_model = 64;
  int layers = 2;
  int heads = 4;
  int ff_mult = 4;
  int max_len = 35;  // interior tokens per sentence
  bool bilingual = true;
  // Fixed factor on the tied output projection. At 1 the untrained loss
  // sits well above ln V because inputs are copied into the logits.
  double logit_scale = 0.5;
};

struct ParamCount {
  std::size_t embedding = 0;
  std::size_t language_embedding = 0;
  std::size_t encoder = 0;
  std::size_t decoder = 0;
  std::size_t total = 0;
};

struct Translation {
  Sentence sentence;
  bool truncated = false;
};

/// Shared-encoder, shared-decoder transformer for two languages.
///
/// The encoder sees no language signal. The decoder adds a language
/// embedding to every input position and projects onto the (tied) token
/// embedding table. Encoder outputs are projected onto the unit sphere row
/// by row; those rows are the latent code the GAN imitates.
template <typename S>
class TranslationModel {
 public:
  TranslationModel(const ModelConfig& cfg, Rng& init) : cfg_(cfg) {
    if (cfg.vocab_size <= Vocab::kReserved) throw std::invalid_argument("vocab_size too small");
    if (cfg.d_model % cfg.heads != 0) throw std::invalid_argument("d_model must be divisible by heads");
    const Index d = cfg.d_model;
    const Index hidden = static_cast<Index>(cfg.ff_mult) * d;
    embedding_ = &store_.add("embedding", nn::gaussian<S>(init, cfg.vocab_size, d, 1.0 / std::sqrt(double(d))));
    if (cfg.bilingual) lang_embedding_ = &store_.add("lang_embedding", nn::gaussian<S>(init, 2, d, 1.0 / std::sqrt(double(d))));
    for (int l = 0; l < cfg.layers; ++l) {
      const std::string p = "encoder.layer" + std::to_string(l);
      encoder_.push_back({nn::LayerNorm<S>::create(store_, p + ".ln_attn", d),
                          nn::Attention<S>::create(store_, p + ".self_attn", d, cfg.heads, init),
                          nn::LayerNorm<S>::create(store_, p + ".ln_ffn", d),
                          nn::FeedForward<S>::create(store_, p + ".ffn", d, hidden, init)});
    }
    encoder_norm_ = nn::LayerNorm<S>::create(store_, "encoder.final_ln", d);
    for (int l = 0; l < cfg.layers; ++l) {
      const std::string p = "decoder.layer" + std::to_string(l);
      decoder_.push_back({nn::LayerNorm<S>::create(store_, p + ".ln_self", d),
                          nn::Attention<S>::create(store_, p + ".self_attn", d, cfg.heads, init),
                          nn::LayerNorm<S>::create(store_, p + ".ln_cross", d),
                          nn::Attention<S>::create(store_, p + ".cross_attn", d, cfg.heads, init),
                          nn::LayerNorm<S>::create(store_, p + ".ln_ffn", d),
                          nn::FeedForward<S>::create(store_, p + ".ffn", d, hidden, init)});
    }
    decoder_norm_ = nn::LayerNorm<S>::create(store_, "decoder.final_ln", d);
  }

  TranslationModel(const TranslationModel&) = delete;
  TranslationModel& operator=(const TranslationModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  ad::ParamStore<S>& params() { return store_; }
  const ad::ParamStore<S>& params() const { return store_; }

  /// Overwrites embedding rows for tokens present in `emb`, rescaled to unit
  /// norm (about the norm of a freshly initialized row). Returns the number
  /// of rows replaced.
  std::size_t load_pretrained(const text::PretrainedEmbeddings& emb, const Vocab& vocab) {
    if (emb.dim != cfg_.d_model) {
      throw std::invalid_argument("pretrained embedding width " + std::to_string(emb.dim) +
                                  " differs from model width " + std::to_string(cfg_.d_model));
    }
    std::size_t n = 0;
    for (int id = Vocab::kReserved; id < vocab.size(); ++id) {
      auto it = emb.vectors.find(vocab.token(id));
      if (it == emb.vectors.end()) continue;
      Eigen::Map<const Eigen::RowVectorXd> v(it->second.data(), static_cast<Index>(it->second.size()));
      const double norm = v.norm();
      if (norm == 0) continue;
      embedding_->value.row(id) = (v / norm).template cast<S>();
      ++n;
    }
    return n;
  }

  // -------------------------------------------------------------------------
  // Encoder

  /// Encodes every sentence of `batch`; the result keeps the gradient path
  /// unless recording is disabled. Rows are unit norm.
  CodeBatch<S> encode(const Batch& batch) const {
    std::vector<int> ids;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const int len = batch.lengths[i];
      if (len - 2 > cfg_.max_len) {
        throw ad::ContractError("encode: sentence with " + std::to_string(len - 2) +
                                " tokens exceeds max_len " + std::to_string(cfg_.max_len));
      }
      for (int j = 0; j < len; ++j) ids.push_back(batch.ids(static_cast<Index>(i), j));
    }
    Tensor<S> x = embed(ids, batch.lengths);
    const auto segs = nn::self_segments(batch.lengths);
    for (const auto& layer : encoder_) {
      const Tensor<S> h = layer.ln_attn(x);
      x = ad::add(x, layer.attn(h, h, segs, false));
      x = ad::add(x, layer.ffn(layer.ln_ffn(x)));
    }
    CodeBatch<S> code;
    code.rows = ad::normalize_rows(encoder_norm_(x));
    code.lengths = batch.lengths;
    code.width = batch.width();
    return code;
  }

  LatentCode<S> encode(const Sentence& s) const {
    ad::NoGradGuard no_grad;
    return encode(text::make_batch(std::span<const Sentence>(&s, 1))).item(0);
  }

  // -------------------------------------------------------------------------
  // Decoder

  /// Teacher-forced logits: for each target sentence of length n, rows
  /// predicting tokens 1..n-1 from tokens 0..n-2. Items of `code` pair with
  /// sentences of `target` by position.
  Tensor<S> decode_teacher_forced(const CodeBatch<S>& code, const Batch& target, Lang lang,
                                  std::vector<ad::AttentionProbe<S>>* cross_probes = nullptr) const {
    std::vector<int> ids;
    std::vector<int> lengths;
    for (std::size_t i = 0; i < target.size(); ++i) {
      const int len = target.lengths[i];
      for (int j = 0; j + 1 < len; ++j) ids.push_back(target.ids(static_cast<Index>(i), j));
      lengths.push_back(len - 1);
    }
    return logits(decode_hidden(code, ids, lengths, lang, cross_probes));
  }

  /// Single-sentence form: (|target| − 1) × V logits for the tokens after BOS.
  Tensor<S> decode_teacher_forced(const LatentCode<S>& code, const Sentence& target, Lang lang) const {
    const LatentCode<S> one[] = {code};
    return decode_teacher_forced(pack_codes<S>(one), text::make_batch(std::span<const Sentence>(&target, 1)),
                                 lang);
  }

  /// Cross-attention weights per decoder layer and head over the full code
  /// length (masked rows get weight 0).
  std::vector<Mat<S>> cross_attention_weights(const LatentCode<S>& code, const Sentence& target,
                                              Lang lang) const {
    ad::NoGradGuard no_grad;
    const LatentCode<S> one[] = {code};
    std::vector<ad::AttentionProbe<S>> probes;
    decode_teacher_forced(pack_codes<S>(one), text::make_batch(std::span<const Sentence>(&target, 1)), lang,
                          &probes);
    std::vector<Index> valid_rows;
    for (Index r = 0; r < code.length(); ++r) {
      if (code.mask[static_cast<std::size_t>(r)]) valid_rows.push_back(r);
    }
    std::vector<Mat<S>> out;
    for (const auto& probe : probes) {
      for (const auto& w : probe.weights) {
        Mat<S> full = Mat<S>::Zero(w.rows(), code.length());
        for (std::size_t k = 0; k < valid_rows.size(); ++k) full.col(valid_rows[k]) = w.col(static_cast<Index>(k));
        out.push_back(std::move(full));
      }
    }
    return out;
  }

  /// Packed teacher-forcing targets matching decode_teacher_forced rows.
  static std::vector<int> shifted_targets(const Batch& target) {
    std::vector<int> out;
    for (std::size_t i = 0; i < target.size(); ++i) {
      for (int j = 1; j < target.lengths[i]; ++j) out.push_back(target.ids(static_cast<Index>(i), j));
    }
    return out;
  }

  // -------------------------------------------------------------------------
  // Losses

  /// Δ(s, dec(enc(noised s), lang(s))).
  Tensor<S> reconstruction_loss(const Batch& batch, const text::NoiseConfig& noise, Rng& rng) const {
    std::vector<Sentence> noised;
    noised.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) noised.push_back(text::apply_noise(batch.sentence(i), noise, rng));
    return pair_loss(text::make_batch(noised), batch);
  }

  /// Cross-entropy of reproducing `target` in its own language from the
  /// code of `source`.
  Tensor<S> pair_loss(const Batch& source, const Batch& target) const {
    const CodeBatch<S> code = encode(source);
    const auto targets = shifted_targets(target);
    return ad::cross_entropy(decode_teacher_forced(code, target, target.lang), targets, Vocab::kPad);
  }

  /// Δ(s, dec(enc(M(s)), lang(s))) where M is greedy translation into the
  /// other language with the current parameters, outside the graph.
  Tensor<S> cross_domain_loss(const Batch& batch) const {
    return pair_loss(back_translate_source(batch), batch);
  }

  /// The translated batch M(s) used as the outer pass input; empty
  /// translations become a single UNK.
  Batch back_translate_source(const Batch& batch) const {
    std::vector<Sentence> translated;
    for (auto& t : translate(batch, text::other(batch.lang), cfg_.max_len)) {
      if (t.sentence.interior_size() == 0) {
        const int unk[] = {Vocab::kUnk};
        t.sentence = text::frame(unk, t.sentence.lang);
      }
      translated.push_back(std::move(t.sentence));
    }
    return text::make_batch(translated);
  }

  // -------------------------------------------------------------------------
  // Inference

  std::vector<Translation> translate(const Batch& batch, Lang to, int max_len) const {
    ad::NoGradGuard no_grad;
    return decode_greedy(encode(batch), to, max_len);
  }

  /// Greedy argmax decoding from BOS until EOS or `max_len` interior tokens.
  /// PAD and BOS are never emitted.
  std::vector<Translation> decode_greedy(const CodeBatch<S>& code, Lang lang, int max_len) const {
    ad::NoGradGuard no_grad;
    const std::size_t n = code.size();
    std::vector<std::vector<int>> prefix(n, std::vector<int>{Vocab::kBos});
    std::vector<Translation> out(n);
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;

    while (!active.empty()) {
      const CodeBatch<S> sub = code.select(active);
      std::vector<int> ids;
      std::vector<int> lengths;
      for (auto i : active) {
        ids.insert(ids.end(), prefix[i].begin(), prefix[i].end());
        lengths.push_back(static_cast<int>(prefix[i].size()));
      }
      const Tensor<S> hidden = decode_hidden(sub, ids, lengths, lang, nullptr);
      std::vector<int> last_rows;
      int at = 0;
      for (int len : lengths) {
        at += len;
        last_rows.push_back(at - 1);
      }
      const Mat<S> scores = logits(ad::gather_rows(hidden, last_rows)).value();

      std::vector<std::size_t> still;
      for (std::size_t a = 0; a < active.size(); ++a) {
        const std::size_t i = active[a];
        auto row = scores.row(static_cast<Index>(a));
        int best = Vocab::kEos;
        S best_score = -std::numeric_limits<S>::infinity();
        for (Index v = 0; v < row.size(); ++v) {
          if (v == Vocab::kPad || v == Vocab::kBos) continue;
          if (row(v) > best_score) {
            best_score = row(v);
            best = static_cast<int>(v);
          }
        }
        const int interior = static_cast<int>(prefix[i].size()) - 1;
        if (best == Vocab::kEos || interior >= max_len) {
          out[i].truncated = best != Vocab::kEos;
          prefix[i].push_back(Vocab::kEos);
          out[i].sentence.ids = std::move(prefix[i]);
          out[i].sentence.lang = lang;
        } else {
          prefix[i].push_back(best);
          still.push_back(i);
        }
      }
      active = std::move(still);
    }
    return out;
  }

  /// Teacher-forced next-token accuracy on clean input (EOS included).
  double token_accuracy(const Batch& batch) const {
    ad::NoGradGuard no_grad;
    const Mat<S> scores = decode_teacher_forced(encode(batch), batch, batch.lang).value();
    const auto targets = shifted_targets(batch);
    std::size_t hit = 0;
    for (Index r = 0; r < scores.rows(); ++r) {
      Index arg = 0;
      scores.row(r).maxCoeff(&arg);
      hit += static_cast<int>(arg) == targets[static_cast<std::size_t>(r)] ? 1 : 0;
    }
    return targets.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(targets.size());
  }

  ParamCount count_params() const {
    ParamCount c;
    for (const auto& [path, p] : store_) {
      const auto n = static_cast<std::size_t>(p.value.size());
      if (path == "embedding") {
        c.embedding += n;
      } else if (path == "lang_embedding") {
        c.language_embedding += n;
      } else if (path.rfind("encoder.", 0) == 0) {
        c.encoder += n;
      } else {
        c.decoder += n;
      }
      c.total += n;
    }
    return c;
  }

 private:
  struct EncoderLayer {
    nn::LayerNorm<S> ln_attn;
    nn::Attention<S> attn;
    nn::LayerNorm<S> ln_ffn;
    nn::FeedForward<S> ffn;
  };
  struct DecoderLayer {
    nn::LayerNorm<S> ln_self;
    nn::Attention<S> self_attn;
    nn::LayerNorm<S> ln_cross;
    nn::Attention<S> cross_attn;
    nn::LayerNorm<S> ln_ffn;
    nn::FeedForward<S> ffn;
  };

  Tensor<S> embed(const std::vector<int>& ids, std::span<const int> lengths) const {
    const S scale = std::sqrt(static_cast<S>(cfg_.d_model));
    Tensor<S> x = ad::scale(ad::gather_rows(ad::leaf(*embedding_), ids), scale);
    return ad::add(x, ad::constant<S>(nn::packed_positions<S>(lengths, cfg_.d_model)));
  }

  Tensor<S> decode_hidden(const CodeBatch<S>& code, const std::vector<int>& ids, const std::vector<int>& lengths,
                          Lang lang, std::vector<ad::AttentionProbe<S>>* cross_probes) const {
    if (code.size() != lengths.size()) {
      throw ad::DimensionError("decoder: " + std::to_string(lengths.size()) + " targets for " +
                               std::to_string(code.size()) + " codes");
    }
    Tensor<S> x = embed(ids, lengths);
    if (lang_embedding_ != nullptr) {
      x = ad::add_row(x, ad::slice_rows(ad::leaf(*lang_embedding_), text::to_int(lang) - 1, 1));
    }
    const auto self_segs = nn::self_segments(lengths);
    const auto cross_segs = nn::cross_segments(lengths, code.lengths);
    if (cross_probes != nullptr) cross_probes->assign(decoder_.size(), {});
    for (std::size_t l = 0; l < decoder_.size(); ++l) {
      const auto& layer = decoder_[l];
      const Tensor<S> h = layer.ln_self(x);
      x = ad::add(x, layer.self_attn(h, h, self_segs, true));
      x = ad::add(x, layer.cross_attn(layer.ln_cross(x), code.rows, cross_segs, false,
                                      cross_probes != nullptr ? &(*cross_probes)[l] : nullptr));
      x = ad::add(x, layer.ffn(layer.ln_ffn(x)));
    }
    return decoder_norm_(x);
  }

  Tensor<S> logits(const Tensor<S>& hidden) const {
    return ad::scale(ad::matmul_nt(hidden, ad::leaf(*embedding_)), static_cast<S>(cfg_.logit_scale));
  }

  ModelConfig cfg_;
  ad::ParamStore<S> store_;
  ad::Parameter<S>* embedding_ = nullptr;
  ad::Parameter<S>* lang_embedding_ = nullptr;
  std::vector<EncoderLayer> encoder_;
  nn::LayerNorm<S> encoder_norm_;
  std::vector<DecoderLayer> decoder_;
  nn::LayerNorm<S> decoder_norm_;
};

}  // namespace bgan::nmt
