// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Word-level language models for forward and reverse perplexity: a
// scorer interface, a uniform stub, and a single-layer GRU model.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bgan/core/adam.hpp"
#include "bgan/core/ops.hpp"
#include "bgan/core/rng.hpp"
#include "bgan/eval/bleu.hpp"
#include "bgan/nn/layers.hpp"
#include "bgan/text/vocab.hpp"

namespace bgan::eval {

using ad::ContractError;
using ad::Index;
using ad::Mat;
using ad::Tensor;

/// Scores each word of a sentence and the closing EOS given its prefix.
class Scorer {
 public:
  virtual ~Scorer() = default;
  /// Natural-log probabilities, |sentence| + 1 per sentence.
  virtual std::vector<std::vector<double>> log_probs(std::span<const Tokens> sentences) const = 0;
};

/// exp of the mean negative log-probability over every token of `corpus`
/// (EOS included).
inline double perplexity(const Scorer& lm, std::span<const Tokens> corpus) {
  if (corpus.empty()) throw ContractError("perplexity: empty evaluation corpus");
  constexpr std::size_t kChunk = 64;
  double nll = 0.0;
  std::size_t count = 0;
  for (std::size_t at = 0; at < corpus.size(); at += kChunk) {
    const auto chunk = corpus.subspan(at, std::min(kChunk, corpus.size() - at));
    for (const auto& lp : lm.log_probs(chunk)) {
      for (double x : lp) nll -= x;
      count += lp.size();
    }
  }
  return std::exp(nll / static_cast<double>(count));
}

/// Every token equally likely among `vocab_size`.
class UniformScorer : public Scorer {
 public:
  explicit UniformScorer(int vocab_size) : vocab_size_(vocab_size) {
    if (vocab_size < 1) throw ContractError("UniformScorer: vocabulary must be nonempty");
  }
  std::vector<std::vector<double>> log_probs(std::span<const Tokens> sentences) const override {
    std::vector<std::vector<double>> out;
    for (const auto& s : sentences) out.emplace_back(s.size() + 1, -std::log(static_cast<double>(vocab_size_)));
    return out;
  }

 private:
  int vocab_size_;
};

/// Most frequent words of `corpus` (ties broken lexicographically), at most
/// `cap` of them, after the four reserved ids.
inline text::Vocab lm_vocab(std::span<const Tokens> corpus, int cap) {
  std::map<std::string, long> freq;
  for (const auto& s : corpus) {
    for (const auto& w : s) ++freq[w];
  }
  std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  text::Vocab v;
  for (std::size_t i = 0; i < ranked.size() && static_cast<int>(i) < cap; ++i) v.add(ranked[i].first);
  return v;
}

struct LmConfig {
  int embed = 128;
  int hidden = 256;
  int epochs = 10;
  int batch = 32;
  int vocab_cap = 10000;
  double lr = 1e-3;
  double clip = 5.0;
};

template <typename S>
class GruLm : public Scorer {
 public:
  GruLm(text::Vocab vocab, const LmConfig& cfg, Rng& init) : vocab_(std::move(vocab)), cfg_(cfg) {
    const Index v = vocab_.size();
    const Index e = cfg.embed;
    const Index h = cfg.hidden;
    embedding_ = &store_.add("embedding", nn::gaussian<S>(init, v, e, 1.0 / std::sqrt(double(e))));
    w_input_ = &store_.add("gru.w_input", nn::gaussian<S>(init, e, 3 * h, 1.0 / std::sqrt(double(e))));
    w_hidden_ = &store_.add("gru.w_hidden", nn::gaussian<S>(init, h, 3 * h, 1.0 / std::sqrt(double(h))));
    b_input_ = &store_.add("gru.b_input", Mat<S>::Zero(1, 3 * h), true, 1);
    b_hidden_ = &store_.add("gru.b_hidden", Mat<S>::Zero(1, 3 * h), true, 1);
    w_out_ = &store_.add("output.weight", nn::gaussian<S>(init, h, v, 1.0 / std::sqrt(double(h))));
    b_out_ = &store_.add("output.bias", Mat<S>::Zero(1, v), true, 1);
  }
  GruLm(const GruLm&) = delete;
  GruLm& operator=(const GruLm&) = delete;
  GruLm(GruLm&&) = default;

  const text::Vocab& vocab() const { return vocab_; }
  ad::ParamStore<S>& params() { return store_; }

  /// Mean token cross-entropy of a batch, as a graph.
  Tensor<S> loss(std::span<const Tokens> sentences) {
    std::vector<int> targets;
    const Tensor<S> logits = forward(sentences, targets);
    return ad::cross_entropy(logits, targets, text::Vocab::kPad);
  }

  /// One pass over `corpus` in shuffled batches; returns the mean loss.
  double train_epoch(std::span<const Tokens> corpus, Rng& rng) {
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double total = 0.0;
    int batches = 0;
    const ad::AdamOptions opt{cfg_.lr, 0.9, 0.999, 1e-8};
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg_.batch)) {
      std::vector<Tokens> batch;
      for (std::size_t i = at; i < std::min(order.size(), at + static_cast<std::size_t>(cfg_.batch)); ++i) {
        batch.push_back(corpus[order[i]]);
      }
      Tensor<S> l = loss(batch);
      ad::backward(l);
      if (cfg_.clip > 0) ad::clip_grad_norm(store_, static_cast<S>(cfg_.clip));
      ad::adam_step(store_, opt);
      total += static_cast<double>(l.value()(0, 0));
      ++batches;
    }
    return total / std::max(batches, 1);
  }

  std::vector<std::vector<double>> log_probs(std::span<const Tokens> sentences) const override {
    ad::NoGradGuard no_grad;
    std::vector<int> targets;
    const Tensor<S> out_logits = const_cast<GruLm*>(this)->forward(sentences, targets);
    const Mat<S>& logits = out_logits.value();
    const auto b = static_cast<Index>(sentences.size());
    std::vector<std::vector<double>> out(sentences.size());
    for (Index r = 0; r < logits.rows(); ++r) {
      const int t = targets[static_cast<std::size_t>(r)];
      if (t == text::Vocab::kPad) continue;
      const auto row = logits.row(r).template cast<double>();
      const double m = row.maxCoeff();
      const double lse = m + std::log((row.array() - m).exp().sum());
      out[static_cast<std::size_t>(r % b)].push_back(row(t) - lse);
    }
    return out;
  }

 private:
  // Logits for every (step, sentence) pair, step-major; `targets` receives
  // the matching next-token ids with PAD past each sentence's EOS.
  Tensor<S> forward(std::span<const Tokens> sentences, std::vector<int>& targets) {
    const auto b = static_cast<Index>(sentences.size());
    const Index h = cfg_.hidden;
    std::size_t steps = 0;
    for (const auto& s : sentences) steps = std::max(steps, s.size() + 1);
    std::vector<std::vector<int>> ids;
    for (const auto& s : sentences) {
      std::vector<int> row{text::Vocab::kBos};
      for (const auto& w : s) row.push_back(vocab_.id(w));
      row.push_back(text::Vocab::kEos);
      row.resize(steps + 1, text::Vocab::kPad);
      ids.push_back(std::move(row));
    }
    Tensor<S> emb = ad::leaf(*embedding_);
    Tensor<S> wi = ad::leaf(*w_input_);
    Tensor<S> wh = ad::leaf(*w_hidden_);
    Tensor<S> bi = ad::leaf(*b_input_);
    Tensor<S> bh = ad::leaf(*b_hidden_);
    Tensor<S> state = ad::constant<S>(Mat<S>::Zero(b, h));
    std::vector<Tensor<S>> hiddens;
    targets.clear();
    for (std::size_t t = 0; t < steps; ++t) {
      std::vector<int> in;
      for (const auto& row : ids) {
        in.push_back(row[t]);
        targets.push_back(row[t + 1]);
      }
      const Tensor<S> gx = ad::add_row(ad::matmul(ad::gather_rows(emb, std::span<const int>(in)), wi), bi);
      const Tensor<S> gh = ad::add_row(ad::matmul(state, wh), bh);
      const Tensor<S> z = ad::sigmoid(ad::add(ad::slice_cols(gx, 0, h), ad::slice_cols(gh, 0, h)));
      const Tensor<S> r = ad::sigmoid(ad::add(ad::slice_cols(gx, h, h), ad::slice_cols(gh, h, h)));
      const Tensor<S> n = ad::tanh(ad::add(ad::slice_cols(gx, 2 * h, h), ad::mul(r, ad::slice_cols(gh, 2 * h, h))));
      state = ad::add(n, ad::mul(z, ad::sub(state, n)));
      hiddens.push_back(state);
    }
    return ad::add_row(ad::matmul(ad::concat_rows(hiddens), ad::leaf(*w_out_)), ad::leaf(*b_out_));
  }

  text::Vocab vocab_;
  LmConfig cfg_;
  ad::ParamStore<S> store_;
  ad::Parameter<S>* embedding_ = nullptr;
  ad::Parameter<S>* w_input_ = nullptr;
  ad::Parameter<S>* w_hidden_ = nullptr;
  ad::Parameter<S>* b_input_ = nullptr;
  ad::Parameter<S>* b_hidden_ = nullptr;
  ad::Parameter<S>* w_out_ = nullptr;
  ad::Parameter<S>* b_out_ = nullptr;
};

/// Builds the capped vocabulary and trains for cfg.epochs.
template <typename S = float>
GruLm<S> train_lm(std::span<const Tokens> corpus, const LmConfig& cfg, Rng& rng) {
  if (corpus.empty()) throw ContractError("train_lm: empty training corpus");
  GruLm<S> lm(lm_vocab(corpus, cfg.vocab_cap), cfg, rng);
  for (int e = 0; e < cfg.epochs; ++e) lm.train_epoch(corpus, rng);
  return lm;
}

/// Perplexity on `generated` of an LM trained on real training data.
inline double forward_ppl(std::span<const Tokens> real_train, std::span<const Tokens> generated, const LmConfig& cfg,
                          std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "lm.forward");
  return perplexity(train_lm<float>(real_train, cfg, rng), generated);
}

/// Perplexity on real test data of an LM trained on generated text.
inline double reverse_ppl(std::span<const Tokens> generated, std::span<const Tokens> real_test, const LmConfig& cfg,
                          std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "lm.reverse");
  return perplexity(train_lm<float>(generated, cfg, rng), real_test);
}

}  // namespace bgan::eval
