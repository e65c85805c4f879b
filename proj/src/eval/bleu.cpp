// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgan/eval/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bgan::eval {

namespace {

using Gram = std::vector<std::string>;

std::map<Gram, int> ngram_counts(std::span<const std::string> s, int n) {
  std::map<Gram, int> counts;
  const auto len = static_cast<int>(s.size());
  for (int i = 0; i + n <= len; ++i) ++counts[Gram(s.begin() + i, s.begin() + i + n)];
  return counts;
}

}  // namespace

BleuReferences::BleuReferences(std::span<const Tokens> refs, int max_order) : max_order_(max_order) {
  if (max_order < 1) throw std::invalid_argument("BLEU order must be at least 1");
  if (refs.empty()) throw std::invalid_argument("BLEU needs at least one reference");
  max_counts_.resize(static_cast<std::size_t>(max_order));
  for (const auto& r : refs) {
    lengths_.push_back(r.size());
    for (int n = 1; n <= max_order; ++n) {
      auto& best = max_counts_[static_cast<std::size_t>(n - 1)];
      for (const auto& [gram, count] : ngram_counts(r, n)) {
        int& slot = best[gram];
        slot = std::max(slot, count);
      }
    }
  }
  std::sort(lengths_.begin(), lengths_.end());
  lengths_.erase(std::unique(lengths_.begin(), lengths_.end()), lengths_.end());
}

double BleuReferences::score(std::span<const std::string> hyp, int order) const {
  if (order < 1 || order > max_order_) throw std::invalid_argument("BLEU order outside the precomputed range");
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= order; ++n) {
    const auto counts = ngram_counts(hyp, n);
    int total = 0;
    int clipped = 0;
    const auto& best = max_counts_[static_cast<std::size_t>(n - 1)];
    for (const auto& [gram, count] : counts) {
      total += count;
      auto it = best.find(gram);
      if (it != best.end()) clipped += std::min(count, it->second);
    }
    if (clipped == 0) return 0.0;  // also covers n > |hyp|
    log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
  }
  const auto c = static_cast<double>(hyp.size());
  // closest reference length, shorter on ties
  double r = static_cast<double>(lengths_.front());
  for (auto len : lengths_) {
    if (std::abs(static_cast<double>(len) - c) < std::abs(r - c)) r = static_cast<double>(len);
  }
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * bp * std::exp(log_sum / order);
}

double bleu_n(std::span<const std::string> hyp, std::span<const Tokens> refs, int order) {
  return BleuReferences(refs, order).score(hyp, order);
}

double generation_bleu(std::span<const Tokens> generated, std::span<const Tokens> test_refs, int order) {
  if (generated.empty()) throw std::invalid_argument("generation BLEU needs generated sentences");
  const BleuReferences refs(test_refs, order);
  double sum = 0.0;
  for (const auto& g : generated) sum += refs.score(g, order);
  return sum / static_cast<double>(generated.size());
}

}  // namespace bgan::eval
