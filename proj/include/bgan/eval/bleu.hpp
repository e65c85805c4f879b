// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace bgan::eval {

using Tokens = std::vector<std::string>;

/// Reference set with per-order maximum n-gram counts precomputed, so many
/// hypotheses can be scored against one (possibly large) corpus.
class BleuReferences {
 public:
  BleuReferences(std::span<const Tokens> refs, int max_order);

  /// BLEU-N in [0, 100]: geometric mean of clipped n-gram precisions for
  /// n = 1..N times the brevity penalty exp(1 − r/c) when c < r, r being
  /// the reference length closest to c (shorter wins ties). No smoothing:
  /// any zero precision gives 0.
  double score(std::span<const std::string> hyp, int order) const;

  int max_order() const { return max_order_; }

 private:
  int max_order_;
  std::vector<std::map<std::vector<std::string>, int>> max_counts_;  // index n-1
  std::vector<std::size_t> lengths_;                                 // sorted, unique
};

double bleu_n(std::span<const std::string> hyp, std::span<const Tokens> refs, int order);

/// Mean over generated sentences of BLEU-N against the whole test corpus.
double generation_bleu(std::span<const Tokens> generated, std::span<const Tokens> test_refs, int order);

}  // namespace bgan::eval
