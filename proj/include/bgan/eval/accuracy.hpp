// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>

#include "bgan/eval/bleu.hpp"

namespace bgan::eval {

/// Position-wise word accuracy of line-aligned outputs: matching positions
/// over the longer of each pair, summed over the corpus.
inline double word_accuracy(std::span<const Tokens> hyp, std::span<const Tokens> ref) {
  if (hyp.size() != ref.size()) throw std::invalid_argument("word_accuracy: corpora are not line-aligned");
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    const std::size_t n = std::min(hyp[i].size(), ref[i].size());
    for (std::size_t j = 0; j < n; ++j) correct += hyp[i][j] == ref[i][j] ? 1 : 0;
    total += std::max(hyp[i].size(), ref[i].size());
  }
  return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace bgan::eval
