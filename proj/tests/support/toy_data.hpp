// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small synthetic corpora for tests: a template grammar over a few dozen
// words, and a cipher language that substitutes every word by a fixed
// image.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bgan/core/rng.hpp"
#include "bgan/text/bpe.hpp"
#include "bgan/text/corpus.hpp"
#include "bgan/text/tokenizer.hpp"

namespace bgan::toy {

struct Grammar {
  std::vector<std::string> dets{"the", "a"};
  std::vector<std::string> nouns{"cat", "dog", "bird", "fish", "horse", "cow", "girl", "boy", "man", "woman", "child", "king"};
  std::vector<std::string> verbs{"sees", "likes", "eats", "finds", "wants", "takes", "holds", "meets"};
  std::vector<std::string> adjs{"red", "big", "small", "old", "young", "happy", "sad", "green"};
  std::vector<std::string> preps{"with", "near"};

  std::vector<std::string> words() const {
    std::vector<std::string> all;
    for (const auto* g : {&dets, &nouns, &verbs, &adjs, &preps}) all.insert(all.end(), g->begin(), g->end());
    return all;
  }

  std::string sentence(Rng& rng) const {
    auto pick = [&](const std::vector<std::string>& g) { return g[rng.below(g.size())]; };
    auto np = [&](bool adj) {
      std::string s = pick(dets) + " ";
      if (adj) s += pick(adjs) + " ";
      return s + pick(nouns);
    };
    switch (rng.below(5)) {
      case 0: return np(false) + " " + pick(verbs) + " " + np(false);
      case 1: return np(true) + " " + pick(verbs) + " " + np(false);
      case 2: return np(false) + " " + pick(verbs) + " " + np(true);
      case 3: return np(true) + " " + pick(verbs) + " " + np(true);
      default: return np(false) + " " + pick(verbs) + " " + np(false) + " " + pick(preps) + " " + np(false);
    }
  }
};

/// Distinct grammar sentences, in generation order.
inline std::vector<std::string> distinct_sentences(const Grammar& g, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    auto s = g.sentence(rng);
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

/// Substitution image of a word: reversed, with a "q" prefix. Injective,
/// and never collides with a grammar word.
inline std::string cipher_word(const std::string& w) {
  std::string r(w.rbegin(), w.rend());
  return "q" + r;
}

inline std::string cipher_sentence(const std::string& s) {
  std::string out;
  for (const auto& w : text::tokenize(s)) {
    if (!out.empty()) out += ' ';
    out += cipher_word(w);
  }
  return out;
}

/// Cross-lingual table in which a word and its image share a random vector
/// up to independent perturbations of relative size `spread`. Keys are the
/// whole-word subwords ("cat</w>").
inline text::PretrainedEmbeddings aligned_embeddings(const std::vector<std::string>& words, int dim, double spread,
                                                     std::uint64_t seed) {
  Rng rng(seed);
  text::PretrainedEmbeddings emb;
  emb.dim = dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (const auto& w : words) {
    std::vector<double> shared(static_cast<std::size_t>(dim));
    for (auto& x : shared) x = rng.normal() * scale;
    for (const auto& token : {w, cipher_word(w)}) {
      std::vector<double> v = shared;
      for (auto& x : v) x += spread * rng.normal() * scale;
      emb.vectors[token + std::string(text::kEndOfWord)] = std::move(v);
    }
  }
  return emb;
}

inline void write_corpus(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  text::write_lines(path, lines);
}

}  // namespace bgan::toy
