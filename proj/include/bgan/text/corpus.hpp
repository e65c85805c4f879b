// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bgan/core/rng.hpp"
#include "bgan/text/bpe.hpp"
#include "bgan/text/vocab.hpp"

namespace bgan::text {

enum class Lang : std::uint8_t { L1 = 1, L2 = 2 };

inline Lang other(Lang l) { return l == Lang::L1 ? Lang::L2 : Lang::L1; }
inline int to_int(Lang l) { return static_cast<int>(l); }
Lang lang_from_int(int value);

/// BOS … EOS framed token ids in one language.
struct Sentence {
  std::vector<int> ids;
  Lang lang = Lang::L1;

  std::size_t interior_size() const { return ids.size() >= 2 ? ids.size() - 2 : 0; }
  std::span<const int> interior() const {
    return std::span<const int>(ids).subspan(1, interior_size());
  }
  bool operator==(const Sentence&) const = default;
};

/// Exactly one BOS (first), one EOS (last), no PAD, ids inside the vocab.
bool well_formed(const Sentence& s, int vocab_size);

Sentence frame(std::span<const int> interior, Lang lang);

/// Tokenize, BPE-encode and map to ids (UNK for unknown subwords).
Sentence encode_sentence(std::string_view line, Lang lang, const BpeModel& bpe, const Vocab& vocab);

/// Word-level surface form: subwords joined at "</w>" boundaries, space separated.
std::string decode_sentence(const Sentence& s, const Vocab& vocab);
std::vector<std::string> decode_words(const Sentence& s, const Vocab& vocab);

std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, std::span<const std::string> lines);

// ---------------------------------------------------------------------------
// Denoising corruption

struct NoiseConfig {
  double p_drop = 0.1;
  int k_shuffle = 3;
};

/// Drops each interior token with probability p_drop (keeping the original
/// interior if everything would go), then applies a local shuffle where no
/// token moves more than k_shuffle positions. Frame tokens stay put.
Sentence apply_noise(const Sentence& s, const NoiseConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Filtering and batching

struct FilterResult {
  std::vector<Sentence> kept;
  std::size_t dropped = 0;
  double dropped_fraction = 0.0;
};

/// Drops sentences whose interior length exceeds `max_len`.
FilterResult length_filter(std::span<const Sentence> corpus, std::size_t max_len);

using IdMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Right-padded id matrix of framed sentences from one language.
struct Batch {
  IdMatrix ids;
  std::vector<int> lengths;  // framed lengths
  Lang lang = Lang::L1;

  std::size_t size() const { return lengths.size(); }
  int width() const { return static_cast<int>(ids.cols()); }
  Sentence sentence(std::size_t i) const;
};

Batch make_batch(std::span<const Sentence> sentences);

/// Endless shuffled batches over a fixed corpus. Each epoch is a fresh
/// permutation drawn from the stream's own generator; a tail shorter than
/// the batch size is skipped.
class BatchStream {
 public:
  BatchStream(std::vector<Sentence> corpus, std::size_t batch_size, Rng rng);

  Batch next();

  std::size_t epoch() const { return epoch_; }
  std::size_t corpus_size() const { return corpus_.size(); }
  const std::vector<Sentence>& corpus() const { return corpus_; }

  std::string serialize_state() const;
  void restore_state(const std::string& state);

 private:
  void reshuffle();

  std::vector<Sentence> corpus_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

// ---------------------------------------------------------------------------
// Pretrained embeddings ("token v1 … vd" per line)

struct PretrainedEmbeddings {
  int dim = 0;
  std::map<std::string, std::vector<double>> vectors;
};

PretrainedEmbeddings load_embeddings(const std::filesystem::path& path);
void save_embeddings(const std::filesystem::path& path, const PretrainedEmbeddings& emb);

}  // namespace bgan::text
