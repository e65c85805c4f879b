// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// File-level orchestration: corpus preparation, a full training run with
// its output directory, loading a trained bundle back for inference, and
// run manifests.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bgan/train/trainer.hpp"

namespace bgan::train {

inline constexpr const char* kToolVersion = "bgan 0.1.0";

struct PreparedData {
  text::BpeModel bpe;
  text::Vocab vocab;
  std::vector<Sentence> l1;
  std::vector<Sentence> l2;
  std::size_t dropped_l1 = 0;  // removed by the length filter
  std::size_t dropped_l2 = 0;
  std::optional<text::PretrainedEmbeddings> embeddings;
};

/// Reads both corpora, learns (or loads) BPE and the joint vocabulary,
/// encodes and length-filters.
PreparedData prepare_data(const TrainConfig& cfg);

struct RunOptions {
  std::filesystem::path resume;  // checkpoint to continue from
  std::ostream* log = nullptr;
  PhaseObserver observer;
};

struct RunResult {
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;
  std::vector<LossRecord> records;  // iterations run by this call
};

/// Standard file names inside a run directory.
struct RunLayout {
  std::filesystem::path dir;
  std::filesystem::path config() const { return dir / "config.json"; }
  std::filesystem::path bpe() const { return dir / "bpe.model"; }
  std::filesystem::path vocab() const { return dir / "vocab.tsv"; }
  std::filesystem::path loss_csv() const { return dir / "loss.csv"; }
  std::filesystem::path checkpoint() const { return dir / "checkpoint.bin"; }
  std::filesystem::path checkpoint_at(std::uint64_t iter) const {
    return dir / ("checkpoint-" + std::to_string(iter) + ".bin");
  }
  std::filesystem::path manifest() const { return dir / "manifest.json"; }
};

/// Trains until iteration cfg.total_iterations (a resumed run continues
/// from its checkpoint's iteration) and writes config, BPE model, vocab, loss trace, checkpoints
/// and a manifest into cfg.out_dir.
RunResult run_training(const TrainConfig& cfg, const RunOptions& opts = {});

/// A trained translation unit and generator loaded for inference.
struct Bundle {
  TrainConfig cfg;
  text::BpeModel bpe;
  text::Vocab vocab;
  std::unique_ptr<nmt::TranslationModel<Real>> model;
  std::unique_ptr<gan::Generator<Real>> gen;
  std::uint64_t iteration = 0;
};

/// Loads a checkpoint with its side files; empty paths default to the
/// files next to the checkpoint. Refuses config or vocab hash mismatches.
Bundle load_bundle(const std::filesystem::path& checkpoint, std::filesystem::path config = {},
                   std::filesystem::path vocab = {}, std::filesystem::path bpe = {});

/// Latent codes for `count` noise draws from a generator seeded with `seed`.
nmt::CodeBatch<Real> sample_codes(const gan::Generator<Real>& gen, int count, std::uint64_t seed);

/// Decodes generated codes greedily into `lang`.
std::vector<Sentence> decode_codes(const nmt::TranslationModel<Real>& model, const nmt::CodeBatch<Real>& codes,
                                   Lang lang);

/// Translates sentences in batches of `batch`.
std::vector<Sentence> translate_all(const nmt::TranslationModel<Real>& model, const std::vector<Sentence>& input,
                                    Lang to, int batch = 64);

/// Writes manifest.json: tool version, command, resolved config (any JSON
/// text), SHA-256 of every input, and the output paths.
void write_manifest(const std::filesystem::path& path, const std::string& command, const std::string& config_json,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs);

std::string file_sha256(const std::filesystem::path& path);

}  // namespace bgan::train
