// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bgan/core/adam.hpp"
#include "bgan/text/corpus.hpp"

namespace bgan::train {

struct OptimizerConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip = 5.0;  // global gradient norm, 0 disables

  ad::AdamOptions adam() const { return {lr, beta1, beta2, eps}; }
};

/// Everything a training run depends on. Paths are resolved relative to the
/// config file by load_config.
struct TrainConfig {
  // data
  std::filesystem::path corpus_l1;
  std::filesystem::path corpus_l2;
  std::filesystem::path bpe_model;   // learned from the corpora when empty
  std::filesystem::path vocab;       // built from the corpora when empty
  std::filesystem::path embeddings;  // optional pretrained table
  int num_merges = 500;
  int max_len = 35;
  text::NoiseConfig noise;

  // translation unit
  int d_model = 64;
  int layers = 2;
  int heads = 4;
  int ff_mult = 4;
  double logit_scale = 0.5;

  // latent GAN
  int d_z = 32;
  int gan_blocks = 2;
  double code_noise = 0.05;
  int power_iterations = 1;

  OptimizerConfig ae_opt;
  OptimizerConfig gan_opt{1e-4, 0.5, 0.999, 1e-8, 0.0};

  int batch_size = 32;
  std::uint64_t seed = 1;

  // phases (disabled phases are still reported, with loss 0 and no update)
  bool phase_ae = true;
  bool phase_bt = true;
  bool phase_gan = true;

  // run control, excluded from the config hash
  std::filesystem::path out_dir = "run";
  int total_iterations = 1000;
  int checkpoint_every = 0;  // 0: only the final checkpoint
  int log_every = 100;
};

/// Parses a JSON document. Every problem found (unknown keys, wrong types,
/// invalid values) is collected in `errors`; the returned config is only
/// meaningful when `errors` is empty.
TrainConfig parse_config(const std::string& json_text, std::vector<std::string>& errors);

/// Reads and parses a config file; relative paths in it are resolved
/// against the file's directory.
TrainConfig load_config(const std::filesystem::path& path, std::vector<std::string>& errors);

/// Range checks on a parsed config (does not touch the filesystem).
std::vector<std::string> validate(const TrainConfig& cfg);

/// Checks that input files exist and are readable.
std::vector<std::string> check_inputs(const TrainConfig& cfg);

std::string to_json(const TrainConfig& cfg, int indent = 2);

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(const std::string& bytes);
std::string hex(const Digest& d);

/// Digest of the model-defining part of the config (run control excluded).
Digest config_hash(const TrainConfig& cfg);

}  // namespace bgan::train
