// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bgan/gan/latent_gan.hpp"
#include "bgan/nmt/translation_model.hpp"
#include "bgan/train/checkpoint.hpp"
#include "bgan/train/config.hpp"

namespace bgan::train {

using text::Lang;
using text::Sentence;

enum class Phase { AeL1, AeL2, BtL1, BtL2, Discriminator, Generator };

const char* phase_name(Phase p);

/// Reported after every phase of every iteration, including disabled ones.
struct PhaseEvent {
  std::uint64_t iteration = 0;
  Phase phase = Phase::AeL1;
  bool applied = false;  // an optimizer update took place
  Lang real_lang = Lang::L1;  // discriminator phase: language of the real codes
  double loss = 0.0;
  std::uint64_t nmt_steps = 0;
  std::uint64_t gen_steps = 0;
  std::uint64_t disc_steps = 0;
};

using PhaseObserver = std::function<void(const PhaseEvent&)>;

struct LossRecord {
  std::uint64_t iter = 0;
  double ae1 = 0, ae2 = 0, bt1 = 0, bt2 = 0, d_loss = 0, g_loss = 0;
};

inline constexpr const char* kLossHeader = "iter,ae1,ae2,bt1,bt2,d_loss,g_loss";
std::string loss_row(const LossRecord& r);

nmt::ModelConfig model_config(const TrainConfig& cfg, int vocab_size);
gan::GanConfig gan_config(const TrainConfig& cfg);

Digest vocab_hash(const text::Vocab& vocab);

/// Training state for one run: the translation unit, generator and
/// discriminator, their optimizers, and every random stream. Iterations
/// are numbered from 1.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, text::Vocab vocab, std::vector<Sentence> l1, std::vector<Sentence> l2,
          const text::PretrainedEmbeddings* embeddings = nullptr);

  /// Runs the next iteration: AE on L1, AE on L2, back-translation
  /// L1→L2→L1, back-translation L2→L1→L2, one discriminator update (reals
  /// from L1 on odd iterations, L2 on even), one generator update.
  LossRecord step();

  std::uint64_t iteration() const { return iteration_; }
  void set_observer(PhaseObserver obs) { observer_ = std::move(obs); }

  const TrainConfig& config() const { return cfg_; }
  const text::Vocab& vocab() const { return vocab_; }
  nmt::TranslationModel<Real>& model() { return *model_; }
  gan::Generator<Real>& generator() { return *gen_; }
  gan::Discriminator<Real>& discriminator() { return *disc_; }

  Checkpoint snapshot() const;
  void save(const std::filesystem::path& path) const;

  /// Restores a snapshot taken by a run with the same config hash and
  /// vocabulary; refuses anything else.
  void restore(const Checkpoint& ckpt);
  void load(const std::filesystem::path& path) { restore(read_checkpoint(path)); }

 private:
  double nmt_update(const ad::Tensor<Real>& loss);
  void notify(Phase phase, bool applied, double loss, Lang real_lang = Lang::L1) const;

  TrainConfig cfg_;
  text::Vocab vocab_;
  std::unique_ptr<nmt::TranslationModel<Real>> model_;
  std::unique_ptr<gan::Generator<Real>> gen_;
  std::unique_ptr<gan::Discriminator<Real>> disc_;

  std::map<std::string, text::BatchStream> streams_;
  Rng noise_rng_;
  Rng code_noise_rng_;
  Rng z_rng_;

  std::uint64_t iteration_ = 0;
  PhaseObserver observer_;
};

}  // namespace bgan::train
