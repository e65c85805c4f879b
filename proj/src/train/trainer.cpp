// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgan/train/trainer.hpp"

#include <cstdio>

#include "bgan/core/adam.hpp"
#include "bgan/errors.hpp"

namespace bgan::train {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::AeL1: return "ae1";
    case Phase::AeL2: return "ae2";
    case Phase::BtL1: return "bt1";
    case Phase::BtL2: return "bt2";
    case Phase::Discriminator: return "disc";
    case Phase::Generator: return "gen";
  }
  return "?";
}

std::string loss_row(const LossRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%llu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", static_cast<unsigned long long>(r.iter),
                r.ae1, r.ae2, r.bt1, r.bt2, r.d_loss, r.g_loss);
  return buf;
}

nmt::ModelConfig model_config(const TrainConfig& cfg, int vocab_size) {
  nmt::ModelConfig m;
  m.vocab_size = vocab_size;
  m.d_model = cfg.d_model;
  m.layers = cfg.layers;
  m.heads = cfg.heads;
  m.ff_mult = cfg.ff_mult;
  m.max_len = cfg.max_len;
  m.logit_scale = cfg.logit_scale;
  return m;
}

gan::GanConfig gan_config(const TrainConfig& cfg) {
  gan::GanConfig g;
  g.d_model = cfg.d_model;
  g.d_z = cfg.d_z;
  g.t_gen = cfg.max_len + 2;
  g.heads = cfg.heads;
  g.ff_mult = cfg.ff_mult;
  g.blocks = cfg.gan_blocks;
  return g;
}

Digest vocab_hash(const text::Vocab& vocab) { return sha256(vocab.serialize()); }

namespace {

const char* kStreamNames[] = {"ae.l1", "ae.l2", "bt.l1", "bt.l2", "gan.l1", "gan.l2"};

}  // namespace

Trainer::Trainer(const TrainConfig& cfg, text::Vocab vocab, std::vector<Sentence> l1, std::vector<Sentence> l2,
                 const text::PretrainedEmbeddings* embeddings)
    : cfg_(cfg),
      vocab_(std::move(vocab)),
      noise_rng_(Rng::substream(cfg.seed, "noise")),
      code_noise_rng_(Rng::substream(cfg.seed, "code_noise")),
      z_rng_(Rng::substream(cfg.seed, "z")) {
  if (auto errors = validate(cfg); !errors.empty()) throw std::invalid_argument("invalid config: " + errors.front());
  if (l1.empty() || l2.empty()) throw std::invalid_argument("both training corpora must be nonempty");
  for (const auto* corpus : {&l1, &l2}) {
    for (const auto& s : *corpus) {
      if (!text::well_formed(s, vocab_.size())) throw std::invalid_argument("malformed training sentence");
      if (s.interior_size() > static_cast<std::size_t>(cfg.max_len)) {
        throw std::invalid_argument("training sentence longer than max_len; apply length_filter first");
      }
    }
  }
  Rng init = Rng::substream(cfg.seed, "init");
  model_ = std::make_unique<nmt::TranslationModel<Real>>(model_config(cfg, vocab_.size()), init);
  if (embeddings != nullptr) model_->load_pretrained(*embeddings, vocab_);
  gen_ = std::make_unique<gan::Generator<Real>>(gan_config(cfg), init);
  disc_ = std::make_unique<gan::Discriminator<Real>>(gan_config(cfg), init);

  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (const char* name : kStreamNames) {
    const bool first = std::string(name).back() == '1';
    streams_.emplace(name, text::BatchStream(first ? l1 : l2, batch, Rng::substream(cfg.seed, std::string("batch.") + name)));
  }
}

void Trainer::notify(Phase phase, bool applied, double loss, Lang real_lang) const {
  if (!observer_) return;
  PhaseEvent e;
  e.iteration = iteration_;
  e.phase = phase;
  e.applied = applied;
  e.real_lang = real_lang;
  e.loss = loss;
  e.nmt_steps = model_->params().step();
  e.gen_steps = gen_->params().step();
  e.disc_steps = disc_->params().step();
  observer_(e);
}

double Trainer::nmt_update(const ad::Tensor<Real>& loss) {
  auto& store = model_->params();
  ad::backward(loss);
  if (cfg_.ae_opt.clip > 0) ad::clip_grad_norm(store, static_cast<Real>(cfg_.ae_opt.clip));
  ad::adam_step(store, cfg_.ae_opt.adam());
  return static_cast<double>(loss.item());
}

LossRecord Trainer::step() {
  ++iteration_;
  LossRecord rec;
  rec.iter = iteration_;

  // (1), (2) denoising autoencoding, Eq. (1)
  for (auto [phase, name, out] : {std::tuple{Phase::AeL1, "ae.l1", &rec.ae1}, std::tuple{Phase::AeL2, "ae.l2", &rec.ae2}}) {
    if (cfg_.phase_ae) {
      const auto batch = streams_.at(name).next();
      *out = nmt_update(model_->reconstruction_loss(batch, cfg_.noise, noise_rng_));
    }
    notify(phase, cfg_.phase_ae, *out);
  }

  // (3), (4) on-the-fly back-translation, Eq. (2)
  for (auto [phase, name, out] : {std::tuple{Phase::BtL1, "bt.l1", &rec.bt1}, std::tuple{Phase::BtL2, "bt.l2", &rec.bt2}}) {
    if (cfg_.phase_bt) {
      const auto batch = streams_.at(name).next();
      *out = nmt_update(model_->cross_domain_loss(batch));
    }
    notify(phase, cfg_.phase_bt, *out);
  }

  // (5) discriminator: reals from L1 on odd iterations, L2 on even
  const Lang real_lang = iteration_ % 2 == 1 ? Lang::L1 : Lang::L2;
  // fakes are cut to the lengths of this iteration's reals, in both updates
  std::vector<int> real_lengths;
  auto match_lengths = [&](const nmt::CodeBatch<Real>& fake) {
    std::vector<int> lengths(fake.size());
    for (std::size_t i = 0; i < lengths.size(); ++i) lengths[i] = real_lengths[i % real_lengths.size()];
    return gan::truncate_codes(fake, lengths);
  };
  if (cfg_.phase_gan) {
    disc_->update_spectral_state(cfg_.power_iterations);
    nmt::CodeBatch<Real> real;
    nmt::CodeBatch<Real> fake;
    {
      ad::NoGradGuard frozen;
      real = model_->encode(streams_.at(real_lang == Lang::L1 ? "gan.l1" : "gan.l2").next());
      real = nmt::add_code_noise(real, cfg_.code_noise, code_noise_rng_);
      real_lengths = real.lengths;
      fake = match_lengths((*gen_)(gen_->sample(cfg_.batch_size, z_rng_)));
    }
    const auto loss = gan::d_loss((*disc_)(real), (*disc_)(fake));
    ad::backward(loss);
    ad::adam_step(disc_->params(), cfg_.gan_opt.adam());
    rec.d_loss = static_cast<double>(loss.item());
  }
  notify(Phase::Discriminator, cfg_.phase_gan, rec.d_loss, real_lang);

  // (6) generator
  if (cfg_.phase_gan) {
    const auto loss = gan::g_loss((*disc_)(match_lengths((*gen_)(gen_->sample(cfg_.batch_size, z_rng_)))));
    ad::backward(loss);
    ad::adam_step(gen_->params(), cfg_.gan_opt.adam());
    disc_->params().zero_grad();
    rec.g_loss = static_cast<double>(loss.item());
  }
  notify(Phase::Generator, cfg_.phase_gan, rec.g_loss);
  return rec;
}

Checkpoint Trainer::snapshot() const {
  Checkpoint c;
  c.config_hash = config_hash(cfg_);
  c.vocab_hash = vocab_hash(vocab_);
  c.iteration = iteration_;
  export_store(c, "nmt", model_->params());
  export_store(c, "gen", gen_->params());
  export_store(c, "disc", disc_->params());
  c.states["rng.noise"] = noise_rng_.serialize();
  c.states["rng.code_noise"] = code_noise_rng_.serialize();
  c.states["rng.z"] = z_rng_.serialize();
  for (const auto& [name, stream] : streams_) c.states["stream." + name] = stream.serialize_state();
  return c;
}

void Trainer::save(const std::filesystem::path& path) const { write_checkpoint(path, snapshot()); }

void Trainer::restore(const Checkpoint& c) {
  if (c.vocab_hash != vocab_hash(vocab_)) throw FormatError("checkpoint vocabulary hash does not match");
  if (c.config_hash != config_hash(cfg_)) throw FormatError("checkpoint config hash does not match");
  auto state = [&](const std::string& name) -> const std::string& {
    auto it = c.states.find(name);
    if (it == c.states.end()) throw FormatError("checkpoint lacks state " + name);
    return it->second;
  };
  import_store(c, "nmt", model_->params(), true);
  import_store(c, "gen", gen_->params(), true);
  import_store(c, "disc", disc_->params(), true);
  noise_rng_.deserialize(state("rng.noise"));
  code_noise_rng_.deserialize(state("rng.code_noise"));
  z_rng_.deserialize(state("rng.z"));
  for (auto& [name, stream] : streams_) stream.restore_state(state("stream." + name));
  iteration_ = c.iteration;
}

}  // namespace bgan::train
