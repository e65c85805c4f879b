// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgan/train/run.hpp"

#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "bgan/errors.hpp"
#include "bgan/text/tokenizer.hpp"

namespace bgan::train {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::vector<std::string>> tokenize_all(const std::vector<std::string>& lines) {
  std::vector<std::vector<std::string>> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(text::tokenize(l));
  return out;
}

// Keeps the header and the rows up to and including `last_iter`.
std::vector<std::string> trace_prefix(const std::filesystem::path& path, std::uint64_t last_iter) {
  std::vector<std::string> kept{kLossHeader};
  if (!std::filesystem::exists(path)) return kept;
  for (const auto& line : text::read_lines(path)) {
    if (line.empty() || line == kLossHeader) continue;
    const auto iter = std::stoull(line.substr(0, line.find(',')));
    if (iter <= last_iter) kept.push_back(line);
  }
  return kept;
}

}  // namespace

PreparedData prepare_data(const TrainConfig& cfg) {
  PreparedData d;
  const auto lines1 = text::read_lines(cfg.corpus_l1);
  const auto lines2 = text::read_lines(cfg.corpus_l2);
  const auto words1 = tokenize_all(lines1);
  const auto words2 = tokenize_all(lines2);
  if (!cfg.bpe_model.empty()) {
    d.bpe = text::BpeModel::load(cfg.bpe_model);
    d.vocab = text::Vocab::load(cfg.vocab);
  } else {
    std::vector<std::vector<std::string>> joint = words1;
    joint.insert(joint.end(), words2.begin(), words2.end());
    d.bpe = text::learn_bpe(joint, static_cast<std::size_t>(cfg.num_merges));
    d.vocab = text::build_vocab(joint, d.bpe);
  }
  auto encode = [&](const std::vector<std::string>& lines, Lang lang, std::size_t& dropped) {
    std::vector<Sentence> out;
    for (const auto& l : lines) {
      if (text::tokenize(l).empty()) continue;  // blank lines carry no sentence
      out.push_back(text::encode_sentence(l, lang, d.bpe, d.vocab));
    }
    auto filtered = text::length_filter(out, static_cast<std::size_t>(cfg.max_len));
    dropped = filtered.dropped;
    return std::move(filtered.kept);
  };
  d.l1 = encode(lines1, Lang::L1, d.dropped_l1);
  d.l2 = encode(lines2, Lang::L2, d.dropped_l2);
  if (d.l1.empty() || d.l2.empty()) throw std::invalid_argument("a training corpus is empty after length filtering");
  if (!cfg.embeddings.empty()) d.embeddings = text::load_embeddings(cfg.embeddings);
  return d;
}

RunResult run_training(const TrainConfig& cfg, const RunOptions& opts) {
  if (auto errors = validate(cfg); !errors.empty()) throw std::invalid_argument("invalid config: " + errors.front());
  PreparedData data = prepare_data(cfg);
  if (opts.log != nullptr) {
    *opts.log << "corpus l1: " << data.l1.size() << " sentences (" << data.dropped_l1 << " over length)\n"
              << "corpus l2: " << data.l2.size() << " sentences (" << data.dropped_l2 << " over length)\n"
              << "vocab: " << data.vocab.size() << " subwords, " << data.bpe.size() << " merges\n";
  }
  Trainer trainer(cfg, data.vocab, data.l1, data.l2, data.embeddings ? &*data.embeddings : nullptr);
  if (!opts.resume.empty()) {
    trainer.load(opts.resume);
    if (opts.log != nullptr) *opts.log << "resumed at iteration " << trainer.iteration() << "\n";
  }
  trainer.set_observer(opts.observer);

  const RunLayout layout{cfg.out_dir};
  std::filesystem::create_directories(layout.dir);
  write_file(layout.config(), to_json(cfg) + "\n");
  data.bpe.save(layout.bpe());
  data.vocab.save(layout.vocab());

  RunResult result;
  result.loss_csv = layout.loss_csv();
  const auto prefix = trace_prefix(layout.loss_csv(), opts.resume.empty() ? 0 : trainer.iteration());
  text::write_lines(layout.loss_csv(), prefix);
  std::ofstream trace(layout.loss_csv(), std::ios::binary | std::ios::app);
  if (!trace) throw IoError("cannot append to " + layout.loss_csv().string());

  std::vector<std::filesystem::path> outputs{layout.config(), layout.bpe(), layout.vocab(), layout.loss_csv()};
  while (trainer.iteration() < static_cast<std::uint64_t>(cfg.total_iterations)) {
    const LossRecord rec = trainer.step();
    trace << loss_row(rec) << '\n';
    trace.flush();
    result.records.push_back(rec);
    if (opts.log != nullptr && cfg.log_every > 0 && rec.iter % static_cast<std::uint64_t>(cfg.log_every) == 0) {
      *opts.log << loss_row(rec) << "\n";
    }
    if (cfg.checkpoint_every > 0 && rec.iter % static_cast<std::uint64_t>(cfg.checkpoint_every) == 0) {
      trainer.save(layout.checkpoint_at(rec.iter));
      outputs.push_back(layout.checkpoint_at(rec.iter));
    }
  }
  trace.close();
  trainer.save(layout.checkpoint());
  outputs.push_back(layout.checkpoint());
  result.checkpoint = layout.checkpoint();

  std::vector<std::filesystem::path> inputs{cfg.corpus_l1, cfg.corpus_l2};
  for (const auto& p : {cfg.bpe_model, cfg.vocab, cfg.embeddings, opts.resume}) {
    if (!p.empty()) inputs.push_back(p);
  }
  write_manifest(layout.manifest(), "train", to_json(cfg), inputs, outputs);
  return result;
}

Bundle load_bundle(const std::filesystem::path& checkpoint, std::filesystem::path config, std::filesystem::path vocab,
                   std::filesystem::path bpe) {
  const RunLayout layout{checkpoint.parent_path()};
  if (config.empty()) config = layout.config();
  if (vocab.empty()) vocab = layout.vocab();
  if (bpe.empty()) bpe = layout.bpe();

  Bundle b;
  std::vector<std::string> errors;
  b.cfg = parse_config(read_file(config), errors);
  if (errors.empty()) errors = validate(b.cfg);
  if (!errors.empty()) throw FormatError(config.string() + ": " + errors.front());
  b.bpe = text::BpeModel::load(bpe);
  b.vocab = text::Vocab::load(vocab);

  const Checkpoint ckpt = read_checkpoint(checkpoint);
  if (ckpt.vocab_hash != vocab_hash(b.vocab)) {
    throw FormatError("vocabulary " + vocab.string() + " does not match checkpoint " + checkpoint.string());
  }
  if (ckpt.config_hash != config_hash(b.cfg)) {
    throw FormatError("config " + config.string() + " does not match checkpoint " + checkpoint.string());
  }
  Rng init(0);
  b.model = std::make_unique<nmt::TranslationModel<Real>>(model_config(b.cfg, b.vocab.size()), init);
  b.gen = std::make_unique<gan::Generator<Real>>(gan_config(b.cfg), init);
  import_store(ckpt, "nmt", b.model->params(), false);
  import_store(ckpt, "gen", b.gen->params(), false);
  b.iteration = ckpt.iteration;
  return b;
}

nmt::CodeBatch<Real> sample_codes(const gan::Generator<Real>& gen, int count, std::uint64_t seed) {
  ad::NoGradGuard no_grad;
  Rng rng = Rng::substream(seed, "generate");
  return gen(gen.sample(count, rng));
}

std::vector<Sentence> decode_codes(const nmt::TranslationModel<Real>& model, const nmt::CodeBatch<Real>& codes,
                                   Lang lang) {
  std::vector<Sentence> out;
  constexpr std::size_t kChunk = 64;
  for (std::size_t at = 0; at < codes.size(); at += kChunk) {
    std::vector<std::size_t> items(std::min(kChunk, codes.size() - at));
    std::iota(items.begin(), items.end(), at);
    for (auto& t : model.decode_greedy(codes.select(items), lang, model.config().max_len)) {
      out.push_back(std::move(t.sentence));
    }
  }
  return out;
}

std::vector<Sentence> translate_all(const nmt::TranslationModel<Real>& model, const std::vector<Sentence>& input,
                                    Lang to, int batch) {
  std::vector<Sentence> out;
  for (std::size_t at = 0; at < input.size(); at += static_cast<std::size_t>(batch)) {
    const std::size_t n = std::min(static_cast<std::size_t>(batch), input.size() - at);
    const auto b = text::make_batch(std::span<const Sentence>(input.data() + at, n));
    for (auto& t : model.translate(b, to, model.config().max_len)) out.push_back(std::move(t.sentence));
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) { return hex(sha256(read_file(path))); }

void write_manifest(const std::filesystem::path& path, const std::string& command, const std::string& config_json,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs) {
  nlohmann::json doc;
  doc["tool_version"] = kToolVersion;
  doc["command"] = command;
  doc["config"] = config_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(config_json);
  nlohmann::json in = nlohmann::json::array();
  for (const auto& p : inputs) in.push_back({{"path", p.string()}, {"sha256", file_sha256(p)}});
  doc["inputs"] = in;
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : outputs) out.push_back(p.string());
  doc["outputs"] = out;
  write_file(path, doc.dump(2) + "\n");
}

}  // namespace bgan::train
