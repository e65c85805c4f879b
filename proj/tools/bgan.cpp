// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// bgan command line: learn-bpe, train, generate, translate, evaluate.
// Exit status 0 on success, 1 on runtime failure, 2 on usage or config
// errors.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "bgan/errors.hpp"
#include "bgan/eval/accuracy.hpp"
#include "bgan/eval/bleu.hpp"
#include "bgan/eval/lm.hpp"
#include "bgan/eval/report.hpp"
#include "bgan/text/tokenizer.hpp"
#include "bgan/train/run.hpp"

namespace fs = std::filesystem;
using namespace bgan;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_files(std::initializer_list<fs::path> paths) {
  for (const auto& p : paths) {
    if (!p.empty() && !fs::is_regular_file(p)) throw UsageError("no such file: " + p.string());
  }
}

fs::path sidecar(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

std::vector<eval::Tokens> read_tokens(const fs::path& path) {
  std::vector<eval::Tokens> out;
  for (const auto& line : text::read_lines(path)) out.push_back(text::tokenize(line));
  return out;
}

// ---- learn-bpe

struct LearnBpeArgs {
  std::vector<fs::path> inputs;
  int merges = 500;
  fs::path out;
  fs::path vocab_out;
};

int learn_bpe_cmd(const LearnBpeArgs& a) {
  for (const auto& p : a.inputs) require_files({p});
  if (a.merges < 0) throw UsageError("--merges must be nonnegative");
  std::vector<std::vector<std::string>> sentences;
  for (const auto& p : a.inputs) {
    for (auto& t : read_tokens(p)) sentences.push_back(std::move(t));
  }
  const auto bpe = text::learn_bpe(sentences, static_cast<std::size_t>(a.merges));
  const auto vocab = text::build_vocab(sentences, bpe);
  const fs::path vocab_out = a.vocab_out.empty() ? sidecar(a.out, ".vocab") : a.vocab_out;
  bpe.save(a.out);
  vocab.save(vocab_out);
  train::write_manifest(sidecar(a.out, ".manifest.json"), "learn-bpe", json{{"merges", a.merges}}.dump(), a.inputs,
                        {a.out, vocab_out});
  std::cout << bpe.size() << " merges, " << vocab.size() << " vocabulary entries\n";
  return kOk;
}

// ---- train

struct TrainArgs {
  fs::path config;
  std::optional<std::uint64_t> seed;
  fs::path resume;
  fs::path out_dir;
};

int train_cmd(const TrainArgs& a) {
  require_files({a.config});
  std::vector<std::string> errors;
  train::TrainConfig cfg = train::load_config(a.config, errors);
  if (a.seed) cfg.seed = *a.seed;
  if (!a.out_dir.empty()) cfg.out_dir = fs::absolute(a.out_dir);
  for (auto* check : {&train::validate, &train::check_inputs}) {
    for (auto& e : check(cfg)) errors.push_back(std::move(e));
  }
  if (!a.resume.empty() && !fs::is_regular_file(a.resume)) errors.push_back("no such checkpoint: " + a.resume.string());
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "config error: " << e << "\n";
    return kUsage;
  }
  train::RunOptions opts;
  opts.resume = a.resume;
  opts.log = &std::cout;
  const auto result = train::run_training(cfg, opts);
  std::cout << "checkpoint: " << result.checkpoint.string() << "\n";
  return kOk;
}

// ---- generate / translate

struct BundleArgs {
  fs::path ckpt;
  fs::path config;
  fs::path vocab;
  fs::path bpe;
};

train::Bundle open_bundle(const BundleArgs& b) {
  require_files({b.ckpt, b.config, b.vocab, b.bpe});
  return train::load_bundle(b.ckpt, b.config, b.vocab, b.bpe);
}

std::vector<fs::path> bundle_inputs(const BundleArgs& b) {
  const train::RunLayout layout{b.ckpt.parent_path()};
  return {b.ckpt, b.config.empty() ? layout.config() : b.config, b.vocab.empty() ? layout.vocab() : b.vocab,
          b.bpe.empty() ? layout.bpe() : b.bpe};
}

struct GenerateArgs {
  BundleArgs bundle;
  int lang = 1;
  int count = 100;
  std::uint64_t seed = 1;
  fs::path out;
};

int generate_cmd(const GenerateArgs& a) {
  if (a.count < 1) throw UsageError("--count must be positive");
  const auto b = open_bundle(a.bundle);
  const auto codes = train::sample_codes(*b.gen, a.count, a.seed);
  std::vector<std::string> lines;
  for (const auto& s : train::decode_codes(*b.model, codes, text::lang_from_int(a.lang))) {
    lines.push_back(text::decode_sentence(s, b.vocab));
  }
  text::write_lines(a.out, lines);
  const json params{{"lang", a.lang}, {"count", a.count}, {"seed", a.seed}};
  train::write_manifest(sidecar(a.out, ".manifest.json"), "generate", params.dump(), bundle_inputs(a.bundle), {a.out});
  return kOk;
}

struct TranslateArgs {
  BundleArgs bundle;
  int from = 1;
  fs::path in;
  fs::path out;
};

int translate_cmd(const TranslateArgs& a) {
  require_files({a.in});
  const auto b = open_bundle(a.bundle);
  const text::Lang from = text::lang_from_int(a.from);
  const auto max_len = static_cast<std::size_t>(b.cfg.max_len);
  std::vector<text::Sentence> input;
  std::size_t truncated = 0;
  for (const auto& line : text::read_lines(a.in)) {
    text::Sentence s = text::encode_sentence(line, from, b.bpe, b.vocab);
    if (s.interior_size() > max_len) {
      const auto interior = s.interior();
      s = text::frame(interior.first(max_len), from);
      ++truncated;
    }
    input.push_back(std::move(s));
  }
  if (truncated > 0) std::cerr << truncated << " input lines truncated to " << max_len << " subwords\n";
  std::vector<std::string> lines;
  for (const auto& s : train::translate_all(*b.model, input, text::other(from))) {
    lines.push_back(text::decode_sentence(s, b.vocab));
  }
  text::write_lines(a.out, lines);
  auto inputs = bundle_inputs(a.bundle);
  inputs.push_back(a.in);
  train::write_manifest(sidecar(a.out, ".manifest.json"), "translate", json{{"from", a.from}}.dump(), inputs, {a.out});
  return kOk;
}

// ---- evaluate

struct EvaluateArgs {
  std::string mode;
  fs::path gen;
  fs::path real_train;
  fs::path real_test;
  fs::path out;
  std::string lm = "gru";
  int lang = 1;
  std::uint64_t seed = 1;
  int epochs = 10;
};

int evaluate_cmd(const EvaluateArgs& a) {
  auto need = [&](const fs::path& p, const char* flag) {
    if (p.empty()) throw UsageError(std::string("--mode ") + a.mode + " needs " + flag);
  };
  need(a.gen, "--gen");
  require_files({a.gen, a.real_train, a.real_test});
  std::vector<eval::MetricRow> rows;
  std::vector<fs::path> inputs{a.gen};
  const auto gen = read_tokens(a.gen);
  if (gen.empty()) throw UsageError("no sentences in " + a.gen.string());

  if (a.mode == "bleu") {
    need(a.real_test, "--real-test");
    const auto test = read_tokens(a.real_test);
    const eval::BleuReferences refs(test, 5);
    for (int n = 2; n <= 5; ++n) {
      double sum = 0.0;
      for (const auto& g : gen) sum += refs.score(g, n);
      rows.push_back({"bleu" + std::to_string(n), a.lang, sum / static_cast<double>(gen.size()), gen.size(), a.seed});
    }
    inputs.push_back(a.real_test);
  } else if (a.mode == "ppl") {
    need(a.real_train, "--real-train");
    need(a.real_test, "--real-test");
    const auto train_set = read_tokens(a.real_train);
    const auto test = read_tokens(a.real_test);
    if (a.lm == "uniform") {
      const int cap = eval::LmConfig{}.vocab_cap;
      const eval::UniformScorer fwd(eval::lm_vocab(train_set, cap).size());
      const eval::UniformScorer rev(eval::lm_vocab(gen, cap).size());
      rows.push_back({"f_ppl", a.lang, eval::perplexity(fwd, gen), gen.size(), a.seed});
      rows.push_back({"r_ppl", a.lang, eval::perplexity(rev, test), gen.size(), a.seed});
    } else {
      eval::LmConfig lm;
      lm.epochs = a.epochs;
      rows.push_back({"f_ppl", a.lang, eval::forward_ppl(train_set, gen, lm, a.seed), gen.size(), a.seed});
      rows.push_back({"r_ppl", a.lang, eval::reverse_ppl(gen, test, lm, a.seed), gen.size(), a.seed});
    }
    inputs.push_back(a.real_train);
    inputs.push_back(a.real_test);
  } else {  // accuracy
    need(a.real_test, "--real-test");
    rows.push_back({"word_acc", a.lang, eval::word_accuracy(gen, read_tokens(a.real_test)), gen.size(), a.seed});
    inputs.push_back(a.real_test);
  }
  eval::write_report(a.out, rows);
  for (const auto& r : rows) std::cout << eval::report_row(r) << "\n";
  const json params{{"mode", a.mode}, {"lm", a.lm}, {"lang", a.lang}, {"seed", a.seed}, {"epochs", a.epochs}};
  train::write_manifest(sidecar(a.out, ".manifest.json"), "evaluate", params.dump(), inputs, {a.out});
  return kOk;
}

void add_bundle_flags(CLI::App* cmd, BundleArgs& b) {
  cmd->add_option("--ckpt", b.ckpt, "checkpoint file")->required();
  cmd->add_option("--config", b.config, "run config (default: next to the checkpoint)");
  cmd->add_option("--vocab", b.vocab, "vocabulary (default: next to the checkpoint)");
  cmd->add_option("--bpe", b.bpe, "BPE model (default: next to the checkpoint)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bgan: bilingual latent-GAN text generation"};
  app.set_version_flag("--version", std::string(train::kToolVersion));
  app.require_subcommand(1);

  LearnBpeArgs lb;
  auto* c_bpe = app.add_subcommand("learn-bpe", "learn a joint BPE model and vocabulary");
  c_bpe->add_option("--input", lb.inputs, "corpus files")->required();
  c_bpe->add_option("--merges", lb.merges, "number of merges");
  c_bpe->add_option("--out", lb.out, "BPE model output")->required();
  c_bpe->add_option("--vocab-out", lb.vocab_out, "vocabulary output (default: <out>.vocab)");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "train from a JSON config");
  c_train->add_option("--config", tr.config, "config file")->required();
  c_train->add_option("--seed", tr.seed, "override the config seed");
  c_train->add_option("--resume", tr.resume, "checkpoint to resume from");
  c_train->add_option("--out-dir", tr.out_dir, "override the config out_dir");

  GenerateArgs ge;
  auto* c_gen = app.add_subcommand("generate", "sample sentences from the generator");
  add_bundle_flags(c_gen, ge.bundle);
  c_gen->add_option("--lang", ge.lang, "output language")->check(CLI::IsMember({1, 2}));
  c_gen->add_option("--count", ge.count, "number of sentences");
  c_gen->add_option("--seed", ge.seed, "noise seed");
  c_gen->add_option("--out", ge.out, "output file")->required();

  TranslateArgs tl;
  auto* c_tr = app.add_subcommand("translate", "translate a file into the other language");
  add_bundle_flags(c_tr, tl.bundle);
  c_tr->add_option("--from", tl.from, "source language")->check(CLI::IsMember({1, 2}));
  c_tr->add_option("--in", tl.in, "input file")->required();
  c_tr->add_option("--out", tl.out, "output file")->required();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "BLEU, perplexity or word accuracy report");
  c_ev->add_option("--mode", ev.mode, "bleu, ppl or accuracy")
      ->required()
      ->check(CLI::IsMember({"bleu", "ppl", "accuracy"}));
  c_ev->add_option("--gen", ev.gen, "generated (or translated) sentences");
  c_ev->add_option("--real-train", ev.real_train, "real training sentences");
  c_ev->add_option("--real-test", ev.real_test, "real test sentences (references)");
  c_ev->add_option("--out", ev.out, "report CSV")->required();
  c_ev->add_option("--lm", ev.lm, "language model for ppl")->check(CLI::IsMember({"gru", "uniform"}));
  c_ev->add_option("--lang", ev.lang, "language recorded in the report")->check(CLI::IsMember({1, 2}));
  c_ev->add_option("--seed", ev.seed, "LM training seed");
  c_ev->add_option("--epochs", ev.epochs, "LM training epochs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (c_bpe->parsed()) return learn_bpe_cmd(lb);
    if (c_train->parsed()) return train_cmd(tr);
    if (c_gen->parsed()) return generate_cmd(ge);
    if (c_tr->parsed()) return translate_cmd(tl);
    if (c_ev->parsed()) return evaluate_cmd(ev);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
