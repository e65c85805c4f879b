// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks C1..C11. Usage: bgan_acceptance [C1 C2 ...]
// Prints one PASS/FAIL line per criterion; exit status 1 if any failed.

#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "bgan/core/grad_check.hpp"
#include "bgan/eval/accuracy.hpp"
#include "bgan/eval/bleu.hpp"
#include "bgan/eval/lm.hpp"
#include "bgan/gan/latent_gan.hpp"
#include "bgan/train/run.hpp"
#include "support/toy_data.hpp"

using namespace bgan;
namespace fs = std::filesystem;
using ad::Index;
using M = ad::Mat<double>;
using T = ad::Tensor<double>;
using text::Lang;
using text::Sentence;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

M random_mat(Rng& rng, Index r, Index c, double scale = 1.0) {
  M m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

double top_singular_value(const M& m) { return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0); }

fs::path workdir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bgan_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<eval::Tokens> words_of(const std::vector<Sentence>& s, const text::Vocab& vocab) {
  std::vector<eval::Tokens> out;
  for (const auto& x : s) out.push_back(text::decode_words(x, vocab));
  return out;
}

std::vector<eval::Tokens> tokenize_all(const std::vector<std::string>& lines) {
  std::vector<eval::Tokens> out;
  for (const auto& l : lines) out.push_back(text::tokenize(l));
  return out;
}

// ---------------------------------------------------------------- C1

Result c1() {
  Timer timer;
  double worst = 0.0;
  std::string worst_name;
  auto record = [&](const std::string& name, double err) {
    if (!(err <= worst)) {
      worst = err;
      worst_name = name;
    }
  };
  constexpr double kEps = 1e-5;
  Rng rng(101);

  // primitives
  using F = std::function<T(const T&)>;
  const M gain = random_mat(rng, 1, 5);
  const M bias = random_mat(rng, 1, 5);
  const M mix = random_mat(rng, 3, 5);
  const M w54 = random_mat(rng, 5, 4);
  const M w34 = random_mat(rng, 3, 4);
  const M w33 = random_mat(rng, 3, 3);
  const M w45 = random_mat(rng, 4, 5);
  const std::vector<int> targets{1, 0, 4};
  const std::vector<int> ids{2, 0, 2, 1};
  using namespace ad;
  const std::vector<std::pair<std::string, F>> ops = {
      {"matmul", [&](const T& x) { return sum(mul(matmul(x, constant(w54)), constant(w34))); }},
      {"matmul_nt", [&](const T& x) { return sum(mul(matmul_nt(x, constant(mix)), constant(w33))); }},
      {"transpose", [&](const T& x) { return sum(mul(transpose(x), constant<double>(mix.transpose()))); }},
      {"add/sub/mul", [&](const T& x) { return sum(mul(sub(add(x, x), constant(mix)), x)); }},
      {"add_row", [&](const T& x) { return sum(mul(add_row(x, slice_rows(x, 0, 1)), constant(mix))); }},
      {"scale/add_scalar", [&](const T& x) { return sum(mul(add_scalar(scale(x, 2.5), 0.3), x)); }},
      {"relu", [&](const T& x) { return sum(mul(relu(x), constant(mix))); }},
      {"leaky_relu", [&](const T& x) { return sum(mul(leaky_relu(x, 0.2), constant(mix))); }},
      {"tanh", [&](const T& x) { return sum(mul(tanh(x), constant(mix))); }},
      {"sigmoid", [&](const T& x) { return sum(mul(sigmoid(x), constant(mix))); }},
      {"gelu", [&](const T& x) { return sum(mul(gelu(x), constant(mix))); }},
      {"mean", [&](const T& x) { return mean(mul(x, x)); }},
      {"mean_rows", [&](const T& x) { return sum(mul(mean_rows(x), mean_rows(x))); }},
      {"slice/concat", [&](const T& x) {
         return sum(mul(concat_rows<double>({slice_rows(x, 1, 2), slice_rows(x, 0, 1)}), constant(mix)));
       }},
      {"slice_cols", [&](const T& x) { return sum(mul(slice_cols(x, 1, 3), slice_cols(x, 2, 3))); }},
      {"gather_rows", [&](const T& x) { return sum(mul(gather_rows(x, ids), constant(w45))); }},
      {"softmax", [&](const T& x) { return sum(mul(softmax(x, 1), constant(mix))); }},
      {"layer_norm", [&](const T& x) {
         return sum(mul(layer_norm(x, constant(gain), constant(bias), 1e-5), constant(mix)));
       }},
      {"normalize_rows", [&](const T& x) { return sum(mul(normalize_rows(x), constant(mix))); }},
      {"cross_entropy", [&](const T& x) { return cross_entropy(x, targets, -1); }},
  };
  for (const auto& [name, f] : ops) {
    for (int point = 0; point < 5; ++point) {
      const M x = random_mat(rng, 3, 5);
      record(name, grad_check<double>(f, x, kEps, [&](Index i) { return std::abs(x.data()[i]) < 1e-3; }));
    }
  }
  {
    const std::vector<AttentionSegment> segs{{0, 3, 0, 3}, {3, 2, 3, 4}};
    const M k = random_mat(rng, 7, 4);
    const M v = random_mat(rng, 7, 4);
    const M q = random_mat(rng, 5, 4);
    const M weight = random_mat(rng, 5, 4);
    record("attention.q", grad_check<double>(
                              [&](const T& x) {
                                return sum(mul(multi_head_attention(x, constant(k), constant(v), segs, 2, false),
                                               constant(weight)));
                              },
                              q, kEps));
    record("attention.k", grad_check<double>(
                              [&](const T& x) {
                                return sum(mul(multi_head_attention(constant(q), x, constant(v), segs, 2, false),
                                               constant(weight)));
                              },
                              k, kEps));
    record("attention.v", grad_check<double>(
                              [&](const T& x) {
                                return sum(mul(multi_head_attention(constant(q), constant(k), x, segs, 2, false),
                                               constant(weight)));
                              },
                              v, kEps));
  }
  {
    gan::SpectralState<double> st = gan::SpectralState<double>::random(4, 3, rng);
    const M w = random_mat(rng, 4, 3);
    gan::power_iterate(w, st, 5);
    const M probe = random_mat(rng, 4, 3);
    record("spectral_weight",
           grad_check<double>([&](const T& x) { return sum(mul(gan::spectral_weight(x, st), constant(probe))); }, w,
                              kEps));
  }

  // composed loss paths at d=8, one layer
  nmt::ModelConfig mc;
  mc.vocab_size = 20;
  mc.d_model = 8;
  mc.layers = 1;
  mc.heads = 2;
  mc.max_len = 10;
  Rng init(7);
  nmt::TranslationModel<double> model(mc, init);
  std::vector<Sentence> sents{text::frame(std::vector<int>{5, 6, 7}, Lang::L1),
                              text::frame(std::vector<int>{8, 9, 4, 12}, Lang::L1)};
  const auto batch = text::make_batch(sents);
  const text::NoiseConfig noise{0.1, 2};
  constexpr Index kCoords = 12;
  record("reconstruction loss",
         ad::grad_check_params<double>(
             model.params(),
             [&] {
               Rng r(11);
               return model.reconstruction_loss(batch, noise, r);
             },
             kEps, kCoords)
             .max_rel_error);
  const auto translated = model.back_translate_source(batch);
  record("cross-domain outer pass",
         ad::grad_check_params<double>(model.params(), [&] { return model.pair_loss(translated, batch); }, kEps,
                                       kCoords)
             .max_rel_error);

  gan::GanConfig gc;
  gc.d_model = 8;
  gc.d_z = 4;
  gc.t_gen = 5;
  gc.heads = 2;
  gc.ff_mult = 2;
  gc.blocks = 1;
  gan::Generator<double> g(gc, init);
  gan::Discriminator<double> d(gc, init);
  d.update_spectral_state(5);
  Rng zr(3);
  const auto z = g.sample(3, zr);
  nmt::CodeBatch<double> real;
  nmt::CodeBatch<double> fake;
  {
    ad::NoGradGuard no_grad;
    real = model.encode(batch);
    fake = g(z);
  }
  record("discriminator hinge loss",
         ad::grad_check_params<double>(d.params(), [&] { return gan::d_loss(d(real), d(fake)); }, kEps, kCoords)
             .max_rel_error);
  record("generator loss",
         ad::grad_check_params<double>(g.params(), [&] { return gan::g_loss(d(g(z))); }, kEps, kCoords)
             .max_rel_error);

  const double secs = timer.seconds();
  return {worst < 1e-4 && secs < 60.0,
          "max rel err " + fmt(worst, 8) + " (" + worst_name + "), " + fmt(secs, 1) + " s"};
}

// ---------------------------------------------------------------- C2

Result c2() {
  constexpr int kMatrices = 100;
  Rng rng(2026);
  int inside = 0;
  double lo = 1e9;
  double hi = 0.0;
  for (int i = 0; i < kMatrices; ++i) {
    const M w = random_mat(rng, 64, 64);
    auto st = gan::SpectralState<double>::random(64, 64, rng);
    const double s = top_singular_value(gan::spectral_normalize(w, st, 50));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    inside += s >= 0.99 && s <= 1.01 ? 1 : 0;
  }
  Eigen::Matrix<double, 2, 2, Eigen::RowMajor> diag;
  diag << 3, 0, 0, 1;
  auto st = gan::SpectralState<double>::random(2, 2, rng);
  gan::power_iterate(M(diag), st, 50);
  const double sigma = gan::spectral_sigma(M(diag), st);
  const bool diag_ok = std::abs(sigma - 3.0) < 1e-6;
  return {inside == kMatrices && diag_ok, std::to_string(inside) + "/" + std::to_string(kMatrices) +
                                              " in [0.99,1.01] (range " + fmt(lo, 4) + ".." + fmt(hi, 4) +
                                              "); diag(3,1) sigma " + fmt(sigma, 9)};
}

// ---------------------------------------------------------------- C3

Result c3() {
  auto scores = [](std::vector<double> v) {
    M m(static_cast<Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Index>(i), 0) = v[i];
    return ad::constant<double>(m);
  };
  const double a = gan::d_loss(scores({0.5}), scores({-0.3})).item();
  const double b = gan::d_loss(scores({1.0, 2.5}), scores({-1.0, -4.0})).item();
  const double c = gan::g_loss(scores({0.2, -0.6, 1.0})).item();
  const double expected_c = -(0.2 - 0.6 + 1.0) / 3.0;
  const bool ok = a == 1.2 && b == 0.0 && c == expected_c;
  return {ok, "d_loss(0.5,-0.3)=" + fmt(a, 12) + ", margin-satisfied=" + fmt(b, 12) + ", g_loss=" + fmt(c, 12)};
}

// ---------------------------------------------------------------- C4

Result c4() {
  auto toks = [](const std::string& s) { return text::tokenize(s); };
  const double a = eval::bleu_n(toks("the the the"), std::vector<eval::Tokens>{toks("the cat")}, 1);
  const double b = eval::bleu_n(toks("the cat sat down"), std::vector<eval::Tokens>{toks("the cat sat")}, 2);
  const auto s = toks("a big dog eats the small fish");
  const double c = eval::bleu_n(s, std::vector<eval::Tokens>{s}, 4);
  bool ok = std::abs(a - 33.3333) < 5e-5 && std::abs(b - 70.7107) < 5e-5 && std::abs(c - 100.0) < 5e-5;
  const toy::Grammar g;
  const auto corpus = tokenize_all(toy::distinct_sentences(g, 200, 41));
  std::string gen;
  for (int n = 2; n <= 5; ++n) {
    const double v = eval::generation_bleu(corpus, corpus, n);
    ok = ok && std::abs(v - 100.0) < 1e-9;
    gen += (n > 2 ? "," : "") + fmt(v, 2);
  }
  return {ok, "examples " + fmt(a) + ", " + fmt(b) + ", " + fmt(c) + "; identical-corpus B2..5 " + gen};
}

// ---------------------------------------------------------------- C5

class TwoTokenScorer : public eval::Scorer {
 public:
  std::vector<std::vector<double>> log_probs(std::span<const eval::Tokens> sentences) const override {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < sentences.size(); ++i) out.push_back({std::log(0.5), std::log(0.25)});
    return out;
  }
};

Result c5() {
  const toy::Grammar g;
  const auto corpus = tokenize_all(toy::distinct_sentences(g, 50, 5));
  double worst = 0.0;
  for (int v : {10, 36, 1000}) worst = std::max(worst, std::abs(eval::perplexity(eval::UniformScorer(v), corpus) - v));
  const std::vector<eval::Tokens> one{{"w"}};
  const double hand = eval::perplexity(TwoTokenScorer(), one);
  const bool ok = worst < 1e-6 && std::abs(hand - 2.0 * std::sqrt(2.0)) < 1e-4;
  return {ok, "uniform max |PPL-V| " + fmt(worst, 12) + "; hand example " + fmt(hand, 6)};
}

// ---------------------------------------------------------------- C6

Result c6() {
  Timer timer;
  const toy::Grammar g;
  const auto lines = toy::distinct_sentences(g, 64, 6);
  const auto words = tokenize_all(lines);
  const auto bpe = text::learn_bpe(words, 2000);
  const auto vocab = text::build_vocab(words, bpe);
  std::vector<Sentence> corpus;
  std::size_t longest = 0;
  for (const auto& l : lines) {
    corpus.push_back(text::encode_sentence(l, Lang::L1, bpe, vocab));
    longest = std::max(longest, corpus.back().interior_size());
  }
  nmt::ModelConfig mc;
  mc.vocab_size = vocab.size();
  mc.d_model = 64;
  mc.layers = 2;
  mc.heads = 4;
  mc.max_len = 10;
  Rng init(6);
  nmt::TranslationModel<float> model(mc, init);
  text::BatchStream stream(corpus, 32, Rng(60));
  const train::TrainConfig defaults;
  Rng noise_rng(61);
  const auto all = text::make_batch(corpus);
  double acc = 0.0;
  int iter = 0;
  while (iter < 2000) {
    ++iter;
    auto loss = model.reconstruction_loss(stream.next(), defaults.noise, noise_rng);
    ad::backward(loss);
    ad::clip_grad_norm(model.params(), static_cast<float>(defaults.ae_opt.clip));
    ad::adam_step(model.params(), defaults.ae_opt.adam());
    if (iter % 50 == 0) {
      acc = model.token_accuracy(all);
      if (acc >= 0.99) break;
    }
  }
  const double secs = timer.seconds();
  const bool ok = acc >= 0.99 && vocab.size() <= 64 && longest <= 10 && secs < 300.0;
  return {ok, "accuracy " + fmt(acc) + " at iteration " + std::to_string(iter) + ", V=" +
                  std::to_string(vocab.size()) + ", max len " + std::to_string(longest) + ", " + fmt(secs, 1) + " s"};
}

// ---------------------------------------------------------------- C7 / C9 shared setup

struct CipherSetup {
  std::vector<std::string> test;  // held-out L1 sentences
  train::TrainConfig cfg;
  train::PreparedData data;
};

CipherSetup cipher_setup(const std::string& name) {
  const auto dir = workdir(name);
  const toy::Grammar g;
  const auto all = toy::distinct_sentences(g, 1100, 7);
  std::vector<std::string> l1(all.begin(), all.begin() + 500);
  std::vector<std::string> l2;
  for (int i = 500; i < 1000; ++i) l2.push_back(toy::cipher_sentence(all[static_cast<std::size_t>(i)]));
  CipherSetup s;
  s.test.assign(all.begin() + 1000, all.end());
  toy::write_corpus(dir / "l1.txt", l1);
  toy::write_corpus(dir / "l2.txt", l2);
  text::save_embeddings(dir / "embeddings.txt", toy::aligned_embeddings(g.words(), 64, 0.3, 3));
  s.cfg.corpus_l1 = dir / "l1.txt";
  s.cfg.corpus_l2 = dir / "l2.txt";
  s.cfg.embeddings = dir / "embeddings.txt";
  s.cfg.num_merges = 2000;
  s.cfg.max_len = 10;
  s.cfg.batch_size = 32;
  s.cfg.seed = 1;
  s.cfg.out_dir = dir / "run";
  s.data = train::prepare_data(s.cfg);
  return s;
}

constexpr int kCipherIterations = 400;

std::unique_ptr<train::Trainer> train_cipher(const CipherSetup& s) {
  auto t = std::make_unique<train::Trainer>(s.cfg, s.data.vocab, s.data.l1, s.data.l2, &*s.data.embeddings);
  for (int i = 0; i < kCipherIterations; ++i) t->step();
  return t;
}

Result c7() {
  Timer timer;
  const auto s = cipher_setup("c7");
  const auto trainer = train_cipher(s);
  std::vector<Sentence> src;
  std::vector<std::string> refs;
  for (const auto& line : s.test) {
    src.push_back(text::encode_sentence(line, Lang::L1, s.data.bpe, s.data.vocab));
    refs.push_back(toy::cipher_sentence(line));
  }
  const auto out = train::translate_all(trainer->model(), src, Lang::L2);
  const double acc = eval::word_accuracy(words_of(out, s.data.vocab), tokenize_all(refs));
  const double secs = timer.seconds();
  return {acc >= 0.90 && secs < 1800.0, "held-out word accuracy " + fmt(acc) + " on " + std::to_string(src.size()) +
                                            " sentences after " + std::to_string(kCipherIterations) +
                                            " iterations, " + fmt(secs, 1) + " s"};
}

// ---------------------------------------------------------------- C8

Result c8() {
  Timer timer;
  const auto dir = workdir("c8");
  const toy::Grammar g;
  const auto all = toy::distinct_sentences(g, 1000, 8);
  const std::vector<std::string> l1(all.begin(), all.begin() + 500);
  const std::vector<std::string> refs(all.begin() + 500, all.end());
  toy::write_corpus(dir / "l1.txt", l1);
  toy::write_corpus(dir / "l2.txt", l1);

  train::TrainConfig cfg;
  cfg.corpus_l1 = dir / "l1.txt";
  cfg.corpus_l2 = dir / "l2.txt";
  cfg.num_merges = 2000;
  cfg.max_len = 10;
  cfg.seed = 8;
  cfg.out_dir = dir / "run";
  const auto data = train::prepare_data(cfg);

  // autoencoder only
  train::TrainConfig ae_cfg = cfg;
  ae_cfg.phase_bt = false;
  ae_cfg.phase_gan = false;
  train::Trainer ae(ae_cfg, data.vocab, data.l1, data.l2);
  constexpr int kAeIterations = 300;
  for (int i = 0; i < kAeIterations; ++i) ae.step();

  // latent GAN on the frozen translation unit
  train::TrainConfig gan_cfg = cfg;
  gan_cfg.phase_ae = false;
  gan_cfg.phase_bt = false;
  train::Trainer gan(gan_cfg, data.vocab, data.l1, data.l2);
  train::import_store(ae.snapshot(), "nmt", gan.model().params(), false);

  const auto ref_tokens = tokenize_all(refs);
  // BLEU-2 and the number of distinct decoded sentences
  auto measure = [&] {
    const auto codes = train::sample_codes(gan.generator(), 200, 99);
    const auto words = words_of(train::decode_codes(gan.model(), codes, Lang::L1), data.vocab);
    const std::set<eval::Tokens> distinct(words.begin(), words.end());
    return std::pair{eval::generation_bleu(words, ref_tokens, 2), distinct.size()};
  };
  const auto [before, distinct_before] = measure();
  constexpr int kGanIterations = 1500;
  for (int i = 0; i < kGanIterations; ++i) gan.step();
  const auto [after, distinct_after] = measure();
  const double secs = timer.seconds();
  return {after - before >= 20.0, "BLEU-2 untrained " + fmt(before, 2) + " -> trained " + fmt(after, 2) +
                                      " (distinct samples " + std::to_string(distinct_before) + " -> " +
                                      std::to_string(distinct_after) + "; " + std::to_string(kGanIterations) +
                                      " GAN iterations on a " + std::to_string(kAeIterations) + "-iteration AE), " +
                                      fmt(secs, 1) + " s"};
}

// ---------------------------------------------------------------- C9

Result c9() {
  Timer timer;
  const auto s = cipher_setup("c9");
  const auto trainer = train_cipher(s);
  const auto codes = train::sample_codes(trainer->generator(), 200, 9);
  const auto w1 = words_of(train::decode_codes(trainer->model(), codes, Lang::L1), s.data.vocab);
  const auto w2 = words_of(train::decode_codes(trainer->model(), codes, Lang::L2), s.data.vocab);
  auto alignment = [&](const std::vector<eval::Tokens>& a, const std::vector<eval::Tokens>& b) {
    std::vector<eval::Tokens> images;
    for (const auto& sent : a) {
      eval::Tokens im;
      for (const auto& w : sent) im.push_back(toy::cipher_word(w));
      images.push_back(im);
    }
    return eval::word_accuracy(images, b);
  };
  const double aligned = alignment(w1, w2);
  const std::set<eval::Tokens> distinct(w1.begin(), w1.end());

  // diagnostic only: the same measure on encoder codes of held-out sentences
  std::vector<Sentence> src;
  for (const auto& line : s.test) src.push_back(text::encode_sentence(line, Lang::L1, s.data.bpe, s.data.vocab));
  const auto enc = trainer->model().encode(text::make_batch(src));
  const double aligned_enc = alignment(words_of(train::decode_codes(trainer->model(), enc, Lang::L1), s.data.vocab),
                                       words_of(train::decode_codes(trainer->model(), enc, Lang::L2), s.data.vocab));

  nmt::ModelConfig mc = train::model_config(s.cfg, s.data.vocab.size());
  const auto bilingual = trainer->model().count_params();
  mc.bilingual = false;
  Rng init(0);
  const auto mono = nmt::TranslationModel<float>(mc, init).count_params();
  const double ratio = static_cast<double>(bilingual.total) / static_cast<double>(mono.total);
  const double secs = timer.seconds();
  return {aligned >= 0.80 && ratio <= 1.2, "aligned substitution images " + fmt(aligned) + " over 200 codes (" +
                                               std::to_string(distinct.size()) + " distinct; encoder codes " +
                                               fmt(aligned_enc) + "); params " +
                                               std::to_string(bilingual.total) + " vs monolingual " +
                                               std::to_string(mono.total) + " (ratio " + fmt(ratio, 5) + "), " +
                                               fmt(secs, 1) + " s"};
}

// ---------------------------------------------------------------- C10

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

train::TrainConfig small_config(const fs::path& dir, std::uint64_t seed) {
  const toy::Grammar g;
  const auto all = toy::distinct_sentences(g, 200, 10);
  std::vector<std::string> l1(all.begin(), all.begin() + 100);
  std::vector<std::string> l2;
  for (std::size_t i = 100; i < all.size(); ++i) l2.push_back(toy::cipher_sentence(all[i]));
  toy::write_corpus(dir / "l1.txt", l1);
  toy::write_corpus(dir / "l2.txt", l2);
  train::TrainConfig c;
  c.corpus_l1 = dir / "l1.txt";
  c.corpus_l2 = dir / "l2.txt";
  c.num_merges = 300;
  c.max_len = 10;
  c.d_model = 32;
  c.layers = 1;
  c.heads = 4;
  c.d_z = 16;
  c.gan_blocks = 1;
  c.batch_size = 16;
  c.seed = seed;
  c.log_every = 0;
  return c;
}

Result c10() {
  const auto dir = workdir("c10");
  std::vector<std::string> failures;

  train::TrainConfig cfg = small_config(dir, 10);
  cfg.total_iterations = 20;
  cfg.checkpoint_every = 10;
  cfg.out_dir = dir / "a";
  train::run_training(cfg);
  cfg.out_dir = dir / "b";
  train::run_training(cfg);
  const bool csv_same = file_bytes(dir / "a" / "loss.csv") == file_bytes(dir / "b" / "loss.csv");
  if (!csv_same) failures.push_back("loss CSV differs between identical runs");
  const bool ckpt_same = file_bytes(dir / "a" / "checkpoint.bin") == file_bytes(dir / "b" / "checkpoint.bin");
  if (!ckpt_same) failures.push_back("final checkpoints differ between identical runs");

  // forward outputs after a save/load round trip
  const auto data = train::prepare_data(cfg);
  train::Trainer original(cfg, data.vocab, data.l1, data.l2);
  for (int i = 0; i < 5; ++i) original.step();
  original.save(dir / "mid.bin");
  train::Trainer restored(cfg, data.vocab, data.l1, data.l2);
  restored.load(dir / "mid.bin");
  {
    ad::NoGradGuard no_grad;
    const auto probe = text::make_batch(std::span<const Sentence>(data.l1.data(), 8));
    const auto code_a = original.model().encode(probe);
    const auto code_b = restored.model().encode(probe);
    const bool enc = code_a.rows.value() == code_b.rows.value();
    const bool dec = original.model().decode_teacher_forced(code_a, probe, Lang::L2).value() ==
                     restored.model().decode_teacher_forced(code_b, probe, Lang::L2).value();
    Rng za(4);
    Rng zb(4);
    const bool gen = original.generator()(original.generator().sample(4, za)).rows.value() ==
                     restored.generator()(restored.generator().sample(4, zb)).rows.value();
    if (!(enc && dec && gen)) failures.push_back("forward outputs differ after checkpoint round trip");
  }

  // resume from iteration 10 of run a
  fs::copy(dir / "a", dir / "resumed", fs::copy_options::recursive);
  cfg.out_dir = dir / "resumed";
  train::RunOptions opts;
  opts.resume = dir / "resumed" / "checkpoint-10.bin";
  train::run_training(cfg, opts);
  const bool resume_same = file_bytes(dir / "a" / "loss.csv") == file_bytes(dir / "resumed" / "loss.csv");
  if (!resume_same) failures.push_back("resumed trace differs");
  const bool resume_ckpt = file_bytes(dir / "a" / "checkpoint.bin") == file_bytes(dir / "resumed" / "checkpoint.bin");
  if (!resume_ckpt) failures.push_back("resumed final checkpoint differs");

  std::string detail = failures.empty() ? "identical CSVs and checkpoints; round-trip forward bit-identical; resumed "
                                          "trace and checkpoint identical"
                                        : failures.front();
  for (std::size_t i = 1; i < failures.size(); ++i) detail += "; " + failures[i];
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------- C11

Result c11() {
  const auto dir = workdir("c11");
  const auto cfg = small_config(dir, 11);
  const auto data = train::prepare_data(cfg);
  train::Trainer t(cfg, data.vocab, data.l1, data.l2);
  std::vector<train::PhaseEvent> events;
  t.set_observer([&](const train::PhaseEvent& e) { events.push_back(e); });
  for (int i = 0; i < 100; ++i) t.step();
  const train::Phase order[] = {train::Phase::AeL1, train::Phase::AeL2,          train::Phase::BtL1,
                                train::Phase::BtL2, train::Phase::Discriminator, train::Phase::Generator};
  std::size_t bad = 0;
  std::uint64_t nmt = 0;
  std::uint64_t disc = 0;
  std::uint64_t gen = 0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    const std::uint64_t iter = k / 6 + 1;
    nmt += e.phase <= train::Phase::BtL2 ? 1 : 0;
    disc += e.phase == train::Phase::Discriminator ? 1 : 0;
    gen += e.phase == train::Phase::Generator ? 1 : 0;
    bool ok = e.iteration == iter && e.phase == order[k % 6] && e.applied && e.nmt_steps == nmt &&
              e.disc_steps == disc && e.gen_steps == gen;
    if (e.phase == train::Phase::Discriminator) ok = ok && e.real_lang == (iter % 2 == 1 ? Lang::L1 : Lang::L2);
    bad += ok ? 0 : 1;
  }
  const bool pass = events.size() == 600 && bad == 0;
  return {pass, std::to_string(events.size()) + " phase events over 100 iterations, " + std::to_string(bad) +
                    " out of order or with wrong parity/step counts"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Result()>>> all = {
      {"C1", c1}, {"C2", c2}, {"C3", c3}, {"C4", c4},   {"C5", c5},   {"C6", c6},
      {"C7", c7}, {"C8", c8}, {"C9", c9}, {"C10", c10}, {"C11", c11},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  bool any_failed = false;
  for (const auto& [name, run] : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    Result r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::cout << name << (r.pass ? " PASS " : " FAIL ") << r.detail << std::endl;
    any_failed = any_failed || !r.pass;
  }
  return any_failed ? 1 : 0;
}
