// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "bgan/core/grad_check.hpp"
#include "bgan/eval/accuracy.hpp"
#include "bgan/eval/bleu.hpp"
#include "bgan/eval/lm.hpp"
#include "bgan/eval/report.hpp"
#include "bgan/text/corpus.hpp"
#include "bgan/text/tokenizer.hpp"
#include "support/toy_data.hpp"

using namespace bgan;
using namespace bgan::eval;

namespace {

Tokens toks(const std::string& s) { return text::tokenize(s); }

std::vector<Tokens> corpus(const std::vector<std::string>& lines) {
  std::vector<Tokens> out;
  for (const auto& l : lines) out.push_back(toks(l));
  return out;
}

// Fixed per-position probabilities, for hand-computed perplexities.
class TableScorer : public Scorer {
 public:
  explicit TableScorer(std::vector<double> p) : p_(std::move(p)) {}
  std::vector<std::vector<double>> log_probs(std::span<const Tokens> sentences) const override {
    std::vector<std::vector<double>> out;
    for (const auto& s : sentences) {
      std::vector<double> lp;
      for (std::size_t i = 0; i <= s.size(); ++i) lp.push_back(std::log(p_[i]));
      out.push_back(lp);
    }
    return out;
  }

 private:
  std::vector<double> p_;
};

}  // namespace

TEST_CASE("bleu_n matches hand-computed examples") {
  const std::vector<Tokens> ref1{toks("the cat")};
  CHECK(bleu_n(toks("the the the"), ref1, 1) == doctest::Approx(100.0 / 3).epsilon(1e-9));

  const std::vector<Tokens> ref2{toks("the cat sat")};
  CHECK(bleu_n(toks("the cat sat down"), ref2, 2) == doctest::Approx(100.0 * std::sqrt(0.5)).epsilon(1e-9));

  // brevity: c=2, r=4
  const std::vector<Tokens> ref3{toks("the cat sat down")};
  CHECK(bleu_n(toks("the cat"), ref3, 2) == doctest::Approx(100.0 * std::exp(-1.0)).epsilon(1e-9));

  const auto s = toks("a big dog eats the small fish");
  const std::vector<Tokens> self{s};
  for (int n = 1; n <= static_cast<int>(s.size()); ++n) CHECK(bleu_n(s, self, n) == doctest::Approx(100.0));
  // no smoothing: an order beyond the hypothesis length has no n-grams
  CHECK(bleu_n(toks("the cat"), ref3, 3) == 0.0);
}

TEST_CASE("bleu_n uses the closest reference length, shorter on ties") {
  // c=3, refs of length 2 and 4 are equally close; r=2 gives BP=1
  const std::vector<Tokens> refs{toks("x y z w"), toks("a b")};
  const double p1 = 1.0 / 3.0;  // only "a" matches
  CHECK(bleu_n(toks("a q r"), refs, 1) == doctest::Approx(100.0 * p1).epsilon(1e-9));
  const std::vector<Tokens> longer{toks("x y z w"), toks("a b c d e")};
  CHECK(bleu_n(toks("a q r"), longer, 1) == doctest::Approx(100.0 * p1 * std::exp(1.0 - 4.0 / 3.0)).epsilon(1e-9));
}

TEST_CASE("bleu_n is invariant to reference order and monotone in the reference set") {
  Rng rng(5);
  const toy::Grammar g;
  const auto lines = toy::distinct_sentences(g, 40, 9);
  const auto refs = corpus(lines);
  for (int trial = 0; trial < 20; ++trial) {
    const auto hyp = toks(g.sentence(rng));
    std::vector<Tokens> reversed(refs.rbegin(), refs.rend());
    for (int n = 1; n <= 4; ++n) {
      CHECK(bleu_n(hyp, refs, n) == doctest::Approx(bleu_n(hyp, reversed, n)));
      double prev = 0.0;
      for (std::size_t k = 1; k <= refs.size(); k += 7) {
        const double score = bleu_n(hyp, std::span<const Tokens>(refs.data(), k), n);
        CHECK(score >= prev - 1e-9);
        prev = score;
      }
    }
  }
}

TEST_CASE("generation_bleu averages per-sentence scores against the whole test set") {
  const toy::Grammar g;
  const auto test = corpus(toy::distinct_sentences(g, 50, 3));
  const std::vector<Tokens> subset(test.begin(), test.begin() + 10);
  CHECK(generation_bleu(subset, test, 5) == doctest::Approx(100.0));

  Rng rng(8);
  const auto words = g.words();
  std::vector<Tokens> random;
  for (int i = 0; i < 200; ++i) {
    Tokens t;
    for (int j = 0; j < 7; ++j) t.push_back(words[rng.below(words.size())]);
    random.push_back(t);
  }
  CHECK(generation_bleu(random, test, 5) < 5.0);

  const std::vector<Tokens> pair{test[0], random[0]};
  CHECK(generation_bleu(pair, test, 2) ==
        doctest::Approx((bleu_n(test[0], test, 2) + bleu_n(random[0], test, 2)) / 2));
  CHECK_THROWS(generation_bleu(std::vector<Tokens>{}, test, 2));
}

TEST_CASE("perplexity closed forms") {
  const auto c = corpus({"a b c", "d e", "f"});
  CHECK(perplexity(UniformScorer(10), c) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(std::abs(perplexity(UniformScorer(37), c) - 37.0) < 1e-6);

  const std::vector<Tokens> one{toks("w")};  // w then EOS
  CHECK(perplexity(TableScorer({0.5, 0.25}), one) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(std::abs(perplexity(TableScorer({0.5, 0.25}), one) - 2.8284) < 1e-4);

  CHECK_THROWS_AS(perplexity(UniformScorer(10), std::vector<Tokens>{}), ad::ContractError);
}

TEST_CASE("lm_vocab keeps the most frequent words and maps the rest to UNK") {
  const auto c = corpus({"a a a b b c", "a b d"});
  const auto v = lm_vocab(c, 2);
  CHECK(v.size() == text::Vocab::kReserved + 2);
  CHECK(v.contains("a"));
  CHECK(v.contains("b"));
  CHECK(v.id("c") == text::Vocab::kUnk);
  CHECK(v.id("d") == text::Vocab::kUnk);
  // ties broken lexicographically
  const auto t = lm_vocab(corpus({"z y x"}), 2);
  CHECK(t.contains("x"));
  CHECK(t.contains("y"));
  CHECK_FALSE(t.contains("z"));
}

TEST_CASE("GRU language model gradients match finite differences") {
  LmConfig cfg;
  cfg.embed = 4;
  cfg.hidden = 5;
  const auto c = corpus({"a b c", "b a", "c c a b"});
  Rng init(3);
  GruLm<double> lm(lm_vocab(c, 100), cfg, init);
  const auto report = ad::grad_check_params<double>(lm.params(), [&] { return lm.loss(c); }, 1e-6);
  INFO(report.worst);
  CHECK(report.max_rel_error < 1e-4);
  CHECK(report.checked > 0);
}

TEST_CASE("GRU log-probabilities are normalized and independent of batch composition") {
  LmConfig cfg;
  cfg.embed = 8;
  cfg.hidden = 8;
  const auto c = corpus({"a b c", "b a", "c c a b"});
  Rng init(4);
  GruLm<double> lm(lm_vocab(c, 100), cfg, init);
  const auto all = lm.log_probs(c);
  REQUIRE(all.size() == 3);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(all[i].size() == c[i].size() + 1);
    const auto alone = lm.log_probs(std::span<const Tokens>(&c[i], 1));
    for (std::size_t j = 0; j < all[i].size(); ++j) CHECK(all[i][j] == doctest::Approx(alone[0][j]).epsilon(1e-12));
  }
  // untrained model over V entries is close to uniform
  CHECK(perplexity(lm, c) < 2.0 * lm.vocab().size());
}

TEST_CASE("GRU language model overfits a 10-sentence corpus") {
  const toy::Grammar g;
  const auto c = corpus(toy::distinct_sentences(g, 10, 21));
  LmConfig cfg;
  cfg.epochs = 150;
  cfg.batch = 10;
  Rng rng(1);
  const auto lm = train_lm<float>(c, cfg, rng);
  const double ppl = perplexity(lm, c);
  INFO(ppl);
  CHECK(ppl < 1.5);
}

TEST_CASE("forward and reverse perplexity") {
  const toy::Grammar g;
  const auto real = corpus(toy::distinct_sentences(g, 600, 30));
  const std::vector<Tokens> train(real.begin(), real.begin() + 500);
  const std::vector<Tokens> test(real.begin() + 500, real.end());
  LmConfig cfg;
  cfg.embed = 32;
  cfg.hidden = 64;

  // generated == real_train: same seed, same LM, same corpus
  Rng rng = Rng::substream(7, "lm.forward");
  const auto lm = train_lm<float>(train, cfg, rng);
  CHECK(forward_ppl(train, train, cfg, 7) == doctest::Approx(perplexity(lm, train)).epsilon(1e-12));

  // a collapsed generator makes the reverse LM useless on real data
  const std::vector<Tokens> collapsed(500, train[0]);
  const double diverse = reverse_ppl(train, test, cfg, 7);
  const double degenerate = reverse_ppl(collapsed, test, cfg, 7);
  INFO(diverse << " vs " << degenerate);
  CHECK(degenerate > 3 * diverse);
}

TEST_CASE("report CSV") {
  const auto path = std::filesystem::temp_directory_path() / "bgan_test_report.csv";
  write_report(path, {{"bleu2", 1, 12.5, 100, 7}, {"f_ppl", 2, 3.25, 50, 7}});
  const auto lines = text::read_lines(path);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "metric,language,value,n_samples,seed");
  CHECK(lines[1] == "bleu2,1,12.500000,100,7");
  CHECK(lines[2] == "f_ppl,2,3.250000,50,7");
  std::filesystem::remove(path);
}

TEST_CASE("word accuracy") {
  const auto ref = corpus({"a b c", "d e"});
  CHECK(word_accuracy(ref, ref) == 1.0);
  CHECK(word_accuracy(corpus({"a x c", "d e f"}), ref) == doctest::Approx(4.0 / 6.0));
  CHECK(word_accuracy(corpus({"b c", "d e"}), ref) == doctest::Approx(2.0 / 5.0));
  CHECK_THROWS(word_accuracy(corpus({"a"}), ref));
}
