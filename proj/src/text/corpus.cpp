// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgan/text/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "bgan/errors.hpp"
#include "bgan/text/tokenizer.hpp"

namespace bgan::text {

Lang lang_from_int(int value) {
  if (value == 1) return Lang::L1;
  if (value == 2) return Lang::L2;
  throw std::invalid_argument("language must be 1 or 2, got " + std::to_string(value));
}

bool well_formed(const Sentence& s, int vocab_size) {
  if (s.ids.size() < 2 || s.ids.front() != Vocab::kBos || s.ids.back() != Vocab::kEos) return false;
  for (std::size_t i = 1; i + 1 < s.ids.size(); ++i) {
    const int id = s.ids[i];
    if (id == Vocab::kPad || id == Vocab::kBos || id == Vocab::kEos || id < 0 || id >= vocab_size) {
      return false;
    }
  }
  return true;
}

Sentence frame(std::span<const int> interior, Lang lang) {
  Sentence s;
  s.lang = lang;
  s.ids.reserve(interior.size() + 2);
  s.ids.push_back(Vocab::kBos);
  s.ids.insert(s.ids.end(), interior.begin(), interior.end());
  s.ids.push_back(Vocab::kEos);
  return s;
}

Sentence encode_sentence(std::string_view line, Lang lang, const BpeModel& bpe, const Vocab& vocab) {
  std::vector<int> ids;
  for (const auto& word : tokenize(line)) {
    for (const auto& sub : bpe.encode(word)) ids.push_back(vocab.id(sub));
  }
  return frame(ids, lang);
}

std::vector<std::string> decode_words(const Sentence& s, const Vocab& vocab) {
  std::vector<std::string> subwords;
  for (int id : s.ids) {
    if (id == Vocab::kPad || id == Vocab::kBos || id == Vocab::kEos) continue;
    subwords.push_back(vocab.token(id));
  }
  return bpe_decode(subwords);
}

std::string decode_sentence(const Sentence& s, const Vocab& vocab) {
  std::string out;
  for (const auto& w : decode_words(s, vocab)) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_lines(const std::filesystem::path& path, std::span<const std::string> lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Sentence apply_noise(const Sentence& s, const NoiseConfig& cfg, Rng& rng) {
  const auto interior = s.interior();
  std::vector<int> kept;
  kept.reserve(interior.size());
  for (int id : interior) {
    if (rng.uniform() >= cfg.p_drop) kept.push_back(id);
  }
  if (kept.empty()) kept.assign(interior.begin(), interior.end());

  // Sorting positions perturbed by U[0, k+1) bounds every displacement by k.
  std::vector<std::pair<double, std::size_t>> keys(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    keys[i] = {static_cast<double>(i) + rng.uniform() * (cfg.k_shuffle + 1), i};
  }
  std::stable_sort(keys.begin(), keys.end());
  std::vector<int> shuffled(kept.size());
  for (std::size_t i = 0; i < keys.size(); ++i) shuffled[i] = kept[keys[i].second];
  return frame(shuffled, s.lang);
}

FilterResult length_filter(std::span<const Sentence> corpus, std::size_t max_len) {
  FilterResult r;
  for (const auto& s : corpus) {
    if (s.interior_size() <= max_len && max_len > 0) {
      r.kept.push_back(s);
    } else {
      ++r.dropped;
    }
  }
  r.dropped_fraction = corpus.empty() ? 0.0 : static_cast<double>(r.dropped) / static_cast<double>(corpus.size());
  return r;
}

Sentence Batch::sentence(std::size_t i) const {
  Sentence s;
  s.lang = lang;
  const auto row = static_cast<Eigen::Index>(i);
  s.ids.assign(ids.row(row).data(), ids.row(row).data() + lengths[i]);
  return s;
}

Batch make_batch(std::span<const Sentence> sentences) {
  if (sentences.empty()) throw std::invalid_argument("make_batch: no sentences");
  Batch b;
  b.lang = sentences.front().lang;
  std::size_t width = 0;
  for (const auto& s : sentences) {
    if (s.lang != b.lang) throw std::invalid_argument("make_batch: mixed languages");
    width = std::max(width, s.ids.size());
  }
  b.ids = IdMatrix::Constant(static_cast<Eigen::Index>(sentences.size()), static_cast<Eigen::Index>(width),
                             Vocab::kPad);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& ids = sentences[i].ids;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      b.ids(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ids[j];
    }
    b.lengths.push_back(static_cast<int>(ids.size()));
  }
  return b;
}

BatchStream::BatchStream(std::vector<Sentence> corpus, std::size_t batch_size, Rng rng)
    : corpus_(std::move(corpus)), batch_size_(batch_size), rng_(std::move(rng)) {
  if (batch_size_ == 0) throw std::invalid_argument("batch_size must be positive");
  if (corpus_.empty()) throw std::invalid_argument("batch stream over an empty corpus");
  order_.resize(corpus_.size());
  reshuffle();
}

void BatchStream::reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::shuffle(order_.begin(), order_.end(), rng_.engine());
  cursor_ = 0;
}

Batch BatchStream::next() {
  const std::size_t take = std::min(batch_size_, corpus_.size());
  if (cursor_ + take > order_.size()) {
    reshuffle();
    ++epoch_;
  }
  std::vector<Sentence> picked;
  picked.reserve(take);
  for (std::size_t i = 0; i < take; ++i) picked.push_back(corpus_[order_[cursor_ + i]]);
  cursor_ += take;
  return make_batch(picked);
}

std::string BatchStream::serialize_state() const {
  std::ostringstream os;
  os << epoch_ << ' ' << cursor_ << ' ' << order_.size();
  for (auto i : order_) os << ' ' << i;
  os << '\n' << rng_.serialize();
  return os.str();
}

void BatchStream::restore_state(const std::string& state) {
  std::istringstream is(state);
  std::size_t n = 0;
  is >> epoch_ >> cursor_ >> n;
  if (!is || n != corpus_.size()) throw FormatError("batch stream state does not match corpus");
  order_.assign(n, 0);
  for (auto& i : order_) is >> i;
  std::string rest;
  std::getline(is, rest);
  std::getline(is, rest, '\0');
  if (!is.eof() && !is) throw FormatError("corrupt batch stream state");
  rng_.deserialize(rest);
}

PretrainedEmbeddings load_embeddings(const std::filesystem::path& path) {
  PretrainedEmbeddings emb;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string token;
    in >> token;
    std::vector<double> v;
    std::string field;
    while (in >> field) {
      double x = 0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
      if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
      }
      v.push_back(x);
    }
    // fastText .vec header: "<count> <dim>"
    if (lineno == 1 && v.size() == 1 && token.find_first_not_of("0123456789") == std::string::npos) continue;
    if (emb.dim == 0) emb.dim = static_cast<int>(v.size());
    if (v.empty() || static_cast<int>(v.size()) != emb.dim) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(emb.dim) + " values");
    }
    emb.vectors[token] = std::move(v);
  }
  return emb;
}

void save_embeddings(const std::filesystem::path& path, const PretrainedEmbeddings& emb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (const auto& [token, v] : emb.vectors) {
    out << token;
    for (double x : v) out << ' ' << x;
    out << '\n';
  }
}

}  // namespace bgan::text
