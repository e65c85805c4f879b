// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgan/text/bpe.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "bgan/errors.hpp"
#include "bgan/text/tokenizer.hpp"

namespace bgan::text {
namespace {

std::vector<std::string> initial_symbols(std::string_view word) {
  auto symbols = utf8_chars(word);
  symbols.emplace_back(kEndOfWord);
  return symbols;
}

/// Merges every left-to-right occurrence of `pair` in place.
void merge_pair(std::vector<std::string>& symbols, const SymbolPair& pair) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == pair.first && symbols[i + 1] == pair.second) {
      out.push_back(symbols[i] + symbols[i + 1]);
      ++i;
    } else {
      out.push_back(std::move(symbols[i]));
    }
  }
  symbols = std::move(out);
}

struct PairHash {
  std::size_t operator()(const SymbolPair& p) const {
    const std::size_t h = std::hash<std::string>{}(p.first);
    return h ^ (std::hash<std::string>{}(p.second) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
  }
};

/// Pair statistics with an ordered index so the best pair (highest count,
/// then lexicographically smallest) is always at the front.
class PairTable {
 public:
  void adjust(const SymbolPair& pair, std::int64_t delta, std::size_t word) {
    auto& count = counts_[pair];
    if (count > 0) ranked_.erase({-count, pair});
    count += delta;
    if (count > 0) ranked_.insert({-count, pair});
    if (delta > 0) owners_[pair].insert(word);
  }

  bool empty() const { return ranked_.empty(); }
  const SymbolPair& best() const { return ranked_.begin()->second; }

  std::vector<std::size_t> owners(const SymbolPair& pair) const {
    auto it = owners_.find(pair);
    if (it == owners_.end()) return {};
    std::vector<std::size_t> v(it->second.begin(), it->second.end());
    return v;
  }

 private:
  std::unordered_map<SymbolPair, std::int64_t, PairHash> counts_;
  std::set<std::pair<std::int64_t, SymbolPair>> ranked_;
  std::unordered_map<SymbolPair, std::set<std::size_t>, PairHash> owners_;
};

void count_word(PairTable& table, const std::vector<std::string>& symbols, std::int64_t freq,
                std::size_t word) {
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
    table.adjust({symbols[i], symbols[i + 1]}, freq, word);
  }
}

}  // namespace

BpeModel::BpeModel(std::vector<SymbolPair> merges) : merges_(std::move(merges)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) rank_.emplace(merges_[i], i);
}

std::vector<std::string> BpeModel::encode(std::string_view word) const {
  auto symbols = initial_symbols(word);
  while (symbols.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    const SymbolPair* best = nullptr;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = rank_.find({symbols[i], symbols[i + 1]});
      if (it != rank_.end() && it->second < best_rank) {
        best_rank = it->second;
        best = &it->first;
      }
    }
    if (best == nullptr) break;
    merge_pair(symbols, *best);
  }
  return symbols;
}

std::string BpeModel::serialize() const {
  std::string out(kBpeHeader);
  out += '\n';
  for (const auto& [a, b] : merges_) {
    out += a;
    out += ' ';
    out += b;
    out += '\n';
  }
  return out;
}

BpeModel BpeModel::parse(std::string_view content) {
  std::istringstream in{std::string(content)};
  std::string line;
  if (!std::getline(in, line) || line != kBpeHeader) {
    throw FormatError("BPE model: missing '" + std::string(kBpeHeader) + "' header");
  }
  std::vector<SymbolPair> merges;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == line.size() ||
        line.find(' ', space + 1) != std::string::npos) {
      throw FormatError("BPE model line " + std::to_string(lineno) + ": expected 'symbol1 symbol2'");
    }
    merges.emplace_back(line.substr(0, space), line.substr(space + 1));
  }
  return BpeModel(std::move(merges));
}

void BpeModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write BPE model " + path.string());
  out << serialize();
  if (!out) throw IoError("failed writing BPE model " + path.string());
}

BpeModel BpeModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read BPE model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

BpeModel learn_bpe(std::span<const std::vector<std::string>> sentences, std::size_t num_merges) {
  std::map<std::string, std::int64_t> freq;
  for (const auto& sentence : sentences) {
    for (const auto& word : sentence) ++freq[word];
  }
  std::vector<std::vector<std::string>> words;
  std::vector<std::int64_t> counts;
  words.reserve(freq.size());
  for (const auto& [word, n] : freq) {
    words.push_back(initial_symbols(word));
    counts.push_back(n);
  }

  PairTable table;
  for (std::size_t w = 0; w < words.size(); ++w) count_word(table, words[w], counts[w], w);

  std::vector<SymbolPair> merges;
  while (merges.size() < num_merges && !table.empty()) {
    const SymbolPair pair = table.best();
    merges.push_back(pair);
    for (std::size_t w : table.owners(pair)) {
      auto& symbols = words[w];
      bool present = false;
      for (std::size_t i = 0; i + 1 < symbols.size() && !present; ++i) {
        present = symbols[i] == pair.first && symbols[i + 1] == pair.second;
      }
      if (!present) continue;
      count_word(table, symbols, -counts[w], w);
      merge_pair(symbols, pair);
      count_word(table, symbols, counts[w], w);
    }
  }
  return BpeModel(std::move(merges));
}

std::vector<std::string> bpe_decode(std::span<const std::string> subwords) {
  std::string joined;
  for (const auto& s : subwords) joined += s;
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start < joined.size()) {
    const auto end = joined.find(kEndOfWord, start);
    if (end == std::string::npos) {
      words.push_back(joined.substr(start));
      break;
    }
    if (end > start) words.push_back(joined.substr(start, end - start));
    start = end + kEndOfWord.size();
  }
  return words;
}

}  // namespace bgan::text
