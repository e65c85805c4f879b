// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgan/text/vocab.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "bgan/errors.hpp"

namespace bgan::text {
namespace {
constexpr const char* kReservedNames[] = {"<pad>", "<s>", "</s>", "<unk>"};
}

Vocab::Vocab() {
  for (const char* name : kReservedNames) add(name);
}

int Vocab::add(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const int id = size();
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

int Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vocab id " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

std::string Vocab::serialize() const {
  std::string out;
  for (int i = 0; i < size(); ++i) {
    out += tokens_[static_cast<std::size_t>(i)];
    out += '\t';
    out += std::to_string(i);
    out += '\n';
  }
  return out;
}

Vocab Vocab::parse(std::string_view content) {
  std::istringstream in{std::string(content)};
  std::string line;
  Vocab vocab;
  int expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    int id = -1;
    if (tab == std::string::npos ||
        std::from_chars(line.data() + tab + 1, line.data() + line.size(), id).ec != std::errc{}) {
      throw FormatError("vocab line " + std::to_string(expected + 1) + ": expected token<TAB>id");
    }
    if (id != expected) {
      throw FormatError("vocab ids must be dense and ordered; got " + std::to_string(id) +
                        " where " + std::to_string(expected) + " expected");
    }
    const std::string token = line.substr(0, tab);
    if (id < kReserved) {
      if (token != kReservedNames[id]) throw FormatError("vocab reserved id " + std::to_string(id) + " is '" + token + "'");
    } else if (vocab.add(token) != id) {
      throw FormatError("duplicate vocab token '" + token + "'");
    }
    ++expected;
  }
  if (expected < kReserved) throw FormatError("vocab is missing reserved entries");
  return vocab;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocab " + path.string());
  out << serialize();
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read vocab " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

Vocab build_vocab(std::span<const std::vector<std::string>> sentences, const BpeModel& bpe) {
  std::map<std::string, std::vector<std::string>> cache;
  std::map<std::string, std::size_t> freq;
  for (const auto& sentence : sentences) {
    for (const auto& word : sentence) {
      auto it = cache.find(word);
      if (it == cache.end()) it = cache.emplace(word, bpe.encode(word)).first;
      for (const auto& sub : it->second) ++freq[sub];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab vocab;
  for (const auto& [token, _] : ranked) vocab.add(token);
  return vocab;
}

}  // namespace bgan::text
