// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bgan::text {

inline constexpr std::string_view kEndOfWord = "</w>";
inline constexpr std::string_view kBpeHeader = "#version bgan-1";

using SymbolPair = std::pair<std::string, std::string>;

/// Ordered byte-pair merge list. Each word is split into code points plus a
/// trailing "</w>" symbol before merges are replayed.
class BpeModel {
 public:
  BpeModel() = default;
  explicit BpeModel(std::vector<SymbolPair> merges);

  const std::vector<SymbolPair>& merges() const { return merges_; }
  std::size_t size() const { return merges_.size(); }

  /// Replays merges in learned order until no ranked pair remains.
  std::vector<std::string> encode(std::string_view word) const;

  std::string serialize() const;
  static BpeModel parse(std::string_view content);
  void save(const std::filesystem::path& path) const;
  static BpeModel load(const std::filesystem::path& path);

 private:
  std::vector<SymbolPair> merges_;
  std::map<SymbolPair, std::size_t> rank_;
};

/// Greedy most-frequent-pair merging over the combined word streams.
/// Ties go to the lexicographically smallest pair. Stops early when no pair
/// is left.
BpeModel learn_bpe(std::span<const std::vector<std::string>> sentences, std::size_t num_merges);

/// Concatenates subwords and splits at "</w>" into words.
std::vector<std::string> bpe_decode(std::span<const std::string> subwords);

}  // namespace bgan::text
