// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bgan/text/bpe.hpp"

namespace bgan::text {

/// Joint token table for both languages. Ids 0..3 are reserved.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kReserved = 4;

  Vocab();

  /// Returns the id of `token`, inserting it if new.
  int add(std::string_view token);
  /// Id of `token`, or kUnk when absent.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  /// "token<TAB>id" lines, reserved ids first.
  std::string serialize() const;
  static Vocab parse(std::string_view content);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Vocabulary over the subwords of `sentences` (word tokens) under `bpe`,
/// ordered by descending frequency, then lexicographically.
Vocab build_vocab(std::span<const std::vector<std::string>> sentences, const BpeModel& bpe);

}  // namespace bgan::text
