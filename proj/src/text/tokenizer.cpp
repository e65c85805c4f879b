// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgan/text/tokenizer.hpp"

#include <cstdint>

namespace bgan::text {
namespace {

std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

std::uint32_t decode(std::string_view ch) {
  const auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(ch[i])); };
  switch (ch.size()) {
    case 1: return b(0);
    case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
    case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
    default: return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) | ((b(2) & 0x3F) << 6) | (b(3) & 0x3F);
  }
}

bool is_space(std::uint32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
         cp == 0x205F || cp == 0x3000;
}

bool is_detachable(std::uint32_t cp) {
  switch (cp) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '"': case '\'': case '(': case ')':
    case 0xAB: case 0xBB:  // « »
      return true;
    default:
      return false;
  }
}

void split_chunk(const std::vector<std::string>& chars, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = chars.size();
  while (begin < end && is_detachable(decode(chars[begin]))) out.push_back(chars[begin++]);
  std::vector<std::string> trailing;
  while (end > begin && is_detachable(decode(chars[end - 1]))) trailing.push_back(chars[--end]);
  if (begin < end) {
    std::string core;
    for (std::size_t i = begin; i < end; ++i) core += chars[i];
    out.push_back(std::move(core));
  }
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

}  // namespace

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> chars;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t n = sequence_length(static_cast<unsigned char>(text[i]));
    if (i + n > text.size()) n = 1;
    for (std::size_t k = 1; k < n; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        n = 1;
        break;
      }
    }
    chars.emplace_back(text.substr(i, n));
    i += n;
  }
  return chars;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::vector<std::string> chunk;
  for (auto& ch : utf8_chars(text)) {
    if (is_space(decode(ch))) {
      if (!chunk.empty()) split_chunk(chunk, tokens);
      chunk.clear();
    } else {
      chunk.push_back(std::move(ch));
    }
  }
  if (!chunk.empty()) split_chunk(chunk, tokens);
  return tokens;
}

}  // namespace bgan::text
