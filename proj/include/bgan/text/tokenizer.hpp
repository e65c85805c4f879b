// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bgan::text {

/// Splits UTF-8 text into code points (each returned as its byte string).
/// Malformed bytes are passed through one at a time.
std::vector<std::string> utf8_chars(std::string_view text);

/// Rule tokenizer: splits on Unicode whitespace, then detaches leading and
/// trailing punctuation from . , ! ? ; : " ' ( ) « » as separate tokens.
/// Case and interior characters are preserved.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace bgan::text
