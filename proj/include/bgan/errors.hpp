// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

namespace bgan {

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file was readable but its content does not follow the expected layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bgan
