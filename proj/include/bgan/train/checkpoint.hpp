// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint container, little-endian:
//
//   "BGAN" u32 version  config-hash[32]  vocab-hash[32]  u64 iteration
//   u64 n   n × { str path  u32 rank  u64 extent × rank  f32 value × prod }
//   u64 n   n × { str path  f32 m × prod  f32 v × prod }      (Adam moments)
//   u64 n   n × { str store  u64 step }                      (step counters)
//   u64 n   n × { str name  str state }                      (rng / stream states)
//
// where str is u64 length followed by bytes. Moment records follow the
// shape of the parameter record with the same path.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "bgan/core/autograd.hpp"
#include "bgan/train/config.hpp"

namespace bgan::train {

using Real = float;

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ParamRecord {
  std::uint32_t rank = 2;
  ad::Mat<Real> value;
};

struct MomentRecord {
  ad::Mat<Real> m;
  ad::Mat<Real> v;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  Digest config_hash{};
  Digest vocab_hash{};
  std::uint64_t iteration = 0;
  std::map<std::string, ParamRecord> params;
  std::map<std::string, MomentRecord> moments;
  std::map<std::string, std::uint64_t> steps;
  std::map<std::string, std::string> states;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws IoError when unreadable and FormatError on a bad magic, an
/// unsupported version, or a truncated or inconsistent body.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Copies every entry of `store` under "prefix/" (values, moments of
/// trainable entries, and the step counter under `prefix`).
void export_store(Checkpoint& ckpt, const std::string& prefix, const ad::ParamStore<Real>& store);

/// Restores `store` from the entries under "prefix/". Every entry of the
/// store must be present with the same shape. Moments and the step counter
/// are restored when `with_optimizer` is set.
void import_store(const Checkpoint& ckpt, const std::string& prefix, ad::ParamStore<Real>& store,
                  bool with_optimizer);

}  // namespace bgan::train
