// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bgan::eval {

inline constexpr const char* kReportHeader = "metric,language,value,n_samples,seed";

struct MetricRow {
  std::string metric;  // "bleu2".."bleu5", "f_ppl", "r_ppl", "ppl"
  int language = 0;    // 1 or 2; 0 when not tied to one language
  double value = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

std::string report_row(const MetricRow& row);

/// Header plus one line per row.
void write_report(const std::filesystem::path& path, const std::vector<MetricRow>& rows);

}  // namespace bgan::eval
