// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgan/eval/report.hpp"

#include <cstdio>
#include <fstream>

#include "bgan/errors.hpp"

namespace bgan::eval {

std::string report_row(const MetricRow& row) {
  char value[64];
  std::snprintf(value, sizeof value, "%.6f", row.value);
  return row.metric + "," + std::to_string(row.language) + "," + value + "," + std::to_string(row.n_samples) + "," +
         std::to_string(row.seed);
}

void write_report(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << kReportHeader << '\n';
  for (const auto& r : rows) out << report_row(r) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace bgan::eval
