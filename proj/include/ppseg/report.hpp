// Copyright 2026 The ppseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON serialization of metric reports. The layout is documented in
// docs/report_schema.md.

#ifndef PPSEG_REPORT_HPP_
#define PPSEG_REPORT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppseg/analysis.hpp"
#include "ppseg/metrics.hpp"

namespace ppseg {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kReportFormatVersion = 1;

struct ReportDocument {
  MetricReport metrics;
  std::string taxonomy_hash;  // 16 lowercase hex digits
  std::string tool_version{kToolVersion};
  EvalConfig config;
  std::optional<std::string> setting;  // oracle runs only

  friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

// Fingerprint rendered as 16 hex digits.
std::string TaxonomyHash(const Taxonomy& taxonomy);

// fraction * 100 with one decimal, e.g. 0.62089 -> "62.1".
std::string FormatPercent(double fraction);

ReportDocument MakeReportDocument(const MetricReport& metrics, const Taxonomy& taxonomy,
                                  const EvalConfig& config);

// Pretty-printed with two-space indentation and a trailing newline.
std::string ReportToJson(const ReportDocument& doc);
// kSchemaError on malformed or incomplete documents.
ReportDocument ReportFromJson(std::string_view text);

// JSON array of reports, one per oracle setting, in run order.
std::string OracleToJson(const std::vector<OracleRun>& runs, const Taxonomy& taxonomy,
                         const EvalConfig& config);
std::vector<ReportDocument> OracleFromJson(std::string_view text);

}  // namespace ppseg

#endif  // PPSEG_REPORT_HPP_
