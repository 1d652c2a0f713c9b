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

#include "ppseg/report.hpp"

#include <cstdio>

#include "json.hpp"
#include "ppseg/error.hpp"

namespace ppseg {
namespace {

using Json = nlohmann::ordered_json;

Json Metric(const std::optional<double>& value) {
  if (!value) return nullptr;
  return Json{{"value", *value}, {"percent", FormatPercent(*value)}};
}

std::optional<double> ReadMetric(const Json& node) {
  if (node.is_null()) return std::nullopt;
  return node.at("value").get<double>();
}

Json ToJsonTree(const ReportDocument& doc) {
  const MetricReport& m = doc.metrics;
  Json j;
  j["format_version"] = kReportFormatVersion;
  j["tool_version"] = doc.tool_version;
  j["taxonomy_hash"] = doc.taxonomy_hash;
  if (doc.setting) j["setting"] = *doc.setting;
  j["config"] = {{"void_fp_rule", doc.config.void_fp_rule},
                 {"miou_full_label_set", doc.config.miou_full_label_set}};
  j["image_count"] = m.image_count;
  j["pq"] = {{"all", Metric(m.pq_all)}, {"P", Metric(m.pq_p)}, {"NP", Metric(m.pq_np)}};
  j["partpq"] = {
      {"all", Metric(m.partpq_all)}, {"P", Metric(m.partpq_p)}, {"NP", Metric(m.partpq_np)}};
  j["miou"] = {{"scene", Metric(m.miou_scene)}, {"part", Metric(m.miou_part)}};
  j["ssq"] = Metric(m.ssq);
  j["psq"] = Metric(m.psq);
  j["pwq"] = Metric(m.pwq);
  j["unlabeled_instance_pixels"] = {{"gt", m.gt_unlabeled_instance_pixels},
                                    {"pred", m.pred_unlabeled_instance_pixels}};
  Json classes = Json::array();
  for (const ClassReport& c : m.classes) {
    classes.push_back({{"sid", c.sid},
                       {"has_parts", c.has_parts},
                       {"tp", c.tp},
                       {"fp", c.fp},
                       {"fn", c.fn},
                       {"pq", c.pq},
                       {"partpq", c.partpq}});
  }
  j["classes"] = std::move(classes);
  return j;
}

ReportDocument FromJsonTree(const Json& j) {
  ReportDocument doc;
  if (j.at("format_version").get<int>() != kReportFormatVersion) {
    throw Error(ErrorCode::kSchemaError, "unsupported report format version");
  }
  doc.tool_version = j.at("tool_version").get<std::string>();
  doc.taxonomy_hash = j.at("taxonomy_hash").get<std::string>();
  if (j.contains("setting")) doc.setting = j.at("setting").get<std::string>();
  doc.config.void_fp_rule = j.at("config").at("void_fp_rule").get<bool>();
  doc.config.miou_full_label_set = j.at("config").at("miou_full_label_set").get<bool>();

  MetricReport& m = doc.metrics;
  m.image_count = j.at("image_count").get<std::uint64_t>();
  m.pq_all = ReadMetric(j.at("pq").at("all"));
  m.pq_p = ReadMetric(j.at("pq").at("P"));
  m.pq_np = ReadMetric(j.at("pq").at("NP"));
  m.partpq_all = ReadMetric(j.at("partpq").at("all"));
  m.partpq_p = ReadMetric(j.at("partpq").at("P"));
  m.partpq_np = ReadMetric(j.at("partpq").at("NP"));
  m.miou_scene = ReadMetric(j.at("miou").at("scene"));
  m.miou_part = ReadMetric(j.at("miou").at("part"));
  m.ssq = ReadMetric(j.at("ssq"));
  m.psq = ReadMetric(j.at("psq"));
  m.pwq = ReadMetric(j.at("pwq"));
  m.gt_unlabeled_instance_pixels = j.at("unlabeled_instance_pixels").at("gt").get<std::uint64_t>();
  m.pred_unlabeled_instance_pixels =
      j.at("unlabeled_instance_pixels").at("pred").get<std::uint64_t>();
  for (const Json& c : j.at("classes")) {
    ClassReport r;
    r.sid = c.at("sid").get<int>();
    r.has_parts = c.at("has_parts").get<bool>();
    r.tp = c.at("tp").get<std::uint64_t>();
    r.fp = c.at("fp").get<std::uint64_t>();
    r.fn = c.at("fn").get<std::uint64_t>();
    r.pq = c.at("pq").get<double>();
    r.partpq = c.at("partpq").get<double>();
    m.classes.push_back(r);
  }
  return doc;
}

template <typename Fn>
auto WithSchemaErrors(std::string_view text, Fn fn) {
  try {
    return fn(Json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, e.what());
  }
}

}  // namespace

std::string TaxonomyHash(const Taxonomy& taxonomy) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(taxonomy.fingerprint()));
  return buf;
}

std::string FormatPercent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
  return buf;
}

ReportDocument MakeReportDocument(const MetricReport& metrics, const Taxonomy& taxonomy,
                                  const EvalConfig& config) {
  ReportDocument doc;
  doc.metrics = metrics;
  doc.taxonomy_hash = TaxonomyHash(taxonomy);
  doc.config = config;
  return doc;
}

std::string ReportToJson(const ReportDocument& doc) { return ToJsonTree(doc).dump(2) + "\n"; }

ReportDocument ReportFromJson(std::string_view text) {
  return WithSchemaErrors(text, [](const Json& j) { return FromJsonTree(j); });
}

std::string OracleToJson(const std::vector<OracleRun>& runs, const Taxonomy& taxonomy,
                         const EvalConfig& config) {
  Json array = Json::array();
  for (const OracleRun& run : runs) {
    ReportDocument doc = MakeReportDocument(run.report, taxonomy, config);
    doc.setting = std::string(OracleSettingName(run.setting));
    array.push_back(ToJsonTree(doc));
  }
  return array.dump(2) + "\n";
}

std::vector<ReportDocument> OracleFromJson(std::string_view text) {
  return WithSchemaErrors(text, [](const Json& j) {
    if (!j.is_array()) throw Error(ErrorCode::kSchemaError, "oracle output is not an array");
    std::vector<ReportDocument> docs;
    for (const Json& item : j) docs.push_back(FromJsonTree(item));
    return docs;
  });
}

}  // namespace ppseg
