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

#include "doctest.h"
#include "expect_error.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "ppseg/report.hpp"

using namespace ppseg;
using testing::CodeOf;

namespace {

MetricReport RandomReport(testing::Rng& rng, const Taxonomy& tax) {
  std::vector<PanopticPartMap> gt, pred;
  for (int n = 0; n < 3; ++n) {
    gt.push_back(testing::RandomGroundTruth(rng, tax));
    pred.push_back(testing::PerturbPrediction(rng, gt.back(), tax));
  }
  return BuildReport(EvaluateDataset(gt, pred, tax), tax);
}

}  // namespace

TEST_CASE("percent formatting") {
  CHECK(FormatPercent(0.62089) == "62.1");
  CHECK(FormatPercent(1.0) == "100.0");
  CHECK(FormatPercent(0.0) == "0.0");
  CHECK(FormatPercent(0.375) == "37.5");
  CHECK(FormatPercent(0.12345) == "12.3");
}

TEST_CASE("taxonomy hash is 16 hex digits") {
  const std::string h = TaxonomyHash(testing::CppTaxonomy());
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(h != TaxonomyHash(testing::NoPartTaxonomy()));
}

TEST_CASE("report documents round trip") {
  testing::Rng rng(61);
  for (const Taxonomy& tax : {testing::CppTaxonomy(), testing::NoPartTaxonomy()}) {
    for (int trial = 0; trial < 10; ++trial) {
      EvalConfig config;
      config.void_fp_rule = trial % 2 == 0;
      const ReportDocument doc = MakeReportDocument(RandomReport(rng, tax), tax, config);
      const std::string text = ReportToJson(doc);
      CHECK(text.back() == '\n');
      const ReportDocument back = ReportFromJson(text);
      CHECK(back == doc);
      CHECK(ReportToJson(back) == text);
    }
  }
}

TEST_CASE("report layout") {
  testing::Rng rng(67);
  const Taxonomy tax = testing::NoPartTaxonomy();
  const ReportDocument doc = MakeReportDocument(RandomReport(rng, tax), tax, {});
  const nlohmann::json j = nlohmann::json::parse(ReportToJson(doc));
  CHECK(j.at("format_version") == kReportFormatVersion);
  CHECK(j.at("tool_version") == std::string(kToolVersion));
  CHECK(j.at("taxonomy_hash") == TaxonomyHash(tax));
  CHECK(j.at("pq").at("P").is_null());
  CHECK(j.at("pwq").is_null());
  const double pq = j.at("pq").at("all").at("value");
  CHECK(j.at("pq").at("all").at("percent") == FormatPercent(pq));
  CHECK_FALSE(j.contains("setting"));
}

TEST_CASE("malformed reports") {
  CHECK(CodeOf([] { ReportFromJson("{"); }) == ErrorCode::kSchemaError);
  CHECK(CodeOf([] { ReportFromJson("{}"); }) == ErrorCode::kSchemaError);
  testing::Rng rng(71);
  const Taxonomy tax = testing::NoPartTaxonomy();
  nlohmann::json j = nlohmann::json::parse(ReportToJson(MakeReportDocument(RandomReport(rng, tax), tax, {})));
  j["format_version"] = 99;
  CHECK(CodeOf([&] { ReportFromJson(j.dump()); }) == ErrorCode::kSchemaError);
}

TEST_CASE("oracle arrays") {
  testing::Rng rng(73);
  const Taxonomy tax = testing::CppTaxonomy();
  const testing::OracleFixture f = testing::DegradedPartsFixture(rng, tax, 3);
  const std::vector<OracleRun> runs = RunOracle(f.gt, f.pred_panoptic, f.pred_parts, tax);
  const std::string text = OracleToJson(runs, tax, {});
  const std::vector<ReportDocument> docs = OracleFromJson(text);
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].setting == "none");
  CHECK(docs[1].setting == "panoptic_gt");
  CHECK(docs[2].setting == "part_gt");
  for (std::size_t k = 0; k < 3; ++k) CHECK(docs[k].metrics == runs[k].report);
}
