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

#include <cmath>
#include <optional>

#include "doctest.h"
#include "fixtures.hpp"
#include "ppseg/metrics.hpp"
#include "reference.hpp"

using namespace ppseg;

namespace {

void CheckClose(const std::optional<double>& lib, const std::optional<double>& ref) {
  REQUIRE(lib.has_value() == ref.has_value());
  if (lib) CHECK(std::abs(*lib - *ref) <= 1e-12);
}

void Compare(const MetricReport& lib, const reference::Result& ref) {
  REQUIRE(lib.classes.size() == ref.classes.size());
  for (const ClassReport& c : lib.classes) {
    const auto it = ref.classes.find(c.sid);
    REQUIRE(it != ref.classes.end());
    CHECK(c.tp == it->second.tp);
    CHECK(c.fp == it->second.fp);
    CHECK(c.fn == it->second.fn);
    CHECK(it->second.double_matches == 0);
  }
  CheckClose(lib.pq_all, ref.pq_all);
  CheckClose(lib.pq_p, ref.pq_p);
  CheckClose(lib.pq_np, ref.pq_np);
  CheckClose(lib.partpq_all, ref.partpq_all);
  CheckClose(lib.partpq_p, ref.partpq_p);
  CheckClose(lib.partpq_np, ref.partpq_np);
  CheckClose(lib.miou_scene, ref.miou_scene);
  CheckClose(lib.miou_part, ref.miou_part);
  CheckClose(lib.ssq, ref.ssq);
  CheckClose(lib.psq, ref.psq);
  CheckClose(lib.pwq, ref.pwq);
  CHECK(lib.gt_unlabeled_instance_pixels == ref.gt_unlabeled_instance_pixels);
  CHECK(lib.pred_unlabeled_instance_pixels == ref.pred_unlabeled_instance_pixels);
}

}  // namespace

TEST_CASE("reference reproduces the hand examples") {
  const Taxonomy plain = testing::NoPartTaxonomy();
  const reference::Result ab =
      reference::Evaluate({PanopticPartMap(2, 2, 1)}, {PanopticPartMap(2, 2, {1, 1, 1, 2})}, plain);
  CHECK(*ab.pq_all == 0.375);
  CHECK(ab.classes.at(1).tp == 1);
  CHECK(ab.classes.at(2).fp == 1);
  CHECK(*reference::Evaluate({PanopticPartMap(2, 1, {1, 1})}, {PanopticPartMap(2, 1, {1, 2})}, plain)
             .miou_scene == 0.25);

  const reference::Result on_void =
      reference::Evaluate({PanopticPartMap(5, 1, {1, 1, 0, 0, 0})}, {PanopticPartMap(5, 1, 2)}, plain);
  CHECK_FALSE(on_void.classes.count(2));

  const Taxonomy cpp = testing::CppTaxonomy();
  const reference::Result car = reference::Evaluate(
      {PanopticPartMap(4, 1, {2600102, 2600102, 2600105, 2600105})},
      {PanopticPartMap(4, 1, {2600102, 2600105, 2600105, 2600105})}, cpp);
  CHECK(car.classes.at(26).part_iou_sum == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
}

TEST_CASE("library agrees with the reference on random pairs") {
  const Taxonomy taxonomies[] = {testing::SmallPartTaxonomy(), testing::CppTaxonomy(),
                                 testing::NoPartTaxonomy()};
  testing::Rng rng(101);
  for (const Taxonomy& tax : taxonomies) {
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<PanopticPartMap> gt, pred;
      const int images = 1 + trial % 3;
      for (int n = 0; n < images; ++n) {
        gt.push_back(testing::RandomGroundTruth(rng, tax));
        pred.push_back(testing::PerturbPrediction(rng, gt.back(), tax));
      }
      for (const bool void_rule : {true, false}) {
        for (const bool full : {false, true}) {
          EvalConfig config;
          config.void_fp_rule = void_rule;
          config.miou_full_label_set = full;
          const MetricAccumulator acc = EvaluateDataset(gt, pred, tax, config);
          const auto ref = reference::Evaluate(gt, pred, tax, {void_rule, full});
          if (ref.classes.empty()) continue;
          Compare(BuildReport(acc, tax, config), ref);
        }
      }
    }
  }
}
