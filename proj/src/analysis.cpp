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

#include "ppseg/analysis.hpp"

#include <array>
#include <string>

#include "ppseg/error.hpp"
#include "ppseg/parallel.hpp"

namespace ppseg {

std::string_view OracleSettingName(OracleSetting setting) {
  switch (setting) {
    case OracleSetting::kNone: return "none";
    case OracleSetting::kPanopticGt: return "panoptic_gt";
    case OracleSetting::kPartGt: return "part_gt";
  }
  return "unknown";
}

std::vector<OracleRun> RunOracle(std::span<const PanopticPartMap> gt,
                                 std::span<const PanopticPartMap> pred_panoptic,
                                 std::span<const PartLabelGrid> pred_parts,
                                 const Taxonomy& taxonomy, const EvalConfig& eval_config,
                                 const FusionConfig& fusion_config, unsigned threads) {
  if (gt.size() != pred_panoptic.size() || gt.size() != pred_parts.size()) {
    throw Error(ErrorCode::kDatasetMismatch,
                "dataset sizes differ: " + std::to_string(gt.size()) + " GT, " +
                    std::to_string(pred_panoptic.size()) + " panoptic, " +
                    std::to_string(pred_parts.size()) + " part");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt[i].SameGrid(pred_panoptic[i]) || gt[i].width() != pred_parts[i].width() ||
        gt[i].height() != pred_parts[i].height()) {
      throw Error(ErrorCode::kDatasetMismatch, "image " + std::to_string(i) +
                                                   " differs in size across datasets");
    }
  }

  using Triple = std::array<MetricAccumulator, 3>;
  const MetricAccumulator zero(taxonomy);
  const Triple result = ParallelMapReduce(
      gt.size(), threads, Triple{zero, zero, zero},
      [&](std::size_t i) {
        const MapComponents truth = SplitComponents(gt[i], taxonomy);
        auto evaluate = [&](const PanopticPartMap& panoptic, const PartLabelGrid& parts) {
          return EvaluatePair(gt[i], MergePanopticParts(panoptic, parts, taxonomy, fusion_config),
                              taxonomy, eval_config);
        };
        return Triple{evaluate(pred_panoptic[i], pred_parts[i]),
                      evaluate(truth.panoptic, pred_parts[i]),
                      evaluate(pred_panoptic[i], truth.parts)};
      },
      [](Triple& into, const Triple& from) {
        for (std::size_t k = 0; k < into.size(); ++k) into[k].Merge(from[k]);
      });

  const OracleSetting order[3] = {OracleSetting::kNone, OracleSetting::kPanopticGt,
                                  OracleSetting::kPartGt};
  std::vector<OracleRun> runs;
  for (std::size_t k = 0; k < 3; ++k) {
    runs.push_back({order[k], BuildReport(result[k], taxonomy, eval_config)});
  }
  return runs;
}

}  // namespace ppseg
