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

#ifndef PPSEG_ANALYSIS_HPP_
#define PPSEG_ANALYSIS_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "ppseg/fusion.hpp"
#include "ppseg/metrics.hpp"

namespace ppseg {

// Which half of the prediction is replaced by ground truth before fusion.
enum class OracleSetting { kNone, kPanopticGt, kPartGt };

std::string_view OracleSettingName(OracleSetting setting);

struct OracleRun {
  OracleSetting setting = OracleSetting::kNone;
  MetricReport report;
};

// Upper-bound analysis: fuses {pred, GT} panoptic with {pred, GT} parts in
// the three settings none / panoptic_gt / part_gt and evaluates each against
// `gt`. GT is decomposed with SplitComponents. Runs are returned in that
// order. Throws kDatasetMismatch when the datasets are not aligned.
std::vector<OracleRun> RunOracle(std::span<const PanopticPartMap> gt,
                                 std::span<const PanopticPartMap> pred_panoptic,
                                 std::span<const PartLabelGrid> pred_parts,
                                 const Taxonomy& taxonomy, const EvalConfig& eval_config = {},
                                 const FusionConfig& fusion_config = {}, unsigned threads = 1);

}  // namespace ppseg

#endif  // PPSEG_ANALYSIS_HPP_
