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

// Taxonomies and random label maps shared by the unit and acceptance tests.

#ifndef PPSEG_TESTS_SUPPORT_FIXTURES_HPP_
#define PPSEG_TESTS_SUPPORT_FIXTURES_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ppseg/fusion.hpp"
#include "ppseg/segmap.hpp"
#include "ppseg/taxonomy.hpp"

namespace ppseg::testing {

using Rng = std::mt19937_64;

// Stuff 1 and 2, thing 3 without parts, thing 4 with parts {1, 2, 3},
// thing 5 with parts {1, 2}.
Taxonomy SmallPartTaxonomy();

// Stuff 1 and 2, things 3 and 4, no parts anywhere.
Taxonomy NoPartTaxonomy();

// Cityscapes-style layout with 5 part-bearing classes and 23 part labels.
Taxonomy CppTaxonomy();

// 59 scene classes (20 things, 39 stuff) with 57 part labels.
Taxonomy PppTaxonomy();

// Path of a file under the repository's data/ directory.
std::string DataPath(const std::string& name);

struct MapOptions {
  std::uint32_t min_side = 1;
  std::uint32_t max_side = 16;
  int max_objects = 5;
  double void_rate = 0.05;
  double unlabeled_instance_rate = 0.1;
  double unlabeled_part_rate = 0.2;
};

// Stuff bands overlaid with rectangular thing instances. Part-bearing
// instances are split into stripes of owned pids (pid >= 1), some left
// without a part label.
PanopticPartMap RandomGroundTruth(Rng& rng, const Taxonomy& taxonomy, const MapOptions& options = {});
PanopticPartMap RandomGroundTruth(Rng& rng, const Taxonomy& taxonomy, std::uint32_t width,
                                  std::uint32_t height, const MapOptions& options = {});

// A noisy copy of `gt`: boundary jitter, class swaps, pid noise, extra blobs
// and void changes. Keeps the grid.
PanopticPartMap PerturbPrediction(Rng& rng, const PanopticPartMap& gt, const Taxonomy& taxonomy);

// A random valid part grid over the classes of `taxonomy`.
PartLabelGrid RandomPartGrid(Rng& rng, const Taxonomy& taxonomy, std::uint32_t width,
                             std::uint32_t height);

// Inputs of an upper-bound run: GT plus the two prediction halves.
struct OracleFixture {
  std::vector<PanopticPartMap> gt;
  std::vector<PanopticPartMap> pred_panoptic;
  std::vector<PartLabelGrid> pred_parts;
};

// Perfect parts; stuff pixels in the top half of each image are relabeled to
// another stuff class, so only scene-level quality drops.
OracleFixture DegradedPanopticFixture(Rng& rng, const Taxonomy& taxonomy, int images);

// Perfect panoptic half; about half of the part pixels get another pid of the
// same class, so only part-level quality drops.
OracleFixture DegradedPartsFixture(Rng& rng, const Taxonomy& taxonomy, int images);

}  // namespace ppseg::testing

#endif  // PPSEG_TESTS_SUPPORT_FIXTURES_HPP_
