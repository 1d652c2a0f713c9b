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

#ifndef PPSEG_FUSION_HPP_
#define PPSEG_FUSION_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "ppseg/segmap.hpp"
#include "ppseg/taxonomy.hpp"

namespace ppseg {

struct FusionConfig {
  // A part label whose class differs from the pixel's scene class voids the
  // pixel; when false the pid is dropped and the instance uid kept.
  bool void_on_mismatch = true;
  // Pixels of part-bearing instances without a part prediction keep their
  // (sid, iid) uid; when false they become void.
  bool keep_unlabeled_parts = true;
};

// Semantic part labels per pixel, encoded as sid * 100 + pid (0 = no part).
// Part ids are only meaningful relative to their scene class, so the class is
// kept alongside the pid.
class PartLabelGrid {
 public:
  PartLabelGrid() = default;
  PartLabelGrid(std::uint32_t width, std::uint32_t height);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::size_t size() const { return labels_.size(); }

  std::uint16_t operator[](std::size_t i) const { return labels_[i]; }
  void Set(std::size_t i, int sid, int pid);
  void Clear(std::size_t i) { labels_[i] = 0; }

  static int SidOf(std::uint16_t label) { return label / 100; }
  static int PidOf(std::uint16_t label) { return label % 100; }

  // Reads (sid, pid) from every full-triple uid with pid > 0.
  static PartLabelGrid FromMap(const PanopticPartMap& map);
  // Writes each label as uid sid * 100000 + pid (instance 0); unlabeled
  // pixels get `void_uid`.
  PanopticPartMap ToMap(std::uint32_t void_uid) const;

  friend bool operator==(const PartLabelGrid&, const PartLabelGrid&) = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint16_t> labels_;
};

// Combines a panoptic prediction with part predictions: no-part classes are
// copied, pixels of part-bearing instances get the pid of the part grid, and
// part labels of another class void the pixel (or drop the pid).
// Throws kGridMismatch, kUnexpectedPid (panoptic input already carries pids),
// kUnknownClass.
PanopticPartMap MergePanopticParts(const PanopticPartMap& panoptic, const PartLabelGrid& parts,
                                   const Taxonomy& taxonomy, const FusionConfig& config = {});
PanopticPartMap MergePanopticParts(const PanopticPartMap& panoptic,
                                   const PanopticPartMap& parts, const Taxonomy& taxonomy,
                                   const FusionConfig& config = {});

struct MapComponents {
  PanopticPartMap panoptic;  // pids stripped
  PartLabelGrid parts;
};

// Splits a full map into its panoptic and part halves.
MapComponents SplitComponents(const PanopticPartMap& map, const Taxonomy& taxonomy);

}  // namespace ppseg

#endif  // PPSEG_FUSION_HPP_
