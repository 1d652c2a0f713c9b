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

#ifndef PPSEG_SEGMAP_HPP_
#define PPSEG_SEGMAP_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppseg/taxonomy.hpp"

namespace ppseg {

// Row-major grid of encoded uids, top-left origin.
class PanopticPartMap {
 public:
  PanopticPartMap() = default;
  PanopticPartMap(std::uint32_t width, std::uint32_t height, std::uint32_t fill = 0);
  // kShapeMismatch unless data.size() == width * height.
  PanopticPartMap(std::uint32_t width, std::uint32_t height, std::vector<std::uint32_t> data);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  std::span<const std::uint32_t> data() const { return data_; }
  std::span<std::uint32_t> mutable_data() { return data_; }

  std::uint32_t operator[](std::size_t i) const { return data_[i]; }
  std::uint32_t& operator[](std::size_t i) { return data_[i]; }
  std::uint32_t at(std::uint32_t x, std::uint32_t y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  bool SameGrid(const PanopticPartMap& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const PanopticPartMap&, const PanopticPartMap&) = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint32_t> data_;
};

// Checks that every non-void uid decodes and names a class of `taxonomy`.
// Throws kFormError or kUnknownClass.
void ValidateMap(const PanopticPartMap& map, const Taxonomy& taxonomy);

// PPSM: "PPSM", u16 version (1), u32 width, u32 height, then width * height
// u32 uids. Little-endian throughout, no padding.
inline constexpr std::uint16_t kPpsmVersion = 1;
inline constexpr std::size_t kPpsmHeaderSize = 14;

std::vector<std::uint8_t> WritePpsm(const PanopticPartMap& map);
PanopticPartMap ReadPpsm(std::span<const std::uint8_t> bytes);
void WritePpsmFile(const std::string& path, const PanopticPartMap& map);
PanopticPartMap ReadPpsmFile(const std::string& path);

struct PixelRun {
  std::uint32_t start = 0;
  std::uint32_t length = 0;

  friend bool operator==(const PixelRun&, const PixelRun&) = default;
};

// One non-overlapping mask. Pixels are stored as row-major runs.
struct Segment {
  int sid = 0;
  std::optional<int> iid;  // absent for stuff and unlabeled-instance thing regions
  bool unlabeled_instance = false;
  std::uint64_t pixel_count = 0;
  std::vector<PixelRun> runs;

  template <typename Fn>
  void ForEachPixel(Fn&& fn) const {
    for (const PixelRun& r : runs) {
      for (std::uint32_t i = r.start; i < r.start + r.length; ++i) fn(i);
    }
  }
  std::vector<std::uint32_t> Pixels() const;
};

struct SegmentSet {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  // Sorted by (sid, iid) with an absent iid first.
  std::vector<Segment> segments;
  // Segment index per pixel, -1 on void.
  std::vector<std::int32_t> pixel_segment;
  std::uint64_t void_pixels = 0;
  std::uint64_t unlabeled_instance_pixels = 0;
};

// Groups pixels into one segment per (sid, iid) on thing classes and per sid
// on stuff classes. Part ids are ignored. Thing pixels with no iid form one
// unlabeled-instance segment per class. Throws kUnknownClass / kFormError.
SegmentSet ExtractSegments(const PanopticPartMap& map, const Taxonomy& taxonomy);

struct PartHistogram {
  std::map<int, std::uint64_t> counts;  // pid -> pixels
  std::uint64_t unlabeled = 0;          // pixels with no pid (or pid 0)

  friend bool operator==(const PartHistogram&, const PartHistogram&) = default;
};

// kNotAPartClass if the segment's class has no parts.
PartHistogram ComputePartHistogram(const PanopticPartMap& map, const Segment& segment,
                                   const Taxonomy& taxonomy);

}  // namespace ppseg

#endif  // PPSEG_SEGMAP_HPP_
