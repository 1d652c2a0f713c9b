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

#include "ppseg/fusion.hpp"

#include <string>

#include "ppseg/error.hpp"

namespace ppseg {

PartLabelGrid::PartLabelGrid(std::uint32_t width, std::uint32_t height)
    : width_(width), height_(height), labels_(static_cast<std::size_t>(width) * height, 0) {}

void PartLabelGrid::Set(std::size_t i, int sid, int pid) {
  if (sid < 1 || sid > kMaxSceneId || pid < 1 || pid > kMaxPartId) {
    throw Error(ErrorCode::kRangeError, "part label (" + std::to_string(sid) + ", " +
                                            std::to_string(pid) + ") out of range");
  }
  labels_[i] = static_cast<std::uint16_t>(sid * 100 + pid);
}

PartLabelGrid PartLabelGrid::FromMap(const PanopticPartMap& map) {
  PartLabelGrid grid(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) {
    LabelTriple t;
    if (TryDecodeUid(map[i], &t) && t.pid && *t.pid > 0) grid.Set(i, t.sid, *t.pid);
  }
  return grid;
}

PanopticPartMap PartLabelGrid::ToMap(std::uint32_t void_uid) const {
  PanopticPartMap map(width_, height_, void_uid);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == 0) continue;
    map[i] = EncodeUid(SidOf(labels_[i]), 0, PidOf(labels_[i])).value;
  }
  return map;
}

PanopticPartMap MergePanopticParts(const PanopticPartMap& panoptic, const PartLabelGrid& parts,
                                   const Taxonomy& taxonomy, const FusionConfig& config) {
  if (panoptic.width() != parts.width() || panoptic.height() != parts.height()) {
    throw Error(ErrorCode::kGridMismatch, "panoptic and part inputs differ in size");
  }
  const std::uint32_t void_uid = taxonomy.void_uid();
  PanopticPartMap out = panoptic;
  for (std::size_t i = 0; i < panoptic.size(); ++i) {
    const std::uint32_t uid = panoptic[i];
    if (uid == void_uid) continue;
    const LabelTriple t = DecodeUid(Uid{uid});
    if (t.pid) {
      throw Error(ErrorCode::kUnexpectedPid,
                  "panoptic input carries part uid " + std::to_string(uid));
    }
    const ClassSpec& spec = taxonomy.Get(t.sid);
    // No-part classes, and part classes without an instance id, are copied.
    if (!spec.has_parts() || !t.iid) continue;

    const std::uint16_t label = parts[i];
    if (label == 0) {
      if (!config.keep_unlabeled_parts) out[i] = void_uid;
      continue;
    }
    const int part_sid = PartLabelGrid::SidOf(label);
    const int pid = PartLabelGrid::PidOf(label);
    if (part_sid == t.sid && taxonomy.OwnsPart(t.sid, pid)) {
      out[i] = EncodeUid(t.sid, t.iid, pid).value;
    } else if (config.void_on_mismatch) {
      out[i] = void_uid;
    }
  }
  return out;
}

PanopticPartMap MergePanopticParts(const PanopticPartMap& panoptic,
                                   const PanopticPartMap& parts, const Taxonomy& taxonomy,
                                   const FusionConfig& config) {
  if (!panoptic.SameGrid(parts)) {
    throw Error(ErrorCode::kGridMismatch, "panoptic and part inputs differ in size");
  }
  return MergePanopticParts(panoptic, PartLabelGrid::FromMap(parts), taxonomy, config);
}

MapComponents SplitComponents(const PanopticPartMap& map, const Taxonomy& taxonomy) {
  MapComponents out{map, PartLabelGrid(map.width(), map.height())};
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] == taxonomy.void_uid()) continue;
    const LabelTriple t = DecodeUid(Uid{map[i]});
    if (!t.pid) continue;
    out.panoptic[i] = EncodeUid(t.sid, t.iid).value;
    if (*t.pid > 0) out.parts.Set(i, t.sid, *t.pid);
  }
  return out;
}

}  // namespace ppseg
