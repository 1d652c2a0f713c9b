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

#include "ppseg/segmap.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <unordered_map>
#include <utility>

#include "ppseg/error.hpp"

namespace ppseg {
namespace {

constexpr char kMagic[4] = {'P', 'P', 'S', 'M'};

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
  }
}

std::uint16_t GetU16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// Segment key: sid * 1001 + (iid + 1), or sid * 1001 when iid is absent.
int SegmentKey(int sid, std::optional<int> iid) { return sid * 1001 + (iid ? *iid + 1 : 0); }

}  // namespace

PanopticPartMap::PanopticPartMap(std::uint32_t width, std::uint32_t height, std::uint32_t fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * height, fill) {}

PanopticPartMap::PanopticPartMap(std::uint32_t width, std::uint32_t height,
                                 std::vector<std::uint32_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kShapeMismatch,
                "map data holds " + std::to_string(data_.size()) + " uids, expected " +
                    std::to_string(static_cast<std::size_t>(width) * height));
  }
}

void ValidateMap(const PanopticPartMap& map, const Taxonomy& taxonomy) {
  std::uint32_t last = taxonomy.void_uid();
  for (std::uint32_t uid : map.data()) {
    if (uid == taxonomy.void_uid() || uid == last) continue;
    LabelTriple t = DecodeUid(Uid{uid});
    taxonomy.Get(t.sid);
    last = uid;
  }
}

std::vector<std::uint8_t> WritePpsm(const PanopticPartMap& map) {
  std::vector<std::uint8_t> out;
  out.reserve(kPpsmHeaderSize + map.size() * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  PutU16(out, kPpsmVersion);
  PutU32(out, map.width());
  PutU32(out, map.height());
  for (std::uint32_t uid : map.data()) PutU32(out, uid);
  return out;
}

PanopticPartMap ReadPpsm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "stream does not start with PPSM");
  }
  if (bytes.size() < kPpsmHeaderSize) {
    throw Error(ErrorCode::kTruncatedStream, "PPSM header is incomplete");
  }
  const std::uint16_t version = GetU16(bytes.data() + 4);
  if (version != kPpsmVersion) {
    throw Error(ErrorCode::kVersionUnsupported, "PPSM version " + std::to_string(version));
  }
  const std::uint32_t width = GetU32(bytes.data() + 6);
  const std::uint32_t height = GetU32(bytes.data() + 10);
  const std::uint64_t count = static_cast<std::uint64_t>(width) * height;
  const std::uint64_t payload = bytes.size() - kPpsmHeaderSize;
  if (payload < count * 4) {
    throw Error(ErrorCode::kTruncatedStream, "PPSM declares " + std::to_string(count) +
                                                 " uids but holds " +
                                                 std::to_string(payload / 4));
  }
  if (payload > count * 4) {
    throw Error(ErrorCode::kTrailingData, "PPSM has bytes past the last uid");
  }
  std::vector<std::uint32_t> data(count);
  const std::uint8_t* p = bytes.data() + kPpsmHeaderSize;
  for (std::uint64_t i = 0; i < count; ++i, p += 4) data[i] = GetU32(p);
  return PanopticPartMap(width, height, std::move(data));
}

void WritePpsmFile(const std::string& path, const PanopticPartMap& map) {
  const auto bytes = WritePpsm(map);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

PanopticPartMap ReadPpsmFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return ReadPpsm(bytes);
}

std::vector<std::uint32_t> Segment::Pixels() const {
  std::vector<std::uint32_t> pixels;
  pixels.reserve(pixel_count);
  ForEachPixel([&](std::uint32_t i) { pixels.push_back(i); });
  return pixels;
}

SegmentSet ExtractSegments(const PanopticPartMap& map, const Taxonomy& taxonomy) {
  SegmentSet set;
  set.width = map.width();
  set.height = map.height();
  set.pixel_segment.assign(map.size(), -1);

  std::unordered_map<int, std::int32_t> by_key;
  const std::uint32_t void_uid = taxonomy.void_uid();
  std::uint32_t cached_uid = void_uid;
  std::int32_t cached_index = -1;

  for (std::uint32_t i = 0; i < map.size(); ++i) {
    const std::uint32_t uid = map[i];
    if (uid == void_uid) {
      ++set.void_pixels;
      continue;
    }
    if (uid != cached_uid || cached_index < 0) {
      LabelTriple t = DecodeUid(Uid{uid});
      const ClassSpec& spec = taxonomy.Get(t.sid);
      const bool thing = spec.kind == ClassKind::kThing;
      std::optional<int> iid = thing ? t.iid : std::nullopt;
      const int key = SegmentKey(t.sid, iid);
      auto [it, inserted] = by_key.try_emplace(key, static_cast<std::int32_t>(set.segments.size()));
      if (inserted) {
        Segment seg;
        seg.sid = t.sid;
        seg.iid = iid;
        seg.unlabeled_instance = thing && !iid;
        set.segments.push_back(std::move(seg));
      }
      cached_uid = uid;
      cached_index = it->second;
    }
    Segment& seg = set.segments[cached_index];
    if (!seg.runs.empty() && seg.runs.back().start + seg.runs.back().length == i) {
      ++seg.runs.back().length;
    } else {
      seg.runs.push_back({i, 1});
    }
    ++seg.pixel_count;
    if (seg.unlabeled_instance) ++set.unlabeled_instance_pixels;
    set.pixel_segment[i] = cached_index;
  }

  // Canonical order, independent of where segments first appear.
  std::vector<std::int32_t> order(set.segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return SegmentKey(set.segments[a].sid, set.segments[a].iid) <
           SegmentKey(set.segments[b].sid, set.segments[b].iid);
  });
  std::vector<std::int32_t> remap(order.size());
  std::vector<Segment> sorted;
  sorted.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    remap[order[k]] = static_cast<std::int32_t>(k);
    sorted.push_back(std::move(set.segments[order[k]]));
  }
  set.segments = std::move(sorted);
  for (std::int32_t& s : set.pixel_segment) {
    if (s >= 0) s = remap[s];
  }
  return set;
}

PartHistogram ComputePartHistogram(const PanopticPartMap& map, const Segment& segment,
                                   const Taxonomy& taxonomy) {
  if (!taxonomy.HasParts(segment.sid)) {
    throw Error(ErrorCode::kNotAPartClass,
                "class " + std::to_string(segment.sid) + " has no parts");
  }
  PartHistogram hist;
  segment.ForEachPixel([&](std::uint32_t i) {
    LabelTriple t;
    if (TryDecodeUid(map[i], &t) && t.pid && *t.pid > 0) {
      ++hist.counts[*t.pid];
    } else {
      ++hist.unlabeled;
    }
  });
  return hist;
}

}  // namespace ppseg
