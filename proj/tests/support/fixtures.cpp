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

#include "fixtures.hpp"

#include <algorithm>
#include <map>

namespace ppseg::testing {
namespace {

ClassSpec Stuff(int sid) { return {sid, "stuff" + std::to_string(sid), ClassKind::kStuff, {}}; }

ClassSpec Thing(int sid, int parts = 0) {
  ClassSpec c{sid, "thing" + std::to_string(sid), ClassKind::kThing, {}};
  for (int p = 1; p <= parts; ++p) c.parts.push_back({p, "part" + std::to_string(p)});
  return c;
}

int Uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool Chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& Pick(Rng& rng, const std::vector<T>& items) {
  return items[Uniform(rng, 0, static_cast<int>(items.size()) - 1)];
}

std::vector<int> SidsOfKind(const Taxonomy& taxonomy, ClassKind kind) {
  std::vector<int> out;
  for (const ClassSpec& c : taxonomy.classes()) {
    if (c.kind == kind) out.push_back(c.sid);
  }
  return out;
}

std::vector<int> OwnedPids(const Taxonomy& taxonomy, int sid) {
  std::vector<int> out;
  for (const PartSpec& p : taxonomy.Get(sid).parts) out.push_back(p.pid);
  return out;
}

// Re-encodes `uid` under another class, keeping iid and any pid the new class
// owns.
std::uint32_t Reclass(std::uint32_t uid, int new_sid, const Taxonomy& taxonomy) {
  const LabelTriple t = DecodeUid(Uid{uid});
  const bool thing = taxonomy.IsThing(new_sid);
  if (!thing || !t.iid) return EncodeUid(new_sid).value;
  if (t.pid && *t.pid > 0 && taxonomy.OwnsPart(new_sid, *t.pid)) {
    return EncodeUid(new_sid, t.iid, t.pid).value;
  }
  return EncodeUid(new_sid, t.iid).value;
}

}  // namespace

Taxonomy SmallPartTaxonomy() {
  return Taxonomy::Create({Stuff(1), Stuff(2), Thing(3), Thing(4, 3), Thing(5, 2)});
}

Taxonomy NoPartTaxonomy() { return Taxonomy::Create({Stuff(1), Stuff(2), Thing(3), Thing(4)}); }

Taxonomy CppTaxonomy() { return LoadTaxonomyFile(DataPath("cpp_taxonomy.json")); }

Taxonomy PppTaxonomy() {
  std::vector<ClassSpec> classes;
  // 13 things with four parts and one with five: 57 part labels.
  for (int sid = 1; sid <= 20; ++sid) classes.push_back(Thing(sid, sid <= 13 ? 4 : sid == 14 ? 5 : 0));
  for (int sid = 21; sid <= 59; ++sid) classes.push_back(Stuff(sid));
  return Taxonomy::Create(std::move(classes));
}

std::string DataPath(const std::string& name) { return std::string(PPSEG_DATA_DIR) + "/" + name; }

PanopticPartMap RandomGroundTruth(Rng& rng, const Taxonomy& taxonomy, const MapOptions& options) {
  const auto w = static_cast<std::uint32_t>(Uniform(rng, options.min_side, options.max_side));
  const auto h = static_cast<std::uint32_t>(Uniform(rng, options.min_side, options.max_side));
  return RandomGroundTruth(rng, taxonomy, w, h, options);
}

PanopticPartMap RandomGroundTruth(Rng& rng, const Taxonomy& taxonomy, std::uint32_t width,
                                  std::uint32_t height, const MapOptions& options) {
  PanopticPartMap map(width, height, taxonomy.void_uid());
  const std::vector<int> stuff = SidsOfKind(taxonomy, ClassKind::kStuff);
  const std::vector<int> things = SidsOfKind(taxonomy, ClassKind::kThing);

  // Horizontal stuff bands.
  if (!stuff.empty()) {
    const int bands = Uniform(rng, 1, 3);
    std::vector<std::uint32_t> band_uid(bands);
    for (int b = 0; b < bands; ++b) band_uid[b] = EncodeUid(Pick(rng, stuff)).value;
    for (std::uint32_t y = 0; y < height; ++y) {
      const std::uint32_t uid = band_uid[y * bands / height];
      for (std::uint32_t x = 0; x < width; ++x) map[y * width + x] = uid;
    }
  }

  // Thing rectangles, later ones on top.
  std::map<int, int> next_iid;
  const int objects = things.empty() ? 0 : Uniform(rng, 0, options.max_objects);
  for (int k = 0; k < objects; ++k) {
    const int sid = Pick(rng, things);
    const int rw = Uniform(rng, 1, static_cast<int>(width));
    const int rh = Uniform(rng, 1, static_cast<int>(height));
    const int x0 = Uniform(rng, 0, static_cast<int>(width) - rw);
    const int y0 = Uniform(rng, 0, static_cast<int>(height) - rh);

    if (Chance(rng, options.unlabeled_instance_rate)) {
      const std::uint32_t uid = EncodeUid(sid).value;
      for (int y = y0; y < y0 + rh; ++y) {
        for (int x = x0; x < x0 + rw; ++x) map[y * width + x] = uid;
      }
      continue;
    }
    auto [it, fresh] = next_iid.try_emplace(sid, Uniform(rng, 0, 5));
    const int iid = it->second++;
    const std::vector<int> pids = OwnedPids(taxonomy, sid);
    // Vertical stripes, each with one pid or none.
    const int stripes = Uniform(rng, 1, std::max(1, std::min(rw, 3)));
    std::vector<std::uint32_t> stripe_uid(stripes);
    for (int s = 0; s < stripes; ++s) {
      if (pids.empty() || Chance(rng, options.unlabeled_part_rate)) {
        stripe_uid[s] = EncodeUid(sid, iid).value;
      } else {
        stripe_uid[s] = EncodeUid(sid, iid, Pick(rng, pids)).value;
      }
    }
    for (int y = y0; y < y0 + rh; ++y) {
      for (int x = x0; x < x0 + rw; ++x) map[y * width + x] = stripe_uid[(x - x0) * stripes / rw];
    }
  }

  for (std::size_t i = 0; i < map.size(); ++i) {
    if (Chance(rng, options.void_rate)) map[i] = taxonomy.void_uid();
  }
  return map;
}

PanopticPartMap PerturbPrediction(Rng& rng, const PanopticPartMap& gt, const Taxonomy& taxonomy) {
  const std::uint32_t w = gt.width(), h = gt.height();
  const std::uint32_t void_uid = taxonomy.void_uid();
  PanopticPartMap pred = gt;

  // Whole-segment class swaps within the same kind.
  std::map<std::uint32_t, std::uint32_t> swap;
  for (std::uint32_t uid : gt.data()) {
    if (uid == void_uid || swap.count(uid)) continue;
    const LabelTriple t = DecodeUid(Uid{uid});
    std::uint32_t out = uid;
    if (Chance(rng, 0.12)) {
      const std::vector<int> peers = SidsOfKind(taxonomy, taxonomy.Get(t.sid).kind);
      out = Reclass(uid, Pick(rng, peers), taxonomy);
    }
    swap[uid] = out;
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] != void_uid) pred[i] = swap[pred[i]];
  }

  // Boundary jitter from a 4-neighbour of the original map.
  const PanopticPartMap before = pred;
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      if (!Chance(rng, 0.15)) continue;
      const int dir = Uniform(rng, 0, 3);
      const int nx = static_cast<int>(x) + (dir == 0) - (dir == 1);
      const int ny = static_cast<int>(y) + (dir == 2) - (dir == 3);
      if (nx < 0 || ny < 0 || nx >= static_cast<int>(w) || ny >= static_cast<int>(h)) continue;
      pred[y * w + x] = before[ny * w + nx];
    }
  }

  // Part noise.
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == void_uid) continue;
    const LabelTriple t = DecodeUid(Uid{pred[i]});
    if (!t.iid || !taxonomy.HasParts(t.sid) || !taxonomy.IsThing(t.sid)) continue;
    if (Chance(rng, 0.15)) {
      pred[i] = EncodeUid(t.sid, t.iid, Pick(rng, OwnedPids(taxonomy, t.sid))).value;
    } else if (t.pid && Chance(rng, 0.05)) {
      pred[i] = EncodeUid(t.sid, t.iid).value;
    }
  }

  // An extra blob of a random class.
  if (Chance(rng, 0.3)) {
    const ClassSpec& c = Pick(rng, taxonomy.classes());
    const std::uint32_t uid =
        c.kind == ClassKind::kThing ? EncodeUid(c.sid, 900 + Uniform(rng, 0, 9)).value
                                    : EncodeUid(c.sid).value;
    const int rw = Uniform(rng, 1, std::max(1, static_cast<int>(w) / 2));
    const int rh = Uniform(rng, 1, std::max(1, static_cast<int>(h) / 2));
    const int x0 = Uniform(rng, 0, static_cast<int>(w) - rw);
    const int y0 = Uniform(rng, 0, static_cast<int>(h) - rh);
    for (int y = y0; y < y0 + rh; ++y) {
      for (int x = x0; x < x0 + rw; ++x) pred[y * w + x] = uid;
    }
  }

  // Void noise in both directions.
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (Chance(rng, 0.03)) pred[i] = void_uid;
  }
  return pred;
}

PartLabelGrid RandomPartGrid(Rng& rng, const Taxonomy& taxonomy, std::uint32_t width,
                             std::uint32_t height) {
  PartLabelGrid grid(width, height);
  const std::vector<int>& part_classes = taxonomy.part_classes();
  if (part_classes.empty()) return grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (Chance(rng, 0.3)) continue;
    const int sid = Pick(rng, part_classes);
    grid.Set(i, sid, Pick(rng, OwnedPids(taxonomy, sid)));
  }
  return grid;
}

OracleFixture DegradedPanopticFixture(Rng& rng, const Taxonomy& taxonomy, int images) {
  const std::vector<int> stuff = SidsOfKind(taxonomy, ClassKind::kStuff);
  OracleFixture f;
  for (int n = 0; n < images; ++n) {
    f.gt.push_back(RandomGroundTruth(rng, taxonomy, 16, 16));
    MapComponents halves = SplitComponents(f.gt.back(), taxonomy);
    PanopticPartMap& panoptic = halves.panoptic;
    for (std::size_t i = 0; i < panoptic.size() / 2; ++i) {
      if (panoptic[i] == taxonomy.void_uid()) continue;
      const int sid = DecodeUid(Uid{panoptic[i]}).sid;
      if (taxonomy.IsThing(sid) || stuff.size() < 2) continue;
      const auto at = std::find(stuff.begin(), stuff.end(), sid) - stuff.begin();
      panoptic[i] = EncodeUid(stuff[(at + 1) % stuff.size()]).value;
    }
    f.pred_panoptic.push_back(std::move(panoptic));
    f.pred_parts.push_back(std::move(halves.parts));
  }
  return f;
}

OracleFixture DegradedPartsFixture(Rng& rng, const Taxonomy& taxonomy, int images) {
  OracleFixture f;
  for (int n = 0; n < images; ++n) {
    f.gt.push_back(RandomGroundTruth(rng, taxonomy, 16, 16));
    MapComponents halves = SplitComponents(f.gt.back(), taxonomy);
    PartLabelGrid& parts = halves.parts;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (parts[i] == 0 || !Chance(rng, 0.5)) continue;
      const int sid = PartLabelGrid::SidOf(parts[i]);
      std::vector<int> others = OwnedPids(taxonomy, sid);
      std::erase(others, PartLabelGrid::PidOf(parts[i]));
      if (!others.empty()) parts.Set(i, sid, Pick(rng, others));
    }
    f.pred_panoptic.push_back(std::move(halves.panoptic));
    f.pred_parts.push_back(std::move(parts));
  }
  return f;
}

}  // namespace ppseg::testing
