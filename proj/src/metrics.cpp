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

#include "ppseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "ppseg/error.hpp"
#include "ppseg/parallel.hpp"

namespace ppseg {
namespace {

constexpr double kFixedScale = 0x1p62;
constexpr int kPartSlots = (kMaxSceneId + 1) * (kMaxPartId + 1);

void RequireSameGrid(std::uint32_t w0, std::uint32_t h0, std::uint32_t w1, std::uint32_t h1) {
  if (w0 != w1 || h0 != h1) {
    throw Error(ErrorCode::kGridMismatch, std::to_string(w0) + "x" + std::to_string(h0) +
                                              " vs " + std::to_string(w1) + "x" +
                                              std::to_string(h1));
  }
}

void RequireTaxonomy(const MetricAccumulator& acc, const Taxonomy& taxonomy) {
  if (acc.taxonomy_fingerprint() != taxonomy.fingerprint()) {
    throw Error(ErrorCode::kTaxonomyMismatch, "accumulator was built for another taxonomy");
  }
}

// Part label of a pixel as sid * 100 + pid, or -1 when the uid carries no pid
// owned by its class.
int OwnedPartLabel(std::uint32_t uid, const Taxonomy& taxonomy) {
  LabelTriple t;
  if (!TryDecodeUid(uid, &t) || !t.pid || *t.pid == 0) return -1;
  if (!taxonomy.OwnsPart(t.sid, *t.pid)) return -1;
  return t.sid * (kMaxPartId + 1) + *t.pid;
}

std::uint64_t RunOverlap(const std::vector<PixelRun>& a, const std::vector<PixelRun>& b) {
  std::uint64_t overlap = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const std::uint64_t a_end = static_cast<std::uint64_t>(a[i].start) + a[i].length;
    const std::uint64_t b_end = static_cast<std::uint64_t>(b[j].start) + b[j].length;
    const std::uint64_t lo = std::max(a[i].start, b[j].start);
    const std::uint64_t hi = std::min(a_end, b_end);
    if (hi > lo) overlap += hi - lo;
    if (a_end < b_end) {
      ++i;
    } else {
      ++j;
    }
  }
  return overlap;
}

template <typename Fn>
double MeanOverClasses(const MetricAccumulator& acc, const Taxonomy& taxonomy,
                       ClassFilter filter, Fn&& numerator) {
  RequireTaxonomy(acc, taxonomy);
  double total = 0.0;
  int count = 0;
  for (const ClassSpec& spec : taxonomy.classes()) {
    if (filter == ClassFilter::kParts && !spec.has_parts()) continue;
    if (filter == ClassFilter::kNoParts && spec.has_parts()) continue;
    const ClassStats& s = acc.class_stats(spec.sid);
    if (!s.evaluated()) continue;
    const double denominator = static_cast<double>(s.tp) + 0.5 * static_cast<double>(s.fp) +
                               0.5 * static_cast<double>(s.fn);
    total += numerator(s) / denominator;
    ++count;
  }
  if (count == 0) {
    throw Error(ErrorCode::kNoEvaluatableClass, "no class in the filter was evaluated");
  }
  return total / count;
}

void RequireFraction(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::kRangeError, std::string(what) + " = " + std::to_string(v) +
                                            " is not a fraction in [0, 1]");
  }
}

template <typename Fn>
std::optional<double> Optional(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNoEvaluatableClass) return std::nullopt;
    throw;
  }
}

}  // namespace

double Iou(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  std::vector<std::uint32_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  std::sort(sb.begin(), sb.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  std::vector<std::uint32_t> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  const std::size_t union_size = sa.size() + sb.size() - common.size();
  if (union_size == 0) throw Error(ErrorCode::kEmptyUnion, "IoU of two empty sets");
  return static_cast<double>(common.size()) / static_cast<double>(union_size);
}

double Iou(const Segment& a, const Segment& b) {
  const std::uint64_t inter = RunOverlap(a.runs, b.runs);
  const std::uint64_t union_size = a.pixel_count + b.pixel_count - inter;
  if (union_size == 0) throw Error(ErrorCode::kEmptyUnion, "IoU of two empty segments");
  return static_cast<double>(inter) / static_cast<double>(union_size);
}

Matching MatchSegments(const SegmentSet& gt, const SegmentSet& pred, const Taxonomy& taxonomy,
                       const EvalConfig& config) {
  RequireSameGrid(gt.width, gt.height, pred.width, pred.height);
  (void)taxonomy;

  std::unordered_map<std::uint64_t, std::uint64_t> overlaps;
  std::vector<std::uint64_t> pred_on_void(pred.segments.size(), 0);
  for (std::size_t i = 0; i < gt.pixel_segment.size(); ++i) {
    const std::int32_t p = pred.pixel_segment[i];
    if (p < 0) continue;
    const std::int32_t g = gt.pixel_segment[i];
    if (g < 0) {
      ++pred_on_void[p];
    } else if (gt.segments[g].sid == pred.segments[p].sid) {
      ++overlaps[(static_cast<std::uint64_t>(g) << 32) | static_cast<std::uint32_t>(p)];
    }
  }

  std::vector<char> gt_matched(gt.segments.size(), 0), pred_matched(pred.segments.size(), 0);
  std::vector<MatchedPair> pairs;
  for (const auto& [key, inter] : overlaps) {
    const int g = static_cast<int>(key >> 32);
    const int p = static_cast<int>(key & 0xffffffffu);
    const std::uint64_t union_size =
        gt.segments[g].pixel_count + pred.segments[p].pixel_count - inter;
    if (2 * inter > union_size) {
      pairs.push_back({g, p, inter, union_size,
                       static_cast<double>(inter) / static_cast<double>(union_size)});
      gt_matched[g] = 1;
      pred_matched[p] = 1;
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.gt < b.gt; });

  // Segment sets are sorted by sid, so classes appear in ascending order.
  Matching matching;
  auto class_entry = [&](int sid) -> ClassMatching& {
    auto it = std::lower_bound(
        matching.classes.begin(), matching.classes.end(), sid,
        [](const ClassMatching& c, int s) { return c.sid < s; });
    if (it == matching.classes.end() || it->sid != sid) {
      it = matching.classes.insert(it, ClassMatching{});
      it->sid = sid;
    }
    return *it;
  };
  for (const MatchedPair& pair : pairs) class_entry(gt.segments[pair.gt].sid).tp.push_back(pair);
  for (std::size_t g = 0; g < gt.segments.size(); ++g) {
    if (!gt_matched[g]) class_entry(gt.segments[g].sid).fn.push_back(static_cast<int>(g));
  }
  for (std::size_t p = 0; p < pred.segments.size(); ++p) {
    if (pred_matched[p]) continue;
    ClassMatching& entry = class_entry(pred.segments[p].sid);
    if (config.void_fp_rule && 2 * pred_on_void[p] > pred.segments[p].pixel_count) {
      entry.void_ignored.push_back(static_cast<int>(p));
    } else {
      entry.fp.push_back(static_cast<int>(p));
    }
  }
  return matching;
}

std::optional<double> MeanPartIou(const Segment& gt_segment, const Segment& pred_segment,
                                  const PanopticPartMap& gt_map,
                                  const PanopticPartMap& pred_map, const Taxonomy& taxonomy) {
  RequireSameGrid(gt_map.width(), gt_map.height(), pred_map.width(), pred_map.height());
  const int sid = gt_segment.sid;
  if (!taxonomy.HasParts(sid)) {
    throw Error(ErrorCode::kNotAPartClass, "class " + std::to_string(sid) + " has no parts");
  }
  if (pred_segment.sid != sid) {
    throw Error(ErrorCode::kFormError, "matched segments belong to different classes");
  }

  std::array<std::uint64_t, kMaxPartId + 1> gt_count{}, pred_count{}, both{};
  auto owned_pid = [&](std::uint32_t uid) -> int {
    LabelTriple t;
    if (!TryDecodeUid(uid, &t) || !t.pid || *t.pid == 0) return 0;
    return taxonomy.OwnsPart(sid, *t.pid) ? *t.pid : 0;
  };
  auto visit = [&](std::uint32_t i, bool in_gt, bool in_pred) {
    const int gl = in_gt ? owned_pid(gt_map[i]) : 0;
    const int pl = in_pred ? owned_pid(pred_map[i]) : 0;
    if (gl) ++gt_count[gl];
    if (pl) ++pred_count[pl];
    if (gl && gl == pl) ++both[gl];
  };

  const std::vector<std::uint32_t> g = gt_segment.Pixels();
  const std::vector<std::uint32_t> p = pred_segment.Pixels();
  std::size_t a = 0, b = 0;
  while (a < g.size() || b < p.size()) {
    if (b == p.size() || (a < g.size() && g[a] < p[b])) {
      visit(g[a++], true, false);
    } else if (a == g.size() || p[b] < g[a]) {
      visit(p[b++], false, true);
    } else {
      visit(g[a], true, true);
      ++a;
      ++b;
    }
  }

  double total = 0.0;
  int count = 0;
  for (int pid = 1; pid <= kMaxPartId; ++pid) {
    if (gt_count[pid] + pred_count[pid] == 0) continue;
    total += static_cast<double>(both[pid]) /
             static_cast<double>(gt_count[pid] + pred_count[pid] - both[pid]);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return total / count;
}

void ExactSum::Add(double fraction) {
  units_ += static_cast<std::uint64_t>(std::llround(fraction * kFixedScale));
}

double ExactSum::value() const { return static_cast<double>(units_) / kFixedScale; }

MetricAccumulator::MetricAccumulator(const Taxonomy& taxonomy)
    : fingerprint_(taxonomy.fingerprint()), part_labels_(kPartSlots) {}

MetricAccumulator& MetricAccumulator::Merge(const MetricAccumulator& other) {
  if (fingerprint_ != other.fingerprint_) {
    throw Error(ErrorCode::kTaxonomyMismatch, "merging accumulators of different taxonomies");
  }
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    ClassStats& s = classes_[i];
    const ClassStats& o = other.classes_[i];
    s.tp += o.tp;
    s.fp += o.fp;
    s.fn += o.fn;
    s.iou_sum += o.iou_sum;
    s.part_iou_sum += o.part_iou_sum;
  }
  for (std::size_t i = 0; i < scene_labels_.size(); ++i) {
    scene_labels_[i].intersection += other.scene_labels_[i].intersection;
    scene_labels_[i].union_size += other.scene_labels_[i].union_size;
  }
  for (std::size_t i = 0; i < part_labels_.size(); ++i) {
    part_labels_[i].intersection += other.part_labels_[i].intersection;
    part_labels_[i].union_size += other.part_labels_[i].union_size;
  }
  image_count += other.image_count;
  gt_unlabeled_instance_pixels += other.gt_unlabeled_instance_pixels;
  pred_unlabeled_instance_pixels += other.pred_unlabeled_instance_pixels;
  return *this;
}

MetricAccumulator MergeAccumulators(const MetricAccumulator& a, const MetricAccumulator& b) {
  MetricAccumulator out = a;
  out.Merge(b);
  return out;
}

MetricAccumulator EvaluatePair(const PanopticPartMap& gt, const PanopticPartMap& pred,
                               const Taxonomy& taxonomy, const EvalConfig& config) {
  RequireSameGrid(gt.width(), gt.height(), pred.width(), pred.height());
  const SegmentSet gt_set = ExtractSegments(gt, taxonomy);
  const SegmentSet pred_set = ExtractSegments(pred, taxonomy);
  const Matching matching = MatchSegments(gt_set, pred_set, taxonomy, config);

  MetricAccumulator acc(taxonomy);
  acc.image_count = 1;
  acc.gt_unlabeled_instance_pixels = gt_set.unlabeled_instance_pixels;
  acc.pred_unlabeled_instance_pixels = pred_set.unlabeled_instance_pixels;

  for (const ClassMatching& cm : matching.classes) {
    ClassStats& stats = acc.class_stats(cm.sid);
    stats.tp += cm.tp.size();
    stats.fp += cm.fp.size();
    stats.fn += cm.fn.size();
    const bool part_class = taxonomy.HasParts(cm.sid);
    for (const MatchedPair& pair : cm.tp) {
      stats.iou_sum.Add(pair.iou);
      double part_iou = pair.iou;
      if (part_class) {
        // Segments without any part annotation on either side keep the
        // scene IoU.
        part_iou = MeanPartIou(gt_set.segments[pair.gt], pred_set.segments[pair.pred], gt,
                               pred, taxonomy)
                       .value_or(pair.iou);
      }
      stats.part_iou_sum.Add(part_iou);
    }
  }

  // Pixel-level counts. GT void pixels are skipped; a void prediction on a
  // labelled GT pixel only widens the GT label's union.
  const std::uint32_t void_uid = taxonomy.void_uid();
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::int32_t g = gt_set.pixel_segment[i];
    if (g < 0) continue;
    const std::int32_t p = pred_set.pixel_segment[i];
    const int gt_sid = gt_set.segments[g].sid;
    const int pred_sid = p < 0 ? 0 : pred_set.segments[p].sid;
    if (gt_sid == pred_sid) {
      ++acc.scene_label(gt_sid).intersection;
      ++acc.scene_label(gt_sid).union_size;
    } else {
      ++acc.scene_label(gt_sid).union_size;
      if (pred_sid) ++acc.scene_label(pred_sid).union_size;
    }

    const int gl = OwnedPartLabel(gt[i], taxonomy);
    const int pl = pred[i] == void_uid ? -1 : OwnedPartLabel(pred[i], taxonomy);
    if (gl >= 0 && gl == pl) {
      ++acc.part_label(gl / 100, gl % 100).intersection;
      ++acc.part_label(gl / 100, gl % 100).union_size;
    } else {
      if (gl >= 0) ++acc.part_label(gl / 100, gl % 100).union_size;
      if (pl >= 0) ++acc.part_label(pl / 100, pl % 100).union_size;
    }
  }
  return acc;
}

MetricAccumulator EvaluateDataset(std::span<const PanopticPartMap> gt,
                                  std::span<const PanopticPartMap> pred,
                                  const Taxonomy& taxonomy, const EvalConfig& config,
                                  unsigned threads) {
  if (gt.size() != pred.size()) {
    throw Error(ErrorCode::kDatasetMismatch, std::to_string(gt.size()) + " GT maps vs " +
                                                 std::to_string(pred.size()) + " predictions");
  }
  return ParallelMapReduce(
      gt.size(), threads, MetricAccumulator(taxonomy),
      [&](std::size_t i) { return EvaluatePair(gt[i], pred[i], taxonomy, config); },
      [](MetricAccumulator& into, const MetricAccumulator& from) { into.Merge(from); });
}

double ComputePq(const MetricAccumulator& acc, const Taxonomy& taxonomy, ClassFilter filter) {
  return MeanOverClasses(acc, taxonomy, filter,
                         [](const ClassStats& s) { return s.iou_sum.value(); });
}

double ComputePartPq(const MetricAccumulator& acc, const Taxonomy& taxonomy,
                     ClassFilter filter) {
  return MeanOverClasses(acc, taxonomy, filter,
                         [](const ClassStats& s) { return s.part_iou_sum.value(); });
}

double ComputeMiou(const MetricAccumulator& acc, const Taxonomy& taxonomy, LabelSpace space,
                   const EvalConfig& config) {
  RequireTaxonomy(acc, taxonomy);
  double total = 0.0;
  int count = 0;
  auto add = [&](const LabelCounts& c) {
    if (c.union_size == 0) {
      if (config.miou_full_label_set) ++count;
      return;
    }
    total += static_cast<double>(c.intersection) / static_cast<double>(c.union_size);
    ++count;
  };
  for (const ClassSpec& spec : taxonomy.classes()) {
    if (space == LabelSpace::kScene) {
      add(acc.scene_label(spec.sid));
    } else {
      for (const PartSpec& part : spec.parts) add(acc.part_label(spec.sid, part.pid));
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::kNoEvaluatableClass, "no label present for mIoU");
  }
  return total / count;
}

double ComputeMiou(const PanopticPartMap& gt, const PanopticPartMap& pred, LabelSpace space,
                   const Taxonomy& taxonomy, const EvalConfig& config) {
  return ComputeMiou(EvaluatePair(gt, pred, taxonomy, config), taxonomy, space, config);
}

PwqComponents ComputePwq(double miou_scene, double pq_scene, double miou_part,
                         double partpq_p) {
  RequireFraction(miou_scene, "miou_scene");
  RequireFraction(pq_scene, "pq_scene");
  RequireFraction(miou_part, "miou_part");
  RequireFraction(partpq_p, "partpq_p");
  PwqComponents out;
  out.ssq = miou_scene * pq_scene;
  out.psq = miou_part * partpq_p;
  out.pwq = PartWholeQuality(out.ssq, out.psq);
  return out;
}

double PartWholeQuality(double ssq, double psq) {
  RequireFraction(ssq, "ssq");
  RequireFraction(psq, "psq");
  return std::sqrt((ssq + psq) / 2.0);
}

MetricReport BuildReport(const MetricAccumulator& acc, const Taxonomy& taxonomy,
                         const EvalConfig& config) {
  RequireTaxonomy(acc, taxonomy);
  MetricReport r;
  r.pq_all = ComputePq(acc, taxonomy, ClassFilter::kAll);
  r.pq_p = Optional([&] { return ComputePq(acc, taxonomy, ClassFilter::kParts); });
  r.pq_np = Optional([&] { return ComputePq(acc, taxonomy, ClassFilter::kNoParts); });
  r.partpq_all = ComputePartPq(acc, taxonomy, ClassFilter::kAll);
  r.partpq_p = Optional([&] { return ComputePartPq(acc, taxonomy, ClassFilter::kParts); });
  r.partpq_np = Optional([&] { return ComputePartPq(acc, taxonomy, ClassFilter::kNoParts); });
  r.miou_scene = Optional([&] { return ComputeMiou(acc, taxonomy, LabelSpace::kScene, config); });
  if (!taxonomy.part_classes().empty()) {
    r.miou_part = Optional([&] { return ComputeMiou(acc, taxonomy, LabelSpace::kPart, config); });
  }
  if (r.miou_scene) r.ssq = *r.miou_scene * *r.pq_all;
  if (r.miou_part && r.partpq_p) r.psq = *r.miou_part * *r.partpq_p;
  if (r.ssq && r.psq) r.pwq = PartWholeQuality(*r.ssq, *r.psq);

  r.image_count = acc.image_count;
  r.gt_unlabeled_instance_pixels = acc.gt_unlabeled_instance_pixels;
  r.pred_unlabeled_instance_pixels = acc.pred_unlabeled_instance_pixels;
  for (const ClassSpec& spec : taxonomy.classes()) {
    const ClassStats& s = acc.class_stats(spec.sid);
    if (!s.evaluated()) continue;
    const double denominator = static_cast<double>(s.tp) + 0.5 * static_cast<double>(s.fp) +
                               0.5 * static_cast<double>(s.fn);
    r.classes.push_back({spec.sid, spec.has_parts(), s.tp, s.fp, s.fn,
                         s.iou_sum.value() / denominator, s.part_iou_sum.value() / denominator});
  }
  return r;
}

}  // namespace ppseg
