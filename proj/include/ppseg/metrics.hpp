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

#ifndef PPSEG_METRICS_HPP_
#define PPSEG_METRICS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ppseg/segmap.hpp"
#include "ppseg/taxonomy.hpp"

namespace ppseg {

struct EvalConfig {
  // Unmatched predictions lying more than half on GT void are not counted
  // as false positives.
  bool void_fp_rule = true;
  // Average mIoU over every label of the taxonomy instead of only the labels
  // that occur in GT or prediction. Absent labels then score 0.
  bool miou_full_label_set = false;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

// |a ∩ b| / |a ∪ b| over pixel index sets. kEmptyUnion when both are empty.
double Iou(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);
double Iou(const Segment& a, const Segment& b);

struct MatchedPair {
  int gt = -1;    // index into the GT SegmentSet
  int pred = -1;  // index into the predicted SegmentSet
  std::uint64_t intersection = 0;
  std::uint64_t union_size = 0;
  double iou = 0.0;
};

struct ClassMatching {
  int sid = 0;
  std::vector<MatchedPair> tp;
  std::vector<int> fp;
  std::vector<int> fn;
  std::vector<int> void_ignored;  // unmatched predictions excused by the void rule
};

struct Matching {
  std::vector<ClassMatching> classes;  // sorted by sid, only classes that occur
};

// Pairs segments of the same class with IoU > 0.5. With non-overlapping
// segments on both sides such pairs are unique. kGridMismatch on size
// disagreement.
Matching MatchSegments(const SegmentSet& gt, const SegmentSet& pred, const Taxonomy& taxonomy,
                       const EvalConfig& config = {});

// Mean part IoU of a matched pair, evaluated over the pixels of g ∪ p. Pids
// the class does not own are ignored; a pid seen on one side only scores 0.
// Returns nullopt when no owned pid occurs on either side.
// kNotAPartClass if the class has no parts.
std::optional<double> MeanPartIou(const Segment& gt_segment, const Segment& pred_segment,
                                  const PanopticPartMap& gt_map,
                                  const PanopticPartMap& pred_map, const Taxonomy& taxonomy);

// Sum of values in [0, 1] held in fixed point (2^-62 units) so that addition
// is exactly associative and commutative.
class ExactSum {
 public:
  void Add(double fraction);
  double value() const;
  ExactSum& operator+=(const ExactSum& other) {
    units_ += other.units_;
    return *this;
  }
  friend bool operator==(const ExactSum&, const ExactSum&) = default;

 private:
  unsigned __int128 units_ = 0;
};

struct ClassStats {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  ExactSum iou_sum;       // scene IoU over TP
  ExactSum part_iou_sum;  // IOU_p over TP (part branch on part classes)

  bool evaluated() const { return tp + fp + fn > 0; }
  friend bool operator==(const ClassStats&, const ClassStats&) = default;
};

struct LabelCounts {
  std::uint64_t intersection = 0;
  std::uint64_t union_size = 0;

  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

// Mergeable per-image statistics; merge with the empty accumulator of the same
// taxonomy is the identity.
class MetricAccumulator {
 public:
  explicit MetricAccumulator(const Taxonomy& taxonomy);

  std::uint64_t taxonomy_fingerprint() const { return fingerprint_; }

  ClassStats& class_stats(int sid) { return classes_[sid]; }
  const ClassStats& class_stats(int sid) const { return classes_[sid]; }
  LabelCounts& scene_label(int sid) { return scene_labels_[sid]; }
  const LabelCounts& scene_label(int sid) const { return scene_labels_[sid]; }
  LabelCounts& part_label(int sid, int pid) { return part_labels_[sid * 100 + pid]; }
  const LabelCounts& part_label(int sid, int pid) const { return part_labels_[sid * 100 + pid]; }

  std::uint64_t image_count = 0;
  std::uint64_t gt_unlabeled_instance_pixels = 0;
  std::uint64_t pred_unlabeled_instance_pixels = 0;

  // kTaxonomyMismatch if bound to different taxonomies.
  MetricAccumulator& Merge(const MetricAccumulator& other);

  friend bool operator==(const MetricAccumulator&, const MetricAccumulator&) = default;

 private:
  std::uint64_t fingerprint_ = 0;
  std::array<ClassStats, kMaxSceneId + 1> classes_{};
  std::array<LabelCounts, kMaxSceneId + 1> scene_labels_{};
  std::vector<LabelCounts> part_labels_;
};

MetricAccumulator MergeAccumulators(const MetricAccumulator& a, const MetricAccumulator& b);

// Evaluates one GT/prediction pair. Both maps must validate under `taxonomy`.
MetricAccumulator EvaluatePair(const PanopticPartMap& gt, const PanopticPartMap& pred,
                               const Taxonomy& taxonomy, const EvalConfig& config = {});

// Evaluates aligned datasets on `threads` workers. The result does not
// depend on the thread count. kDatasetMismatch if the spans differ in length.
MetricAccumulator EvaluateDataset(std::span<const PanopticPartMap> gt,
                                  std::span<const PanopticPartMap> pred,
                                  const Taxonomy& taxonomy, const EvalConfig& config = {},
                                  unsigned threads = 1);

enum class ClassFilter { kAll, kParts, kNoParts };

// Mean over classes in the filter with tp + fp + fn > 0 of
// iou_sum / (tp + fp/2 + fn/2). kNoEvaluatableClass when none qualifies.
double ComputePq(const MetricAccumulator& acc, const Taxonomy& taxonomy, ClassFilter filter);
// As ComputePq with IOU_p in the numerator.
double ComputePartPq(const MetricAccumulator& acc, const Taxonomy& taxonomy, ClassFilter filter);

enum class LabelSpace { kScene, kPart };

// Pixel-level mIoU from accumulated intersection/union counts.
// kNoEvaluatableClass when no label qualifies.
double ComputeMiou(const MetricAccumulator& acc, const Taxonomy& taxonomy, LabelSpace space,
                   const EvalConfig& config = {});
// Single-pair convenience. kGridMismatch on size disagreement.
double ComputeMiou(const PanopticPartMap& gt, const PanopticPartMap& pred, LabelSpace space,
                   const Taxonomy& taxonomy, const EvalConfig& config = {});

struct PwqComponents {
  double ssq = 0.0;
  double psq = 0.0;
  double pwq = 0.0;
};

// ssq = miou_scene * pq_scene, psq = miou_part * partpq_p,
// pwq = sqrt((ssq + psq) / 2). kRangeError on inputs outside [0, 1].
PwqComponents ComputePwq(double miou_scene, double pq_scene, double miou_part, double partpq_p);
double PartWholeQuality(double ssq, double psq);

struct ClassReport {
  int sid = 0;
  bool has_parts = false;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double pq = 0.0;
  double partpq = 0.0;

  friend bool operator==(const ClassReport&, const ClassReport&) = default;
};

// Fractions in [0, 1]. A field is empty when no class or label in its scope
// was evaluated (e.g. every part field for a taxonomy without parts).
struct MetricReport {
  std::optional<double> pq_all, pq_p, pq_np;
  std::optional<double> partpq_all, partpq_p, partpq_np;
  std::optional<double> miou_scene, miou_part;
  std::optional<double> ssq, psq, pwq;

  std::uint64_t image_count = 0;
  std::uint64_t gt_unlabeled_instance_pixels = 0;
  std::uint64_t pred_unlabeled_instance_pixels = 0;
  std::vector<ClassReport> classes;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

// kNoEvaluatableClass when no scene class was evaluated at all.
MetricReport BuildReport(const MetricAccumulator& acc, const Taxonomy& taxonomy,
                         const EvalConfig& config = {});

}  // namespace ppseg

#endif  // PPSEG_METRICS_HPP_
