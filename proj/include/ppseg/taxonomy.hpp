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

#ifndef PPSEG_TAXONOMY_HPP_
#define PPSEG_TAXONOMY_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ppseg {

// Id ranges of the label codec.
inline constexpr int kMaxSceneId = 99;
inline constexpr int kMaxInstanceId = 999;
inline constexpr int kMaxPartId = 99;
inline constexpr std::uint32_t kMaxUid = 99u * 100000u + 999u * 100u + 99u;

// Encoded label of one pixel. Three forms share the integer range:
//   sid                          (uid < 100)
//   sid * 1000 + iid             (100 <= uid < 100000)
//   sid * 100000 + iid * 100 + pid  (uid >= 100000)
struct Uid {
  std::uint32_t value = 0;

  friend bool operator==(Uid, Uid) = default;
};

enum class UidForm { kSemantic, kInstance, kPart };

struct LabelTriple {
  int sid = 0;
  std::optional<int> iid;
  std::optional<int> pid;

  UidForm form() const {
    return pid ? UidForm::kPart : (iid ? UidForm::kInstance : UidForm::kSemantic);
  }
  friend bool operator==(const LabelTriple&, const LabelTriple&) = default;
};

Uid EncodeUid(int sid, std::optional<int> iid = std::nullopt,
              std::optional<int> pid = std::nullopt);
inline Uid EncodeUid(const LabelTriple& t) { return EncodeUid(t.sid, t.iid, t.pid); }

LabelTriple DecodeUid(Uid uid);

// Non-throwing variant for hot loops; returns false when `uid` is not a
// decodable label.
bool TryDecodeUid(std::uint32_t uid, LabelTriple* out) noexcept;

enum class ClassKind { kThing, kStuff };

struct PartSpec {
  int pid = 0;
  std::string name;
};

struct ClassSpec {
  int sid = 0;
  std::string name;
  ClassKind kind = ClassKind::kStuff;
  std::vector<PartSpec> parts;

  bool has_parts() const { return !parts.empty(); }
};

struct TaxonomyOptions {
  // Parts are normally restricted to thing classes.
  bool allow_parts_on_stuff = false;
};

// Immutable, validated label universe. Cheap lookups by sid are backed by a
// dense table since sids are bounded by kMaxSceneId.
class Taxonomy {
 public:
  // Validates and builds. Throws Error with kEmptyTaxonomy, kDuplicateId,
  // kPartsOnStuff, kRangeError or kFormError (void uid collision).
  static Taxonomy Create(std::vector<ClassSpec> classes, std::uint32_t void_uid = 0,
                         TaxonomyOptions options = {});

  const std::vector<ClassSpec>& classes() const { return classes_; }
  std::uint32_t void_uid() const { return void_uid_; }

  const ClassSpec* Find(int sid) const;
  const ClassSpec& Get(int sid) const;  // kUnknownClass if absent
  bool Contains(int sid) const { return Find(sid) != nullptr; }
  bool HasParts(int sid) const;
  bool IsThing(int sid) const;
  bool OwnsPart(int sid, int pid) const;

  // L^parts and L^no-parts, both sorted by sid.
  const std::vector<int>& part_classes() const { return part_classes_; }
  const std::vector<int>& no_part_classes() const { return no_part_classes_; }
  std::vector<int> scene_classes() const;

  // Total number of (sid, pid) part labels.
  int part_label_count() const;

  // Canonical JSON rendering (sorted by sid, stable key order) and a 64-bit
  // FNV-1a fingerprint of it. Equal taxonomies share a fingerprint.
  std::string ToJson() const;
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  Taxonomy() = default;

  std::vector<ClassSpec> classes_;
  std::uint32_t void_uid_ = 0;
  std::array<int, kMaxSceneId + 1> index_{};  // -1 when absent
  std::vector<int> part_classes_;
  std::vector<int> no_part_classes_;
  std::vector<std::uint8_t> owns_;  // [sid * 100 + pid]
  std::uint64_t fingerprint_ = 0;
};

// Parses a taxonomy JSON document:
//   {"void_uid": 0, "classes": [{"sid": 26, "name": "car", "kind": "thing",
//     "parts": [{"pid": 1, "name": "window"}]}]}
// Unknown keys are rejected with kSchemaError.
Taxonomy ValidateTaxonomy(std::string_view json_text, TaxonomyOptions options = {});
Taxonomy LoadTaxonomyFile(const std::string& path, TaxonomyOptions options = {});

}  // namespace ppseg

#endif  // PPSEG_TAXONOMY_HPP_
