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

#include <algorithm>
#include <set>

#include "doctest.h"
#include "expect_error.hpp"
#include "fixtures.hpp"
#include "ppseg/error.hpp"
#include "ppseg/taxonomy.hpp"

using namespace ppseg;

using testing::CodeOf;

TEST_CASE("encode matches the digit layout") {
  CHECK(EncodeUid(23).value == 23u);
  CHECK(EncodeUid(26, 2, 1).value == 2600201u);
  CHECK(EncodeUid(7, 0).value == 7000u);
  CHECK(EncodeUid(99, 999, 99).value == kMaxUid);
}

TEST_CASE("decode inverts the examples") {
  CHECK(DecodeUid(Uid{23}) == LabelTriple{23, std::nullopt, std::nullopt});
  CHECK(DecodeUid(Uid{2600201}) == LabelTriple{26, 2, 1});
  CHECK(DecodeUid(Uid{7000}) == LabelTriple{7, 0, std::nullopt});
  CHECK(DecodeUid(Uid{7000}).form() == UidForm::kInstance);
  CHECK(DecodeUid(Uid{2600201}).form() == UidForm::kPart);
}

TEST_CASE("encode rejects bad ids") {
  CHECK(CodeOf([] { EncodeUid(0); }) == ErrorCode::kRangeError);
  CHECK(CodeOf([] { EncodeUid(100); }) == ErrorCode::kRangeError);
  CHECK(CodeOf([] { EncodeUid(5, 1000); }) == ErrorCode::kRangeError);
  CHECK(CodeOf([] { EncodeUid(5, -1); }) == ErrorCode::kRangeError);
  CHECK(CodeOf([] { EncodeUid(5, 1, 100); }) == ErrorCode::kRangeError);
  CHECK(CodeOf([] { EncodeUid(5, std::nullopt, 3); }) == ErrorCode::kFormError);
}

TEST_CASE("decode rejects uids without a valid sid") {
  CHECK(CodeOf([] { DecodeUid(Uid{0}); }) == ErrorCode::kFormError);
  CHECK(CodeOf([] { DecodeUid(Uid{150}); }) == ErrorCode::kFormError);
  CHECK(CodeOf([] { DecodeUid(Uid{kMaxUid + 1}); }) == ErrorCode::kFormError);
}

TEST_CASE("round trip on every sid with sampled instance and part ids") {
  for (int sid = 1; sid <= kMaxSceneId; ++sid) {
    CHECK(DecodeUid(EncodeUid(sid)) == LabelTriple{sid, std::nullopt, std::nullopt});
    for (int iid : {0, 1, 17, 500, 998, 999}) {
      CHECK(DecodeUid(EncodeUid(sid, iid)) == LabelTriple{sid, iid, std::nullopt});
      for (int pid : {0, 1, 42, 99}) {
        CHECK(DecodeUid(EncodeUid(sid, iid, pid)) == LabelTriple{sid, iid, pid});
      }
    }
  }
}

TEST_CASE("form detection is total and exclusive over the uid range") {
  std::size_t decodable = 0;
  for (std::uint32_t uid = 1; uid <= kMaxUid; uid += 7) {
    LabelTriple t;
    if (!TryDecodeUid(uid, &t)) continue;
    ++decodable;
    const UidForm expected =
        uid < 100 ? UidForm::kSemantic : uid < 100000 ? UidForm::kInstance : UidForm::kPart;
    REQUIRE(t.form() == expected);
    REQUIRE(EncodeUid(t).value == uid);
  }
  CHECK(decodable > 0);
}

TEST_CASE("CPP-shaped document has 5 part classes and 23 part labels") {
  const Taxonomy t = testing::CppTaxonomy();
  CHECK(t.part_classes().size() == 5);
  CHECK(t.part_label_count() == 23);
  CHECK(t.classes().size() == 19);
  CHECK(t.OwnsPart(26, 2));
  CHECK_FALSE(t.OwnsPart(26, 6));
  CHECK_FALSE(t.OwnsPart(23, 1));
  CHECK(t.IsThing(24));
  CHECK_FALSE(t.IsThing(23));
}

TEST_CASE("PPP-shaped taxonomy is valid") {
  const Taxonomy t = testing::PppTaxonomy();
  CHECK(t.classes().size() == 59);
  CHECK(std::count_if(t.classes().begin(), t.classes().end(),
                      [](const ClassSpec& c) { return c.kind == ClassKind::kThing; }) == 20);
  CHECK(t.part_label_count() == 57);
}

TEST_CASE("part partitions are disjoint and exhaustive") {
  for (const Taxonomy& t : {testing::CppTaxonomy(), testing::PppTaxonomy(),
                            testing::SmallPartTaxonomy(), testing::NoPartTaxonomy()}) {
    std::set<int> parts(t.part_classes().begin(), t.part_classes().end());
    std::set<int> rest(t.no_part_classes().begin(), t.no_part_classes().end());
    for (int sid : parts) CHECK_FALSE(rest.count(sid));
    CHECK(parts.size() + rest.size() == t.classes().size());
    for (const ClassSpec& c : t.classes()) CHECK((parts.count(c.sid) + rest.count(c.sid)) == 1);
  }
}

TEST_CASE("taxonomy validation errors") {
  const ClassSpec car{26, "car", ClassKind::kThing, {{1, "window"}}};
  const ClassSpec sky{23, "sky", ClassKind::kStuff, {}};
  CHECK(CodeOf([] { Taxonomy::Create({}); }) == ErrorCode::kEmptyTaxonomy);
  CHECK(CodeOf([&] { Taxonomy::Create({car, car}); }) == ErrorCode::kDuplicateId);
  CHECK(CodeOf([] {
          Taxonomy::Create({{23, "sky", ClassKind::kStuff, {{1, "cloud"}}}});
        }) == ErrorCode::kPartsOnStuff);
  CHECK(CodeOf([] {
          Taxonomy::Create({{26, "car", ClassKind::kThing, {{1, "a"}, {1, "b"}}}});
        }) == ErrorCode::kDuplicateId);
  CHECK(CodeOf([] { Taxonomy::Create({{26, "car", ClassKind::kThing, {{0, "a"}}}}); }) ==
        ErrorCode::kRangeError);
  CHECK(CodeOf([&] { Taxonomy::Create({sky}, 23); }) == ErrorCode::kFormError);
  CHECK_NOTHROW(Taxonomy::Create({sky}, 150));

  TaxonomyOptions relaxed;
  relaxed.allow_parts_on_stuff = true;
  CHECK(Taxonomy::Create({{23, "sky", ClassKind::kStuff, {{1, "cloud"}}}}, 0, relaxed)
            .HasParts(23));
}

TEST_CASE("JSON documents") {
  const Taxonomy t = ValidateTaxonomy(
      R"({"void_uid": 0, "classes": [{"sid": 26, "name": "car", "kind": "thing",
          "parts": [{"pid": 1, "name": "window"}]}, {"sid": 23, "name": "sky", "kind": "stuff"}]})");
  CHECK(t.classes().size() == 2);
  CHECK(t.classes().front().sid == 23);
  CHECK(t.HasParts(26));

  CHECK(CodeOf([] { ValidateTaxonomy(R"({"classes": [], "extra": 1})"); }) ==
        ErrorCode::kSchemaError);
  CHECK(CodeOf([] {
          ValidateTaxonomy(R"({"classes": [{"sid": 1, "name": "a", "kind": "stuff", "color": 3}]})");
        }) == ErrorCode::kSchemaError);
  CHECK(CodeOf([] { ValidateTaxonomy(R"({"classes": [{"sid": 1, "name": "a", "kind": "blob"}]})"); }) ==
        ErrorCode::kSchemaError);
  CHECK(CodeOf([] { ValidateTaxonomy("{not json"); }) == ErrorCode::kSchemaError);
  CHECK(CodeOf([] { ValidateTaxonomy(R"({"classes": []})"); }) == ErrorCode::kEmptyTaxonomy);
  CHECK(CodeOf([] {
          ValidateTaxonomy(R"({"classes": [{"sid": 1, "name": "a", "kind": "stuff",
                                            "parts": [{"pid": 1, "name": "x"}]}]})");
        }) == ErrorCode::kPartsOnStuff);
}

TEST_CASE("canonical JSON and fingerprint") {
  const Taxonomy a = testing::SmallPartTaxonomy();
  const Taxonomy b = ValidateTaxonomy(a.ToJson());
  CHECK(a.ToJson() == b.ToJson());
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != testing::NoPartTaxonomy().fingerprint());
}

TEST_CASE("Get on an unknown class") {
  const Taxonomy t = testing::SmallPartTaxonomy();
  CHECK(CodeOf([&] { t.Get(42); }) == ErrorCode::kUnknownClass);
  CHECK(t.Find(42) == nullptr);
  CHECK_FALSE(t.Contains(0));
}
