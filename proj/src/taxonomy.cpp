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

#include "ppseg/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "ppseg/error.hpp"

namespace ppseg {
namespace {

using nlohmann::json;

void RequireRange(int value, int lo, int hi, const char* what) {
  if (value < lo || value > hi) {
    throw Error(ErrorCode::kRangeError, std::string(what) + " " + std::to_string(value) +
                                            " outside [" + std::to_string(lo) + ", " +
                                            std::to_string(hi) + "]");
  }
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void RejectUnknownKeys(const json& object, std::initializer_list<std::string_view> allowed,
                       const std::string& where) {
  if (!object.is_object()) {
    throw Error(ErrorCode::kSchemaError, where + " must be an object");
  }
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::kSchemaError, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T Field(const json& object, const char* key, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw Error(ErrorCode::kSchemaError, std::string("missing '") + key + "' in " + where);
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kSchemaError, std::string("bad type for '") + key + "' in " + where);
  }
}

}  // namespace

Uid EncodeUid(int sid, std::optional<int> iid, std::optional<int> pid) {
  RequireRange(sid, 1, kMaxSceneId, "sid");
  if (pid && !iid) {
    throw Error(ErrorCode::kFormError, "pid given without iid");
  }
  if (!iid) return Uid{static_cast<std::uint32_t>(sid)};
  RequireRange(*iid, 0, kMaxInstanceId, "iid");
  if (!pid) return Uid{static_cast<std::uint32_t>(sid * 1000 + *iid)};
  RequireRange(*pid, 0, kMaxPartId, "pid");
  return Uid{static_cast<std::uint32_t>(sid * 100000 + *iid * 100 + *pid)};
}

bool TryDecodeUid(std::uint32_t uid, LabelTriple* out) noexcept {
  LabelTriple t;
  if (uid < 100) {
    t.sid = static_cast<int>(uid);
  } else if (uid < 100000) {
    t.sid = static_cast<int>(uid / 1000);
    t.iid = static_cast<int>(uid % 1000);
  } else {
    t.sid = static_cast<int>(uid / 100000);
    t.iid = static_cast<int>((uid / 100) % 1000);
    t.pid = static_cast<int>(uid % 100);
  }
  if (t.sid < 1 || t.sid > kMaxSceneId) return false;
  *out = t;
  return true;
}

LabelTriple DecodeUid(Uid uid) {
  LabelTriple t;
  if (!TryDecodeUid(uid.value, &t)) {
    throw Error(ErrorCode::kFormError,
                "uid " + std::to_string(uid.value) + " does not decode to a valid sid");
  }
  return t;
}

Taxonomy Taxonomy::Create(std::vector<ClassSpec> classes, std::uint32_t void_uid,
                          TaxonomyOptions options) {
  if (classes.empty()) {
    throw Error(ErrorCode::kEmptyTaxonomy, "taxonomy declares no classes");
  }
  Taxonomy tax;
  tax.index_.fill(-1);
  tax.owns_.assign((kMaxSceneId + 1) * (kMaxPartId + 1), 0);

  std::sort(classes.begin(), classes.end(),
            [](const ClassSpec& a, const ClassSpec& b) { return a.sid < b.sid; });
  for (std::size_t i = 0; i < classes.size(); ++i) {
    ClassSpec& spec = classes[i];
    RequireRange(spec.sid, 1, kMaxSceneId, "sid");
    if (tax.index_[spec.sid] != -1) {
      throw Error(ErrorCode::kDuplicateId, "duplicate sid " + std::to_string(spec.sid));
    }
    tax.index_[spec.sid] = static_cast<int>(i);
    if (spec.has_parts() && spec.kind == ClassKind::kStuff && !options.allow_parts_on_stuff) {
      throw Error(ErrorCode::kPartsOnStuff,
                  "stuff class " + std::to_string(spec.sid) + " declares parts");
    }
    std::sort(spec.parts.begin(), spec.parts.end(),
              [](const PartSpec& a, const PartSpec& b) { return a.pid < b.pid; });
    for (const PartSpec& part : spec.parts) {
      RequireRange(part.pid, 1, kMaxPartId, "pid");
      auto& owned = tax.owns_[spec.sid * (kMaxPartId + 1) + part.pid];
      if (owned) {
        throw Error(ErrorCode::kDuplicateId, "duplicate pid " + std::to_string(part.pid) +
                                                 " in class " + std::to_string(spec.sid));
      }
      owned = 1;
    }
    (spec.has_parts() ? tax.part_classes_ : tax.no_part_classes_).push_back(spec.sid);
  }

  LabelTriple ignored;
  if (TryDecodeUid(void_uid, &ignored)) {
    throw Error(ErrorCode::kFormError,
                "void_uid " + std::to_string(void_uid) + " collides with a valid uid");
  }
  tax.void_uid_ = void_uid;
  tax.classes_ = std::move(classes);
  tax.fingerprint_ = Fnv1a64(tax.ToJson());
  return tax;
}

const ClassSpec* Taxonomy::Find(int sid) const {
  if (sid < 0 || sid > kMaxSceneId) return nullptr;
  int i = index_[sid];
  return i < 0 ? nullptr : &classes_[i];
}

const ClassSpec& Taxonomy::Get(int sid) const {
  const ClassSpec* spec = Find(sid);
  if (spec == nullptr) {
    throw Error(ErrorCode::kUnknownClass, "sid " + std::to_string(sid) + " not in taxonomy");
  }
  return *spec;
}

bool Taxonomy::HasParts(int sid) const {
  const ClassSpec* spec = Find(sid);
  return spec != nullptr && spec->has_parts();
}

bool Taxonomy::IsThing(int sid) const {
  const ClassSpec* spec = Find(sid);
  return spec != nullptr && spec->kind == ClassKind::kThing;
}

bool Taxonomy::OwnsPart(int sid, int pid) const {
  if (sid < 0 || sid > kMaxSceneId || pid < 0 || pid > kMaxPartId) return false;
  return owns_[sid * (kMaxPartId + 1) + pid] != 0;
}

std::vector<int> Taxonomy::scene_classes() const {
  std::vector<int> sids;
  sids.reserve(classes_.size());
  for (const ClassSpec& c : classes_) sids.push_back(c.sid);
  return sids;
}

int Taxonomy::part_label_count() const {
  int n = 0;
  for (const ClassSpec& c : classes_) n += static_cast<int>(c.parts.size());
  return n;
}

std::string Taxonomy::ToJson() const {
  json classes = json::array();
  for (const ClassSpec& c : classes_) {
    json parts = json::array();
    for (const PartSpec& p : c.parts) parts.push_back({{"pid", p.pid}, {"name", p.name}});
    classes.push_back({{"sid", c.sid},
                       {"name", c.name},
                       {"kind", c.kind == ClassKind::kThing ? "thing" : "stuff"},
                       {"parts", std::move(parts)}});
  }
  json doc = {{"void_uid", void_uid_}, {"classes", std::move(classes)}};
  return doc.dump();
}

Taxonomy ValidateTaxonomy(std::string_view json_text, TaxonomyOptions options) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, std::string("taxonomy is not valid JSON: ") + e.what());
  }
  RejectUnknownKeys(doc, {"void_uid", "classes"}, "taxonomy");

  std::uint32_t void_uid = 0;
  if (doc.contains("void_uid")) {
    const json& v = doc["void_uid"];
    if (!v.is_number_unsigned()) {
      throw Error(ErrorCode::kSchemaError, "void_uid must be a non-negative integer");
    }
    void_uid = v.get<std::uint32_t>();
  }
  if (!doc.contains("classes") || !doc["classes"].is_array()) {
    throw Error(ErrorCode::kSchemaError, "'classes' must be an array");
  }

  std::vector<ClassSpec> classes;
  for (const json& entry : doc["classes"]) {
    RejectUnknownKeys(entry, {"sid", "name", "kind", "parts"}, "class");
    ClassSpec spec;
    spec.sid = Field<int>(entry, "sid", "class");
    const std::string where = "class " + std::to_string(spec.sid);
    spec.name = Field<std::string>(entry, "name", where);
    const auto kind = Field<std::string>(entry, "kind", where);
    if (kind == "thing") {
      spec.kind = ClassKind::kThing;
    } else if (kind == "stuff") {
      spec.kind = ClassKind::kStuff;
    } else {
      throw Error(ErrorCode::kSchemaError, "kind must be 'thing' or 'stuff' in " + where);
    }
    if (entry.contains("parts")) {
      if (!entry["parts"].is_array()) {
        throw Error(ErrorCode::kSchemaError, "'parts' must be an array in " + where);
      }
      for (const json& part : entry["parts"]) {
        RejectUnknownKeys(part, {"pid", "name"}, "part of " + where);
        spec.parts.push_back(
            {Field<int>(part, "pid", where), Field<std::string>(part, "name", where)});
      }
    }
    classes.push_back(std::move(spec));
  }
  return Taxonomy::Create(std::move(classes), void_uid, options);
}

Taxonomy LoadTaxonomyFile(const std::string& path, TaxonomyOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kSchemaError, "cannot open taxonomy file " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ValidateTaxonomy(buffer.str(), options);
}

}  // namespace ppseg
