// Copyright 2026 The KernelForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kf/frontend/types.hpp"

#include <fmt/format.h>

#include <map>
#include <mutex>
#include <tuple>

#include "kf/support/hash.hpp"

namespace kf {

struct TypeNode {
  TypeKind kind = TypeKind::kNothing;
  ScalarKind scalar = ScalarKind::kBool;
  const TypeNode* element = nullptr;
  AddressSpace space = AddressSpace::kGeneric;
  std::shared_ptr<const RecordDecl> decl;
  std::vector<Type> fields;
  std::vector<uint64_t> offsets;
  std::string symbol;
  std::string text;
  uint64_t size = 0;
  size_t hash = 0;
};

namespace {

using InternKey = std::tuple<int, int, const void*, int, const void*,
                             std::vector<const void*>, std::string>;

class TypeInterner {
 public:
  const TypeNode* intern(TypeNode proto, const InternKey& key) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = nodes_.find(key);
    if (it != nodes_.end()) return it->second.get();
    auto node = std::make_unique<TypeNode>(std::move(proto));
    node->hash = mix64(nodes_.size() + 1);
    const TypeNode* raw = node.get();
    nodes_.emplace(key, std::move(node));
    return raw;
  }

 private:
  std::mutex mu_;
  std::map<InternKey, std::unique_ptr<TypeNode>> nodes_;
};

TypeInterner& interner() {
  static TypeInterner* instance = new TypeInterner();
  return *instance;
}

const TypeNode* nothing_node() {
  static const TypeNode* node = [] {
    TypeNode n;
    n.kind = TypeKind::kNothing;
    n.text = "Nothing";
    return interner().intern(std::move(n), InternKey{0, 0, nullptr, 0, nullptr,
                                                      {}, ""});
  }();
  return node;
}

}  // namespace

std::string_view scalar_name(ScalarKind kind) {
  switch (kind) {
    case ScalarKind::kBool: return "Bool";
    case ScalarKind::kInt32: return "Int32";
    case ScalarKind::kInt64: return "Int64";
    case ScalarKind::kFloat32: return "Float32";
    case ScalarKind::kFloat64: return "Float64";
  }
  return "?";
}

std::optional<ScalarKind> scalar_from_name(std::string_view name) {
  if (name == "Bool") return ScalarKind::kBool;
  if (name == "Int32") return ScalarKind::kInt32;
  if (name == "Int64") return ScalarKind::kInt64;
  if (name == "Float32") return ScalarKind::kFloat32;
  if (name == "Float64") return ScalarKind::kFloat64;
  return std::nullopt;
}

std::string_view space_name(AddressSpace space) {
  switch (space) {
    case AddressSpace::kGeneric: return "generic";
    case AddressSpace::kGlobal: return "global";
    case AddressSpace::kShared: return "shared";
    case AddressSpace::kParam: return "param";
    case AddressSpace::kLocal: return "local";
  }
  return "?";
}

std::string_view space_title(AddressSpace space) {
  switch (space) {
    case AddressSpace::kGeneric: return "Generic";
    case AddressSpace::kGlobal: return "Global";
    case AddressSpace::kShared: return "Shared";
    case AddressSpace::kParam: return "Param";
    case AddressSpace::kLocal: return "Local";
  }
  return "?";
}

uint32_t scalar_size(ScalarKind kind) {
  switch (kind) {
    case ScalarKind::kBool: return 1;
    case ScalarKind::kInt32: return 4;
    case ScalarKind::kInt64: return 8;
    case ScalarKind::kFloat32: return 4;
    case ScalarKind::kFloat64: return 8;
  }
  return 0;
}

bool is_integer(ScalarKind kind) {
  return kind == ScalarKind::kInt32 || kind == ScalarKind::kInt64;
}

bool is_float(ScalarKind kind) {
  return kind == ScalarKind::kFloat32 || kind == ScalarKind::kFloat64;
}

std::optional<size_t> RecordDecl::field_index(std::string_view field) const {
  for (size_t i = 0; i < field_names.size(); ++i) {
    if (field_names[i] == field) return i;
  }
  return std::nullopt;
}

Type::Type() : node_(nothing_node()) {}

Type Type::nothing() { return Type(nothing_node()); }

Type Type::scalar(ScalarKind kind) {
  TypeNode n;
  n.kind = TypeKind::kScalar;
  n.scalar = kind;
  n.text = std::string(scalar_name(kind));
  n.size = scalar_size(kind);
  return Type(interner().intern(
      std::move(n),
      InternKey{1, static_cast<int>(kind), nullptr, 0, nullptr, {}, ""}));
}

Type Type::array(Type element) {
  TypeNode n;
  n.kind = TypeKind::kArray;
  n.element = element.node_;
  n.text = fmt::format("Array{{{}}}", element.str());
  n.size = 8;
  return Type(interner().intern(
      std::move(n), InternKey{2, 0, element.node_, 0, nullptr, {}, ""}));
}

Type Type::device_array(Type element, AddressSpace space) {
  TypeNode n;
  n.kind = TypeKind::kDeviceArray;
  n.element = element.node_;
  n.space = space;
  n.text = fmt::format("DeviceArray{{{},{}}}", element.str(),
                       space_title(space));
  n.size = kDescriptorSize;
  n.offsets = {kDescriptorBaseOffset, kDescriptorLengthOffset};
  return Type(interner().intern(
      std::move(n), InternKey{3, 0, element.node_, static_cast<int>(space),
                              nullptr, {}, ""}));
}

Type Type::record(std::shared_ptr<const RecordDecl> decl,
                  std::vector<Type> fields) {
  TypeNode n;
  n.kind = TypeKind::kRecord;
  std::vector<const void*> parts;
  std::string args;
  uint64_t offset = 0;
  for (const Type& f : fields) {
    parts.push_back(f.node_);
    if (!args.empty()) args += ",";
    args += f.str();
    n.offsets.push_back(offset);
    offset += f.size_bytes();
  }
  n.text = fmt::format("{}{{{}}}", decl->name, args);
  n.size = decl->is_mutable ? 8 : offset;
  n.fields = std::move(fields);
  const void* key_decl = decl.get();
  n.decl = std::move(decl);
  return Type(interner().intern(
      std::move(n), InternKey{4, 0, nullptr, 0, key_decl, parts, ""}));
}

Type Type::dev_addr(Type element, AddressSpace space) {
  TypeNode n;
  n.kind = TypeKind::kDevAddr;
  n.element = element.node_;
  n.space = space;
  n.text = fmt::format("DevAddr{{{},{}}}", element.str(), space_title(space));
  n.size = 8;
  return Type(interner().intern(
      std::move(n), InternKey{5, 0, element.node_, static_cast<int>(space),
                              nullptr, {}, ""}));
}

Type Type::function(std::string_view name) {
  TypeNode n;
  n.kind = TypeKind::kFunction;
  n.symbol = std::string(name);
  n.text = fmt::format("Function{{{}}}", name);
  return Type(interner().intern(
      std::move(n),
      InternKey{6, 0, nullptr, 0, nullptr, {}, std::string(name)}));
}

Type Type::opaque(std::string_view name) {
  TypeNode n;
  n.kind = TypeKind::kOpaque;
  n.symbol = std::string(name);
  n.text = std::string(name);
  n.size = 8;
  return Type(interner().intern(
      std::move(n),
      InternKey{7, 0, nullptr, 0, nullptr, {}, std::string(name)}));
}

TypeKind Type::kind() const { return node_->kind; }

bool Type::is_numeric() const {
  return is_scalar() && node_->scalar != ScalarKind::kBool;
}
bool Type::is_integer() const {
  return is_scalar() && kf::is_integer(node_->scalar);
}
bool Type::is_float() const {
  return is_scalar() && kf::is_float(node_->scalar);
}
bool Type::is_bool() const {
  return is_scalar() && node_->scalar == ScalarKind::kBool;
}

bool Type::is_immutable_aggregate() const {
  return is_device_array() || (is_record() && !node_->decl->is_mutable);
}

bool Type::is_mutable_record() const {
  return is_record() && node_->decl->is_mutable;
}

ScalarKind Type::scalar_kind() const { return node_->scalar; }
Type Type::element() const { return Type(node_->element); }
AddressSpace Type::space() const { return node_->space; }
const RecordDecl& Type::record_decl() const { return *node_->decl; }
std::shared_ptr<const RecordDecl> Type::record_decl_ptr() const {
  return node_->decl;
}
const std::vector<Type>& Type::fields() const { return node_->fields; }
const std::string& Type::symbol() const { return node_->symbol; }

std::optional<size_t> Type::field_index(std::string_view name) const {
  if (is_record()) return node_->decl->field_index(name);
  if (is_device_array()) {
    if (name == "base") return 0;
    if (name == "length") return 1;
  }
  return std::nullopt;
}

uint64_t Type::size_bytes() const { return node_->size; }

uint64_t Type::field_offset(size_t index) const {
  return node_->offsets.at(index);
}

const std::string& Type::str() const { return node_->text; }

std::string Type::mangled() const {
  std::string out;
  for (char c : node_->text) {
    out += (c == '{' || c == ',' || c == '}') ? '_' : c;
  }
  return out;
}

size_t Type::hash() const { return node_->hash; }

std::shared_ptr<const RecordDecl> RecordScope::declare(RecordDecl decl) {
  for (const auto& existing : decls_) {
    if (existing->name != decl.name) continue;
    if (existing->field_names == decl.field_names &&
        existing->field_annotations == decl.field_annotations &&
        existing->is_mutable == decl.is_mutable) {
      return existing;
    }
    throw Error(ErrorKind::kDefinition,
                fmt::format("record `{}` redeclared with a different layout",
                            decl.name),
                decl.span);
  }
  if (scalar_from_name(decl.name) || decl.name == "Array" ||
      decl.name == "DeviceArray" || decl.name == "Nothing") {
    throw Error(ErrorKind::kDefinition,
                fmt::format("`{}` is a builtin type name", decl.name),
                decl.span);
  }
  for (size_t i = 0; i < decl.field_names.size(); ++i) {
    for (size_t j = i + 1; j < decl.field_names.size(); ++j) {
      if (decl.field_names[i] == decl.field_names[j]) {
        throw Error(ErrorKind::kDefinition,
                    fmt::format("duplicate field `{}` in record `{}`",
                                decl.field_names[i], decl.name),
                    decl.span);
      }
    }
  }
  decls_.push_back(std::make_shared<const RecordDecl>(std::move(decl)));
  return decls_.back();
}

std::shared_ptr<const RecordDecl> RecordScope::find(
    std::string_view name) const {
  for (const auto& d : decls_) {
    if (d->name == name) return d;
  }
  return nullptr;
}

std::vector<std::shared_ptr<const RecordDecl>> RecordScope::all() const {
  return decls_;
}

bool is_type_name(std::string_view name, const RecordScope* scope) {
  if (scalar_from_name(name) || name == "Array" || name == "DeviceArray" ||
      name == "Nothing") {
    return true;
  }
  return scope != nullptr && scope->find(name) != nullptr;
}

Type instantiate_record(const std::shared_ptr<const RecordDecl>& decl,
                        const std::vector<Type>& field_types,
                        SourceSpan span) {
  if (field_types.size() != decl->field_names.size()) {
    throw Error(ErrorKind::kNoMethod,
                fmt::format("record `{}` has {} fields, constructor given {}",
                            decl->name, decl->field_names.size(),
                            field_types.size()),
                span);
  }
  for (size_t i = 0; i < field_types.size(); ++i) {
    const Type& t = field_types[i];
    const auto& note = decl->field_annotations[i];
    if (note && !(t.is_scalar() && t.scalar_kind() == *note)) {
      throw Error(ErrorKind::kNoMethod,
                  fmt::format("field `{}` of `{}` expects {}, got {}",
                              decl->field_names[i], decl->name,
                              scalar_name(*note), t.str()),
                  span);
    }
    if (t.is_nothing() || t.kind() == TypeKind::kFunction ||
        t.kind() == TypeKind::kOpaque) {
      throw Error(ErrorKind::kNoMethod,
                  fmt::format("field `{}` of `{}` cannot hold {}",
                              decl->field_names[i], decl->name, t.str()),
                  span);
    }
  }
  return Type::record(decl, field_types);
}

size_t TypeVectorHash::operator()(const std::vector<Type>& types) const {
  uint64_t h = 0x1234;
  for (const Type& t : types) h = hash_combine(h, t.hash());
  return h;
}

std::string join_types(const std::vector<Type>& types) {
  std::string out;
  for (size_t i = 0; i < types.size(); ++i) {
    if (i) out += ", ";
    out += types[i].str();
  }
  return out;
}

}  // namespace kf
