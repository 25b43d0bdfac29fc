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

#ifndef KF_FRONTEND_TYPES_HPP_
#define KF_FRONTEND_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kf/support/error.hpp"

namespace kf {

enum class ScalarKind : uint8_t { kBool, kInt32, kInt64, kFloat32, kFloat64 };

// State spaces of the virtual device. Generic means "resolved at run time".
enum class AddressSpace : uint8_t { kGeneric, kGlobal, kShared, kParam, kLocal };
inline constexpr int kNumAddressSpaces = 5;

std::string_view scalar_name(ScalarKind kind);
std::optional<ScalarKind> scalar_from_name(std::string_view name);
std::string_view space_name(AddressSpace space);  // "generic", "global", ...
std::string_view space_title(AddressSpace space);  // "Generic", "Global", ...
uint32_t scalar_size(ScalarKind kind);
bool is_integer(ScalarKind kind);
bool is_float(ScalarKind kind);

class Type;

// A record declaration. Field types are fixed per instantiation: every
// distinct tuple of constructor argument types yields its own Type.
struct RecordDecl {
  std::string name;
  std::vector<std::string> field_names;
  // Optional scalar annotation per field; checked at construction.
  std::vector<std::optional<ScalarKind>> field_annotations;
  bool is_mutable = false;
  SourceSpan span;

  std::optional<size_t> field_index(std::string_view field) const;
};

enum class TypeKind : uint8_t {
  kNothing,
  kScalar,
  kArray,        // host array, mutable reference
  kDeviceArray,  // immutable descriptor {base: DevAddr, length: Int64}
  kRecord,
  kDevAddr,      // address tagged with a state space
  kFunction,     // function symbol value
  kOpaque,       // host-side object owned by an extension (device handles)
};

struct TypeNode;

// Interned concrete type. Copies are cheap; equality is identity.
class Type {
 public:
  Type();

  static Type nothing();
  static Type scalar(ScalarKind kind);
  static Type boolean() { return scalar(ScalarKind::kBool); }
  static Type int32() { return scalar(ScalarKind::kInt32); }
  static Type int64() { return scalar(ScalarKind::kInt64); }
  static Type float32() { return scalar(ScalarKind::kFloat32); }
  static Type float64() { return scalar(ScalarKind::kFloat64); }
  static Type array(Type element);
  static Type device_array(Type element, AddressSpace space);
  static Type record(std::shared_ptr<const RecordDecl> decl,
                     std::vector<Type> fields);
  static Type dev_addr(Type element, AddressSpace space);
  static Type function(std::string_view name);
  static Type opaque(std::string_view name);

  TypeKind kind() const;
  bool is_nothing() const { return kind() == TypeKind::kNothing; }
  bool is_scalar() const { return kind() == TypeKind::kScalar; }
  bool is_record() const { return kind() == TypeKind::kRecord; }
  bool is_array() const { return kind() == TypeKind::kArray; }
  bool is_device_array() const { return kind() == TypeKind::kDeviceArray; }
  bool is_dev_addr() const { return kind() == TypeKind::kDevAddr; }
  bool is_numeric() const;
  bool is_integer() const;
  bool is_float() const;
  bool is_bool() const;
  // Immutable records and device array descriptors: passed by value,
  // memory resident in lowered code.
  bool is_immutable_aggregate() const;
  bool is_mutable_record() const;

  ScalarKind scalar_kind() const;
  Type element() const;        // Array, DeviceArray, DevAddr
  AddressSpace space() const;  // DeviceArray, DevAddr
  const RecordDecl& record_decl() const;
  std::shared_ptr<const RecordDecl> record_decl_ptr() const;
  const std::vector<Type>& fields() const;  // Record
  const std::string& symbol() const;        // Function, Opaque
  std::optional<size_t> field_index(std::string_view name) const;

  // Byte size in the no-padding memory layout.
  uint64_t size_bytes() const;
  uint64_t field_offset(size_t index) const;

  const std::string& str() const;
  std::string mangled() const;
  size_t hash() const;

  friend bool operator==(const Type& a, const Type& b) {
    return a.node_ == b.node_;
  }

 private:
  explicit Type(const TypeNode* node) : node_(node) {}
  const TypeNode* node_;
};

// DeviceArray descriptor layout.
inline constexpr uint64_t kDescriptorBaseOffset = 0;
inline constexpr uint64_t kDescriptorLengthOffset = 8;
inline constexpr uint64_t kDescriptorSize = 16;

// Record name registry for one method table. Records are visible to the
// methods defined in the same table.
class RecordScope {
 public:
  // Returns the existing declaration when an identical one is re-declared.
  std::shared_ptr<const RecordDecl> declare(RecordDecl decl);
  std::shared_ptr<const RecordDecl> find(std::string_view name) const;
  std::vector<std::shared_ptr<const RecordDecl>> all() const;

 private:
  std::vector<std::shared_ptr<const RecordDecl>> decls_;
};

// Resolves a type name as written in source ("Int64", "Point", "Array").
// Records resolve to their declaration only, not to an instantiation.
bool is_type_name(std::string_view name, const RecordScope* scope);

// Instantiates a record, validating arity and field annotations.
Type instantiate_record(const std::shared_ptr<const RecordDecl>& decl,
                        const std::vector<Type>& field_types,
                        SourceSpan span = {});

}  // namespace kf

template <>
struct std::hash<kf::Type> {
  size_t operator()(const kf::Type& t) const { return t.hash(); }
};

namespace kf {
struct TypeVectorHash {
  size_t operator()(const std::vector<Type>& types) const;
};
std::string join_types(const std::vector<Type>& types);
}  // namespace kf

#endif  // KF_FRONTEND_TYPES_HPP_
