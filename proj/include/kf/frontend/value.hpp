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

#ifndef KF_FRONTEND_VALUE_HPP_
#define KF_FRONTEND_VALUE_HPP_

#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "kf/frontend/scalar_ops.hpp"
#include "kf/frontend/types.hpp"

namespace kf {

struct ArrayObject;
struct RecordObject;

// Host-side object owned by an extension, e.g. a device array handle.
class OpaqueObject {
 public:
  virtual ~OpaqueObject();
  virtual Type type() const = 0;
  virtual std::string describe() const;
};

// Dynamically typed KSL value. Scalars live in `bits` (see scalar_ops.hpp);
// arrays and mutable records are shared references.
struct Value {
  Type type;
  uint64_t bits = 0;
  std::shared_ptr<ArrayObject> array;
  std::shared_ptr<RecordObject> record;
  std::shared_ptr<OpaqueObject> opaque;

  static Value nothing() { return {}; }
  static Value scalar(ScalarKind kind, uint64_t bits);
  static Value of_bool(bool v);
  static Value of_i32(int32_t v);
  static Value of_i64(int64_t v);
  static Value of_f32(float v);
  static Value of_f64(double v);
  static Value symbol(std::string_view name);
  static Value new_array(Type element, int64_t length);
  static Value new_record(Type type, std::vector<Value> fields);
  static Value wrap(std::shared_ptr<OpaqueObject> object);

  bool is_scalar() const { return type.is_scalar(); }
  ScalarKind kind() const { return type.scalar_kind(); }
  bool as_bool() const { return bits != 0; }
  int64_t as_i64() const { return scalar::to_i64(kind(), bits); }
  double as_f64() const { return scalar::to_f64(kind(), bits); }

  std::string str() const;
};

struct ArrayObject {
  Type element;
  int64_t length = 0;
  std::vector<uint8_t> bytes;

  // Zero-based element access.
  Value get(int64_t index) const;
  void set(int64_t index, const Value& v);
};

struct RecordObject {
  std::vector<Value> fields;
};

// No-padding byte layout shared by host arrays, device memory and kernel
// parameter buffers. Only scalars and immutable records are storable.
bool is_storable(Type t);
void store_value(const Value& v, uint8_t* dst);
Value load_value(Type t, const uint8_t* src);

// Deep structural equality; floats compare by bit pattern.
bool values_identical(const Value& a, const Value& b);

template <typename T>
ScalarKind scalar_kind_of() {
  if constexpr (std::is_same_v<T, bool>) return ScalarKind::kBool;
  else if constexpr (std::is_same_v<T, int32_t>) return ScalarKind::kInt32;
  else if constexpr (std::is_same_v<T, int64_t>) return ScalarKind::kInt64;
  else if constexpr (std::is_same_v<T, float>) return ScalarKind::kFloat32;
  else return ScalarKind::kFloat64;
}

template <typename T>
Value array_from(const std::vector<T>& data) {
  Value v = Value::new_array(Type::scalar(scalar_kind_of<T>()),
                             static_cast<int64_t>(data.size()));
  if (!data.empty()) {
    std::memcpy(v.array->bytes.data(), data.data(), data.size() * sizeof(T));
  }
  return v;
}

template <typename T>
std::vector<T> array_to(const Value& v) {
  std::vector<T> out(static_cast<size_t>(v.array->length));
  if (!out.empty()) {
    std::memcpy(out.data(), v.array->bytes.data(), out.size() * sizeof(T));
  }
  return out;
}

}  // namespace kf

#endif  // KF_FRONTEND_VALUE_HPP_
