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

#include "kf/frontend/value.hpp"

#include <fmt/format.h>

namespace kf {

OpaqueObject::~OpaqueObject() = default;

std::string OpaqueObject::describe() const { return type().str(); }

Value Value::scalar(ScalarKind kind, uint64_t bits) {
  Value v;
  v.type = Type::scalar(kind);
  v.bits = scalar::canonical(kind, bits);
  return v;
}

Value Value::of_bool(bool b) { return scalar(ScalarKind::kBool, b ? 1 : 0); }
Value Value::of_i32(int32_t i) {
  return scalar(ScalarKind::kInt32, scalar::from_i64(ScalarKind::kInt32, i));
}
Value Value::of_i64(int64_t i) {
  return scalar(ScalarKind::kInt64, static_cast<uint64_t>(i));
}
Value Value::of_f32(float f) {
  return scalar(ScalarKind::kFloat32, scalar::from_f32(f));
}
Value Value::of_f64(double d) {
  return scalar(ScalarKind::kFloat64, scalar::from_f64(ScalarKind::kFloat64, d));
}

Value Value::symbol(std::string_view name) {
  Value v;
  v.type = Type::function(name);
  return v;
}

Value Value::new_array(Type element, int64_t length) {
  if (!is_storable(element)) {
    throw Error(ErrorKind::kUnsupported,
                fmt::format("arrays of {} are not supported", element.str()));
  }
  if (length < 0) {
    throw Error(ErrorKind::kRuntime,
                fmt::format("negative array length {}", length));
  }
  Value v;
  v.type = Type::array(element);
  v.array = std::make_shared<ArrayObject>();
  v.array->element = element;
  v.array->length = length;
  v.array->bytes.assign(static_cast<size_t>(length) * element.size_bytes(), 0);
  return v;
}

Value Value::new_record(Type type, std::vector<Value> fields) {
  Value v;
  v.type = type;
  v.record = std::make_shared<RecordObject>();
  v.record->fields = std::move(fields);
  return v;
}

Value Value::wrap(std::shared_ptr<OpaqueObject> object) {
  Value v;
  v.type = object->type();
  v.opaque = std::move(object);
  return v;
}

std::string Value::str() const {
  switch (type.kind()) {
    case TypeKind::kNothing:
      return "nothing";
    case TypeKind::kScalar:
      switch (kind()) {
        case ScalarKind::kBool:
          return as_bool() ? "true" : "false";
        case ScalarKind::kInt32:
        case ScalarKind::kInt64:
          return std::to_string(as_i64());
        case ScalarKind::kFloat32:
          return fmt::format("{}f0", scalar::to_f32(bits));
        case ScalarKind::kFloat64:
          return fmt::format("{}", as_f64());
      }
      break;
    case TypeKind::kArray: {
      std::string out = "[";
      for (int64_t i = 0; i < array->length; ++i) {
        if (i) out += ", ";
        if (i == 8 && array->length > 10) {
          out += fmt::format("... ({} more)", array->length - 8);
          break;
        }
        out += array->get(i).str();
      }
      return out + "]";
    }
    case TypeKind::kRecord: {
      std::string out = type.record_decl().name + "(";
      for (size_t i = 0; i < record->fields.size(); ++i) {
        if (i) out += ", ";
        out += record->fields[i].str();
      }
      return out + ")";
    }
    case TypeKind::kFunction:
      return type.symbol();
    case TypeKind::kOpaque:
      return opaque ? opaque->describe() : type.str();
    default:
      break;
  }
  return type.str();
}

Value ArrayObject::get(int64_t index) const {
  return load_value(element, bytes.data() + index * element.size_bytes());
}

void ArrayObject::set(int64_t index, const Value& v) {
  store_value(v, bytes.data() + index * element.size_bytes());
}

bool is_storable(Type t) {
  if (t.is_scalar()) return true;
  if (t.is_record() && !t.is_mutable_record()) {
    for (Type f : t.fields()) {
      if (!is_storable(f)) return false;
    }
    return true;
  }
  return false;
}

void store_value(const Value& v, uint8_t* dst) {
  if (v.type.is_scalar()) {
    std::memcpy(dst, &v.bits, v.type.size_bytes());
    return;
  }
  if (v.type.is_record() && !v.type.is_mutable_record()) {
    for (size_t i = 0; i < v.record->fields.size(); ++i) {
      store_value(v.record->fields[i], dst + v.type.field_offset(i));
    }
    return;
  }
  throw Error(ErrorKind::kUnsupported,
              fmt::format("cannot store a {} in memory", v.type.str()));
}

Value load_value(Type t, const uint8_t* src) {
  if (t.is_scalar()) {
    uint64_t bits = 0;
    std::memcpy(&bits, src, t.size_bytes());
    return Value::scalar(t.scalar_kind(), bits);
  }
  if (t.is_record() && !t.is_mutable_record()) {
    std::vector<Value> fields;
    for (size_t i = 0; i < t.fields().size(); ++i) {
      fields.push_back(load_value(t.fields()[i], src + t.field_offset(i)));
    }
    return Value::new_record(t, std::move(fields));
  }
  throw Error(ErrorKind::kUnsupported,
              fmt::format("cannot load a {} from memory", t.str()));
}

bool values_identical(const Value& a, const Value& b) {
  if (!(a.type == b.type)) return false;
  switch (a.type.kind()) {
    case TypeKind::kScalar:
      return a.bits == b.bits;
    case TypeKind::kArray:
      return a.array->length == b.array->length &&
             a.array->bytes == b.array->bytes;
    case TypeKind::kRecord:
      for (size_t i = 0; i < a.record->fields.size(); ++i) {
        if (!values_identical(a.record->fields[i], b.record->fields[i])) {
          return false;
        }
      }
      return true;
    case TypeKind::kOpaque:
      return a.opaque == b.opaque;
    default:
      return true;
  }
}

}  // namespace kf
