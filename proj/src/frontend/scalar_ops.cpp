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

#include "kf/frontend/scalar_ops.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace kf::scalar {

namespace {

int rank(ScalarKind k) {
  switch (k) {
    case ScalarKind::kBool: return -1;
    case ScalarKind::kInt32: return 0;
    case ScalarKind::kInt64: return 1;
    case ScalarKind::kFloat32: return 2;
    case ScalarKind::kFloat64: return 3;
  }
  return -1;
}

template <typename Int>
Int saturate(double v) {
  if (std::isnan(v)) return 0;
  if (v <= static_cast<double>(std::numeric_limits<Int>::min())) {
    return std::numeric_limits<Int>::min();
  }
  if (v >= static_cast<double>(std::numeric_limits<Int>::max())) {
    return std::numeric_limits<Int>::max();
  }
  return static_cast<Int>(v);
}

}  // namespace

uint64_t from_i64(ScalarKind kind, int64_t v) {
  switch (kind) {
    case ScalarKind::kBool: return v != 0 ? 1 : 0;
    case ScalarKind::kInt32:
      return static_cast<uint32_t>(static_cast<int32_t>(v));
    case ScalarKind::kInt64: return static_cast<uint64_t>(v);
    case ScalarKind::kFloat32: return from_f32(static_cast<float>(v));
    case ScalarKind::kFloat64:
      return std::bit_cast<uint64_t>(static_cast<double>(v));
  }
  return 0;
}

uint64_t from_f64(ScalarKind kind, double v) {
  switch (kind) {
    case ScalarKind::kFloat32: return from_f32(static_cast<float>(v));
    case ScalarKind::kFloat64: return std::bit_cast<uint64_t>(v);
    default: return convert(ScalarKind::kFloat64, kind, std::bit_cast<uint64_t>(v));
  }
}

uint64_t from_f32(float v) { return std::bit_cast<uint32_t>(v); }
uint64_t from_bool(bool v) { return v ? 1 : 0; }

int64_t to_i64(ScalarKind kind, uint64_t bits) {
  switch (kind) {
    case ScalarKind::kBool: return bits & 1;
    case ScalarKind::kInt32:
      return static_cast<int32_t>(static_cast<uint32_t>(bits));
    case ScalarKind::kInt64: return static_cast<int64_t>(bits);
    case ScalarKind::kFloat32: return saturate<int64_t>(to_f32(bits));
    case ScalarKind::kFloat64:
      return saturate<int64_t>(std::bit_cast<double>(bits));
  }
  return 0;
}

double to_f64(ScalarKind kind, uint64_t bits) {
  switch (kind) {
    case ScalarKind::kBool: return static_cast<double>(bits & 1);
    case ScalarKind::kInt32:
      return static_cast<double>(static_cast<int32_t>(bits));
    case ScalarKind::kInt64:
      return static_cast<double>(static_cast<int64_t>(bits));
    case ScalarKind::kFloat32: return to_f32(bits);
    case ScalarKind::kFloat64: return std::bit_cast<double>(bits);
  }
  return 0;
}

float to_f32(uint64_t bits) {
  return std::bit_cast<float>(static_cast<uint32_t>(bits));
}

uint64_t canonical(ScalarKind kind, uint64_t bits) {
  switch (kind) {
    case ScalarKind::kBool: return bits & 1;
    case ScalarKind::kInt32:
    case ScalarKind::kFloat32: return bits & 0xffffffffull;
    default: return bits;
  }
}

std::optional<uint64_t> arith(ArithOp op, ScalarKind kind, uint64_t a,
                              uint64_t b) {
  switch (kind) {
    case ScalarKind::kInt32: {
      uint32_t x = static_cast<uint32_t>(a), y = static_cast<uint32_t>(b);
      int32_t sx = static_cast<int32_t>(x), sy = static_cast<int32_t>(y);
      switch (op) {
        case ArithOp::kAdd: return static_cast<uint32_t>(x + y);
        case ArithOp::kSub: return static_cast<uint32_t>(x - y);
        case ArithOp::kMul: return static_cast<uint32_t>(x * y);
        case ArithOp::kDiv:
          if (sy == 0) return std::nullopt;
          if (sy == -1) return static_cast<uint32_t>(0u - x);
          return static_cast<uint32_t>(sx / sy);
        case ArithOp::kRem:
          if (sy == 0) return std::nullopt;
          if (sy == -1) return 0;
          return static_cast<uint32_t>(sx % sy);
      }
      break;
    }
    case ScalarKind::kInt64: {
      int64_t sx = static_cast<int64_t>(a), sy = static_cast<int64_t>(b);
      switch (op) {
        case ArithOp::kAdd: return a + b;
        case ArithOp::kSub: return a - b;
        case ArithOp::kMul: return a * b;
        case ArithOp::kDiv:
          if (sy == 0) return std::nullopt;
          if (sy == -1) return 0ull - a;
          return static_cast<uint64_t>(sx / sy);
        case ArithOp::kRem:
          if (sy == 0) return std::nullopt;
          if (sy == -1) return 0;
          return static_cast<uint64_t>(sx % sy);
      }
      break;
    }
    case ScalarKind::kFloat32: {
      float x = to_f32(a), y = to_f32(b);
      switch (op) {
        case ArithOp::kAdd: return from_f32(x + y);
        case ArithOp::kSub: return from_f32(x - y);
        case ArithOp::kMul: return from_f32(x * y);
        case ArithOp::kDiv: return from_f32(x / y);
        case ArithOp::kRem: return from_f32(std::fmod(x, y));
      }
      break;
    }
    case ScalarKind::kFloat64: {
      double x = std::bit_cast<double>(a), y = std::bit_cast<double>(b);
      double r = 0;
      switch (op) {
        case ArithOp::kAdd: r = x + y; break;
        case ArithOp::kSub: r = x - y; break;
        case ArithOp::kMul: r = x * y; break;
        case ArithOp::kDiv: r = x / y; break;
        case ArithOp::kRem: r = std::fmod(x, y); break;
      }
      return std::bit_cast<uint64_t>(r);
    }
    case ScalarKind::kBool: break;
  }
  return 0;
}

uint64_t negate(ScalarKind kind, uint64_t a) {
  switch (kind) {
    case ScalarKind::kInt32: return static_cast<uint32_t>(0u - static_cast<uint32_t>(a));
    case ScalarKind::kInt64: return 0ull - a;
    case ScalarKind::kFloat32: return from_f32(-to_f32(a));
    case ScalarKind::kFloat64:
      return std::bit_cast<uint64_t>(-std::bit_cast<double>(a));
    case ScalarKind::kBool: return a & 1;
  }
  return 0;
}

bool compare(CmpOp op, ScalarKind kind, uint64_t a, uint64_t b) {
  auto apply = [op](auto x, auto y) {
    switch (op) {
      case CmpOp::kEq: return x == y;
      case CmpOp::kNe: return x != y;
      case CmpOp::kLt: return x < y;
      case CmpOp::kLe: return x <= y;
      case CmpOp::kGt: return x > y;
      case CmpOp::kGe: return x >= y;
    }
    return false;
  };
  switch (kind) {
    case ScalarKind::kBool: return apply(a & 1, b & 1);
    case ScalarKind::kInt32:
      return apply(static_cast<int32_t>(a), static_cast<int32_t>(b));
    case ScalarKind::kInt64:
      return apply(static_cast<int64_t>(a), static_cast<int64_t>(b));
    case ScalarKind::kFloat32: return apply(to_f32(a), to_f32(b));
    case ScalarKind::kFloat64:
      return apply(std::bit_cast<double>(a), std::bit_cast<double>(b));
  }
  return false;
}

uint64_t convert(ScalarKind from, ScalarKind to, uint64_t bits) {
  if (from == to) return canonical(to, bits);
  if (to == ScalarKind::kBool) {
    if (is_float(from)) return to_f64(from, bits) != 0.0 ? 1 : 0;
    return to_i64(from, bits) != 0 ? 1 : 0;
  }
  if (is_float(from)) {
    double v = to_f64(from, bits);
    switch (to) {
      case ScalarKind::kInt32: return static_cast<uint32_t>(saturate<int32_t>(v));
      case ScalarKind::kInt64: return static_cast<uint64_t>(saturate<int64_t>(v));
      case ScalarKind::kFloat32: return from_f32(static_cast<float>(v));
      case ScalarKind::kFloat64: return std::bit_cast<uint64_t>(v);
      default: break;
    }
    return 0;
  }
  int64_t v = to_i64(from, bits);
  return from_i64(to, v);
}

uint64_t math(MathOp op, ScalarKind kind, uint64_t a, uint64_t b) {
  switch (op) {
    case MathOp::kAbs:
      switch (kind) {
        case ScalarKind::kInt32: {
          int32_t v = static_cast<int32_t>(a);
          return v < 0 ? static_cast<uint32_t>(0u - static_cast<uint32_t>(v))
                       : static_cast<uint32_t>(v);
        }
        case ScalarKind::kInt64: {
          int64_t v = static_cast<int64_t>(a);
          return v < 0 ? 0ull - a : a;
        }
        case ScalarKind::kFloat32: return from_f32(std::fabs(to_f32(a)));
        case ScalarKind::kFloat64:
          return std::bit_cast<uint64_t>(std::fabs(std::bit_cast<double>(a)));
        default: return a;
      }
    case MathOp::kSqrt:
      if (kind == ScalarKind::kFloat32) return from_f32(std::sqrt(to_f32(a)));
      return std::bit_cast<uint64_t>(std::sqrt(to_f64(kind, a)));
    case MathOp::kPow:
      switch (kind) {
        case ScalarKind::kFloat32:
          return from_f32(std::pow(to_f32(a), to_f32(b)));
        case ScalarKind::kFloat64:
          return std::bit_cast<uint64_t>(
              std::pow(std::bit_cast<double>(a), std::bit_cast<double>(b)));
        case ScalarKind::kInt32:
        case ScalarKind::kInt64: {
          uint64_t result = from_i64(kind, 1);
          int64_t n = to_i64(kind, b);
          for (int64_t i = 0; i < n; ++i) {
            result = *arith(ArithOp::kMul, kind, result, a);
          }
          return result;
        }
        default: return 0;
      }
  }
  return 0;
}

std::optional<ScalarKind> promote(ScalarKind a, ScalarKind b) {
  if (a == ScalarKind::kBool || b == ScalarKind::kBool) return std::nullopt;
  return rank(a) >= rank(b) ? a : b;
}

}  // namespace kf::scalar
