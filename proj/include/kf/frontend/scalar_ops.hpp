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

#ifndef KF_FRONTEND_SCALAR_OPS_HPP_
#define KF_FRONTEND_SCALAR_OPS_HPP_

#include <cstdint>
#include <optional>

#include "kf/frontend/types.hpp"

// Bit-level scalar semantics shared by every executor of KSL code: the
// reference interpreter, the constant folder and the virtual device.
//
// Scalars travel as uint64_t "bits": Bool is 0/1, Int32 and Float32 occupy
// the low 32 bits (upper bits zero), Int64 and Float64 use all 64.
namespace kf::scalar {

enum class ArithOp : uint8_t { kAdd, kSub, kMul, kDiv, kRem };
enum class CmpOp : uint8_t { kEq, kNe, kLt, kLe, kGt, kGe };
enum class MathOp : uint8_t { kAbs, kSqrt, kPow };

uint64_t from_i64(ScalarKind kind, int64_t v);
uint64_t from_f64(ScalarKind kind, double v);
uint64_t from_f32(float v);
uint64_t from_bool(bool v);
int64_t to_i64(ScalarKind kind, uint64_t bits);
double to_f64(ScalarKind kind, uint64_t bits);
float to_f32(uint64_t bits);
uint64_t canonical(ScalarKind kind, uint64_t bits);

// Returns nullopt for integer division or remainder by zero.
std::optional<uint64_t> arith(ArithOp op, ScalarKind kind, uint64_t a,
                              uint64_t b);
uint64_t negate(ScalarKind kind, uint64_t a);
bool compare(CmpOp op, ScalarKind kind, uint64_t a, uint64_t b);

// Float to integer truncates toward zero and saturates; NaN becomes 0.
uint64_t convert(ScalarKind from, ScalarKind to, uint64_t bits);

// abs/sqrt take one operand, pow takes two of the same kind.
// Integer pow multiplies |n| times for n > 0 and yields 1 otherwise.
uint64_t math(MathOp op, ScalarKind kind, uint64_t a, uint64_t b = 0);

// Arithmetic promotion: Int32 < Int64 < Float32 < Float64. Bool does not
// participate in arithmetic.
std::optional<ScalarKind> promote(ScalarKind a, ScalarKind b);

}  // namespace kf::scalar

#endif  // KF_FRONTEND_SCALAR_OPS_HPP_
