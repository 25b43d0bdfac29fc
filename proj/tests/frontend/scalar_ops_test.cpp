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

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "kf/frontend/scalar_ops.hpp"

namespace kf::scalar {
namespace {

TEST_CASE("integer arithmetic wraps and rejects zero divisors") {
  auto i64 = [](int64_t v) { return from_i64(ScalarKind::kInt64, v); };
  auto max = std::numeric_limits<int64_t>::max();
  auto min = std::numeric_limits<int64_t>::min();
  CHECK(to_i64(ScalarKind::kInt64,
               *arith(ArithOp::kAdd, ScalarKind::kInt64, i64(max), i64(1))) ==
        min);
  CHECK(to_i64(ScalarKind::kInt64,
               *arith(ArithOp::kDiv, ScalarKind::kInt64, i64(min), i64(-1))) ==
        min);
  CHECK(to_i64(ScalarKind::kInt64,
               *arith(ArithOp::kRem, ScalarKind::kInt64, i64(-7), i64(2))) == -1);
  CHECK(!arith(ArithOp::kDiv, ScalarKind::kInt64, i64(1), i64(0)));
  CHECK(!arith(ArithOp::kRem, ScalarKind::kInt32,
               from_i64(ScalarKind::kInt32, 1), 0));
}

TEST_CASE("float to integer conversion saturates") {
  auto f = [](double v) { return from_f64(ScalarKind::kFloat64, v); };
  CHECK(to_i64(ScalarKind::kInt32,
               convert(ScalarKind::kFloat64, ScalarKind::kInt32, f(1e12))) ==
        2147483647);
  CHECK(to_i64(ScalarKind::kInt32,
               convert(ScalarKind::kFloat64, ScalarKind::kInt32, f(-1e12))) ==
        -2147483648LL);
  CHECK(convert(ScalarKind::kFloat64, ScalarKind::kInt64, f(std::nan(""))) == 0);
  CHECK(to_i64(ScalarKind::kInt64,
               convert(ScalarKind::kFloat64, ScalarKind::kInt64, f(-2.7))) == -2);
}

TEST_CASE("promotion order") {
  CHECK(promote(ScalarKind::kInt32, ScalarKind::kInt64) == ScalarKind::kInt64);
  CHECK(promote(ScalarKind::kInt64, ScalarKind::kFloat32) ==
        ScalarKind::kFloat32);
  CHECK(promote(ScalarKind::kFloat64, ScalarKind::kFloat32) ==
        ScalarKind::kFloat64);
  CHECK(!promote(ScalarKind::kBool, ScalarKind::kInt64));
}

TEST_CASE("property: float32 arithmetic matches native float") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> dist(-1e6f, 1e6f);
  for (int i = 0; i < 1000; ++i) {
    float a = dist(rng), b = dist(rng);
    CHECK(to_f32(*arith(ArithOp::kMul, ScalarKind::kFloat32, from_f32(a),
                        from_f32(b))) == a * b);
    CHECK(to_f32(*arith(ArithOp::kAdd, ScalarKind::kFloat32, from_f32(a),
                        from_f32(b))) == a + b);
  }
}

TEST_CASE("integer pow multiplies") {
  auto i64 = [](int64_t v) { return from_i64(ScalarKind::kInt64, v); };
  CHECK(to_i64(ScalarKind::kInt64, math(MathOp::kPow, ScalarKind::kInt64,
                                        i64(3), i64(4))) == 81);
  CHECK(to_i64(ScalarKind::kInt64, math(MathOp::kPow, ScalarKind::kInt64,
                                        i64(3), i64(0))) == 1);
  CHECK(to_i64(ScalarKind::kInt64, math(MathOp::kPow, ScalarKind::kInt64,
                                        i64(3), i64(-2))) == 1);
}

}  // namespace
}  // namespace kf::scalar
