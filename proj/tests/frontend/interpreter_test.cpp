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

#include "doctest.h"
#include "kf/frontend/builtins.hpp"
#include "kf/frontend/interpreter.hpp"

namespace kf {
namespace {

constexpr const char* kVadd = R"(
function vadd(a, b, c)
  i = 1
  while i <= length(a)
    c[i] = a[i] + b[i]
    i = i + 1
  end
  return
end
)";

TEST_CASE("polynomial at zero") {
  MethodTable t;
  t.load_source("function f(x) return 3*x^2 + 5*x + 2 end");
  Value v = interpret_reference(t, "f", {Value::of_f64(0.0)});
  CHECK(v.type == Type::float64());
  CHECK(v.as_f64() == 2.0);
  v = interpret_reference(t, "f", {Value::of_i64(2)});
  CHECK(v.type == Type::int64());
  CHECK(v.as_i64() == 24);
}

TEST_CASE("vadd over 100 elements") {
  MethodTable t;
  t.load_source(kVadd);
  std::vector<float> a(100), b(100);
  for (int i = 0; i < 100; ++i) {
    a[i] = 0.5f * i;
    b[i] = 100.0f - i;
  }
  Value c = Value::new_array(Type::float32(), 100);
  interpret_reference(t, "vadd", {array_from(a), array_from(b), c});
  auto out = array_to<float>(c);
  for (int i = 0; i < 100; ++i) CHECK(out[i] == a[i] + b[i]);
}

TEST_CASE("out of bounds read") {
  MethodTable t;
  t.load_source("function get(a, i) return a[i] end");
  Value a = Value::new_array(Type::int64(), 100);
  CHECK(interpret_reference(t, "get", {a, Value::of_i64(100)}).as_i64() == 0);
  try {
    interpret_reference(t, "get", {a, Value::of_i64(101)});
    FAIL("expected a bounds error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kBounds);
    CHECK(e.span() == SourceSpan{1, 27});
  }
}

TEST_CASE("run-time dependent result types") {
  MethodTable t;
  t.load_source(R"(
record Rect
  w
end
record Line
  l
end
function pick(flag)
  if flag
    return Rect(1)
  end
  return Line(2.0)
end
)");
  CHECK(interpret_reference(t, "pick", {Value::of_bool(true)}).type.str() ==
        "Rect{Int64}");
  CHECK(interpret_reference(t, "pick", {Value::of_bool(false)}).type.str() ==
        "Line{Float64}");
}

TEST_CASE("records, operators and mutation") {
  MethodTable t;
  t.load_source(R"(
record Point
  x
  y
end
mutable record Acc
  total: Int64
end
function +(a: Point, b: Point)
  return Point(a.x + b.x, a.y + b.y)
end
function sum_points(n)
  p = Point(0, 0)
  acc = Acc(0)
  i = 1
  while i <= n
    p = p + Point(i, 2 * i)
    acc.total = acc.total + i
    i = i + 1
  end
  return Point(p.x + p.y, acc.total)
end
)");
  Value v = interpret_reference(t, "sum_points", {Value::of_i64(10)});
  CHECK(v.str() == "Point(165, 55)");
}

TEST_CASE("errors raised during evaluation") {
  MethodTable t;
  t.load_source(R"(
function divide(a, b) return a / b end
function fail(c) throw(c) end
function undefined_var() return q end
function rec(n) return rec(n + 1) end
function spin()
  while true
  end
end
function both(a, b) return a && b end
)");
  CHECK(interpret_reference(t, "divide", {Value::of_i64(7), Value::of_i64(2)})
            .as_i64() == 3);
  CHECK(interpret_reference(t, "divide",
                            {Value::of_f64(7), Value::of_i64(2)})
            .as_f64() == 3.5);
  CHECK_THROWS_AS(
      interpret_reference(t, "divide", {Value::of_i64(1), Value::of_i64(0)}),
      Error);
  try {
    interpret_reference(t, "fail", {Value::of_i32(7)});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(builtins::thrown_code(e) == 7);
  }
  try {
    interpret_reference(t, "undefined_var", {});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.message().find("q") != std::string::npos);
  }
  CHECK_THROWS_AS(interpret_reference(t, "rec", {Value::of_i64(0)}), Error);
  InterpreterOptions opts;
  opts.step_limit = 1000;
  CHECK_THROWS_AS(interpret_reference(t, "spin", {}, opts), Error);
  CHECK_THROWS_AS(interpret_reference(t, "both", {Value::of_i64(1),
                                                  Value::of_bool(true)}),
                  Error);
  CHECK(!interpret_reference(t, "both", {Value::of_bool(false),
                                         Value::of_i64(1)})
             .as_bool());
  CHECK_THROWS_AS(interpret_reference(t, "nope", {}), Error);
}

TEST_CASE("builtins and conversions") {
  MethodTable t;
  t.load_source(R"(
function conv(x) return Int32(x) end
function make(n)
  a = zeros(Float32, n)
  a[n] = 2
  return a
end
function kinds(x) return isa(x, Float64) end
function mixed(x, y) return min(x, y) + max(x, y) + abs(-x) end
)");
  CHECK(interpret_reference(t, "conv", {Value::of_f64(-3.9)}).as_i64() == -3);
  CHECK(interpret_reference(t, "conv", {Value::of_f64(1e300)}).as_i64() ==
        2147483647);
  Value a = interpret_reference(t, "make", {Value::of_i64(3)});
  CHECK(a.str() == "[0f0, 0f0, 2f0]");
  CHECK(interpret_reference(t, "kinds", {Value::of_f64(1)}).as_bool());
  CHECK(!interpret_reference(t, "kinds", {Value::of_i64(1)}).as_bool());
  Value m = interpret_reference(t, "mixed", {Value::of_i32(3), Value::of_f64(1.5)});
  CHECK(m.type == Type::float64());
  CHECK(m.as_f64() == 7.5);
}

TEST_CASE("broadcast expressions") {
  MethodTable t;
  t.load_source(R"(
function f(x) return 3*x^2 + 5*x + 2 end
function apply(x, y) return f.(2 .* x .+ y) end
)");
  Value x = array_from(std::vector<double>{0, 1, 2});
  Value y = array_from(std::vector<double>{1, 1, 1});
  Value r = interpret_reference(t, "apply", {x, y});
  CHECK(array_to<double>(r) == std::vector<double>{10, 44, 102});
}

}  // namespace
}  // namespace kf
