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

#include "acceptance/host_suite.hpp"

#include <functional>
#include <vector>

#include "kf/hir/hir.hpp"
#include "kf/hir/inference.hpp"
#include "kf/lir/codegen.hpp"
#include "kf/lir/lir.hpp"
#include "kf/lir/passes.hpp"

namespace kf::testing {
namespace {

constexpr const char* kSource = R"(
record Rect
  x1
  y1
  x2
  y2
end
record Line
  x1
  y1
  x2
  y2
end
record Point
  x
  y
end
mutable record Counter
  n
end

function intersect_rect_rect(a, b)
  return Rect(max(a.x1, b.x1), max(a.y1, b.y1), min(a.x2, b.x2), min(a.y2, b.y2))
end
function intersect_rect_line(a, b)
  return Line(max(a.x1, b.x1), a.y1, min(a.x2, b.x2), a.y2)
end
function intersect_any(a, b, b_is_line)
  if b_is_line
    return intersect_rect_line(a, b)
  end
  return intersect_rect_rect(a, b)
end
function intersect(a: Rect, b: Rect)
  return intersect_rect_rect(a, b)
end
function intersect(a: Rect, b: Line)
  return intersect_rect_line(a, b)
end

function vadd(a, b, c)
  i = 1
  while i <= length(c)
    c[i] = a[i] + b[i]
    i = i + 1
  end
end

function fib(n)
  if n < 2
    return n
  end
  return fib(n - 1) + fib(n - 2)
end

function +(a: Point, b: Point)
  return Point(a.x + b.x, a.y + b.y)
end
function fold(ps)
  acc = Point(0, 0)
  i = 1
  while i <= length(ps)
    acc = acc + ps[i]
    i = i + 1
  end
  return acc
end

function poly(x)
  return 3 * x^2 + 5 * x + 2
end
function fused(x)
  return poly(2 * x^2 + 6 * x^3 - sqrt(x))
end

function checked_div(a, b)
  if b == 0
    throw(7)
  end
  return a / b
end

function bump(c, k)
  while k > 0
    c.n = c.n + k
    k = k - 1
  end
  return c.n
end
)";

}  // namespace

std::string host_suite_dump() {
  MethodTable table;
  table.load_source(kSource);
  auto rec = [&](std::string_view name, Type field) {
    auto decl = table.records().find(name);
    return instantiate_record(decl,
                              std::vector<Type>(decl->field_names.size(), field));
  };
  Type rect = rec("Rect", Type::float64());
  Type line = rec("Line", Type::float64());
  Type point = rec("Point", Type::int64());
  Type counter = rec("Counter", Type::int64());
  Type f32s = Type::array(Type::float32());
  std::vector<std::pair<std::string, std::vector<Type>>> cases = {
      {"intersect_any", {rect, rect, Type::boolean()}},
      {"intersect", {rect, rect}},
      {"intersect", {rect, line}},
      {"vadd", {f32s, f32s, f32s}},
      {"fib", {Type::int64()}},
      {"fold", {Type::array(point)}},
      {"fused", {Type::float64()}},
      {"fused", {Type::float32()}},
      {"checked_div", {Type::int32(), Type::int32()}},
      {"bump", {counter, Type::int64()}},
  };
  std::string out;
  for (const auto& [name, types] : cases) {
    hir::Specializer spec(table);
    auto fn = spec.specialize(name, types);
    out += hir::dump(*fn);
    // Unstable code has no host lowering; its HIR is still compared.
    if (!fn->return_type.is_concrete()) continue;
    lir::Module m = lir::lower_hir(*fn);
    out += lir::print(m);
    lir::run_passes(m, lir::default_pipeline());
    out += lir::print(m);
  }
  return out;
}

}  // namespace kf::testing
