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

#include <random>

#include "doctest.h"
#include "kf/frontend/interpreter.hpp"
#include "kf/hir/inference.hpp"
#include "kf/support/instrumentation.hpp"

namespace kf::hir {
namespace {

constexpr const char* kShapes = R"(
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
)";

Type rect_of(const MethodTable& t, std::string_view name) {
  return instantiate_record(t.records().find(name),
                            std::vector<Type>(4, Type::float64()));
}

bool all_concrete(const HirFunction& fn) {
  for (const Slot& s : fn.slots) {
    if (s.type.is_any()) return false;
  }
  return true;
}

TEST_CASE("lattice join laws") {
  std::vector<LatticeType> elems = {LatticeType::bottom(), LatticeType::any(),
                                    LatticeType::of(Type::int64()),
                                    LatticeType::of(Type::float64()),
                                    LatticeType::of(Type::array(Type::int32()))};
  for (const auto& a : elems) {
    CHECK(LatticeType::bottom().join(a) == a);
    CHECK(a.join(a) == a);
    CHECK(a.leq(a));
    for (const auto& b : elems) {
      CHECK(a.join(b) == b.join(a));
      if (a.leq(b) && b.leq(a)) CHECK(a == b);
      for (const auto& c : elems) {
        CHECK(a.join(b).join(c) == a.join(b.join(c)));
        if (a.leq(b) && b.leq(c)) CHECK(a.leq(c));
      }
    }
  }
  CHECK(LatticeType::of(Type::int64()).join(LatticeType::of(Type::float64())) ==
        LatticeType::any());
}

TEST_CASE("polynomial infers Float64 with all slots concrete") {
  MethodTable t;
  t.load_source("function f(x) return 3*x^2 + 5*x + 2 end");
  Specializer spec(t);
  auto fn = spec.specialize("f", {Type::float64()});
  CHECK(fn->return_type == LatticeType::of(Type::float64()));
  CHECK(all_concrete(*fn));
}

TEST_CASE("value-dependent return type joins to Any") {
  MethodTable t;
  t.load_source(kShapes);
  Specializer spec(t);
  Type rect = rect_of(t, "Rect");
  auto fn = spec.specialize("intersect_any", {rect, rect, Type::boolean()});
  CHECK(fn->return_type.is_any());
}

TEST_CASE("narrow methods infer a concrete record") {
  MethodTable t;
  t.load_source(kShapes);
  Specializer spec(t);
  Type rect = rect_of(t, "Rect");
  auto fn = spec.specialize("intersect", {rect, rect});
  CHECK(fn->return_type == LatticeType::of(rect));
  CHECK(all_concrete(*fn));
  Type line = rect_of(t, "Line");
  CHECK(spec.specialize("intersect", {rect, line})->return_type ==
        LatticeType::of(line));
}

TEST_CASE("instability is reported when Any is not allowed") {
  MethodTable t;
  t.load_source(kShapes);
  InferenceParams params;
  params.allow_any = false;
  std::vector<std::string> unstable;
  InferenceHooks hooks;
  hooks.on_unstable = [&](const HirFunction&, const Slot& s) {
    unstable.push_back(s.name);
  };
  Specializer spec(t, params, hooks);
  Type rect = rect_of(t, "Rect");
  try {
    spec.specialize("intersect_any", {rect, rect, Type::boolean()});
    FAIL("expected instability");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInstability);
    CHECK(e.message().find("return value") != std::string::npos);
    CHECK(e.message().find("Rect{Float64,Float64,Float64,Float64}") !=
          std::string::npos);
  }
}

TEST_CASE("unstable variable is named in the diagnostic") {
  MethodTable t;
  t.load_source(R"(
function g(flag)
  x = 1
  if flag
    x = 2.5
  end
  return 0
end
)");
  InferenceParams params;
  params.allow_any = false;
  Specializer spec(t, params);
  try {
    spec.specialize("g", {Type::boolean()});
    FAIL("expected instability");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInstability);
    CHECK(e.message().find("variable x joins Int64, Float64") !=
          std::string::npos);
  }
}

TEST_CASE("specialization memo") {
  MethodTable t;
  t.load_source("function f(x) return 3*x^2 + 5*x + 2 end");
  Specializer spec(t);
  auto before = CounterSnapshot::take();
  auto a = spec.specialize("f", {Type::float64()});
  auto mid = CounterSnapshot::take();
  auto b = spec.specialize("f", {Type::float64()});
  auto after = CounterSnapshot::take();
  CHECK(a == b);
  CHECK((mid - before).inference_runs == 1);
  CHECK((after - mid).inference_runs == 0);

  auto c = spec.specialize("f", {Type::int64()});
  CHECK(c != a);
  CHECK(c->return_type == LatticeType::of(Type::int64()));

  t.load_source("function f(x) return x end");
  auto snap = CounterSnapshot::take();
  auto d = spec.specialize("f", {Type::float64()});
  CHECK(d != a);
  CHECK((CounterSnapshot::take() - snap).inference_runs == 1);
}

TEST_CASE("callee redefinition invalidates callers") {
  MethodTable t;
  t.load_source(R"(
function helper(x) return x + 1 end
function other(x) return x end
function k(x) return helper(x) * 2 end
)");
  Specializer spec(t);
  auto a = spec.specialize("k", {Type::int64()});
  t.load_source("function other(x) return x - 1 end");
  CHECK(spec.specialize("k", {Type::int64()}) == a);
  t.load_source("function helper(x) return x + 2 end");
  CHECK(spec.specialize("k", {Type::int64()}) != a);
  // A new, more specific method also changes resolution.
  auto b = spec.specialize("k", {Type::int64()});
  t.load_source("function helper(x: Int64) return x end");
  CHECK(spec.specialize("k", {Type::int64()}) != b);
}

TEST_CASE("inference is idempotent") {
  MethodTable t;
  t.load_source(kShapes);
  t.load_source(R"(
function loop(n)
  s = 0.0
  i = 1
  while i <= n
    s = s + sqrt(Float64(i))
    i = i + 1
  end
  return s
end
)");
  Specializer spec(t);
  auto fn = spec.specialize("loop", {Type::int64()});
  HirFunction copy = *fn;
  std::string first = dump(copy);
  infer(copy, spec);
  CHECK(dump(copy) == first);
  Type rect = rect_of(t, "Rect");
  auto any_fn = spec.specialize("intersect_any", {rect, rect, Type::boolean()});
  HirFunction copy2 = *any_fn;
  infer(copy2, spec);
  CHECK(dump(copy2) == dump(*any_fn));
}

TEST_CASE("default hooks are transparent") {
  MethodTable t;
  t.load_source(kShapes);
  Specializer plain(t);
  InferenceHooks hooks;
  hooks.resolve_call = [](std::string_view, const std::vector<Type>&) {
    return MethodPtr();
  };
  hooks.resolve_intrinsic = [](std::string_view, const std::vector<Type>&) {
    return std::optional<Type>();
  };
  hooks.knows_name = [](std::string_view) { return false; };
  Specializer hooked(t, {}, hooks);
  Type rect = rect_of(t, "Rect");
  CHECK(dump(*plain.specialize("intersect", {rect, rect})) ==
        dump(*hooked.specialize("intersect", {rect, rect})));
}

TEST_CASE("hook results must be applicable") {
  MethodTable t;
  t.load_source(R"(
function h(x: Float64) return x end
function k(x) return h(x) end
)");
  InferenceHooks hooks;
  hooks.resolve_call = [&](std::string_view name, const std::vector<Type>&) {
    return name == "h" ? t.methods("h")[0] : MethodPtr();
  };
  Specializer spec(t, {}, hooks);
  CHECK_THROWS_AS(spec.specialize("k", {Type::int64()}), Error);
}

TEST_CASE("recursion widens to Any") {
  MethodTable t;
  t.load_source("function fact(n) if n <= 1 return 1 end return n * fact(n - 1) end");
  Specializer spec(t);
  auto fn = spec.specialize("fact", {Type::int64()});
  CHECK(fn->return_type.is_any());
  InferenceParams strict;
  strict.allow_any = false;
  Specializer device(t, strict);
  CHECK_THROWS_AS(device.specialize("fact", {Type::int64()}), Error);
}

TEST_CASE("type errors surface during inference") {
  MethodTable t;
  t.load_source(R"(
function bad_cond(x) if x return 1 end return 2 end
function bad_store(a) a[1] = true return end
function bad_field(p) return p.z end
function used_before(n) if n > 0 y = 1 end return y end
function never(n) return z2 + 1 end
)");
  Specializer spec(t);
  CHECK_THROWS_AS(spec.specialize("bad_cond", {Type::int64()}), Error);
  CHECK_THROWS_AS(spec.specialize("bad_store", {Type::array(Type::int64())}),
                  Error);
  CHECK_THROWS_AS(spec.specialize("bad_field", {Type::int64()}), Error);
  CHECK_NOTHROW(spec.specialize("used_before", {Type::int64()}));
}

// Random programs over two parameters that pick one of two expressions.
std::string random_program(std::mt19937_64& rng) {
  const char* leaves[] = {"x", "y", "1", "2.5", "x * y", "x + 1", "y / 2"};
  auto expr = [&] {
    std::string e = leaves[rng() % 7];
    if (rng() % 2) e = "(" + e + ") - " + leaves[rng() % 7];
    return e;
  };
  return "function p(x, y)\n  if x > y\n    r = " + expr() +
         "\n  else\n    r = " + expr() + "\n  end\n  return r\nend\n";
}

TEST_CASE("property: inferred types cover observed types") {
  std::mt19937_64 rng(99);
  const Type kinds[] = {Type::int64(), Type::float64()};
  auto value_of = [](Type t, int v) {
    return t == Type::int64() ? Value::of_i64(v) : Value::of_f64(v + 0.5);
  };
  for (int trial = 0; trial < 60; ++trial) {
    std::string src = random_program(rng);
    MethodTable t;
    t.load_source(src);
    for (Type tx : kinds) {
      for (Type ty : kinds) {
        Specializer spec(t);
        auto fn = spec.specialize("p", {tx, ty});
        std::vector<Type> seen;
        for (int xv : {-2, 0, 3}) {
          for (int yv : {-1, 1, 4}) {
            Value r = interpret_reference(t, "p", {value_of(tx, xv),
                                                   value_of(ty, yv)});
            CHECK(LatticeType::of(r.type).leq(fn->return_type));
            if (std::find(seen.begin(), seen.end(), r.type) == seen.end()) {
              seen.push_back(r.type);
            }
          }
        }
        // Both branches are exercised by the inputs above, so the reference
        // run exhibits two types at `r` exactly when inference widens it.
        InferenceParams strict;
        strict.allow_any = false;
        Specializer device(t, strict);
        bool rejected = false;
        try {
          device.specialize("p", {tx, ty});
        } catch (const Error& e) {
          rejected = e.kind() == ErrorKind::kInstability;
        }
        INFO(src);
        CHECK(rejected == (seen.size() >= 2));
      }
    }
  }
}

}  // namespace
}  // namespace kf::hir
