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
#include "kf/frontend/method_table.hpp"
#include "kf/frontend/parser.hpp"

namespace kf {
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
function intersect(a: Rect, b: Rect)
  return Rect(a.x1, a.y1, b.x2, b.y2)
end
function intersect(a: Rect, b: Line)
  return Line(a.x1, a.y1, b.x2, b.y2)
end
)";

TEST_CASE("define assigns strictly increasing ages") {
  MethodTable t;
  auto f1 = t.load_source("function f(x) return x end")[0];
  auto g = t.load_source("function g(x) return x end")[0];
  CHECK(g->age == f1->age + 1);
  auto f2 = t.load_source("function f(x) return x + 1 end")[0];
  CHECK(f2->age > f1->age);
  CHECK(f2->id == f1->id);
  CHECK(t.methods("f").size() == 1);
  CHECK(t.world_age() == f2->age);
  CHECK(t.dispatch("f", {Type::int64()}) == f2);
}

TEST_CASE("narrowly typed methods coexist") {
  MethodTable t;
  t.load_source(kShapes);
  CHECK(t.methods("intersect").size() == 2);
  Type rect = instantiate_record(t.records().find("Rect"),
                                 std::vector<Type>(4, Type::int64()));
  Type line = instantiate_record(t.records().find("Line"),
                                 std::vector<Type>(4, Type::int64()));
  auto m = t.dispatch("intersect", {rect, line});
  CHECK(m->signature() == "intersect(a: Rect, b: Line)");
  m = t.dispatch("intersect", {rect, rect});
  CHECK(m->signature() == "intersect(a: Rect, b: Rect)");
  CHECK_THROWS_AS(t.dispatch("intersect", {line, line}), Error);
  CHECK(t.find("intersect", {line, line}) == nullptr);
}

TEST_CASE("singleton table accepts any types") {
  MethodTable t;
  t.load_source("function id(x) return x end");
  for (Type ty : {Type::int64(), Type::float32(), Type::array(Type::int32())}) {
    CHECK(t.dispatch("id", {ty})->name == "id");
  }
  CHECK(t.find("id", {}) == nullptr);
}

TEST_CASE("specificity ordering") {
  MethodTable t;
  t.load_source(R"(
function s(x) return 0 end
function s(x: Array) return 1 end
function s(x: Array{Float32}) return 2 end
function s(x: Int64) return 3 end
)");
  CHECK(t.dispatch("s", {Type::float64()})->constraints[0].str().empty());
  CHECK(t.dispatch("s", {Type::array(Type::int32())})->constraints[0].str() ==
        "Array");
  CHECK(t.dispatch("s", {Type::array(Type::float32())})->constraints[0].str() ==
        "Array{Float32}");
  CHECK(t.dispatch("s", {Type::device_array(Type::float32(),
                                            AddressSpace::kGlobal)})
            ->constraints[0]
            .str() == "Array{Float32}");
  CHECK(t.dispatch("s", {Type::int64()})->constraints[0].str() == "Int64");
}

TEST_CASE("definition errors") {
  MethodTable t;
  CHECK_THROWS_AS(t.load_source("function f(x, x) return x end"), Error);
  CHECK_THROWS_AS(t.load_source("function f(x: Array{Int64, Int32}) end"),
                  Error);
  CHECK_THROWS_AS(t.load_source("function f(x: Int64{Int32}) end"), Error);
  CHECK_THROWS_AS(t.load_source("function f(x: Widget) end"), Error);
  t.load_source("record P\n a\nend");
  CHECK_THROWS_AS(t.load_source("record P\n b\nend"), Error);
  CHECK_NOTHROW(t.load_source("record P\n a\nend"));
  CHECK_THROWS_AS(t.load_source("function P(a) return a end"), Error);
}

// Brute-force oracle: all applicable methods sharing the top score.
std::vector<size_t> best_candidates(const std::vector<MethodPtr>& methods,
                                    const std::vector<Type>& types) {
  std::vector<std::pair<std::pair<int, int>, size_t>> scored;
  for (size_t i = 0; i < methods.size(); ++i) {
    const Method& m = *methods[i];
    bool ok = m.constraints.size() == types.size();
    int count = 0;
    int exact = 0;
    for (size_t j = 0; ok && j < types.size(); ++j) {
      const ParamConstraint& c = m.constraints[j];
      switch (c.kind) {
        case ParamConstraint::Kind::kNone:
          break;
        case ParamConstraint::Kind::kScalar:
          ok = types[j].is_scalar() && types[j].scalar_kind() == c.scalar;
          ++count;
          ++exact;
          break;
        case ParamConstraint::Kind::kArray:
          ok = types[j].is_array();
          ++count;
          break;
        case ParamConstraint::Kind::kArrayOf:
          ok = types[j].is_array() && types[j].element().is_scalar() &&
               types[j].element().scalar_kind() == c.scalar;
          ++count;
          ++exact;
          break;
        default:
          ok = false;
      }
    }
    if (ok) scored.push_back({{count, exact}, i});
  }
  std::vector<size_t> best;
  std::pair<int, int> top{-1, -1};
  for (auto& [score, i] : scored) top = std::max(top, score);
  for (auto& [score, i] : scored) {
    if (score == top) best.push_back(i);
  }
  return best;
}

TEST_CASE("property: dispatch agrees with brute-force specificity oracle") {
  std::mt19937_64 rng(7);
  const char* annots[] = {"", ": Int64", ": Float64", ": Array",
                          ": Array{Int64}", ": Array{Float64}"};
  const Type types[] = {Type::int64(), Type::float64(),
                        Type::array(Type::int64()),
                        Type::array(Type::float64())};
  int ambiguous = 0;
  int resolved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    MethodTable t;
    int n = std::uniform_int_distribution<int>(1, 5)(rng);
    for (int i = 0; i < n; ++i) {
      std::string a = annots[rng() % 6];
      std::string b = annots[rng() % 6];
      t.load_source("function m(x" + a + ", y" + b + ") return 0 end");
    }
    const auto& methods = t.methods("m");
    for (Type x : types) {
      for (Type y : types) {
        auto oracle = best_candidates(methods, {x, y});
        if (oracle.empty()) {
          CHECK(t.find("m", {x, y}) == nullptr);
        } else if (oracle.size() == 1) {
          CHECK(t.find("m", {x, y}) == methods[oracle[0]]);
          ++resolved;
        } else {
          try {
            t.find("m", {x, y});
            FAIL("expected ambiguity");
          } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::kAmbiguity);
          }
          ++ambiguous;
        }
        // Determinism: a second lookup answers the same.
        if (oracle.size() == 1) CHECK(t.find("m", {x, y}) == t.find("m", {x, y}));
      }
    }
  }
  CHECK(ambiguous > 0);
  CHECK(resolved > 0);
}

TEST_CASE("property: ages strictly increase over random define sequences") {
  std::mt19937_64 rng(11);
  MethodTable t;
  uint64_t last = 0;
  const char* names[] = {"a", "b", "c"};
  for (int i = 0; i < 100; ++i) {
    std::string src = std::string("function ") + names[rng() % 3] + "(x" +
                      (rng() % 2 ? ": Int64" : "") + ") return x end";
    auto m = t.load_source(src)[0];
    CHECK(m->age > last);
    last = m->age;
    CHECK(t.world_age() >= m->age);
  }
}

}  // namespace
}  // namespace kf
