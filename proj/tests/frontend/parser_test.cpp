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
#include "kf/frontend/parser.hpp"

namespace kf {
namespace {

TEST_CASE("parse polynomial definition") {
  ast::Program p = parse("function f(x) return 3*x^2 + 5*x + 2 end");
  REQUIRE(p.functions().size() == 1);
  const auto& f = *p.functions()[0];
  CHECK(f.name == "f");
  REQUIRE(f.params.size() == 1);
  CHECK(f.params[0].name == "x");
  REQUIRE(f.body.size() == 1);
  CHECK(f.body[0].kind == ast::StmtKind::kReturn);
  CHECK(ast::dump_sexpr(*f.body[0].value) ==
        "(+ (+ (* (int 3) (^ x (int 2))) (* (int 5) x)) (int 2))");
}

TEST_CASE("empty program") {
  ast::Program p = parse("");
  CHECK(p.items.empty());
  CHECK(parse("\n  # only a comment\n\n").items.empty());
}

TEST_CASE("unterminated parameter list reports end of input") {
  try {
    parse("function f(x");
    FAIL("expected a syntax error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSyntax);
    CHECK(e.span().line == 1);
    CHECK(e.span().column == 13);
    CHECK(e.message().find("end of input") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry line and column") {
  auto span_of = [](std::string_view src) {
    try {
      parse(src);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kSyntax);
      return e.span();
    }
    FAIL("expected a syntax error");
    return SourceSpan{};
  };
  CHECK(span_of("function f()\n  x = (1 + \nend") == SourceSpan{3, 1});
  CHECK(span_of("function f()\n  return 1 < 2 < 3\nend") == SourceSpan{2, 16});
  CHECK(span_of("function f()\n  x = 1 $ 2\nend") == SourceSpan{2, 9});
  CHECK(span_of("function f()\n  if x\n    y = 1\n") == SourceSpan{4, 1});
  CHECK(span_of("x = 1") == SourceSpan{1, 1});
  CHECK(span_of("function f() 1 = 2 end") == SourceSpan{1, 14});
}

TEST_CASE("literals") {
  auto e = parse_expression("2.0f0");
  CHECK(e->kind == ast::ExprKind::kFloatLit);
  CHECK(e->literal_kind == ScalarKind::kFloat32);
  CHECK(e->float_value == 2.0);
  e = parse_expression("1.5f2");
  CHECK(e->literal_kind == ScalarKind::kFloat32);
  CHECK(e->float_value == 150.0);
  e = parse_expression("1e-3");
  CHECK(e->literal_kind == ScalarKind::kFloat64);
  CHECK(e->float_value == 1e-3);
  e = parse_expression("42");
  CHECK(e->kind == ast::ExprKind::kIntLit);
  CHECK(e->int_value == 42);
  CHECK_THROWS_AS(parse_expression("99999999999999999999"), Error);
  CHECK_THROWS_AS(parse_expression("12abc"), Error);
}

TEST_CASE("precedence and associativity") {
  auto dump = [](std::string_view s) {
    return ast::dump_sexpr(*parse_expression(s));
  };
  CHECK(dump("a - b - c") == "(- (- a b) c)");
  CHECK(dump("a ^ b ^ c") == "(^ a (^ b c))");
  CHECK(dump("-a ^ 2") == "(- (^ a (int 2)))");
  CHECK(dump("a || b && c") == "(|| a (&& b c))");
  CHECK(dump("a + b < c * d") == "(< (+ a b) (* c d))");
  CHECK(dump("!p.q[i + 1]") == "(! (index (field p q) (+ i (int 1))))");
  CHECK(dump("2 .* x .+ y") == "(.+ (.* (int 2) x) y)");
  CHECK(dump("f.(x, 1)") == "(dotcall f x (int 1))");
  CHECK(dump("x.^2") == "(.^ x (int 2))");
  CHECK(dump("threadIdx().x") == "(field (call threadIdx) x)");
}

TEST_CASE("statements, records and operator methods") {
  ast::Program p = parse(R"(
record Point
  x
  y
end
mutable record Counter
  n: Int64
end
function +(a: Point, b: Point)
  return Point(a.x + b.x, a.y + b.y)
end
function loop(a: Array{Float32}, n)
  i = 1; s = 0.0f0
  while i <= n
    if i % 2 == 0
      s = s + a[i]
    elseif i == 3
      a[i] = 1.0f0
    else
      return
    end
    i = i + 1
  end
  return s
end
)");
  REQUIRE(p.records().size() == 2);
  CHECK(p.records()[1]->is_mutable);
  CHECK(p.records()[1]->field_types[0]->name == "Int64");
  REQUIRE(p.functions().size() == 2);
  CHECK(p.functions()[0]->name == "+");
  CHECK(p.functions()[1]->params[0].type->str() == "Array{Float32}");
  const auto& body = p.functions()[1]->body;
  REQUIRE(body.size() == 4);
  const ast::Stmt& loop = body[2];
  REQUIRE(loop.kind == ast::StmtKind::kWhile);
  const ast::Stmt& branch = loop.body[0];
  REQUIRE(branch.else_body.size() == 1);
  CHECK(branch.else_body[0].kind == ast::StmtKind::kIf);
  CHECK(branch.else_body[0].else_body[0].kind == ast::StmtKind::kReturn);
  CHECK(!branch.else_body[0].else_body[0].value);
}

// Random expression trees for the print/parse round trip.
class ExprGen {
 public:
  explicit ExprGen(uint64_t seed) : rng_(seed) {}

  std::string gen(int depth) {
    int pick = depth <= 0 ? pick_in(0, 3) : pick_in(0, 11);
    switch (pick) {
      case 0:
        return std::to_string(pick_in(0, 1000));
      case 1: {
        static const char* kFloats[] = {"0.5", "2.0f0", "1.25e-7", "3.0",
                                        "1.0e20", "7.5f-3"};
        return kFloats[pick_in(0, 5)];
      }
      case 2:
        return pick_in(0, 1) ? "true" : "nothing";
      case 3:
        return std::string(1, static_cast<char>('a' + pick_in(0, 4)));
      case 4:
      case 5: {
        static const char* kOps[] = {"+",  "-",  "*",  "/",  "%", "^",
                                     "==", "!=", "<",  "<=", ">", ">=",
                                     "&&", "||", ".+", ".*", ".^"};
        return "(" + gen(depth - 1) + " " + kOps[pick_in(0, 16)] + " " +
               gen(depth - 1) + ")";
      }
      case 6:
        return std::string(pick_in(0, 1) ? "-" : "!") + gen(depth - 1);
      case 7: {
        std::string out = "g(";
        int n = pick_in(0, 3);
        for (int i = 0; i < n; ++i) out += (i ? ", " : "") + gen(depth - 1);
        return out + ")";
      }
      case 8:
        return "h.(" + gen(depth - 1) + ", " + gen(depth - 1) + ")";
      case 9:
        return "a[" + gen(depth - 1) + "]";
      case 10:
        return "(" + gen(depth - 1) + ").fld";
      default:
        return "(" + gen(depth - 1) + ")";
    }
  }

 private:
  int pick_in(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  std::mt19937_64 rng_;
};

TEST_CASE("property: printed expressions reparse to identical trees") {
  ExprGen gen(20261018);
  for (int i = 0; i < 500; ++i) {
    std::string src = gen.gen(5);
    ast::ExprPtr first;
    try {
      first = parse_expression(src);
    } catch (const Error&) {
      continue;  // e.g. chained comparisons produced by the generator
    }
    std::string printed = ast::to_source(*first);
    ast::ExprPtr second = parse_expression(printed);
    INFO(src, " => ", printed);
    CHECK(ast::dump_sexpr(*first) == ast::dump_sexpr(*second));
    CHECK(ast::dump_sexpr(*first) == ast::dump_sexpr(*first->clone()));
  }
}

TEST_CASE("property: printed programs reparse to identical trees") {
  const char* sources[] = {
      "function f(x) return 3*x^2 + 5*x + 2 end",
      R"(
record Rect
  x1
  y1
end
mutable record Box
  v: Float64
end
function -(a: Rect)
  return Rect(-a.x1, -a.y1)
end
function k(a: Array{Float32}, b: Array, n: Int64)
  i = 1
  while i <= n && !(i > 10)
    if a[i] > 0.0f0
      b[i] = a[i]
    elseif a[i] < 0.0f0
      b[i] = -a[i]
    else
      throw(3)
    end
    i = i + 1
  end
  return
end
)",
      "function e() return end",
  };
  for (const char* src : sources) {
    ast::Program first = parse(src);
    ast::Program second = parse(ast::to_source(first));
    CHECK(ast::dump_sexpr(first) == ast::dump_sexpr(second));
  }
}

}  // namespace
}  // namespace kf
