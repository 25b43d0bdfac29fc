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
#include "lir/lir_helpers.hpp"

namespace kf::lir {
namespace {

using testing::compile;
using testing::count_in;

constexpr const char* kVadd = R"(
function vadd(a, b, c, i)
  c[i] = a[i] + b[i]
end
)";

TEST_CASE("vadd under the trap policy guards indexing with traps") {
  MethodTable table;
  CodegenParams params;
  params.exception_policy = ExceptionPolicy::kTrap;
  Type arr = testing::f32_global_array();
  Module m = compile(table, kVadd, "vadd", {arr, arr, arr, Type::int64()},
                     params);
  REQUIRE(m.functions.size() == 1);
  const Function& fn = m.entry_function();
  CHECK(count_in(m, Op::kTrap) == 3);
  CHECK(count_in(m, Op::kCallRuntime) == 0);
  CHECK(count_in(m, Op::kStore) == 1);
  // Two element loads plus base and length of three descriptors.
  CHECK(count_in(m, Op::kLoad) == 8);
  std::string text = print(fn);
  CHECK(text.find("trap %v") != std::string::npos);
  CHECK(text.find("load.generic") != std::string::npos);
  CHECK(text.find("= add ") != std::string::npos);
}

TEST_CASE("the runtime-call policy calls host error routines") {
  MethodTable table;
  Type arr = Type::array(Type::float64());
  Module m = compile(table, kVadd, "vadd", {arr, arr, arr, Type::int64()});
  CHECK(count_in(m, Op::kTrap) == 0);
  CHECK(count_in(m, Op::kCallRuntime) == 3);
  CHECK(print(m).find("call.rt @kf_bounds_error") != std::string::npos);
}

TEST_CASE("bounds checks can be disabled") {
  MethodTable table;
  CodegenParams params;
  params.emit_bounds_checks = false;
  Type arr = Type::array(Type::float64());
  Module m = compile(table, kVadd, "vadd", {arr, arr, arr, Type::int64()},
                     params);
  CHECK(count_in(m, Op::kCallRuntime) == 0);
  CHECK(m.entry_function().blocks.size() == 1);
}

TEST_CASE("throw under the forbid policy is a compile error at the throw") {
  MethodTable table;
  CodegenParams params;
  params.exception_policy = ExceptionPolicy::kForbid;
  try {
    compile(table, "function k(x)\n  if x > 0\n    throw(7)\n  end\nend\n", "k",
            {Type::int64()}, params);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCodegen);
    CHECK(e.span() == SourceSpan{3, 5});
    CHECK(e.message().find("forbidden") != std::string::npos);
  }
}

TEST_CASE("throw lowers per policy") {
  const char* src = "function k(x)\n  throw(7)\nend\n";
  MethodTable t1;
  CodegenParams trap;
  trap.exception_policy = ExceptionPolicy::kTrap;
  Module m1 = compile(t1, src, "k", {Type::int64()}, trap);
  CHECK(count_in(m1, Op::kTrap) == 1);
  MethodTable t2;
  Module m2 = compile(t2, src, "k", {Type::int64()});
  CHECK(print(m2).find("call.rt @kf_throw") != std::string::npos);
  CHECK(count_in(m2, Op::kUnreachable) == 1);
}

TEST_CASE("empty kernel lowers to one block with a return") {
  MethodTable table;
  Module m = compile(table, "function k() return end", "k", {});
  const Function& fn = m.entry_function();
  REQUIRE(fn.blocks.size() == 1);
  REQUIRE(fn.blocks[0].instrs.size() == 1);
  CHECK(fn.blocks[0].instrs[0].op == Op::kRet);
  CHECK(print(fn) == "define @k() -> void {\nbb0:  ; entry\n  ret\n}\n");
}

TEST_CASE("allocation follows the allocation policy and hooks") {
  const char* src = "function k(n)\n  a = zeros(Float64, n)\n  return a\nend\n";
  MethodTable t1;
  Module m = compile(t1, src, "k", {Type::int64()});
  CHECK(print(m).find("call.rt @kf_alloc_array") != std::string::npos);

  MethodTable t2;
  CodegenParams forbid;
  forbid.allocation_policy = AllocationPolicy::kForbid;
  CHECK_THROWS_AS(compile(t2, src, "k", {Type::int64()}, forbid), Error);

  MethodTable t3;
  t3.load_source(src);
  hir::Specializer spec(t3);
  CodegenHooks hooks;
  int seen = 0;
  hooks.lower_alloc = [&](IrBuilder& b, Type t, const std::vector<ValueId>&,
                          SourceSpan) -> std::optional<ValueId> {
    ++seen;
    CHECK(t == Type::array(Type::float64()));
    return b.const_int(LirType::ptr(), 0);
  };
  Module m3 = lower_hir(*spec.specialize("k", {Type::int64()}), {}, hooks);
  CHECK(seen == 1);
  CHECK(count_in(m3, Op::kCallRuntime) == 0);
}

TEST_CASE("records are memory aggregates with prefix-sum offsets") {
  MethodTable table;
  table.load_source("record P\n  a\n  b\nend\n");
  Type p = instantiate_record(table.records().find("P"),
                              {Type::int32(), Type::float64()});
  auto ls = leaves(p);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0].offset == 0);
  CHECK(ls[0].type == LirType::i32());
  CHECK(ls[1].offset == 4);
  CHECK(ls[1].type == LirType::f64());
  Type d = Type::device_array(p, AddressSpace::kShared);
  auto dl = leaves(d);
  REQUIRE(dl.size() == 2);
  CHECK(dl[0].type == LirType::ptr(AddressSpace::kShared));
  CHECK(dl[1].type == LirType::i64());
  CHECK(!lir_type_of(Type::nothing()));
  CHECK(*lir_type_of(Type::dev_addr(Type::int32(), AddressSpace::kGlobal)) ==
        LirType::ptr(AddressSpace::kGlobal));
}

TEST_CASE("aggregate returns use an sret pointer") {
  MethodTable table;
  Module m = compile(table,
                     "record P\n  a\n  b\nend\n"
                     "function mk(x)\n  return P(x, x + 1)\nend\n"
                     "function use(x)\n  p = mk(x)\n  return p.b\nend\n",
                     "use", {Type::int64()});
  REQUIRE(m.functions.size() == 2);
  const Function* mk = m.find("mk_Int64");
  REQUIRE(mk);
  CHECK(mk->ret.is_void());
  CHECK(mk->params[0].name == "sret");
  CHECK(count_in(m, Op::kCall) == 1);
}

TEST_CASE("intrinsic hooks receive typed arguments") {
  MethodTable table;
  table.load_source("function k(x)\n  return twice(x)\nend\n");
  hir::InferenceHooks ih;
  ih.knows_name = [](std::string_view n) { return n == "twice"; };
  ih.resolve_intrinsic = [](std::string_view n,
                            const std::vector<Type>& t) -> std::optional<Type> {
    if (n == "twice") return t.at(0);
    return std::nullopt;
  };
  hir::Specializer spec(table, {}, ih);
  auto fn = spec.specialize("k", {Type::int32()});
  CodegenHooks hooks;
  hooks.lower_intrinsic = [](IrBuilder& b,
                             const IntrinsicCall& c) -> std::optional<ValueId> {
    CHECK(c.name == "twice");
    CHECK(c.arg_types == std::vector<Type>{Type::int32()});
    CHECK(c.result == Type::int32());
    return b.binary(Op::kAdd, c.args[0], c.args[0]);
  };
  Module m = lower_hir(*fn, {}, hooks);
  CHECK(count_in(m, Op::kIntrinsic) == 0);
  CHECK(count_in(m, Op::kAdd) == 1);
  Module plain = lower_hir(*fn);
  CHECK(print(plain).find("intrinsic @twice(%v0)") != std::string::npos);
}

TEST_CASE("the builder type-checks every instruction") {
  Function fn = new_function("f", {testing::param("x", LirType::i64())}, LirType::i64());
  IrBuilder b(fn);
  ValueId f = b.const_f64(1.0);
  CHECK_THROWS_AS(b.binary(Op::kAdd, b.param(0), f), Error);
  CHECK_THROWS_AS(b.load(LirType::i32(), b.param(0), AddressSpace::kGlobal),
                  Error);
  ValueId g = b.cast(b.alloca(8), AddressSpace::kGeneric);
  ValueId global = b.cast(g, AddressSpace::kGlobal);
  CHECK_THROWS_AS(b.cast(global, AddressSpace::kShared), Error);
  CHECK_THROWS_AS(b.ret(f), Error);
  b.ret(b.param(0));
  CHECK_THROWS_AS(b.ret(b.param(0)), Error);
  CHECK(b.const_value(f).has_value());
  CHECK(!b.const_value(b.param(0)).has_value());
}

TEST_CASE("verifier rejects malformed functions") {
  SUBCASE("use before definition") {
    Function fn = new_function("f", {}, LirType::i64());
    Instr add;
    add.op = Op::kAdd;
    add.type = LirType::i64();
    ValueId late = fn.new_value(LirType::i64());
    add.result = fn.new_value(LirType::i64());
    add.operands = {late, late};
    Instr c;
    c.op = Op::kConst;
    c.type = LirType::i64();
    c.result = late;
    Instr r;
    r.op = Op::kRet;
    r.operands = {add.result};
    fn.blocks[0].instrs = {add, c, r};
    CHECK_THROWS_AS(verify_function(fn, nullptr), Error);
  }
  SUBCASE("irreducible loop") {
    Function fn = new_function("f", {testing::param("c", LirType::i1())},
                               LirType::void_());
    IrBuilder b(fn);
    BlockId x = b.create_block();
    BlockId y = b.create_block();
    b.condbr(b.param(0), x, y);
    b.set_block(x);
    b.br(y);
    b.set_block(y);
    b.br(x);
    try {
      verify_function(fn, nullptr, "test");
      FAIL("expected irreducible");
    } catch (const Error& e) {
      CHECK(e.message().find("irreducible") != std::string::npos);
      CHECK(e.message().find("after test") != std::string::npos);
    }
  }
  SUBCASE("phi inputs must match predecessors") {
    Function fn = new_function("f", {testing::param("x", LirType::i64())},
                               LirType::i64());
    IrBuilder b(fn);
    BlockId next = b.create_block();
    b.br(next);
    b.set_block(next);
    ValueId p = b.phi(LirType::i64(), {{b.param(0), 0}, {b.param(0), 1}});
    b.ret(p);
    CHECK_THROWS_AS(verify_function(fn, nullptr), Error);
  }
  SUBCASE("kernels cannot be called") {
    Module m;
    m.functions.push_back(new_function("k", {}, LirType::void_(), kAttrKernel));
    IrBuilder kb(m.functions[0]);
    kb.ret();
    m.functions.push_back(new_function("caller", {}, LirType::void_()));
    IrBuilder cb(m.functions[1]);
    cb.call("k", LirType::void_(), {});
    cb.ret();
    m.entry = "caller";
    CHECK_THROWS_AS(verify(m), Error);
  }
}

}  // namespace
}  // namespace kf::lir
