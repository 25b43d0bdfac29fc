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
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "doctest.h"
#include "kf/device/target.hpp"
#include "kf/lir/builder.hpp"

namespace kf::device {
namespace {

using lir::Op;

constexpr const char* kVadd = R"(
function vadd(a, b, c)
  i = (blockIdx().x - 1) * blockDim().x + threadIdx().x
  c[i] = a[i] + b[i]
  return
end
)";

Type f32_array() {
  return Type::device_array(Type::float32(), AddressSpace::kGlobal);
}

size_t count_intrinsic(const lir::Module& m, std::string_view name) {
  size_t n = 0;
  for (const auto& f : m.functions) {
    for (const auto& b : f.blocks) {
      for (const auto& in : b.instrs) {
        n += in.op == Op::kIntrinsic && in.callee == name;
      }
    }
  }
  return n;
}

size_t count_mem(const lir::Module& m, AddressSpace s) {
  size_t n = 0;
  for (const auto& f : m.functions) {
    for (const auto& b : f.blocks) {
      for (const auto& in : b.instrs) {
        n += (in.op == Op::kLoad || in.op == Op::kStore) && in.space == s;
      }
    }
  }
  return n;
}

TEST_CASE("vadd compiles to a single kernel with no generic memory ops") {
  MethodTable table;
  table.load_source(kVadd);
  CompiledKernel k = compile_kernel(table, "vadd",
                                    {f32_array(), f32_array(), f32_array()});
  CHECK(k.module.functions.size() == 1);
  CHECK(k.entry().has(lir::kAttrKernel));
  CHECK(k.stats.generic_memory_ops == 0);
  CHECK(k.stats.calls == 0);
  CHECK(count_mem(k.module, AddressSpace::kGlobal) == 3);
  CHECK(count_mem(k.module, AddressSpace::kParam) == 6);
  CHECK(count_intrinsic(k.module, "thread_idx_x") == 1);
  CHECK(count_intrinsic(k.module, "thread_idx_y") == 0);
  CHECK(validate_device(k.module).empty());
  REQUIRE(k.params.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(k.params[i].kind == ParamSlot::Kind::kByValue);
    CHECK(k.params[i].offset == 16 * i);
  }
  CHECK(k.param_bytes == 48);
  // Kernel compilation is counted and records its dependencies.
  bool saw_vadd = false;
  for (const auto& d : k.deps) saw_vadd = saw_vadd || d.name == "threadIdx";
  CHECK(saw_vadd);
}

TEST_CASE("device allocation is refused") {
  MethodTable table;
  table.load_source(R"(
function k(a)
  t = zeros(Float32, 10)
  a[1] = t[1]
end
)");
  try {
    compile_kernel(table, "k", {f32_array()});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCodegen);
    CHECK(e.message().find("device allocation forbidden") != std::string::npos);
    CHECK(e.span().line == 3);
  }
}

TEST_CASE("unstable kernels fail with an instability diagnostic") {
  MethodTable table;
  table.load_source(R"(
function k(a, x)
  if x > 0
    v = 1
  else
    v = 1.5
  end
  a[1] = v
end
)");
  try {
    compile_kernel(table, "k", {f32_array(), Type::int64()});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInstability);
    CHECK(e.message().find("variable v") != std::string::npos);
  }
}

TEST_CASE("recursive kernels are unsupported") {
  MethodTable table;
  table.load_source(R"(
function f(n)
  if n <= 1
    return 1
  end
  return n * f(n - 1)
end
function k(a, n)
  a[1] = f(n)
end
)");
  Type arr = Type::device_array(Type::int64(), AddressSpace::kGlobal);
  CHECK_THROWS_AS(compile_kernel(table, "k", {arr, Type::int64()}), Error);
}

TEST_CASE("host arrays are not device-representable") {
  MethodTable table;
  table.load_source(kVadd);
  Type host = Type::array(Type::float32());
  try {
    compile_kernel(table, "vadd", {host, host, host});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnsupported);
  }
}

TEST_CASE("generic abs and sqrt resolve to width-specific intrinsics") {
  struct Case {
    Type elem;
    const char* fn;
    const char* intrinsic;
  };
  const Case cases[] = {
      {Type::int32(), "abs", "abs_i32"},    {Type::int64(), "abs", "abs_i64"},
      {Type::float32(), "abs", "fabs_f32"}, {Type::float64(), "abs", "fabs_f64"},
      {Type::float32(), "sqrt", "sqrt_f32"}, {Type::float64(), "sqrt", "sqrt_f64"},
  };
  for (const Case& c : cases) {
    CAPTURE(c.intrinsic);
    MethodTable table;
    table.load_source(fmt::format(
        "function k(a)\n  a[1] = {}(a[2])\nend\n", c.fn));
    Type arr = Type::device_array(c.elem, AddressSpace::kGlobal);
    CompiledKernel k = compile_kernel(table, "k", {arr});
    CHECK(count_intrinsic(k.module, c.intrinsic) == 1);
    CHECK(k.stats.calls == 0);
    CHECK(lir::count_ops(k.entry(), Op::kCallRuntime) == 0);
  }
}

TEST_CASE("abs over Bool has no method") {
  MethodTable table;
  table.load_source("function k(a, x)\n  a[1] = abs(x)\nend\n");
  Type arr = Type::device_array(Type::boolean(), AddressSpace::kGlobal);
  try {
    compile_kernel(table, "k", {arr, Type::boolean()});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNoMethod);
  }
}

Value reference_call(const MethodTable& table, std::string_view fn,
                     const std::vector<Value>& args) {
  DeviceTarget target;
  return interpret_reference(table, fn, args, target.reference_options({}));
}

TEST_CASE("device stdlib values") {
  MethodTable table;
  table.load_source(
      "function a(x) return abs(x) end\n"
      "function s(x) return sqrt(x) end\n"
      "function p(x, y) return pow(x, y) end\n"
      "function q(x) return x^3 end\n");
  CHECK(reference_call(table, "a", {Value::of_i64(-3)}).as_i64() == 3);
  Value z = reference_call(table, "a", {Value::of_f64(-0.0)});
  CHECK(z.bits == 0);
  Value r = reference_call(table, "s", {Value::of_f32(2.0f)});
  CHECK(r.type == Type::float32());
  float oracle = std::sqrt(2.0f);
  float got = scalar::to_f32(r.bits);
  CHECK(std::fabs(got - oracle) <= std::nextafter(oracle, 2.0f) - oracle);
  CHECK(std::isnan(
      scalar::to_f64(ScalarKind::kFloat64,
                     reference_call(table, "s", {Value::of_f64(-1.0)}).bits)));
  Value pw = reference_call(table, "p", {Value::of_i32(2), Value::of_f64(0.5)});
  CHECK(pw.type == Type::float64());
  CHECK(pw.as_f64() == std::pow(2.0, 0.5));
  Value cube = reference_call(table, "q", {Value::of_i64(-4)});
  CHECK(cube.type == Type::int64());
  CHECK(cube.as_i64() == -64);
  Value cube32 = reference_call(table, "q", {Value::of_i32(3)});
  CHECK(cube32.type == Type::int64());  // the literal 3 is an Int64
  CHECK(cube32.as_i64() == 27);
}

TEST_CASE("every pow operand combination compiles without calls") {
  const Type kinds[] = {Type::int32(), Type::int64(), Type::float32(),
                        Type::float64()};
  for (Type a : kinds) {
    for (Type b : kinds) {
      CAPTURE(a.str());
      CAPTURE(b.str());
      MethodTable table;
      table.load_source("function k(out, x, y)\n  out[1] = pow(x, y)\nend\n");
      Type r = Type::scalar(*scalar::promote(a.scalar_kind(), b.scalar_kind()));
      CompiledKernel k = compile_kernel(
          table, "k", {Type::device_array(r, AddressSpace::kGlobal), a, b});
      CHECK(k.stats.calls == 0);
      if (r.is_float()) {
        CHECK(count_intrinsic(k.module, r == Type::float32() ? "pow_f32"
                                                             : "pow_f64") == 1);
      }
    }
  }
}

TEST_CASE("math intrinsics match the host scalar semantics") {
  auto f32 = [](float v) { return scalar::from_f32(v); };
  CHECK(*eval_math_intrinsic("fabs_f32", {f32(-1.5f)}) == f32(1.5f));
  CHECK(*eval_math_intrinsic("abs_i32", {scalar::from_i64(ScalarKind::kInt32, -7)}) ==
        7u);
  CHECK(*eval_math_intrinsic("pow_f32", {f32(2.0f), f32(10.0f)}) == f32(1024.0f));
  CHECK(!eval_math_intrinsic("barrier", {}));
}

TEST_CASE("records pass by value; without the rewrite they pass by reference") {
  const char* src = R"(
record Scale
  factor
  offset
end
function scaled(s, a)
  i = threadIdx().x
  a[i] = a[i] * s.factor + s.offset
end
)";
  MethodTable table;
  table.load_source(src);
  Type scale = instantiate_record(table.records().find("Scale"),
                                  {Type::float32(), Type::float32()});
  CompiledKernel k = compile_kernel(table, "scaled", {scale, f32_array()});
  REQUIRE(k.params.size() == 2);
  CHECK(k.params[0].kind == ParamSlot::Kind::kByValue);
  CHECK(k.params[0].size == 8);
  CHECK(k.params[1].offset == 8);
  CHECK(k.param_bytes == 24);
  CHECK(count_mem(k.module, AddressSpace::kParam) == 4);
  CHECK(k.stats.calls == 0);

  DeviceTargetConfig cfg;
  cfg.rewrite_abi = false;
  CompiledKernel plain = compile_kernel(table, "scaled", {scale, f32_array()}, cfg);
  REQUIRE(plain.params.size() == 2);
  CHECK(plain.params[0].kind == ParamSlot::Kind::kByReference);
  CHECK(plain.params[1].kind == ParamSlot::Kind::kByReference);
  CHECK(plain.param_bytes == 16);
  CHECK(count_mem(plain.module, AddressSpace::kParam) == 0);
}

TEST_CASE("without address-space inference memory ops stay generic") {
  MethodTable table;
  table.load_source(kVadd);
  DeviceTargetConfig cfg;
  cfg.infer_address_spaces = false;
  CompiledKernel k = compile_kernel(
      table, "vadd", {f32_array(), f32_array(), f32_array()}, cfg);
  CHECK(k.stats.generic_memory_ops == 3);
  CHECK(count_mem(k.module, AddressSpace::kParam) == 6);
}

TEST_CASE("shared arrays are placed statically") {
  MethodTable table;
  table.load_source(R"(
function k(a)
  t = shared_array(Float32, 64)
  u = shared_array(Int64(0), 3)
  i = threadIdx().x
  t[i] = a[i]
  u[1] = 5
  sync_threads()
  a[i] = t[65 - i] + Float32(u[1])
end
)");
  CompiledKernel k = compile_kernel(table, "k", {f32_array()});
  CHECK(k.shared_bytes == 256 + 24);
  CHECK(count_intrinsic(k.module, "shared_alloc") == 0);
  CHECK(count_intrinsic(k.module, "barrier") == 1);
  CHECK(count_mem(k.module, AddressSpace::kShared) == 4);
  CHECK(k.stats.generic_memory_ops == 0);
  std::string text = lir::print(k.module);
  CHECK(text.find("ptr.shared = const 0x100") != std::string::npos);

  DeviceTargetConfig small;
  small.max_shared_bytes = 128;
  CHECK_THROWS_AS(compile_kernel(table, "k", {f32_array()}, small), Error);
}

TEST_CASE("shared array sizes must be constant") {
  MethodTable table;
  table.load_source(R"(
function k(a, n)
  t = shared_array(Float32, n)
  a[1] = t[1]
end
)");
  try {
    compile_kernel(table, "k", {f32_array(), Type::int64()});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.message().find("compile-time constant") != std::string::npos);
  }
}

TEST_CASE("shfl_down decomposes into 32-bit words") {
  const char* src = R"(
record Point
  x
  y
end
function k(a, p)
  q = shfl_down(p, 1)
  a[1] = q.x + q.y
  b = shfl_down(a[2], 16)
  a[2] = b
end
)";
  MethodTable table;
  table.load_source(src);
  Type point = instantiate_record(table.records().find("Point"),
                                  {Type::int64(), Type::int64()});
  Type arr = Type::device_array(Type::int64(), AddressSpace::kGlobal);
  CompiledKernel k = compile_kernel(table, "k", {arr, point});
  CHECK(count_intrinsic(k.module, "shfl_down_u32") == 4 + 2);
  CHECK(k.stats.generic_memory_ops == 0);

  // Word count follows the value size: 12 bytes need 3 words.
  MethodTable t2;
  t2.load_source(src);
  Type p3 = instantiate_record(t2.records().find("Point"),
                               {Type::int32(), Type::int64()});
  CompiledKernel k3 = compile_kernel(t2, "k", {arr, p3});
  CHECK(count_intrinsic(k3.module, "shfl_down_u32") == 3 + 2);
}

TEST_CASE("atomic_add lowers to a global-space intrinsic") {
  MethodTable table;
  table.load_source("function k(a, v)\n  atomic_add(a, 2, v)\nend\n");
  for (Type elem : {Type::int32(), Type::int64()}) {
    Type arr = Type::device_array(elem, AddressSpace::kGlobal);
    CompiledKernel k = compile_kernel(table, "k", {arr, elem});
    CHECK(count_intrinsic(k.module, elem == Type::int32() ? "atomic_add_i32"
                                                          : "atomic_add_i64") == 1);
    CHECK(k.stats.generic_memory_ops == 0);
  }
  Type f = Type::device_array(Type::float32(), AddressSpace::kGlobal);
  CHECK_THROWS_AS(compile_kernel(table, "k", {f, Type::float32()}), Error);
}

TEST_CASE("validate_device reports forced violations") {
  lir::Module m;
  m.functions.push_back(
      lir::new_function("k", {}, lir::LirType::void_(), lir::kAttrKernel));
  m.entry = "k";
  lir::IrBuilder b(m.functions[0]);
  b.set_span({2, 3});
  b.call_runtime("print", lir::LirType::void_(), {});
  b.set_span({3, 1});
  b.call_runtime("kf_alloc", lir::LirType::ptr(),
                 {b.const_int(lir::LirType::i64(), 8)});
  b.intrinsic("shfl_down_u32", lir::LirType::i32(),
              {b.const_int(lir::LirType::i64(), 1),
               b.const_int(lir::LirType::i32(), 1)});
  b.intrinsic("frobnicate", lir::LirType::void_(), {});
  b.ret();
  auto v = validate_device(m);
  REQUIRE(v.size() == 4);
  CHECK(v[0].message == "host runtime call @print");
  CHECK(v[0].span == SourceSpan{2, 3});
  CHECK(v[1].message == "dynamic allocation @kf_alloc");
  CHECK(v[2].message.find("shuffle") != std::string::npos);
  CHECK(v[3].message == "unknown intrinsic @frobnicate");
}

TEST_CASE("reference grid runs every thread") {
  MethodTable table;
  table.load_source(kVadd);
  std::vector<float> a(100), b(100);
  for (int i = 0; i < 100; ++i) {
    a[i] = 0.5f * i;
    b[i] = 1.0f / (i + 1);
  }
  Value va = array_from(a), vb = array_from(b);
  Value vc = Value::new_array(Type::float32(), 100);
  DeviceTarget target;
  run_reference_grid(table, "vadd", {va, vb, vc}, {4, 1, 1}, {25, 1, 1},
                     target);
  auto c = array_to<float>(vc);
  for (int i = 0; i < 100; ++i) CHECK(c[i] == a[i] + b[i]);
}

TEST_CASE("host compilation is unaffected by the device package") {
  const char* host_suite = R"(
function sum(a)
  t = 0.0
  i = 1
  while i <= length(a)
    t = t + abs(a[i])
    i = i + 1
  end
  return t
end
function norm(x, y)
  return sqrt(x * x + y * y) + pow(x, 2)
end
)";
  auto host_dump = [&](MethodTable& table) {
    hir::Specializer spec(table);
    std::string out;
    auto add = [&](const char* name, std::vector<Type> types) {
      lir::Module m = lir::lower_hir(*spec.specialize(name, types));
      lir::run_passes(m, lir::default_pipeline());
      out += lir::print(m);
    };
    add("sum", {Type::array(Type::float64())});
    add("norm", {Type::float64(), Type::float64()});
    return out;
  };
  MethodTable before;
  before.load_source(host_suite);
  std::string baseline = host_dump(before);

  MethodTable shared;
  shared.load_source(host_suite);
  shared.load_source(kVadd);
  DeviceTarget target;
  compile_kernel(shared, "vadd", {f32_array(), f32_array(), f32_array()}, target);
  CHECK(host_dump(shared) == baseline);
  CHECK(baseline.find("call.rt @kf_abs_f64") != std::string::npos);
}

// The device package may only use the published extension interfaces.
TEST_CASE("device sources depend only on published interfaces") {
  namespace fs = std::filesystem;
  const std::set<std::string> allowed = {
      "kf/device/intrinsics.hpp", "kf/device/target.hpp",
      "kf/frontend/interpreter.hpp", "kf/frontend/method_table.hpp",
      "kf/frontend/parser.hpp", "kf/frontend/scalar_ops.hpp",
      "kf/frontend/types.hpp", "kf/frontend/value.hpp",
      "kf/hir/inference.hpp", "kf/lir/builder.hpp", "kf/lir/codegen.hpp",
      "kf/lir/lir.hpp", "kf/lir/passes.hpp", "kf/support/instrumentation.hpp",
      "kf/support/error.hpp"};
  const fs::path root = KF_SOURCE_DIR;
  std::regex include_re("#include \"([^\"]+)\"");
  size_t files = 0;
  for (const fs::path& dir : {root / "src/device", root / "include/kf/device"}) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      ++files;
      std::ifstream in(entry.path());
      std::stringstream ss;
      ss << in.rdbuf();
      std::string text = ss.str();
      for (std::sregex_iterator it(text.begin(), text.end(), include_re), end;
           it != end; ++it) {
        CAPTURE(entry.path().string());
        CHECK(allowed.count((*it)[1].str()) == 1);
      }
    }
  }
  CHECK(files >= 5);
  // And nothing in the core pipeline knows about the device package.
  for (const char* sub : {"src/frontend", "src/hir", "src/lir",
                          "include/kf/frontend", "include/kf/hir",
                          "include/kf/lir"}) {
    for (const auto& entry : fs::directory_iterator(root / sub)) {
      std::ifstream in(entry.path());
      std::stringstream ss;
      ss << in.rdbuf();
      CAPTURE(entry.path().string());
      CHECK(ss.str().find("kf/device/") == std::string::npos);
    }
  }
}

}  // namespace
}  // namespace kf::device
