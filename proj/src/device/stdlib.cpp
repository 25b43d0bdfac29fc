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

#include <string>

#include <fmt/format.h>

#include "kf/device/target.hpp"
#include "kf/frontend/parser.hpp"

namespace kf::device {
namespace {

constexpr const char* kGeometry = R"(
record Dim3
  x
  y
  z
end

function threadIdx()
  return Dim3(Int64(thread_idx_x()) + 1, Int64(thread_idx_y()) + 1,
              Int64(thread_idx_z()) + 1)
end

function blockIdx()
  return Dim3(Int64(block_idx_x()) + 1, Int64(block_idx_y()) + 1,
              Int64(block_idx_z()) + 1)
end

function blockDim()
  return Dim3(Int64(block_dim_x()), Int64(block_dim_y()), Int64(block_dim_z()))
end

function gridDim()
  return Dim3(Int64(grid_dim_x()), Int64(grid_dim_y()), Int64(grid_dim_z()))
end

function sync_threads()
  barrier()
  return
end

function abs(x: Int32) return abs_i32(x) end
function abs(x: Int64) return abs_i64(x) end
function abs(x: Float32) return fabs_f32(x) end
function abs(x: Float64) return fabs_f64(x) end
function sqrt(x: Float32) return sqrt_f32(x) end
function sqrt(x: Float64) return sqrt_f64(x) end
function pow(x: Float32, y: Float32) return pow_f32(x, y) end
function pow(x: Float64, y: Float64) return pow_f64(x, y) end
)";

// Integer powers have no intrinsic; they multiply like the host builtin.
constexpr const char* kIntPow = R"(
function pow(x: {0}, n: {0})
  r = {0}(1)
  k = 0
  while k < n
    r = r * x
    k = k + 1
  end
  return r
end
)";

std::string stdlib_source() {
  std::string src = kGeometry;
  for (const char* t : {"Int32", "Int64"}) {
    src += fmt::format(kIntPow, t);
  }
  // Mixed operand kinds promote, as the host builtin does.
  const ScalarKind kinds[] = {ScalarKind::kInt32, ScalarKind::kInt64,
                              ScalarKind::kFloat32, ScalarKind::kFloat64};
  for (ScalarKind a : kinds) {
    for (ScalarKind b : kinds) {
      if (a == b) continue;
      std::string_view k = scalar_name(*scalar::promote(a, b));
      src += fmt::format("function pow(x: {}, y: {}) return pow({}(x), {}(y)) end\n",
                         scalar_name(a), scalar_name(b), k, k);
    }
  }
  return src;
}

MethodTable build_stdlib() {
  MethodTable table;
  ast::Program program = parse(stdlib_source());
  for (const ast::RecordDef* r : program.records()) table.define_record(*r);
  for (const auto& f : program.functions()) table.define(f, true);
  return table;
}

}  // namespace

const MethodTable& device_stdlib() {
  static const MethodTable kStdlib = build_stdlib();
  return kStdlib;
}

}  // namespace kf::device
