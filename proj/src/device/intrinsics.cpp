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

#include "kf/device/intrinsics.hpp"

#include "kf/frontend/scalar_ops.hpp"

namespace kf::device {
namespace {

using lir::LirType;

std::vector<IntrinsicInfo> build_table() {
  std::vector<IntrinsicInfo> t;
  for (std::string_view n :
       {"thread_idx_x", "thread_idx_y", "thread_idx_z", "block_idx_x",
        "block_idx_y", "block_idx_z", "block_dim_x", "block_dim_y",
        "block_dim_z", "grid_dim_x", "grid_dim_y", "grid_dim_z"}) {
    t.push_back({n, {}, LirType::i32(), true});
  }
  t.push_back({"warpsize", {}, LirType::i64(), true});
  t.push_back({"barrier", {}, LirType::void_(), false});
  t.push_back({"shfl_down_u32", {LirType::i32(), LirType::i32()},
               LirType::i32(), false});
  // imm carries the byte offset inside the block's shared window.
  t.push_back({"shared_alloc", {}, LirType::ptr(AddressSpace::kShared), true,
               false});
  t.push_back({"atomic_add_i32", {LirType::ptr(AddressSpace::kGlobal), LirType::i32()},
               LirType::i32(), false, false});
  t.push_back({"atomic_add_i64", {LirType::ptr(AddressSpace::kGlobal), LirType::i64()},
               LirType::i64(), false, false});
  t.push_back({"abs_i32", {LirType::i32()}, LirType::i32(), true});
  t.push_back({"abs_i64", {LirType::i64()}, LirType::i64(), true});
  t.push_back({"fabs_f32", {LirType::f32()}, LirType::f32(), true});
  t.push_back({"fabs_f64", {LirType::f64()}, LirType::f64(), true});
  t.push_back({"sqrt_f32", {LirType::f32()}, LirType::f32(), true});
  t.push_back({"sqrt_f64", {LirType::f64()}, LirType::f64(), true});
  t.push_back({"pow_f32", {LirType::f32(), LirType::f32()}, LirType::f32(),
               true});
  t.push_back({"pow_f64", {LirType::f64(), LirType::f64()}, LirType::f64(),
               true});
  return t;
}

std::optional<Type> source_type(LirType t) {
  switch (t.kind) {
    case lir::LirKind::kVoid: return Type::nothing();
    case lir::LirKind::kI1: return Type::boolean();
    case lir::LirKind::kI32: return Type::int32();
    case lir::LirKind::kI64: return Type::int64();
    case lir::LirKind::kF32: return Type::float32();
    case lir::LirKind::kF64: return Type::float64();
    case lir::LirKind::kPtr: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

const std::vector<IntrinsicInfo>& intrinsics() {
  static const std::vector<IntrinsicInfo> kTable = build_table();
  return kTable;
}

const IntrinsicInfo* find_intrinsic(std::string_view name) {
  for (const IntrinsicInfo& i : intrinsics()) {
    if (i.name == name) return &i;
  }
  return nullptr;
}

std::optional<Type> intrinsic_source_type(std::string_view name,
                                          const std::vector<Type>& args) {
  const IntrinsicInfo* info = find_intrinsic(name);
  if (!info || !info->source_visible || args.size() != info->params.size()) {
    return std::nullopt;
  }
  for (size_t i = 0; i < args.size(); ++i) {
    auto want = source_type(info->params[i]);
    if (!want || *want != args[i]) return std::nullopt;
  }
  return source_type(info->result);
}

std::optional<uint64_t> eval_math_intrinsic(std::string_view name,
                                            const std::vector<uint64_t>& args) {
  using scalar::MathOp;
  struct Entry {
    std::string_view name;
    MathOp op;
    ScalarKind kind;
  };
  static constexpr Entry kMath[] = {
      {"abs_i32", MathOp::kAbs, ScalarKind::kInt32},
      {"abs_i64", MathOp::kAbs, ScalarKind::kInt64},
      {"fabs_f32", MathOp::kAbs, ScalarKind::kFloat32},
      {"fabs_f64", MathOp::kAbs, ScalarKind::kFloat64},
      {"sqrt_f32", MathOp::kSqrt, ScalarKind::kFloat32},
      {"sqrt_f64", MathOp::kSqrt, ScalarKind::kFloat64},
      {"pow_f32", MathOp::kPow, ScalarKind::kFloat32},
      {"pow_f64", MathOp::kPow, ScalarKind::kFloat64},
  };
  for (const Entry& e : kMath) {
    if (e.name != name) continue;
    return scalar::math(e.op, e.kind, args.at(0),
                        args.size() > 1 ? args[1] : 0);
  }
  return std::nullopt;
}

}  // namespace kf::device
