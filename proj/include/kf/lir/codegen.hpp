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

#ifndef KF_LIR_CODEGEN_HPP_
#define KF_LIR_CODEGEN_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kf/hir/hir.hpp"
#include "kf/lir/builder.hpp"
#include "kf/lir/lir.hpp"

namespace kf::lir {

enum class ExceptionPolicy : uint8_t { kRuntimeCall, kTrap, kForbid };
enum class AllocationPolicy : uint8_t { kRuntimeCall, kForbid };

// Trap codes of implicit checks. Explicit throw(n) traps with n.
inline constexpr int64_t kTrapBounds = -1;
inline constexpr int64_t kTrapDivide = -2;

struct CodegenParams {
  ExceptionPolicy exception_policy = ExceptionPolicy::kRuntimeCall;
  AllocationPolicy allocation_policy = AllocationPolicy::kRuntimeCall;
  bool emit_bounds_checks = true;
};

// A call the inference hooks resolved to a target intrinsic. `args` holds
// one LIR value per source argument (kNoValue for Nothing and function
// symbols); aggregates are generic pointers to their storage.
struct IntrinsicCall {
  std::string name;
  std::vector<Type> arg_types;
  std::vector<ValueId> args;
  Type result;
  SourceSpan span;
};

struct CodegenHooks {
  // Each hook returns false / nullopt to fall back to the default lowering.
  // lower_throw may leave the block open; codegen then closes it with
  // `unreachable`.
  std::function<bool(IrBuilder&, ValueId code, SourceSpan span)> lower_throw;
  // Allocation of `type` (an Array or a mutable record). For arrays, args
  // holds the i64 length.
  std::function<std::optional<ValueId>(IrBuilder&, Type type,
                                       const std::vector<ValueId>& args,
                                       SourceSpan span)>
      lower_alloc;
  // Returns the result value (kNoValue for Nothing results) when handled.
  std::function<std::optional<ValueId>(IrBuilder&, const IntrinsicCall&)>
      lower_intrinsic;
};

// Lowers `fn` and every callee specialization it reaches. The module entry
// is `fn`; callees keep their inline-always flag from the method.
Module lower_hir(const hir::HirFunction& fn, const CodegenParams& params = {},
                 const CodegenHooks& hooks = {});

// Layout helpers shared by codegen and target hooks.
struct Leaf {
  uint64_t offset = 0;
  LirType type;
};

// LIR type of a value of `t`: scalars map to themselves, aggregates,
// arrays and mutable records to a generic pointer, DevAddr{T,S} to ptr.S.
// nullopt for types without a run-time value (Nothing, function symbols).
std::optional<LirType> lir_type_of(Type t);
bool is_memory_aggregate(Type t);  // immutable records, device arrays
// Scalar leaves of the no-padding memory layout of `t`, in offset order.
std::vector<Leaf> leaves(Type t);
// Copies an aggregate leaf by leaf between two pointers.
void emit_copy(IrBuilder& b, Type t, ValueId dst, AddressSpace dst_tag,
               ValueId src, AddressSpace src_tag);
// Fresh local storage for `t` filled with `leaf_values` (one per leaf);
// returns a generic pointer to it.
ValueId make_aggregate(IrBuilder& b, Type t,
                       const std::vector<ValueId>& leaf_values);

}  // namespace kf::lir

#endif  // KF_LIR_CODEGEN_HPP_
