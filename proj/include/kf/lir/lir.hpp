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

#ifndef KF_LIR_LIR_HPP_
#define KF_LIR_LIR_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kf/frontend/types.hpp"
#include "kf/support/error.hpp"

namespace kf::lir {

enum class LirKind : uint8_t { kVoid, kI1, kI32, kI64, kF32, kF64, kPtr };

struct LirType {
  LirKind kind = LirKind::kVoid;
  AddressSpace space = AddressSpace::kGeneric;  // only for kPtr

  static LirType void_() { return {}; }
  static LirType i1() { return {LirKind::kI1}; }
  static LirType i32() { return {LirKind::kI32}; }
  static LirType i64() { return {LirKind::kI64}; }
  static LirType f32() { return {LirKind::kF32}; }
  static LirType f64() { return {LirKind::kF64}; }
  static LirType ptr(AddressSpace s = AddressSpace::kGeneric) {
    return {LirKind::kPtr, s};
  }
  static LirType of_scalar(ScalarKind k);

  bool is_void() const { return kind == LirKind::kVoid; }
  bool is_ptr() const { return kind == LirKind::kPtr; }
  bool is_int() const {
    return kind == LirKind::kI1 || kind == LirKind::kI32 || kind == LirKind::kI64;
  }
  bool is_float() const { return kind == LirKind::kF32 || kind == LirKind::kF64; }
  // Byte size in memory (i1 occupies one byte, pointers eight).
  uint32_t size() const;
  // Scalar kind used for arithmetic semantics (pointers behave as Int64).
  ScalarKind scalar() const;
  std::string str() const;

  friend bool operator==(const LirType& a, const LirType& b) {
    return a.kind == b.kind && (a.kind != LirKind::kPtr || a.space == b.space);
  }
};

using ValueId = uint32_t;
using BlockId = uint32_t;
inline constexpr ValueId kNoValue = 0xffffffffu;

enum class Op : uint8_t {
  kConst,
  kAdd, kSub, kMul, kDiv, kRem,
  kNeg, kAnd, kOr, kXor, kNot,
  kCmpEq, kCmpNe, kCmpLt, kCmpLe, kCmpGt, kCmpGe,
  kConvert,
  kSelect,
  kPhi,
  kLoad,
  kStore,
  kGep,           // base + index * scale + offset
  kAddrSpaceCast,
  kAlloca,        // entry block only; yields ptr.local
  kCall,          // module function
  kCallRuntime,   // host runtime routine
  kIntrinsic,     // target-defined leaf operation
  kBr,
  kCondBr,
  kRet,
  kTrap,          // aborts the thread with an Int64 error code
  kUnreachable,
};

std::string_view op_name(Op op);
bool is_terminator(Op op);
bool is_compare(Op op);
bool has_side_effects(Op op);

struct Instr {
  Op op = Op::kConst;
  ValueId result = kNoValue;
  LirType type;  // result type; the stored type for kStore
  std::vector<ValueId> operands;
  uint64_t imm = 0;     // const bits, alloca size, gep scale
  int64_t offset = 0;   // gep byte offset
  AddressSpace space = AddressSpace::kGeneric;  // load/store tag, cast target
  std::string callee;   // call, runtime call, intrinsic
  std::vector<BlockId> targets;  // br: 1, condbr: 2 (true, false); phi: preds
  SourceSpan span;
};

struct Block {
  std::string label;
  std::vector<Instr> instrs;
};

enum FunctionAttr : uint8_t {
  kAttrKernel = 1,
  kAttrWrapper = 2,
  kAttrInlineAlways = 4,
};

struct Param {
  std::string name;
  LirType type;
  // Aggregate passed by value in Param space (kernel wrappers).
  uint64_t byval_size = 0;
  // Source type of an immutable aggregate passed by reference or by value;
  // Nothing for scalars and plain pointers.
  Type aggregate;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  std::vector<ValueId> param_values;
  LirType ret;
  uint8_t attrs = 0;
  std::vector<Block> blocks;   // blocks[0] is the entry
  std::vector<LirType> value_types;
  SourceSpan span;

  bool has(FunctionAttr a) const { return (attrs & a) != 0; }
  ValueId new_value(LirType t);
  std::vector<std::vector<BlockId>> predecessors() const;
  std::vector<BlockId> successors(BlockId b) const;
  size_t instruction_count() const;
};

struct Module {
  std::vector<Function> functions;
  std::string entry;

  Function* find(std::string_view name);
  const Function* find(std::string_view name) const;
  Function& entry_function() { return *find(entry); }
  const Function& entry_function() const { return *find(entry); }
};

// Stable text grammar, e.g. `%v3: f32 = load.global %v2`.
std::string print(const Function& fn);
std::string print(const Module& module);

// Checks structure, SSA dominance, phi/predecessor agreement, operand types,
// call signatures, reducibility and that kernels are never called.
// Throws Error(kVerify) naming the function and `context`.
void verify(const Module& module, std::string_view context = "");
void verify_function(const Function& fn, const Module* module,
                     std::string_view context = "");

}  // namespace kf::lir

#endif  // KF_LIR_LIR_HPP_
