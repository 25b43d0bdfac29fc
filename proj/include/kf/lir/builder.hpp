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

#ifndef KF_LIR_BUILDER_HPP_
#define KF_LIR_BUILDER_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kf/lir/lir.hpp"

namespace kf::lir {

// Creates a function with an empty entry block and one value per param.
Function new_function(std::string name, std::vector<Param> params,
                      LirType ret, uint8_t attrs = 0);

// Structured instruction emission. Every instruction is type-checked as it
// is emitted; misuse throws Error(kCodegen) before a malformed block exists.
class IrBuilder {
 public:
  explicit IrBuilder(Function& fn);

  Function& function() { return fn_; }
  const Function& function() const { return fn_; }

  BlockId create_block(std::string label = {});
  void set_block(BlockId b);
  BlockId current_block() const { return block_; }
  // True when the current block already ends in a terminator.
  bool terminated() const;
  void set_span(SourceSpan span) { span_ = span; }
  SourceSpan span() const { return span_; }

  ValueId param(size_t i) const { return fn_.param_values.at(i); }
  LirType type_of(ValueId v) const { return fn_.value_types.at(v); }
  // Bits of `v` if it is defined by a const instruction.
  std::optional<uint64_t> const_value(ValueId v) const;

  ValueId const_bits(LirType t, uint64_t bits);
  ValueId const_int(LirType t, int64_t v);
  ValueId const_bool(bool v);
  ValueId const_f32(float v);
  ValueId const_f64(double v);

  ValueId binary(Op op, ValueId a, ValueId b);  // arithmetic and bitwise
  ValueId neg(ValueId a);
  ValueId not_(ValueId a);
  ValueId compare(Op op, ValueId a, ValueId b);
  // Scalar conversion; returns `a` unchanged when already of type `to`.
  ValueId convert(ValueId a, LirType to);
  ValueId select(ValueId cond, ValueId a, ValueId b);
  ValueId phi(LirType t, const std::vector<std::pair<ValueId, BlockId>>& in);

  ValueId load(LirType t, ValueId ptr, AddressSpace tag);
  void store(ValueId value, ValueId ptr, AddressSpace tag);
  ValueId gep(ValueId base, int64_t offset);
  ValueId gep(ValueId base, ValueId index, uint64_t scale, int64_t offset = 0);
  // Returns `ptr` unchanged when it already lives in `to`.
  ValueId cast(ValueId ptr, AddressSpace to);
  // Always placed in the entry block regardless of the insertion point.
  ValueId alloca(uint64_t size);

  ValueId call(const std::string& callee, LirType ret,
               const std::vector<ValueId>& args);
  ValueId call_runtime(const std::string& callee, LirType ret,
                       const std::vector<ValueId>& args);
  ValueId intrinsic(const std::string& name, LirType ret,
                    const std::vector<ValueId>& args, uint64_t imm = 0);

  void br(BlockId target);
  void condbr(ValueId cond, BlockId if_true, BlockId if_false);
  void ret(std::optional<ValueId> value = std::nullopt);
  void trap(ValueId code);
  void unreachable();

 private:
  [[noreturn]] void fail(const std::string& what) const;
  ValueId emit(Instr in);
  void require(bool ok, const char* what) const;

  Function& fn_;
  BlockId block_ = 0;
  SourceSpan span_;
};

}  // namespace kf::lir

#endif  // KF_LIR_BUILDER_HPP_
