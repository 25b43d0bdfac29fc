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

#include "kf/lir/builder.hpp"

#include <fmt/format.h>

#include <cstring>

namespace kf::lir {

Function new_function(std::string name, std::vector<Param> params,
                      LirType ret, uint8_t attrs) {
  Function fn;
  fn.name = std::move(name);
  fn.ret = ret;
  fn.attrs = attrs;
  for (Param& p : params) {
    fn.param_values.push_back(fn.new_value(p.type));
    fn.params.push_back(std::move(p));
  }
  fn.blocks.push_back(Block{"entry", {}});
  return fn;
}

IrBuilder::IrBuilder(Function& fn) : fn_(fn) {
  if (fn_.blocks.empty()) fn_.blocks.push_back(Block{"entry", {}});
}

void IrBuilder::fail(const std::string& what) const {
  throw Error(ErrorKind::kCodegen,
              fmt::format("IR builder in @{}: {}", fn_.name, what), span_);
}

void IrBuilder::require(bool ok, const char* what) const {
  if (!ok) fail(what);
}

BlockId IrBuilder::create_block(std::string label) {
  fn_.blocks.push_back(Block{std::move(label), {}});
  return static_cast<BlockId>(fn_.blocks.size() - 1);
}

void IrBuilder::set_block(BlockId b) {
  require(b < fn_.blocks.size(), "no such block");
  block_ = b;
}

bool IrBuilder::terminated() const {
  const auto& instrs = fn_.blocks[block_].instrs;
  return !instrs.empty() && is_terminator(instrs.back().op);
}

std::optional<uint64_t> IrBuilder::const_value(ValueId v) const {
  for (const Block& b : fn_.blocks) {
    for (const Instr& in : b.instrs) {
      if (in.result == v) {
        if (in.op == Op::kConst) return in.imm;
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

ValueId IrBuilder::emit(Instr in) {
  if (terminated()) {
    fail(fmt::format("{} emitted after the terminator of bb{}", op_name(in.op),
                     block_));
  }
  for (ValueId v : in.operands) {
    require(v < fn_.value_types.size(), "operand is not a value");
  }
  in.span = span_;
  if (!in.type.is_void() && in.op != Op::kStore) {
    in.result = fn_.new_value(in.type);
  }
  ValueId r = in.result;
  fn_.blocks[block_].instrs.push_back(std::move(in));
  return r;
}

ValueId IrBuilder::const_bits(LirType t, uint64_t bits) {
  require(!t.is_void(), "void constant");
  if (t.kind == LirKind::kI1) bits &= 1;
  if (t.size() == 4) bits &= 0xffffffffu;
  Instr in;
  in.op = Op::kConst;
  in.type = t;
  in.imm = bits;
  return emit(std::move(in));
}

ValueId IrBuilder::const_int(LirType t, int64_t v) {
  require(t.is_int() || t.is_ptr(), "integer constant of non-integer type");
  return const_bits(t, static_cast<uint64_t>(v));
}

ValueId IrBuilder::const_bool(bool v) { return const_bits(LirType::i1(), v); }

ValueId IrBuilder::const_f32(float v) {
  uint32_t w;
  std::memcpy(&w, &v, 4);
  return const_bits(LirType::f32(), w);
}

ValueId IrBuilder::const_f64(double v) {
  uint64_t w;
  std::memcpy(&w, &v, 8);
  return const_bits(LirType::f64(), w);
}

ValueId IrBuilder::binary(Op op, ValueId a, ValueId b) {
  LirType t = type_of(a);
  require(t == type_of(b), "binary operands differ in type");
  switch (op) {
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kRem:
      require(t.is_float() || (t.is_int() && t.kind != LirKind::kI1),
              "arithmetic needs integer or float operands");
      break;
    case Op::kAnd:
    case Op::kOr:
    case Op::kXor:
      require(t.is_int(), "bitwise ops need integer operands");
      break;
    default:
      fail(fmt::format("{} is not a binary operation", op_name(op)));
  }
  Instr in;
  in.op = op;
  in.type = t;
  in.operands = {a, b};
  return emit(std::move(in));
}

ValueId IrBuilder::neg(ValueId a) {
  LirType t = type_of(a);
  require(t.is_float() || (t.is_int() && t.kind != LirKind::kI1),
          "neg needs a numeric operand");
  Instr in;
  in.op = Op::kNeg;
  in.type = t;
  in.operands = {a};
  return emit(std::move(in));
}

ValueId IrBuilder::not_(ValueId a) {
  require(type_of(a).is_int(), "not needs an integer operand");
  Instr in;
  in.op = Op::kNot;
  in.type = type_of(a);
  in.operands = {a};
  return emit(std::move(in));
}

ValueId IrBuilder::compare(Op op, ValueId a, ValueId b) {
  require(is_compare(op), "not a comparison");
  require(type_of(a) == type_of(b), "comparison operands differ in type");
  Instr in;
  in.op = op;
  in.type = LirType::i1();
  in.operands = {a, b};
  return emit(std::move(in));
}

ValueId IrBuilder::convert(ValueId a, LirType to) {
  LirType from = type_of(a);
  if (from == to) return a;
  require(!from.is_ptr() && !to.is_ptr() && !from.is_void() && !to.is_void(),
          "convert needs scalar types");
  Instr in;
  in.op = Op::kConvert;
  in.type = to;
  in.operands = {a};
  return emit(std::move(in));
}

ValueId IrBuilder::select(ValueId cond, ValueId a, ValueId b) {
  require(type_of(cond).kind == LirKind::kI1, "select condition must be i1");
  require(type_of(a) == type_of(b), "select arms differ in type");
  Instr in;
  in.op = Op::kSelect;
  in.type = type_of(a);
  in.operands = {cond, a, b};
  return emit(std::move(in));
}

ValueId IrBuilder::phi(LirType t,
                       const std::vector<std::pair<ValueId, BlockId>>& incoming) {
  auto& instrs = fn_.blocks[block_].instrs;
  for (const Instr& in : instrs) {
    require(in.op == Op::kPhi, "phi must precede other instructions");
  }
  Instr in;
  in.op = Op::kPhi;
  in.type = t;
  for (auto [v, b] : incoming) {
    require(type_of(v) == t, "phi incoming type mismatch");
    in.operands.push_back(v);
    in.targets.push_back(b);
  }
  return emit(std::move(in));
}

ValueId IrBuilder::load(LirType t, ValueId ptr, AddressSpace tag) {
  LirType p = type_of(ptr);
  require(p.is_ptr(), "load address must be a pointer");
  require(!t.is_void(), "load of void");
  require(tag == AddressSpace::kGeneric || p.space == AddressSpace::kGeneric ||
              tag == p.space,
          "load tag disagrees with the pointer's space");
  Instr in;
  in.op = Op::kLoad;
  in.type = t;
  in.space = tag;
  in.operands = {ptr};
  return emit(std::move(in));
}

void IrBuilder::store(ValueId value, ValueId ptr, AddressSpace tag) {
  LirType p = type_of(ptr);
  require(p.is_ptr(), "store address must be a pointer");
  require(tag == AddressSpace::kGeneric || p.space == AddressSpace::kGeneric ||
              tag == p.space,
          "store tag disagrees with the pointer's space");
  Instr in;
  in.op = Op::kStore;
  in.type = type_of(value);
  in.space = tag;
  in.operands = {value, ptr};
  emit(std::move(in));
}

ValueId IrBuilder::gep(ValueId base, int64_t offset) {
  if (offset == 0) return base;
  require(type_of(base).is_ptr(), "gep base must be a pointer");
  Instr in;
  in.op = Op::kGep;
  in.type = type_of(base);
  in.operands = {base};
  in.offset = offset;
  return emit(std::move(in));
}

ValueId IrBuilder::gep(ValueId base, ValueId index, uint64_t scale,
                       int64_t offset) {
  require(type_of(base).is_ptr(), "gep base must be a pointer");
  require(type_of(index).kind == LirKind::kI64, "gep index must be i64");
  Instr in;
  in.op = Op::kGep;
  in.type = type_of(base);
  in.operands = {base, index};
  in.imm = scale;
  in.offset = offset;
  return emit(std::move(in));
}

ValueId IrBuilder::cast(ValueId ptr, AddressSpace to) {
  LirType p = type_of(ptr);
  require(p.is_ptr(), "addrspacecast of a non-pointer");
  if (p.space == to) return ptr;
  require(p.space == AddressSpace::kGeneric || to == AddressSpace::kGeneric,
          "casts must go through the generic space");
  Instr in;
  in.op = Op::kAddrSpaceCast;
  in.type = LirType::ptr(to);
  in.operands = {ptr};
  return emit(std::move(in));
}

ValueId IrBuilder::alloca(uint64_t size) {
  require(size > 0, "zero-sized alloca");
  Instr in;
  in.op = Op::kAlloca;
  in.type = LirType::ptr(AddressSpace::kLocal);
  in.imm = size;
  in.span = span_;
  in.result = fn_.new_value(in.type);
  auto& entry = fn_.blocks[0].instrs;
  size_t pos = 0;
  while (pos < entry.size() && entry[pos].op == Op::kAlloca) ++pos;
  entry.insert(entry.begin() + static_cast<std::ptrdiff_t>(pos), in);
  return in.result;
}

ValueId IrBuilder::call(const std::string& callee, LirType ret,
                        const std::vector<ValueId>& args) {
  Instr in;
  in.op = Op::kCall;
  in.type = ret;
  in.callee = callee;
  in.operands = args;
  return emit(std::move(in));
}

ValueId IrBuilder::call_runtime(const std::string& callee, LirType ret,
                                const std::vector<ValueId>& args) {
  Instr in;
  in.op = Op::kCallRuntime;
  in.type = ret;
  in.callee = callee;
  in.operands = args;
  return emit(std::move(in));
}

ValueId IrBuilder::intrinsic(const std::string& name, LirType ret,
                             const std::vector<ValueId>& args, uint64_t imm) {
  Instr in;
  in.op = Op::kIntrinsic;
  in.type = ret;
  in.callee = name;
  in.operands = args;
  in.imm = imm;
  return emit(std::move(in));
}

void IrBuilder::br(BlockId target) {
  require(target < fn_.blocks.size(), "branch to a missing block");
  Instr in;
  in.op = Op::kBr;
  in.targets = {target};
  emit(std::move(in));
}

void IrBuilder::condbr(ValueId cond, BlockId if_true, BlockId if_false) {
  require(type_of(cond).kind == LirKind::kI1, "branch condition must be i1");
  require(if_true < fn_.blocks.size() && if_false < fn_.blocks.size(),
          "branch to a missing block");
  Instr in;
  in.op = Op::kCondBr;
  in.operands = {cond};
  in.targets = {if_true, if_false};
  emit(std::move(in));
}

void IrBuilder::ret(std::optional<ValueId> value) {
  Instr in;
  in.op = Op::kRet;
  if (fn_.ret.is_void()) {
    require(!value, "void function returns a value");
  } else {
    require(value && type_of(*value) == fn_.ret, "return type mismatch");
    in.operands = {*value};
  }
  emit(std::move(in));
}

void IrBuilder::trap(ValueId code) {
  require(type_of(code).kind == LirKind::kI64, "trap code must be i64");
  Instr in;
  in.op = Op::kTrap;
  in.operands = {code};
  emit(std::move(in));
}

void IrBuilder::unreachable() {
  Instr in;
  in.op = Op::kUnreachable;
  emit(std::move(in));
}

}  // namespace kf::lir
