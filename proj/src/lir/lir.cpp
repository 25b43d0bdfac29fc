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

#include "kf/lir/lir.hpp"

#include <fmt/format.h>

#include <cstring>

namespace kf::lir {

LirType LirType::of_scalar(ScalarKind k) {
  switch (k) {
    case ScalarKind::kBool: return i1();
    case ScalarKind::kInt32: return i32();
    case ScalarKind::kInt64: return i64();
    case ScalarKind::kFloat32: return f32();
    case ScalarKind::kFloat64: return f64();
  }
  return void_();
}

uint32_t LirType::size() const {
  switch (kind) {
    case LirKind::kVoid: return 0;
    case LirKind::kI1: return 1;
    case LirKind::kI32:
    case LirKind::kF32: return 4;
    default: return 8;
  }
}

ScalarKind LirType::scalar() const {
  switch (kind) {
    case LirKind::kI1: return ScalarKind::kBool;
    case LirKind::kI32: return ScalarKind::kInt32;
    case LirKind::kF32: return ScalarKind::kFloat32;
    case LirKind::kF64: return ScalarKind::kFloat64;
    default: return ScalarKind::kInt64;
  }
}

std::string LirType::str() const {
  switch (kind) {
    case LirKind::kVoid: return "void";
    case LirKind::kI1: return "i1";
    case LirKind::kI32: return "i32";
    case LirKind::kI64: return "i64";
    case LirKind::kF32: return "f32";
    case LirKind::kF64: return "f64";
    case LirKind::kPtr:
      if (space == AddressSpace::kGeneric) return "ptr";
      return fmt::format("ptr.{}", space_name(space));
  }
  return "?";
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kConst: return "const";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kRem: return "rem";
    case Op::kNeg: return "neg";
    case Op::kAnd: return "and";
    case Op::kOr: return "or";
    case Op::kXor: return "xor";
    case Op::kNot: return "not";
    case Op::kCmpEq: return "cmp.eq";
    case Op::kCmpNe: return "cmp.ne";
    case Op::kCmpLt: return "cmp.lt";
    case Op::kCmpLe: return "cmp.le";
    case Op::kCmpGt: return "cmp.gt";
    case Op::kCmpGe: return "cmp.ge";
    case Op::kConvert: return "convert";
    case Op::kSelect: return "select";
    case Op::kPhi: return "phi";
    case Op::kLoad: return "load";
    case Op::kStore: return "store";
    case Op::kGep: return "gep";
    case Op::kAddrSpaceCast: return "addrspacecast";
    case Op::kAlloca: return "alloca";
    case Op::kCall: return "call";
    case Op::kCallRuntime: return "call.rt";
    case Op::kIntrinsic: return "intrinsic";
    case Op::kBr: return "br";
    case Op::kCondBr: return "condbr";
    case Op::kRet: return "ret";
    case Op::kTrap: return "trap";
    case Op::kUnreachable: return "unreachable";
  }
  return "?";
}

bool is_terminator(Op op) {
  return op == Op::kBr || op == Op::kCondBr || op == Op::kRet ||
         op == Op::kTrap || op == Op::kUnreachable;
}

bool is_compare(Op op) { return op >= Op::kCmpEq && op <= Op::kCmpGe; }

bool has_side_effects(Op op) {
  switch (op) {
    case Op::kStore:
    case Op::kCall:
    case Op::kCallRuntime:
    case Op::kIntrinsic:
    case Op::kDiv:  // may trap on the virtual device
    case Op::kRem:
      return true;
    default:
      return is_terminator(op);
  }
}

ValueId Function::new_value(LirType t) {
  value_types.push_back(t);
  return static_cast<ValueId>(value_types.size() - 1);
}

std::vector<BlockId> Function::successors(BlockId b) const {
  const auto& instrs = blocks[b].instrs;
  if (instrs.empty()) return {};
  const Instr& t = instrs.back();
  if (t.op == Op::kBr || t.op == Op::kCondBr) return t.targets;
  return {};
}

std::vector<std::vector<BlockId>> Function::predecessors() const {
  std::vector<std::vector<BlockId>> preds(blocks.size());
  for (BlockId b = 0; b < blocks.size(); ++b) {
    for (BlockId s : successors(b)) {
      if (s < blocks.size()) preds[s].push_back(b);
    }
  }
  return preds;
}

size_t Function::instruction_count() const {
  size_t n = 0;
  for (const auto& b : blocks) n += b.instrs.size();
  return n;
}

Function* Module::find(std::string_view name) {
  for (auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const Function* Module::find(std::string_view name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

std::string ref(ValueId v) {
  if (v == kNoValue) return "%undef";
  return fmt::format("%v{}", v);
}

std::string const_text(LirType t, uint64_t bits) {
  switch (t.kind) {
    case LirKind::kI1: return bits ? "true" : "false";
    case LirKind::kI32: return fmt::format("{}", static_cast<int32_t>(bits));
    case LirKind::kI64: return fmt::format("{}", static_cast<int64_t>(bits));
    case LirKind::kF32: {
      float f;
      uint32_t w = static_cast<uint32_t>(bits);
      std::memcpy(&f, &w, 4);
      return fmt::format("{}", f);
    }
    case LirKind::kF64: {
      double d;
      std::memcpy(&d, &bits, 8);
      return fmt::format("{}", d);
    }
    case LirKind::kPtr: return fmt::format("0x{:x}", bits);
    case LirKind::kVoid: break;
  }
  return "?";
}

std::string operand_list(const Instr& in) {
  std::string out;
  for (size_t i = 0; i < in.operands.size(); ++i) {
    if (i) out += ", ";
    out += ref(in.operands[i]);
  }
  return out;
}

std::string body(const Instr& in) {
  std::string op(op_name(in.op));
  switch (in.op) {
    case Op::kConst:
      return fmt::format("const {}", const_text(in.type, in.imm));
    case Op::kPhi: {
      std::string out = "phi ";
      for (size_t i = 0; i < in.operands.size(); ++i) {
        if (i) out += ", ";
        out += fmt::format("[{}, bb{}]", ref(in.operands[i]),
                           i < in.targets.size() ? in.targets[i] : 0);
      }
      return out;
    }
    case Op::kLoad:
      return fmt::format("load.{} {}", space_name(in.space),
                         ref(in.operands[0]));
    case Op::kStore:
      return fmt::format("store.{} {}, {}", space_name(in.space),
                         ref(in.operands[0]), ref(in.operands[1]));
    case Op::kGep: {
      std::string out = fmt::format("gep {}", ref(in.operands[0]));
      if (in.operands.size() > 1) {
        out += fmt::format(", {} * {}", ref(in.operands[1]), in.imm);
      }
      if (in.offset != 0 || in.operands.size() == 1) {
        out += fmt::format(" + {}", in.offset);
      }
      return out;
    }
    case Op::kAlloca:
      return fmt::format("alloca {}", in.imm);
    case Op::kCall:
    case Op::kCallRuntime:
      return fmt::format("{} @{}({})", op, in.callee, operand_list(in));
    case Op::kIntrinsic: {
      std::string out =
          fmt::format("intrinsic @{}({})", in.callee, operand_list(in));
      if (in.imm != 0) out += fmt::format(" #{}", in.imm);
      return out;
    }
    case Op::kBr:
      return fmt::format("br bb{}", in.targets[0]);
    case Op::kCondBr:
      return fmt::format("condbr {}, bb{}, bb{}", ref(in.operands[0]),
                         in.targets[0], in.targets[1]);
    default:
      if (in.operands.empty()) return op;
      return fmt::format("{} {}", op, operand_list(in));
  }
}

}  // namespace

std::string print(const Function& fn) {
  std::string out = fmt::format("define @{}(", fn.name);
  for (size_t i = 0; i < fn.params.size(); ++i) {
    if (i) out += ", ";
    const Param& p = fn.params[i];
    out += fmt::format("{} {}: {}", ref(fn.param_values[i]), p.name,
                       p.type.str());
    if (p.byval_size) out += fmt::format(" byval({})", p.byval_size);
  }
  out += fmt::format(") -> {}", fn.ret.str());
  std::vector<std::string> attrs;
  if (fn.has(kAttrKernel)) attrs.push_back("kernel");
  if (fn.has(kAttrWrapper)) attrs.push_back("wrapper");
  if (fn.has(kAttrInlineAlways)) attrs.push_back("inline_always");
  if (!attrs.empty()) out += fmt::format(" [{}]", fmt::join(attrs, " "));
  out += " {\n";
  for (BlockId b = 0; b < fn.blocks.size(); ++b) {
    const Block& block = fn.blocks[b];
    if (block.label.empty()) {
      out += fmt::format("bb{}:\n", b);
    } else {
      out += fmt::format("bb{}:  ; {}\n", b, block.label);
    }
    for (const Instr& in : block.instrs) {
      out += "  ";
      if (in.result != kNoValue) {
        out += fmt::format("{}: {} = ", ref(in.result), in.type.str());
      }
      out += body(in);
      out += "\n";
    }
  }
  out += "}\n";
  return out;
}

std::string print(const Module& module) {
  std::string out;
  for (size_t i = 0; i < module.functions.size(); ++i) {
    if (i) out += "\n";
    out += print(module.functions[i]);
  }
  return out;
}

}  // namespace kf::lir
