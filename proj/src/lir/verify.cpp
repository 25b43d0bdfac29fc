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

#include <fmt/format.h>

#include <algorithm>

#include "kf/lir/analysis.hpp"
#include "kf/lir/lir.hpp"

namespace kf::lir {

namespace {

class Verifier {
 public:
  Verifier(const Function& fn, const Module* module, std::string_view context)
      : fn_(fn), module_(module), context_(context) {}

  void run() {
    if (fn_.blocks.empty()) fail("function has no blocks");
    if (fn_.params.size() != fn_.param_values.size()) {
      fail("parameter value count mismatch");
    }
    def_block_.assign(fn_.value_types.size(), kNoBlock);
    def_index_.assign(fn_.value_types.size(), 0);
    for (size_t i = 0; i < fn_.params.size(); ++i) {
      ValueId v = fn_.param_values[i];
      check_id(v);
      if (!(fn_.value_types[v] == fn_.params[i].type)) {
        fail(fmt::format("parameter {} type mismatch", fn_.params[i].name));
      }
      define(v, 0, -1);
    }
    for (BlockId b = 0; b < fn_.blocks.size(); ++b) {
      const auto& instrs = fn_.blocks[b].instrs;
      if (instrs.empty()) fail(fmt::format("bb{} is empty", b));
      bool past_phis = false;
      for (size_t i = 0; i < instrs.size(); ++i) {
        const Instr& in = instrs[i];
        bool last = i + 1 == instrs.size();
        if (is_terminator(in.op) != last) {
          fail(fmt::format("bb{} must end with exactly one terminator", b));
        }
        if (in.op == Op::kPhi) {
          if (past_phis) fail(fmt::format("bb{}: phi after non-phi", b));
        } else {
          past_phis = true;
        }
        if (in.result != kNoValue) {
          check_id(in.result);
          if (def_block_[in.result] != kNoBlock) {
            fail(fmt::format("%v{} defined twice", in.result));
          }
          if (!(fn_.value_types[in.result] == in.type)) {
            fail(fmt::format("%v{} type disagrees with value table",
                             in.result));
          }
          define(in.result, b, static_cast<int>(i));
        }
        for (BlockId t : in.targets) {
          if (t >= fn_.blocks.size()) {
            fail(fmt::format("bb{}: branch to missing bb{}", b, t));
          }
        }
      }
    }
    dom_ = compute_dominators(fn_);
    preds_ = fn_.predecessors();
    for (BlockId b = 0; b < fn_.blocks.size(); ++b) {
      const auto& instrs = fn_.blocks[b].instrs;
      for (size_t i = 0; i < instrs.size(); ++i) {
        check_instr(b, static_cast<int>(i), instrs[i]);
      }
    }
    if (!is_reducible(fn_, dom_)) fail("control flow graph is irreducible");
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::string where = context_.empty()
                            ? std::string()
                            : fmt::format(" after {}", context_);
    throw Error(ErrorKind::kVerify,
                fmt::format("invalid LIR in @{}{}: {}", fn_.name, where, what));
  }

  void check_id(ValueId v) const {
    if (v >= fn_.value_types.size()) fail(fmt::format("unknown value %v{}", v));
  }

  void define(ValueId v, BlockId b, int index) {
    def_block_[v] = b;
    def_index_[v] = index;
  }

  LirType type_of(ValueId v) const { return fn_.value_types[v]; }

  void check_use(BlockId b, int index, ValueId v) const {
    check_id(v);
    if (def_block_[v] == kNoBlock) fail(fmt::format("%v{} is never defined", v));
    if (!dom_.reachable[b]) return;
    BlockId db = def_block_[v];
    if (db == b) {
      if (def_index_[v] >= index) {
        fail(fmt::format("%v{} used before its definition in bb{}", v, b));
      }
      return;
    }
    if (!dom_.dominates(db, b)) {
      fail(fmt::format("%v{} does not dominate its use in bb{}", v, b));
    }
  }

  void expect(bool ok, BlockId b, const Instr& in, std::string_view what) const {
    if (!ok) {
      fail(fmt::format("bb{}: {}: {}", b, op_name(in.op), what));
    }
  }

  void check_instr(BlockId b, int index, const Instr& in) {
    auto arity = [&](size_t n) {
      expect(in.operands.size() == n, b, in,
             fmt::format("expected {} operands", n));
    };
    if (in.op == Op::kPhi) {
      expect(in.operands.size() == in.targets.size(), b, in,
             "incoming values and blocks differ in number");
      auto want = preds_[b];
      auto have = in.targets;
      std::sort(want.begin(), want.end());
      std::sort(have.begin(), have.end());
      expect(want == have, b, in, "incoming blocks differ from predecessors");
      for (size_t i = 0; i < in.operands.size(); ++i) {
        ValueId v = in.operands[i];
        check_id(v);
        expect(type_of(v) == in.type, b, in, "incoming type mismatch");
        BlockId pred = in.targets[i];
        if (dom_.reachable[pred]) {
          if (def_block_[v] == kNoBlock) fail(fmt::format("%v{} undefined", v));
          expect(dom_.dominates(def_block_[v], pred), b, in,
                 fmt::format("%v{} does not dominate bb{}", v, pred));
        }
      }
      return;
    }
    for (ValueId v : in.operands) check_use(b, index, v);
    const bool has_result = in.result != kNoValue;
    switch (in.op) {
      case Op::kConst:
        arity(0);
        expect(has_result && !in.type.is_void(), b, in, "needs a typed result");
        break;
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kDiv:
      case Op::kRem:
        arity(2);
        expect((in.type.is_int() && in.type.kind != LirKind::kI1) ||
                   in.type.is_float(),
               b, in, "needs integer or float operands");
        expect(type_of(in.operands[0]) == in.type &&
                   type_of(in.operands[1]) == in.type,
               b, in, "operand types must equal the result type");
        break;
      case Op::kNeg:
        arity(1);
        expect(in.type.is_float() ||
                   (in.type.is_int() && in.type.kind != LirKind::kI1),
               b, in, "needs a numeric operand");
        expect(type_of(in.operands[0]) == in.type, b, in, "type mismatch");
        break;
      case Op::kAnd:
      case Op::kOr:
      case Op::kXor:
        arity(2);
        expect(in.type.is_int(), b, in, "needs integer operands");
        expect(type_of(in.operands[0]) == in.type &&
                   type_of(in.operands[1]) == in.type,
               b, in, "operand types must equal the result type");
        break;
      case Op::kNot:
        arity(1);
        expect(in.type.is_int() && type_of(in.operands[0]) == in.type, b, in,
               "needs an integer operand of the result type");
        break;
      case Op::kCmpEq:
      case Op::kCmpNe:
      case Op::kCmpLt:
      case Op::kCmpLe:
      case Op::kCmpGt:
      case Op::kCmpGe: {
        arity(2);
        expect(in.type.kind == LirKind::kI1, b, in, "result must be i1");
        LirType a = type_of(in.operands[0]);
        expect(a == type_of(in.operands[1]) && !a.is_void(), b, in,
               "operand types differ");
        break;
      }
      case Op::kConvert: {
        arity(1);
        LirType a = type_of(in.operands[0]);
        expect(!a.is_void() && !a.is_ptr() && !in.type.is_void() &&
                   !in.type.is_ptr(),
               b, in, "converts between scalar types only");
        break;
      }
      case Op::kSelect:
        arity(3);
        expect(type_of(in.operands[0]).kind == LirKind::kI1, b, in,
               "condition must be i1");
        expect(type_of(in.operands[1]) == in.type &&
                   type_of(in.operands[2]) == in.type,
               b, in, "arm types must equal the result type");
        break;
      case Op::kLoad: {
        arity(1);
        expect(has_result && !in.type.is_void(), b, in, "needs a typed result");
        check_tag(b, in, type_of(in.operands[0]));
        break;
      }
      case Op::kStore:
        arity(2);
        expect(!has_result, b, in, "produces no value");
        expect(type_of(in.operands[0]) == in.type, b, in,
               "stored value type mismatch");
        check_tag(b, in, type_of(in.operands[1]));
        break;
      case Op::kGep: {
        expect(in.operands.size() == 1 || in.operands.size() == 2, b, in,
               "expected a base and an optional index");
        LirType base = type_of(in.operands[0]);
        expect(base.is_ptr() && in.type == base, b, in,
               "result must be a pointer in the base's space");
        if (in.operands.size() == 2) {
          expect(type_of(in.operands[1]).kind == LirKind::kI64, b, in,
                 "index must be i64");
        }
        break;
      }
      case Op::kAddrSpaceCast: {
        arity(1);
        LirType from = type_of(in.operands[0]);
        expect(from.is_ptr() && in.type.is_ptr(), b, in, "casts pointers only");
        expect(from.space == AddressSpace::kGeneric ||
                   in.type.space == AddressSpace::kGeneric ||
                   from.space == in.type.space,
               b, in, "casts must go through the generic space");
        break;
      }
      case Op::kAlloca:
        arity(0);
        expect(b == 0, b, in, "allocas belong in the entry block");
        expect(in.type == LirType::ptr(AddressSpace::kLocal) && in.imm > 0, b,
               in, "must yield a sized ptr.local");
        break;
      case Op::kCall: {
        const Function* callee = module_ ? module_->find(in.callee) : nullptr;
        if (module_ && !callee) {
          fail(fmt::format("call to unknown function @{}", in.callee));
        }
        if (callee) {
          expect(!callee->has(kAttrKernel), b, in,
                 fmt::format("kernel @{} cannot be called", in.callee));
          expect(callee->params.size() == in.operands.size(), b, in,
                 "argument count mismatch");
          for (size_t i = 0; i < in.operands.size(); ++i) {
            expect(type_of(in.operands[i]) == callee->params[i].type, b, in,
                   fmt::format("argument {} type mismatch", i + 1));
          }
          expect(callee->ret == in.type, b, in, "return type mismatch");
        }
        expect(has_result == !in.type.is_void(), b, in,
               "result presence must match the return type");
        break;
      }
      case Op::kCallRuntime:
      case Op::kIntrinsic:
        expect(!in.callee.empty(), b, in, "missing callee");
        expect(has_result == !in.type.is_void(), b, in,
               "result presence must match the type");
        break;
      case Op::kBr:
        arity(0);
        expect(in.targets.size() == 1, b, in, "needs one target");
        break;
      case Op::kCondBr:
        arity(1);
        expect(in.targets.size() == 2, b, in, "needs two targets");
        expect(type_of(in.operands[0]).kind == LirKind::kI1, b, in,
               "condition must be i1");
        break;
      case Op::kRet:
        if (fn_.ret.is_void()) {
          arity(0);
        } else {
          arity(1);
          expect(type_of(in.operands[0]) == fn_.ret, b, in,
                 "returned value type mismatch");
        }
        break;
      case Op::kTrap:
        arity(1);
        expect(type_of(in.operands[0]).kind == LirKind::kI64, b, in,
               "code must be i64");
        break;
      case Op::kUnreachable:
        arity(0);
        break;
      case Op::kPhi:
        break;
    }
  }

  void check_tag(BlockId b, const Instr& in, LirType ptr) const {
    expect(ptr.is_ptr(), b, in, "address must be a pointer");
    expect(in.space == AddressSpace::kGeneric ||
               ptr.space == AddressSpace::kGeneric || in.space == ptr.space,
           b, in,
           fmt::format("{} access through a {} pointer", space_name(in.space),
                       ptr.str()));
  }

  const Function& fn_;
  const Module* module_;
  std::string_view context_;
  std::vector<BlockId> def_block_;
  std::vector<int> def_index_;
  DomTree dom_;
  std::vector<std::vector<BlockId>> preds_;
};

}  // namespace

void verify_function(const Function& fn, const Module* module,
                     std::string_view context) {
  Verifier(fn, module, context).run();
}

void verify(const Module& module, std::string_view context) {
  for (const Function& fn : module.functions) {
    verify_function(fn, &module, context);
  }
}

}  // namespace kf::lir
