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

#include <optional>

#include "kf/lir/builder.hpp"
#include "kf/lir/codegen.hpp"
#include "kf/lir/passes.hpp"

namespace kf::lir {

namespace {

// nullopt is "not yet known" (optimistic start for phis); Generic is the
// bottom meaning "decided at run time".
using SpaceFact = std::optional<AddressSpace>;

SpaceFact meet(SpaceFact a, SpaceFact b) {
  if (!a) return b;
  if (!b) return a;
  return *a == *b ? a : SpaceFact(AddressSpace::kGeneric);
}

}  // namespace

void infer_address_spaces(Function& fn) {
  std::vector<SpaceFact> fact(fn.value_types.size());
  for (size_t i = 0; i < fn.params.size(); ++i) {
    LirType t = fn.params[i].type;
    if (t.is_ptr()) fact[fn.param_values[i]] = t.space;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Block& b : fn.blocks) {
      for (const Instr& in : b.instrs) {
        if (in.result == kNoValue || !in.type.is_ptr()) continue;
        SpaceFact f;
        switch (in.op) {
          case Op::kAlloca:
            f = AddressSpace::kLocal;
            break;
          case Op::kAddrSpaceCast:
          case Op::kGep:
            f = fact[in.operands[0]];
            if (in.type.space != AddressSpace::kGeneric) f = in.type.space;
            break;
          case Op::kPhi:
            for (ValueId v : in.operands) f = meet(f, fact[v]);
            break;
          case Op::kSelect:
            f = meet(fact[in.operands[1]], fact[in.operands[2]]);
            break;
          default:
            f = in.type.space;  // whatever the producer's type promises
            break;
        }
        if (f != fact[in.result]) {
          // Facts only move down: unknown -> space -> generic.
          SpaceFact merged = fact[in.result] ? meet(fact[in.result], f) : f;
          if (merged != fact[in.result]) {
            fact[in.result] = merged;
            changed = true;
          }
        }
      }
    }
  }
  for (Block& b : fn.blocks) {
    for (Instr& in : b.instrs) {
      if (in.space != AddressSpace::kGeneric) continue;
      ValueId addr = kNoValue;
      if (in.op == Op::kLoad) addr = in.operands[0];
      if (in.op == Op::kStore) addr = in.operands[1];
      if (addr == kNoValue || !fact[addr]) continue;
      in.space = *fact[addr];
    }
  }
}

AbiRewrite rewrite_kernel_abi(Module& module) {
  Function* kernel = module.find(module.entry);
  if (!kernel || !kernel->has(kAttrKernel)) {
    throw Error(ErrorKind::kCodegen,
                fmt::format("@{} is not a kernel", module.entry));
  }
  AbiRewrite names{kernel->name, kernel->name + ".inner"};
  std::vector<Param> wrapper_params;
  for (const Param& p : kernel->params) {
    Param w = p;
    if (!p.aggregate.is_nothing()) {
      if (p.aggregate.is_mutable_record()) {
        throw Error(ErrorKind::kCodegen,
                    fmt::format("mutable {} cannot be passed by value",
                                p.aggregate.str()),
                    kernel->span);
      }
      w.type = LirType::ptr(AddressSpace::kParam);
      w.byval_size = p.aggregate.size_bytes();
    }
    wrapper_params.push_back(std::move(w));
  }
  Function wrapper = new_function(names.wrapper, std::move(wrapper_params),
                                  LirType::void_(), kAttrKernel | kAttrWrapper);
  wrapper.span = kernel->span;
  IrBuilder b(wrapper);
  b.set_span(kernel->span);
  std::vector<ValueId> args;
  for (size_t i = 0; i < wrapper.params.size(); ++i) {
    const Param& p = wrapper.params[i];
    ValueId v = b.param(i);
    if (p.byval_size == 0) {
      args.push_back(v);
      continue;
    }
    ValueId slot = b.alloca(std::max<uint64_t>(p.byval_size, 1));
    for (const Leaf& leaf : leaves(p.aggregate)) {
      int64_t off = static_cast<int64_t>(leaf.offset);
      ValueId x = b.load(leaf.type, b.gep(v, off), AddressSpace::kParam);
      b.store(x, b.gep(slot, off), AddressSpace::kLocal);
    }
    args.push_back(b.cast(slot, AddressSpace::kGeneric));
  }
  kernel->name = names.inner;
  kernel->attrs = static_cast<uint8_t>((kernel->attrs & ~kAttrKernel) |
                                       kAttrInlineAlways);
  b.call(names.inner, LirType::void_(), args);
  b.ret();
  module.functions.insert(module.functions.begin(), std::move(wrapper));
  module.entry = names.wrapper;
  verify(module, "rewrite_kernel_abi");
  return names;
}

}  // namespace kf::lir
