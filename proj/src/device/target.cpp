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

#include "kf/device/target.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include <fmt/format.h>

#include "kf/lir/builder.hpp"
#include "kf/support/instrumentation.hpp"

namespace kf::device {
namespace {

using lir::IrBuilder;
using lir::LirType;
using lir::Op;
using lir::ValueId;

constexpr std::string_view kSharedArray = "shared_array";
constexpr std::string_view kShflDown = "shfl_down";
constexpr std::string_view kAtomicAdd = "atomic_add";

bool device_representable(Type t) {
  if (t.is_scalar()) return true;
  if (t.is_device_array()) return device_representable(t.element());
  if (t.is_record() && !t.is_mutable_record()) {
    return std::all_of(t.fields().begin(), t.fields().end(),
                       device_representable);
  }
  return false;
}

// Element type named by shared_array's first argument: a scalar type name
// or a prototype value.
std::optional<Type> shared_element(Type proto) {
  if (proto.kind() == TypeKind::kFunction) {
    if (auto k = scalar_from_name(proto.symbol())) return Type::scalar(*k);
    return std::nullopt;
  }
  if (is_storable(proto)) return proto;
  return std::nullopt;
}

std::optional<Type> pseudo_intrinsic_type(std::string_view name,
                                          const std::vector<Type>& args) {
  if (name == kSharedArray) {
    if (args.size() != 2 || !args[1].is_integer()) return std::nullopt;
    auto elem = shared_element(args[0]);
    if (!elem) return std::nullopt;
    return Type::device_array(*elem, AddressSpace::kShared);
  }
  if (name == kShflDown) {
    if (args.size() != 2 || !args[1].is_integer() || !is_storable(args[0])) {
      return std::nullopt;
    }
    return args[0];
  }
  if (name == kAtomicAdd) {
    if (args.size() != 3 || !args[0].is_device_array() ||
        args[0].space() != AddressSpace::kGlobal || !args[1].is_integer()) {
      return std::nullopt;
    }
    Type elem = args[0].element();
    if (elem != Type::int32() && elem != Type::int64()) return std::nullopt;
    if (args[2] != elem) return std::nullopt;
    return elem;
  }
  return std::nullopt;
}

bool is_pseudo_intrinsic(std::string_view name) {
  return name == kSharedArray || name == kShflDown || name == kAtomicAdd;
}

ValueId lower_shared_array(IrBuilder& b, const lir::IntrinsicCall& call) {
  auto n = b.const_value(call.args[1]);
  if (!n) {
    throw Error(ErrorKind::kCodegen,
                "shared_array size must be a compile-time constant", call.span);
  }
  int64_t count = scalar::to_i64(call.arg_types[1].scalar_kind(), *n);
  if (count < 0) {
    throw Error(ErrorKind::kCodegen,
                fmt::format("shared_array size {} is negative", count),
                call.span);
  }
  uint64_t bytes = static_cast<uint64_t>(count) *
                   call.result.element().size_bytes();
  ValueId base = b.intrinsic("shared_alloc",
                             LirType::ptr(AddressSpace::kShared), {}, bytes);
  ValueId len = b.const_int(LirType::i64(), count);
  return lir::make_aggregate(b, call.result, {base, len});
}

// Moves the value through local memory as a sequence of 32-bit shuffles.
ValueId lower_shfl_down(IrBuilder& b, const lir::IntrinsicCall& call) {
  Type t = call.arg_types[0];
  uint64_t words = (t.size_bytes() + 3) / 4;
  ValueId src = b.alloca(words * 4);
  ValueId dst = b.alloca(words * 4);
  constexpr AddressSpace kL = AddressSpace::kLocal;
  if (t.is_scalar()) {
    b.store(call.args[0], src, kL);
  } else {
    lir::emit_copy(b, t, src, kL, call.args[0], AddressSpace::kGeneric);
  }
  ValueId delta = b.convert(call.args[1], LirType::i32());
  for (uint64_t w = 0; w < words; ++w) {
    int64_t off = static_cast<int64_t>(w * 4);
    ValueId word = b.load(LirType::i32(), b.gep(src, off), kL);
    ValueId moved =
        b.intrinsic("shfl_down_u32", LirType::i32(), {word, delta});
    b.store(moved, b.gep(dst, off), kL);
  }
  if (t.is_scalar()) return b.load(*lir::lir_type_of(t), dst, kL);
  return b.cast(dst, AddressSpace::kGeneric);
}

ValueId lower_atomic_add(IrBuilder& b, const lir::IntrinsicCall& call) {
  Type elem = call.result;
  LirType lt = *lir::lir_type_of(elem);
  auto size = static_cast<int64_t>(elem.size_bytes());
  ValueId base = b.load(LirType::ptr(AddressSpace::kGlobal), call.args[0],
                        AddressSpace::kGeneric);
  ValueId index = b.convert(call.args[1], LirType::i64());
  ValueId p = b.gep(b.cast(base, AddressSpace::kGeneric), index,
                    static_cast<uint64_t>(size), -size);
  std::string name = elem == Type::int32() ? "atomic_add_i32" : "atomic_add_i64";
  return b.intrinsic(name, lt, {b.cast(p, AddressSpace::kGlobal), call.args[2]});
}

size_t count_statements(const std::vector<hir::Stmt>& body) {
  size_t n = 0;
  for (const hir::Stmt& s : body) {
    n += 1 + count_statements(s.cond_body) + count_statements(s.body) +
         count_statements(s.else_body);
  }
  return n;
}

size_t count_generic_memory_ops(const lir::Module& m) {
  size_t n = 0;
  for (const lir::Function& f : m.functions) {
    for (const lir::Block& b : f.blocks) {
      for (const lir::Instr& in : b.instrs) {
        n += (in.op == Op::kLoad || in.op == Op::kStore) &&
             in.space == AddressSpace::kGeneric;
      }
    }
  }
  return n;
}

// Replaces each shared_alloc with a constant offset into the block's
// shared window. Returns the total size.
uint64_t place_shared(lir::Module& m, uint64_t limit) {
  uint64_t top = 0;
  for (lir::Function& f : m.functions) {
    for (lir::Block& b : f.blocks) {
      for (lir::Instr& in : b.instrs) {
        if (in.op != Op::kIntrinsic || in.callee != "shared_alloc") continue;
        uint64_t size = in.imm;
        top = (top + 15) / 16 * 16;
        in.op = Op::kConst;
        in.callee.clear();
        in.imm = top;
        top += size;
      }
    }
  }
  if (top > limit) {
    throw Error(ErrorKind::kCodegen,
                fmt::format("kernel needs {} bytes of shared memory, limit {}",
                            top, limit));
  }
  return top;
}

void layout_params(CompiledKernel& k) {
  const lir::Function& entry = k.entry();
  size_t lir_index = 0;
  uint64_t offset = 0;
  for (size_t i = 0; i < k.arg_types.size(); ++i) {
    Type t = k.arg_types[i];
    if (!lir::lir_type_of(t)) continue;
    const lir::Param& p = entry.params.at(lir_index++);
    ParamSlot slot;
    slot.source_arg = i;
    slot.type = t;
    if (p.byval_size > 0) {
      slot.kind = ParamSlot::Kind::kByValue;
      slot.size = p.byval_size;
    } else if (lir::is_memory_aggregate(t)) {
      slot.kind = ParamSlot::Kind::kByReference;
      slot.size = 8;
    } else {
      slot.size = p.type.size();
    }
    offset = (offset + 7) / 8 * 8;
    slot.offset = offset;
    offset += slot.size;
    k.params.push_back(slot);
  }
  k.param_bytes = (offset + 7) / 8 * 8;
}

std::string describe_violations(const std::vector<Violation>& vs) {
  std::string out = "device validation failed:";
  for (const Violation& v : vs) {
    out += fmt::format("\n  @{}: {}", v.function, v.message);
    if (v.span.valid()) out += " at " + v.span.str();
  }
  return out;
}

}  // namespace

DeviceTargetConfig::DeviceTargetConfig() {
  inference.allow_any = false;
  codegen.exception_policy = lir::ExceptionPolicy::kTrap;
  codegen.allocation_policy = lir::AllocationPolicy::kForbid;
}

DeviceTarget::DeviceTarget(DeviceTargetConfig config)
    : config_(std::move(config)) {
  config_.passes.max_inline_depth = config_.inference.max_inline_depth;
  config_.passes.pure_intrinsic = [](std::string_view name) {
    const IntrinsicInfo* info = find_intrinsic(name);
    return info && info->pure;
  };
}

hir::InferenceHooks DeviceTarget::inference_hooks() const {
  hir::InferenceHooks h;
  h.resolve_call = [](std::string_view name, const std::vector<Type>& types) {
    return device_stdlib().find(name, types);
  };
  h.resolve_intrinsic = [](std::string_view name,
                           const std::vector<Type>& types) {
    if (auto t = intrinsic_source_type(name, types)) return t;
    return pseudo_intrinsic_type(name, types);
  };
  h.knows_name = [](std::string_view name) {
    const MethodTable& lib = device_stdlib();
    if (lib.has_function(name) || lib.records().find(name)) return true;
    if (is_pseudo_intrinsic(name)) return true;
    const IntrinsicInfo* info = find_intrinsic(name);
    return info && info->source_visible;
  };
  return h;
}

lir::CodegenHooks DeviceTarget::codegen_hooks() const {
  lir::CodegenHooks h;
  h.lower_alloc = [](IrBuilder&, Type t, const std::vector<ValueId>&,
                     SourceSpan span) -> std::optional<ValueId> {
    throw Error(ErrorKind::kCodegen,
                fmt::format("device allocation forbidden: {}", t.str()), span);
  };
  h.lower_intrinsic = [](IrBuilder& b, const lir::IntrinsicCall& call)
      -> std::optional<ValueId> {
    if (call.name == kSharedArray) return lower_shared_array(b, call);
    if (call.name == kShflDown) return lower_shfl_down(b, call);
    if (call.name == kAtomicAdd) return lower_atomic_add(b, call);
    return std::nullopt;
  };
  return h;
}

lir::PassOptions DeviceTarget::pass_options() const { return config_.passes; }

InterpreterOptions DeviceTarget::reference_options(
    const ThreadPosition& pos) const {
  InterpreterOptions opts;
  opts.overlay = &device_stdlib();
  opts.builtin_hook = [pos](std::string_view name,
                            const std::vector<Value>& args,
                            SourceSpan span) -> std::optional<Value> {
    auto axis = [&](std::string_view prefix, const Dim3i& d)
        -> std::optional<Value> {
      if (name.size() != prefix.size() + 1 || name.substr(0, prefix.size()) != prefix) {
        return std::nullopt;
      }
      switch (name.back()) {
        case 'x': return Value::of_i32(static_cast<int32_t>(d.x));
        case 'y': return Value::of_i32(static_cast<int32_t>(d.y));
        case 'z': return Value::of_i32(static_cast<int32_t>(d.z));
        default: return std::nullopt;
      }
    };
    if (args.empty()) {
      if (auto v = axis("thread_idx_", pos.thread)) return v;
      if (auto v = axis("block_idx_", pos.block)) return v;
      if (auto v = axis("block_dim_", pos.block_dim)) return v;
      if (auto v = axis("grid_dim_", pos.grid_dim)) return v;
      if (name == "warpsize") return Value::of_i64(pos.warp_size);
      if (name == "barrier") return Value::nothing();
    }
    std::vector<Type> types;
    for (const Value& a : args) types.push_back(a.type);
    if (const IntrinsicInfo* info = find_intrinsic(name)) {
      if (info->source_visible && intrinsic_source_type(name, types)) {
        std::vector<uint64_t> bits;
        for (const Value& a : args) bits.push_back(a.bits);
        if (auto r = eval_math_intrinsic(name, bits)) {
          return Value::scalar(info->result.scalar(), *r);
        }
      }
    }
    if (name == kSharedArray && args.size() == 2 && args[1].is_scalar() &&
        args[1].type.is_integer()) {
      if (auto elem = shared_element(args[0].type)) {
        return Value::new_array(*elem, args[1].as_i64());
      }
    }
    if (name == kAtomicAdd && args.size() == 3 && args[0].type.is_array() &&
        args[1].is_scalar() && args[0].array->element == args[2].type &&
        args[2].type.is_integer()) {
      ArrayObject& arr = *args[0].array;
      int64_t i = args[1].as_i64();
      if (i < 1 || i > arr.length) {
        throw Error(ErrorKind::kBounds,
                    fmt::format("atomic_add index {} out of bounds 1:{}", i,
                                arr.length),
                    span);
      }
      Value old = arr.get(i - 1);
      ScalarKind k = old.kind();
      arr.set(i - 1, Value::scalar(k, *scalar::arith(scalar::ArithOp::kAdd, k,
                                                     old.bits, args[2].bits)));
      return old;
    }
    if (name == kShflDown || name == "shfl_down_u32") {
      throw Error(ErrorKind::kUnsupported,
                  fmt::format("{} has no sequential reference semantics", name),
                  span);
    }
    return std::nullopt;
  };
  return opts;
}

CompiledKernel compile_kernel(const MethodTable& table, std::string_view name,
                              const std::vector<Type>& arg_types,
                              const DeviceTarget& target,
                              CompileTrace* trace) {
  const DeviceTargetConfig& cfg = target.config();
  for (Type t : arg_types) {
    if (!device_representable(t)) {
      throw Error(ErrorKind::kUnsupported,
                  fmt::format("argument type {} of kernel {} is not "
                              "device-representable",
                              t.str(), name));
    }
  }
  compiler_counters().kernel_compiles++;
  hir::Specializer spec(table, cfg.inference, target.inference_hooks());
  auto fn = spec.specialize(name, arg_types);
  if (!fn->return_type.is_concrete() || !fn->return_type.type().is_nothing()) {
    throw Error(ErrorKind::kCodegen,
                fmt::format("kernel {} must return nothing, returns {}",
                            fn->signature(), fn->return_type.str()),
                fn->method->def->span);
  }

  CompiledKernel k;
  k.name = std::string(name);
  k.arg_types = arg_types;
  k.deps = fn->deps;
  k.warp_size = cfg.warp_size;
  k.stats.hir_statements = count_statements(fn->body);
  if (trace) trace->hir = hir::dump(*fn);

  k.module = lir::lower_hir(*fn, cfg.codegen, target.codegen_hooks());
  k.module.entry_function().attrs |= lir::kAttrKernel;
  for (const lir::Function& f : k.module.functions) {
    k.stats.lir_instructions_unoptimized += f.instruction_count();
  }
  if (trace) trace->lir = lir::print(k.module);
  if (cfg.rewrite_abi) lir::rewrite_kernel_abi(k.module);
  lir::run_passes(k.module, lir::default_pipeline(), target.pass_options());
  if (trace) trace->lir_opt = lir::print(k.module);
  if (cfg.infer_address_spaces) {
    for (lir::Function& f : k.module.functions) lir::infer_address_spaces(f);
    lir::verify(k.module, "infer-address-spaces");
  }
  k.shared_bytes = place_shared(k.module, cfg.max_shared_bytes);
  lir::verify(k.module, "shared placement");

  std::vector<Violation> violations = validate_device(k.module);
  if (!violations.empty()) {
    throw Error(ErrorKind::kCodegen, describe_violations(violations),
                violations.front().span);
  }
  layout_params(k);
  for (const lir::Function& f : k.module.functions) {
    k.stats.lir_instructions += f.instruction_count();
    k.stats.calls += lir::count_ops(f, Op::kCall);
  }
  k.stats.generic_memory_ops = count_generic_memory_ops(k.module);
  return k;
}

CompiledKernel compile_kernel(const MethodTable& table, std::string_view name,
                              const std::vector<Type>& arg_types,
                              const DeviceTargetConfig& config) {
  return compile_kernel(table, name, arg_types, DeviceTarget(config));
}

std::vector<Violation> validate_device(const lir::Module& module) {
  std::vector<Violation> out;
  std::map<std::string, std::set<std::string>> calls;
  for (const lir::Function& f : module.functions) {
    auto report = [&](std::string msg, SourceSpan span) {
      out.push_back({f.name, std::move(msg), span});
    };
    if (f.has(lir::kAttrKernel) && !f.ret.is_void()) {
      report("kernel entry must return void", f.span);
    }
    for (const lir::Block& b : f.blocks) {
      for (const lir::Instr& in : b.instrs) {
        switch (in.op) {
          case Op::kCallRuntime:
            if (in.callee.rfind("kf_alloc", 0) == 0) {
              report(fmt::format("dynamic allocation @{}", in.callee), in.span);
            } else {
              report(fmt::format("host runtime call @{}", in.callee), in.span);
            }
            break;
          case Op::kCall:
            calls[f.name].insert(in.callee);
            break;
          case Op::kStore:
            if (in.space == AddressSpace::kParam) {
              report("store to read-only param space", in.span);
            }
            break;
          case Op::kIntrinsic: {
            const IntrinsicInfo* info = find_intrinsic(in.callee);
            if (!info) {
              report(fmt::format("unknown intrinsic @{}", in.callee), in.span);
              break;
            }
            if (in.callee == "shared_alloc") {
              report("unplaced shared allocation", in.span);
              break;
            }
            bool ok = in.operands.size() == info->params.size() &&
                      in.type == info->result;
            for (size_t i = 0; ok && i < in.operands.size(); ++i) {
              ok = f.value_types[in.operands[i]] == info->params[i];
            }
            if (!ok) {
              report(in.callee == "shfl_down_u32"
                         ? std::string("shuffle of a value that is not a 32-bit word")
                         : fmt::format("intrinsic @{} has mismatched operands",
                                       in.callee),
                     in.span);
            }
            break;
          }
          default:
            break;
        }
      }
    }
  }
  // The device has no call stack growth beyond the static call graph.
  std::map<std::string, int> state;
  std::function<bool(const std::string&)> cyclic = [&](const std::string& fn) {
    int& s = state[fn];
    if (s == 1) return true;
    if (s == 2) return false;
    s = 1;
    for (const std::string& c : calls[fn]) {
      if (cyclic(c)) return true;
    }
    state[fn] = 2;
    return false;
  };
  for (const lir::Function& f : module.functions) {
    if (cyclic(f.name)) {
      out.push_back({f.name, "recursive call cycle", f.span});
      break;
    }
  }
  return out;
}

void run_reference_grid(const MethodTable& table, std::string_view name,
                        const std::vector<Value>& args, Dim3i grid,
                        Dim3i block, const DeviceTarget& target) {
  ThreadPosition pos;
  pos.block_dim = block;
  pos.grid_dim = grid;
  pos.warp_size = target.config().warp_size;
  for (pos.block.z = 0; pos.block.z < grid.z; ++pos.block.z) {
    for (pos.block.y = 0; pos.block.y < grid.y; ++pos.block.y) {
      for (pos.block.x = 0; pos.block.x < grid.x; ++pos.block.x) {
        for (pos.thread.z = 0; pos.thread.z < block.z; ++pos.thread.z) {
          for (pos.thread.y = 0; pos.thread.y < block.y; ++pos.thread.y) {
            for (pos.thread.x = 0; pos.thread.x < block.x; ++pos.thread.x) {
              interpret_reference(table, name, args,
                                  target.reference_options(pos));
            }
          }
        }
      }
    }
  }
}

}  // namespace kf::device
