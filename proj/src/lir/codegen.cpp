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

#include "kf/lir/codegen.hpp"

#include <fmt/format.h>

#include <deque>
#include <map>

#include "kf/support/instrumentation.hpp"

namespace kf::lir {

using hir::CallKind;
using hir::HirFunction;
using hir::RhsKind;
using hir::SlotId;
using hir::Stmt;
using hir::StmtKind;

std::optional<LirType> lir_type_of(Type t) {
  switch (t.kind()) {
    case TypeKind::kScalar:
      return LirType::of_scalar(t.scalar_kind());
    case TypeKind::kArray:
    case TypeKind::kDeviceArray:
    case TypeKind::kRecord:
      return LirType::ptr();
    case TypeKind::kDevAddr:
      return LirType::ptr(t.space());
    case TypeKind::kNothing:
    case TypeKind::kFunction:
    case TypeKind::kOpaque:
      return std::nullopt;
  }
  return std::nullopt;
}

bool is_memory_aggregate(Type t) { return t.is_immutable_aggregate(); }

namespace {

void collect_leaves(Type t, uint64_t base, std::vector<Leaf>& out) {
  switch (t.kind()) {
    case TypeKind::kScalar:
      out.push_back({base, LirType::of_scalar(t.scalar_kind())});
      return;
    case TypeKind::kArray:
      out.push_back({base, LirType::ptr()});
      return;
    case TypeKind::kDevAddr:
      out.push_back({base, LirType::ptr(t.space())});
      return;
    case TypeKind::kDeviceArray:
      out.push_back({base + kDescriptorBaseOffset, LirType::ptr(t.space())});
      out.push_back({base + kDescriptorLengthOffset, LirType::i64()});
      return;
    case TypeKind::kRecord:
      if (t.is_mutable_record()) {
        out.push_back({base, LirType::ptr()});
        return;
      }
      for (size_t i = 0; i < t.fields().size(); ++i) {
        collect_leaves(t.fields()[i], base + t.field_offset(i), out);
      }
      return;
    case TypeKind::kNothing:
      return;
    case TypeKind::kFunction:
    case TypeKind::kOpaque:
      throw Error(ErrorKind::kUnsupported,
                  fmt::format("values of type {} cannot be stored", t.str()));
  }
}

}  // namespace

std::vector<Leaf> leaves(Type t) {
  std::vector<Leaf> out;
  collect_leaves(t, 0, out);
  return out;
}

void emit_copy(IrBuilder& b, Type t, ValueId dst, AddressSpace dst_tag,
               ValueId src, AddressSpace src_tag) {
  for (const Leaf& leaf : leaves(t)) {
    int64_t off = static_cast<int64_t>(leaf.offset);
    ValueId v = b.load(leaf.type, b.gep(src, off), src_tag);
    b.store(v, b.gep(dst, off), dst_tag);
  }
}

ValueId make_aggregate(IrBuilder& b, Type t,
                       const std::vector<ValueId>& leaf_values) {
  auto ls = leaves(t);
  if (ls.size() != leaf_values.size()) {
    throw Error(ErrorKind::kCodegen,
                fmt::format("{} has {} leaves, got {} values", t.str(),
                            ls.size(), leaf_values.size()));
  }
  ValueId p = b.cast(b.alloca(std::max<uint64_t>(t.size_bytes(), 1)),
                     AddressSpace::kGeneric);
  for (size_t i = 0; i < ls.size(); ++i) {
    b.store(leaf_values[i], b.gep(p, static_cast<int64_t>(ls[i].offset)),
            AddressSpace::kGeneric);
  }
  return p;
}

namespace {

// Calling convention of one specialization.
struct Signature {
  std::vector<std::optional<size_t>> param_index;  // HIR param -> LIR param
  bool sret = false;
  LirType ret;
  std::vector<Param> params;
};

Type return_type_of(const HirFunction& fn) {
  if (fn.return_type.is_concrete()) return fn.return_type.type();
  return Type::nothing();
}

Signature signature_of(const HirFunction& fn) {
  Signature sig;
  if (fn.return_type.is_any()) {
    throw Error(ErrorKind::kUnsupported,
                fmt::format("{} has no concrete return type", fn.signature()),
                fn.method->def->span);
  }
  Type rt = return_type_of(fn);
  if (is_memory_aggregate(rt)) {
    sig.sret = true;
    sig.params.push_back(Param{"sret", LirType::ptr(), 0, Type::nothing()});
    sig.ret = LirType::void_();
  } else {
    sig.ret = lir_type_of(rt).value_or(LirType::void_());
  }
  for (size_t i = 0; i < fn.params.size(); ++i) {
    Type t = fn.arg_types[i];
    auto lt = lir_type_of(t);
    if (!lt) {
      sig.param_index.push_back(std::nullopt);
      continue;
    }
    sig.param_index.push_back(sig.params.size());
    Param p;
    p.name = fn.slots[fn.params[i]].name;
    p.type = *lt;
    if (is_memory_aggregate(t)) p.aggregate = t;
    sig.params.push_back(std::move(p));
  }
  return sig;
}

class ModuleLowerer;

class FunctionLowerer {
 public:
  FunctionLowerer(ModuleLowerer& module, const HirFunction& hir,
                  std::string name, const CodegenParams& params,
                  const CodegenHooks& hooks)
      : module_(module),
        hir_(hir),
        params_(params),
        hooks_(hooks),
        sig_(signature_of(hir)),
        fn_(new_function(std::move(name), sig_.params, sig_.ret)),
        b_(fn_) {}

  Function run();

 private:
  enum class Storage : uint8_t { kNone, kDirect, kHome };
  struct SlotInfo {
    Storage storage = Storage::kNone;
    Type type;
    bool aggregate = false;
    ValueId value = kNoValue;  // direct value, or home pointer
  };

  [[noreturn]] void unsupported(const std::string& what, SourceSpan span) {
    throw Error(ErrorKind::kUnsupported,
                fmt::format("{} (in {})", what, hir_.signature()), span);
  }

  void count_defs(const std::vector<Stmt>& body, std::vector<int>& defs) {
    for (const Stmt& s : body) {
      if (s.kind == StmtKind::kAssign) defs[s.dst]++;
      count_defs(s.cond_body, defs);
      count_defs(s.body, defs);
      count_defs(s.else_body, defs);
    }
  }

  void plan_slots();
  ValueId read(SlotId id);
  void write(SlotId id, ValueId v);

  void lower_body(const std::vector<Stmt>& body);
  void lower_stmt(const Stmt& s);
  ValueId lower_rhs(const Stmt& s);
  ValueId lower_call(const Stmt& s, const hir::Rhs& r,
                     const std::vector<ValueId>& args,
                     const std::vector<Type>& types);
  ValueId lower_builtin(const Stmt& s, const hir::Rhs& r,
                        const std::vector<ValueId>& args,
                        const std::vector<Type>& types);
  ValueId call_function(const std::shared_ptr<const HirFunction>& callee,
                        const std::vector<ValueId>& args);
  ValueId binary(ast::BinaryOp op, ValueId a, Type ta, ValueId b, Type tb,
                 SourceSpan span);
  ValueId arith(Op op, ValueId a, ValueId b, SourceSpan span);
  ValueId element_ptr(ValueId arr, Type arr_type, ValueId index,
                      SourceSpan span);
  ValueId allocate(Type type, const std::vector<ValueId>& args,
                   SourceSpan span);
  void implicit_error(int64_t code, const char* routine,
                      const std::vector<ValueId>& args);
  void explicit_throw(ValueId code, SourceSpan span);
  ValueId load_value(Type t, ValueId ptr);
  void store_value(Type t, ValueId value, ValueId ptr);
  ValueId math_runtime(const char* what, ScalarKind k,
                       const std::vector<ValueId>& args);

  ModuleLowerer& module_;
  const HirFunction& hir_;
  const CodegenParams& params_;
  const CodegenHooks& hooks_;
  Signature sig_;
  Function fn_;
  IrBuilder b_;
  std::vector<SlotInfo> slots_;
};

class ModuleLowerer {
 public:
  ModuleLowerer(const CodegenParams& params, const CodegenHooks& hooks)
      : params_(params), hooks_(hooks) {}

  Module run(const HirFunction& root) {
    Module m;
    m.entry = name_for(&root);
    pending_.push_back(&root);
    while (!pending_.empty()) {
      const HirFunction* fn = pending_.front();
      pending_.pop_front();
      FunctionLowerer lowerer(*this, *fn, names_.at(fn), params_, hooks_);
      Function out = lowerer.run();
      if (fn->method && fn->method->inline_always) {
        out.attrs |= kAttrInlineAlways;
      }
      m.functions.push_back(std::move(out));
    }
    return m;
  }

  std::string callee_name(const std::shared_ptr<const HirFunction>& fn) {
    auto it = names_.find(fn.get());
    if (it != names_.end()) return it->second;
    keep_alive_.push_back(fn);
    pending_.push_back(fn.get());
    return name_for(fn.get());
  }

 private:
  std::string name_for(const HirFunction* fn) {
    auto it = names_.find(fn);
    if (it != names_.end()) return it->second;
    std::string base = fn->mangled_name();
    std::string name = base;
    for (int n = 2; used_.count(name); ++n) name = fmt::format("{}.{}", base, n);
    used_[name] = true;
    names_[fn] = name;
    return name;
  }

  const CodegenParams& params_;
  const CodegenHooks& hooks_;
  std::map<const HirFunction*, std::string> names_;
  std::map<std::string, bool> used_;
  std::deque<const HirFunction*> pending_;
  std::vector<std::shared_ptr<const HirFunction>> keep_alive_;
};

void FunctionLowerer::plan_slots() {
  std::vector<int> defs(hir_.slots.size(), 0);
  count_defs(hir_.body, defs);
  slots_.resize(hir_.slots.size());
  for (SlotId id = 0; id < hir_.slots.size(); ++id) {
    const hir::Slot& s = hir_.slots[id];
    SlotInfo& info = slots_[id];
    if (s.type.is_bottom()) continue;
    if (s.type.is_any()) {
      if (defs[id] == 0 && s.kind != hir::SlotKind::kParam) continue;
      unsupported(fmt::format("slot {} has no concrete type", s.ref(id)),
                  s.span);
    }
    info.type = s.type.type();
    if (!lir_type_of(info.type)) continue;
    info.aggregate = is_memory_aggregate(info.type);
    bool direct = s.kind == hir::SlotKind::kParam ? defs[id] == 0
                  : s.kind == hir::SlotKind::kTemp ? defs[id] == 1
                                                   : false;
    info.storage = direct ? Storage::kDirect : Storage::kHome;
    if (info.storage == Storage::kHome) {
      uint64_t size = info.aggregate ? info.type.size_bytes()
                                     : lir_type_of(info.type)->size();
      ValueId home = b_.alloca(std::max<uint64_t>(size, 1));
      info.value = info.aggregate ? b_.cast(home, AddressSpace::kGeneric) : home;
    }
  }
  for (size_t i = 0; i < hir_.params.size(); ++i) {
    SlotId id = hir_.params[i];
    if (!sig_.param_index[i]) continue;
    ValueId pv = fn_.param_values[*sig_.param_index[i]];
    SlotInfo& info = slots_[id];
    if (info.storage == Storage::kDirect) {
      info.value = pv;
    } else if (info.storage == Storage::kHome) {
      write(id, pv);
    }
  }
}

ValueId FunctionLowerer::read(SlotId id) {
  const SlotInfo& info = slots_[id];
  switch (info.storage) {
    case Storage::kNone:
      return kNoValue;
    case Storage::kDirect:
      return info.value;
    case Storage::kHome:
      if (info.aggregate) return info.value;
      return b_.load(*lir_type_of(info.type), info.value, AddressSpace::kLocal);
  }
  return kNoValue;
}

void FunctionLowerer::write(SlotId id, ValueId v) {
  SlotInfo& info = slots_[id];
  switch (info.storage) {
    case Storage::kNone:
      return;
    case Storage::kDirect:
      info.value = v;
      return;
    case Storage::kHome:
      if (info.aggregate) {
        emit_copy(b_, info.type, info.value, AddressSpace::kGeneric, v,
                  AddressSpace::kGeneric);
      } else {
        b_.store(v, info.value, AddressSpace::kLocal);
      }
      return;
  }
}

Function FunctionLowerer::run() {
  fn_.span = hir_.method ? hir_.method->def->span : SourceSpan{};
  b_.set_span(fn_.span);
  plan_slots();
  lower_body(hir_.body);
  if (!b_.terminated()) {
    if (fn_.ret.is_void()) {
      b_.ret();
    } else {
      b_.unreachable();
    }
  }
  return std::move(fn_);
}

void FunctionLowerer::lower_body(const std::vector<Stmt>& body) {
  for (const Stmt& s : body) lower_stmt(s);
}

ValueId FunctionLowerer::load_value(Type t, ValueId ptr) {
  if (is_memory_aggregate(t)) {
    ValueId tmp = b_.cast(b_.alloca(std::max<uint64_t>(t.size_bytes(), 1)),
                          AddressSpace::kGeneric);
    emit_copy(b_, t, tmp, AddressSpace::kGeneric, ptr, AddressSpace::kGeneric);
    return tmp;
  }
  auto lt = lir_type_of(t);
  if (!lt) return kNoValue;
  return b_.load(*lt, ptr, AddressSpace::kGeneric);
}

void FunctionLowerer::store_value(Type t, ValueId value, ValueId ptr) {
  if (is_memory_aggregate(t)) {
    emit_copy(b_, t, ptr, AddressSpace::kGeneric, value, AddressSpace::kGeneric);
    return;
  }
  if (value == kNoValue) return;
  b_.store(value, ptr, AddressSpace::kGeneric);
}

void FunctionLowerer::lower_stmt(const Stmt& s) {
  // Code after a return or throw still gets lowered, into a block with no
  // predecessors that DCE later drops.
  if (b_.terminated()) b_.set_block(b_.create_block("dead"));
  b_.set_span(s.span);
  switch (s.kind) {
    case StmtKind::kAssign: {
      ValueId v = lower_rhs(s);
      if (!b_.terminated()) write(s.dst, v);
      return;
    }
    case StmtKind::kStoreIndex: {
      Type at = slots_[s.base].type;
      Type elem = at.element();
      ValueId value = read(s.value);
      ValueId ptr = element_ptr(read(s.base), at, read(s.index), s.span);
      if (elem.is_scalar()) {
        value = b_.convert(value, LirType::of_scalar(elem.scalar_kind()));
      }
      store_value(elem, value, ptr);
      return;
    }
    case StmtKind::kStoreField: {
      Type rt = slots_[s.base].type;
      size_t i = *rt.field_index(s.field);
      Type ft = rt.fields()[i];
      ValueId value = read(s.value);
      if (ft.is_scalar()) {
        value = b_.convert(value, LirType::of_scalar(ft.scalar_kind()));
      }
      ValueId ptr =
          b_.gep(read(s.base), static_cast<int64_t>(rt.field_offset(i)));
      store_value(ft, value, ptr);
      return;
    }
    case StmtKind::kIf: {
      ValueId c = read(s.cond);
      BlockId then_b = b_.create_block("if.then");
      BlockId else_b = s.else_body.empty() ? 0 : b_.create_block("if.else");
      BlockId join = b_.create_block("if.end");
      b_.condbr(c, then_b, s.else_body.empty() ? join : else_b);
      b_.set_block(then_b);
      lower_body(s.body);
      if (!b_.terminated()) b_.br(join);
      if (!s.else_body.empty()) {
        b_.set_block(else_b);
        lower_body(s.else_body);
        if (!b_.terminated()) b_.br(join);
      }
      b_.set_block(join);
      return;
    }
    case StmtKind::kWhile: {
      BlockId header = b_.create_block("while.cond");
      BlockId body = b_.create_block("while.body");
      BlockId exit = b_.create_block("while.end");
      b_.br(header);
      b_.set_block(header);
      lower_body(s.cond_body);
      b_.set_span(s.span);
      b_.condbr(read(s.cond), body, exit);
      b_.set_block(body);
      lower_body(s.body);
      if (!b_.terminated()) b_.br(header);
      b_.set_block(exit);
      return;
    }
    case StmtKind::kReturn: {
      ValueId v = s.ret ? read(*s.ret) : kNoValue;
      if (sig_.sret) {
        emit_copy(b_, return_type_of(hir_), fn_.param_values[0],
                  AddressSpace::kGeneric, v, AddressSpace::kGeneric);
        b_.ret();
      } else if (fn_.ret.is_void()) {
        b_.ret();
      } else {
        b_.ret(v);
      }
      return;
    }
  }
}

ValueId FunctionLowerer::lower_rhs(const Stmt& s) {
  const hir::Rhs& r = s.rhs;
  std::vector<ValueId> args;
  std::vector<Type> types;
  for (SlotId a : r.args) {
    args.push_back(read(a));
    types.push_back(slots_[a].type);
  }
  switch (r.kind) {
    case RhsKind::kConst: {
      Type t = r.constant.type;
      if (!t.is_scalar()) return kNoValue;
      return b_.const_bits(LirType::of_scalar(t.scalar_kind()), r.constant.bits);
    }
    case RhsKind::kCopy:
      return args[0];
    case RhsKind::kUnary:
      if (r.target.kind == CallKind::kMethod) {
        return call_function(r.target.callee, args);
      }
      if (r.unary_op == ast::UnaryOp::kNot) return b_.not_(args[0]);
      return b_.neg(args[0]);
    case RhsKind::kBinary:
      if (r.target.kind == CallKind::kMethod) {
        return call_function(r.target.callee, args);
      }
      return binary(r.binary_op, args[0], types[0], args[1], types[1], s.span);
    case RhsKind::kCall:
      return lower_call(s, r, args, types);
    case RhsKind::kIndex: {
      Type elem = types[0].element();
      ValueId ptr = element_ptr(args[0], types[0], args[1], s.span);
      return load_value(elem, ptr);
    }
    case RhsKind::kField: {
      Type rt = types[0];
      size_t i = *rt.field_index(r.name);
      Type ft = rt.fields()[i];
      ValueId ptr = b_.gep(args[0], static_cast<int64_t>(rt.field_offset(i)));
      if (is_memory_aggregate(ft)) return ptr;
      auto lt = lir_type_of(ft);
      if (!lt) return kNoValue;
      return b_.load(*lt, ptr, AddressSpace::kGeneric);
    }
  }
  return kNoValue;
}

ValueId FunctionLowerer::call_function(
    const std::shared_ptr<const HirFunction>& callee,
    const std::vector<ValueId>& args) {
  Signature sig = signature_of(*callee);
  std::string name = module_.callee_name(callee);
  std::vector<ValueId> operands;
  ValueId sret = kNoValue;
  if (sig.sret) {
    Type rt = return_type_of(*callee);
    sret = b_.cast(b_.alloca(std::max<uint64_t>(rt.size_bytes(), 1)),
                   AddressSpace::kGeneric);
    operands.push_back(sret);
  }
  for (size_t i = 0; i < sig.param_index.size(); ++i) {
    if (sig.param_index[i]) operands.push_back(args[i]);
  }
  ValueId r = b_.call(name, sig.ret, operands);
  return sig.sret ? sret : r;
}

ValueId FunctionLowerer::lower_call(const Stmt& s, const hir::Rhs& r,
                                    const std::vector<ValueId>& args,
                                    const std::vector<Type>& types) {
  const hir::CallTarget& t = r.target;
  switch (t.kind) {
    case CallKind::kMethod:
      return call_function(t.callee, args);
    case CallKind::kBuiltin:
      return lower_builtin(s, r, args, types);
    case CallKind::kRecordCtor: {
      Type rec = t.record;
      ValueId p;
      if (rec.is_mutable_record()) {
        p = allocate(rec, {}, s.span);
      } else {
        p = b_.cast(b_.alloca(std::max<uint64_t>(rec.size_bytes(), 1)),
                    AddressSpace::kGeneric);
      }
      for (size_t i = 0; i < rec.fields().size(); ++i) {
        ValueId fp = b_.gep(p, static_cast<int64_t>(rec.field_offset(i)));
        store_value(rec.fields()[i], args[i], fp);
      }
      return p;
    }
    case CallKind::kIntrinsic: {
      IntrinsicCall call;
      call.name = t.name.empty() ? r.name : t.name;
      call.arg_types = types;
      call.args = args;
      call.result = slots_[s.dst].type;
      call.span = s.span;
      if (hooks_.lower_intrinsic) {
        if (auto v = hooks_.lower_intrinsic(b_, call)) return *v;
      }
      if (is_memory_aggregate(call.result)) {
        unsupported(fmt::format("intrinsic {} returns an aggregate", call.name),
                    s.span);
      }
      std::vector<ValueId> operands;
      for (ValueId a : args) {
        if (a != kNoValue) operands.push_back(a);
      }
      LirType rt = lir_type_of(call.result).value_or(LirType::void_());
      return b_.intrinsic(call.name, rt, operands);
    }
    case CallKind::kDynamic:
    case CallKind::kUnresolved:
      unsupported(fmt::format("dynamic call to {} is not supported", r.name),
                  s.span);
  }
  return kNoValue;
}

ValueId FunctionLowerer::math_runtime(const char* what, ScalarKind k,
                                      const std::vector<ValueId>& args) {
  static constexpr const char* kSuffix[] = {"i1", "i32", "i64", "f32", "f64"};
  std::string name =
      fmt::format("kf_{}_{}", what, kSuffix[static_cast<int>(k)]);
  return b_.call_runtime(name, LirType::of_scalar(k), args);
}

ValueId FunctionLowerer::lower_builtin(const Stmt& s, const hir::Rhs& r,
                                       const std::vector<ValueId>& args,
                                       const std::vector<Type>& types) {
  std::string name = r.target.name.empty() ? r.name : r.target.name;
  Type rt = *builtins::result_type(name, types);
  switch (r.target.builtin) {
    case builtins::Builtin::kConvert:
      return b_.convert(args[0], LirType::of_scalar(rt.scalar_kind()));
    case builtins::Builtin::kLength:
      return b_.load(LirType::i64(),
                     b_.gep(args[0], kDescriptorLengthOffset),
                     AddressSpace::kGeneric);
    case builtins::Builtin::kIsa:
      return b_.const_bool(builtins::isa_type(types[0], types[1].symbol()));
    case builtins::Builtin::kZeros:
      return allocate(rt, {b_.convert(args[1], LirType::i64())}, s.span);
    case builtins::Builtin::kThrow:
      explicit_throw(b_.convert(args[0], LirType::i64()), s.span);
      return kNoValue;
    case builtins::Builtin::kAbs:
      return math_runtime("abs", rt.scalar_kind(), {args[0]});
    case builtins::Builtin::kSqrt:
      return math_runtime("sqrt", rt.scalar_kind(), {args[0]});
    case builtins::Builtin::kPow:
    case builtins::Builtin::kMin:
    case builtins::Builtin::kMax: {
      LirType lt = LirType::of_scalar(rt.scalar_kind());
      ValueId a = b_.convert(args[0], lt);
      ValueId c = b_.convert(args[1], lt);
      if (r.target.builtin == builtins::Builtin::kPow) {
        return math_runtime("pow", rt.scalar_kind(), {a, c});
      }
      ValueId less = b_.compare(Op::kCmpLt, c, a);
      if (r.target.builtin == builtins::Builtin::kMin) {
        return b_.select(less, c, a);
      }
      return b_.select(less, a, c);
    }
  }
  return kNoValue;
}

ValueId FunctionLowerer::arith(Op op, ValueId a, ValueId b, SourceSpan span) {
  LirType t = b_.type_of(a);
  if ((op == Op::kDiv || op == Op::kRem) && t.is_int()) {
    ValueId zero = b_.const_int(t, 0);
    ValueId bad = b_.compare(Op::kCmpEq, b, zero);
    BlockId fail = b_.create_block("div.zero");
    BlockId ok = b_.create_block("div.ok");
    b_.condbr(bad, fail, ok);
    b_.set_block(fail);
    implicit_error(kTrapDivide, "kf_divide_error", {});
    b_.set_block(ok);
  }
  return b_.binary(op, a, b);
}

ValueId FunctionLowerer::binary(ast::BinaryOp op, ValueId a, Type ta,
                                ValueId b, Type tb, SourceSpan span) {
  using ast::BinaryOp;
  if (op == BinaryOp::kAnd) return b_.binary(Op::kAnd, a, b);
  if (op == BinaryOp::kOr) return b_.binary(Op::kOr, a, b);
  ScalarKind k = *builtins::operand_kind(op, ta, tb);
  LirType lt = LirType::of_scalar(k);
  a = b_.convert(a, lt);
  b = b_.convert(b, lt);
  switch (op) {
    case BinaryOp::kEq: return b_.compare(Op::kCmpEq, a, b);
    case BinaryOp::kNe: return b_.compare(Op::kCmpNe, a, b);
    case BinaryOp::kLt: return b_.compare(Op::kCmpLt, a, b);
    case BinaryOp::kLe: return b_.compare(Op::kCmpLe, a, b);
    case BinaryOp::kGt: return b_.compare(Op::kCmpGt, a, b);
    case BinaryOp::kGe: return b_.compare(Op::kCmpGe, a, b);
    case BinaryOp::kAdd: return b_.binary(Op::kAdd, a, b);
    case BinaryOp::kSub: return b_.binary(Op::kSub, a, b);
    case BinaryOp::kMul: return b_.binary(Op::kMul, a, b);
    case BinaryOp::kDiv: return arith(Op::kDiv, a, b, span);
    case BinaryOp::kRem: return arith(Op::kRem, a, b, span);
    case BinaryOp::kPow: return math_runtime("pow", k, {a, b});
    default: break;
  }
  unsupported("unknown binary operator", span);
}

ValueId FunctionLowerer::element_ptr(ValueId arr, Type arr_type,
                                     ValueId index, SourceSpan span) {
  Type elem = arr_type.element();
  LirType base_type = arr_type.is_device_array()
                          ? LirType::ptr(arr_type.space())
                          : LirType::ptr();
  ValueId base = b_.load(base_type, arr, AddressSpace::kGeneric);
  ValueId i = b_.convert(index, LirType::i64());
  if (params_.emit_bounds_checks) {
    ValueId len = b_.load(LirType::i64(), b_.gep(arr, kDescriptorLengthOffset),
                          AddressSpace::kGeneric);
    ValueId lo = b_.compare(Op::kCmpGe, i, b_.const_int(LirType::i64(), 1));
    ValueId hi = b_.compare(Op::kCmpLe, i, len);
    ValueId ok = b_.binary(Op::kAnd, lo, hi);
    BlockId fail = b_.create_block("bounds.fail");
    BlockId cont = b_.create_block("bounds.ok");
    b_.condbr(ok, cont, fail);
    b_.set_block(fail);
    implicit_error(kTrapBounds, "kf_bounds_error", {i, len});
    b_.set_block(cont);
  }
  int64_t size = static_cast<int64_t>(elem.size_bytes());
  ValueId p = b_.cast(base, AddressSpace::kGeneric);
  return b_.gep(p, i, static_cast<uint64_t>(size), -size);
}

void FunctionLowerer::implicit_error(int64_t code, const char* routine,
                                     const std::vector<ValueId>& args) {
  if (params_.exception_policy == ExceptionPolicy::kRuntimeCall) {
    b_.call_runtime(routine, LirType::void_(), args);
    b_.unreachable();
  } else {
    b_.trap(b_.const_int(LirType::i64(), code));
  }
}

void FunctionLowerer::explicit_throw(ValueId code, SourceSpan span) {
  if (hooks_.lower_throw && hooks_.lower_throw(b_, code, span)) {
    if (!b_.terminated()) b_.unreachable();
    return;
  }
  switch (params_.exception_policy) {
    case ExceptionPolicy::kRuntimeCall:
      b_.call_runtime("kf_throw", LirType::void_(), {code});
      b_.unreachable();
      return;
    case ExceptionPolicy::kTrap:
      b_.trap(code);
      return;
    case ExceptionPolicy::kForbid:
      throw Error(ErrorKind::kCodegen,
                  fmt::format("exceptions are forbidden: throw at {} (in {})",
                              span.str(), hir_.signature()),
                  span);
  }
}

ValueId FunctionLowerer::allocate(Type type, const std::vector<ValueId>& args,
                                  SourceSpan span) {
  if (hooks_.lower_alloc) {
    if (auto v = hooks_.lower_alloc(b_, type, args, span)) return *v;
  }
  if (params_.allocation_policy == AllocationPolicy::kForbid) {
    throw Error(ErrorKind::kCodegen,
                fmt::format("allocation of {} is forbidden (in {})", type.str(),
                            hir_.signature()),
                span);
  }
  if (type.is_array()) {
    ValueId elem_size = b_.const_int(
        LirType::i64(), static_cast<int64_t>(type.element().size_bytes()));
    return b_.call_runtime("kf_alloc_array", LirType::ptr(),
                           {elem_size, args.at(0)});
  }
  uint64_t bytes = 0;
  for (const Type& f : type.fields()) bytes += f.size_bytes();
  ValueId size = b_.const_int(
      LirType::i64(), static_cast<int64_t>(std::max<uint64_t>(bytes, 1)));
  return b_.call_runtime("kf_alloc", LirType::ptr(), {size});
}

}  // namespace

Module lower_hir(const HirFunction& fn, const CodegenParams& params,
                 const CodegenHooks& hooks) {
  compiler_counters().codegen_runs++;
  ModuleLowerer lowerer(params, hooks);
  Module m = lowerer.run(fn);
  verify(m, "codegen");
  return m;
}

}  // namespace kf::lir
