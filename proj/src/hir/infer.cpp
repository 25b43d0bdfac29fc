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

#include "kf/hir/inference.hpp"
#include "kf/support/instrumentation.hpp"

namespace kf::hir {

namespace {

std::vector<Type> concrete_types(const std::vector<LatticeType>& ts) {
  std::vector<Type> out;
  for (const auto& t : ts) out.push_back(t.type());
  return out;
}

class Inferencer {
 public:
  Inferencer(HirFunction& fn, Specializer& spec) : fn_(fn), spec_(spec) {}

  void run() {
    do {
      changed_ = false;
      deps_.clear();
      block(fn_.body);
    } while (changed_);
    LatticeType ret = fn_.may_fall_through ? LatticeType::of(Type::nothing())
                                           : LatticeType::bottom();
    std::vector<Type> observed;
    if (fn_.may_fall_through) observed.push_back(Type::nothing());
    collect_returns(fn_.body, ret, observed);
    fn_.return_type = ret;
    check_reads(fn_.body);
    report_instability(observed);
    std::sort(deps_.begin(), deps_.end(), [](const Dependency& a,
                                             const Dependency& b) {
      return std::tie(a.name, a.method_id, a.age) <
             std::tie(b.name, b.method_id, b.age);
    });
    fn_.deps.clear();
    for (auto& d : deps_) {
      if (std::find(fn_.deps.begin(), fn_.deps.end(), d) == fn_.deps.end()) {
        fn_.deps.push_back(d);
      }
    }
    fn_.inferred = true;
  }

 private:
  const LatticeType& type_of(SlotId id) const { return fn_.slots[id].type; }

  void join_into(SlotId id, const LatticeType& t) {
    Slot& s = fn_.slots[id];
    if (t.is_concrete() &&
        std::find(s.observed.begin(), s.observed.end(), t.type()) ==
            s.observed.end()) {
      s.observed.push_back(t.type());
    }
    LatticeType joined = s.type.join(t);
    if (!(joined == s.type)) {
      s.type = joined;
      changed_ = true;
    }
  }

  [[noreturn]] void no_method(std::string_view name,
                              const std::vector<Type>& types,
                              SourceSpan span) const {
    throw Error(ErrorKind::kNoMethod,
                fmt::format("no method {}({}) (in {})", name, join_types(types),
                            fn_.signature()),
                span);
  }

  // Resolves a call on concrete argument types.
  LatticeType resolve(const std::string& name, const std::vector<Type>& types,
                      CallTarget& target, SourceSpan span) {
    target = CallTarget{};
    target.name = name;
    MethodPtr m = spec_.resolve_method(name, types, span);
    deps_.push_back({name, types, m ? m->id : 0, m ? m->age : 0});
    if (m) {
      target.kind = CallKind::kMethod;
      target.method = m;
      auto callee = spec_.specialize_method(m, types, span);
      if (!callee) {
        if (!spec_.params().allow_any) {
          throw Error(ErrorKind::kUnsupported,
                      fmt::format("recursive call {}({}) is not supported",
                                  name, join_types(types)),
                      span);
        }
        return LatticeType::any();
      }
      target.callee = callee;
      for (const auto& d : callee->deps) deps_.push_back(d);
      return callee->return_type;
    }
    const Method& self = *fn_.method;
    std::shared_ptr<const RecordDecl> decl;
    if (self.records) decl = self.records->find(name);
    if (!decl) decl = spec_.table().records().find(name);
    if (decl) {
      target.kind = CallKind::kRecordCtor;
      target.record = instantiate_record(decl, types, span);
      return LatticeType::of(target.record);
    }
    const InferenceHooks& hooks = spec_.hooks();
    if (hooks.resolve_intrinsic) {
      if (auto t = hooks.resolve_intrinsic(name, types)) {
        target.kind = CallKind::kIntrinsic;
        return LatticeType::of(*t);
      }
    }
    if (auto b = builtins::lookup(name)) {
      auto t = builtins::result_type(name, types);
      if (!t) no_method(name, types, span);
      target.kind = CallKind::kBuiltin;
      target.builtin = *b;
      return LatticeType::of(*t);
    }
    if (spec_.table().has_function(name)) no_method(name, types, span);
    throw Error(ErrorKind::kNoMethod,
                fmt::format("undefined function {} (in {})", name,
                            fn_.signature()),
                span);
  }

  // Returns Bottom if an operand is not yet typed.
  LatticeType eval(Rhs& r, SourceSpan span) {
    std::vector<LatticeType> args;
    bool any = false;
    for (SlotId a : r.args) {
      if (type_of(a).is_bottom()) return LatticeType::bottom();
      any = any || type_of(a).is_any();
      args.push_back(type_of(a));
    }
    if (r.callee_slot) {
      const LatticeType& f = type_of(*r.callee_slot);
      if (f.is_bottom()) return LatticeType::bottom();
      any = any || f.is_any();
    }
    if (any && r.kind != RhsKind::kCopy) {
      r.target = CallTarget{};
      r.target.kind = CallKind::kDynamic;
      return LatticeType::any();
    }
    switch (r.kind) {
      case RhsKind::kConst:
        return LatticeType::of(r.constant.type);
      case RhsKind::kCopy:
        return args[0];
      case RhsKind::kUnary: {
        Type a = args[0].type();
        if (auto t = builtins::unary_type(r.unary_op, a)) {
          r.target = CallTarget{};
          return LatticeType::of(*t);
        }
        return resolve(std::string(ast::unary_op_token(r.unary_op)), {a},
                       r.target, span);
      }
      case RhsKind::kBinary: {
        Type a = args[0].type();
        Type b = args[1].type();
        if (auto t = builtins::binary_type(r.binary_op, a, b)) {
          r.target = CallTarget{};
          return LatticeType::of(*t);
        }
        return resolve(std::string(ast::operator_method_name(r.binary_op)),
                       {a, b}, r.target, span);
      }
      case RhsKind::kCall: {
        std::string name = r.name;
        if (r.callee_slot) {
          Type f = type_of(*r.callee_slot).type();
          if (f.kind() != TypeKind::kFunction) {
            throw Error(ErrorKind::kNoMethod,
                        fmt::format("{} of type {} is not callable", r.name,
                                    f.str()),
                        span);
          }
          name = f.symbol();
        }
        return resolve(name, concrete_types(args), r.target, span);
      }
      case RhsKind::kIndex: {
        Type base = args[0].type();
        Type idx = args[1].type();
        if (!(base.is_array() || base.is_device_array()) || !idx.is_integer()) {
          no_method("getindex", {base, idx}, span);
        }
        return LatticeType::of(base.element());
      }
      case RhsKind::kField: {
        Type base = args[0].type();
        auto i = base.is_record() ? base.field_index(r.name) : std::nullopt;
        if (!i) {
          throw Error(ErrorKind::kNoMethod,
                      fmt::format("{} has no field {}", base.str(), r.name),
                      span);
        }
        return LatticeType::of(base.fields()[*i]);
      }
    }
    return LatticeType::bottom();
  }

  void check_store(const Stmt& s) {
    const LatticeType& base = type_of(s.base);
    const LatticeType& value = type_of(s.value);
    if (base.is_bottom() || value.is_bottom()) return;
    if (base.is_any() || value.is_any()) return;
    Type b = base.type();
    Type v = value.type();
    if (s.kind == StmtKind::kStoreIndex) {
      const LatticeType& idx = type_of(s.index);
      if (idx.is_bottom() || idx.is_any()) return;
      if (!(b.is_array() || b.is_device_array()) || !idx.type().is_integer()) {
        no_method("setindex", {b, v, idx.type()}, s.span);
      }
      if (!builtins::assignable(v, b.element())) {
        throw Error(ErrorKind::kNoMethod,
                    fmt::format("cannot store {} into an array of {}", v.str(),
                                b.element().str()),
                    s.span);
      }
      return;
    }
    if (!b.is_mutable_record()) {
      throw Error(ErrorKind::kNoMethod,
                  fmt::format("cannot assign field {} of immutable {}",
                              s.field, b.str()),
                  s.span);
    }
    auto i = b.field_index(s.field);
    if (!i) {
      throw Error(ErrorKind::kNoMethod,
                  fmt::format("{} has no field {}", b.str(), s.field), s.span);
    }
    if (!builtins::assignable(v, b.fields()[*i])) {
      throw Error(ErrorKind::kNoMethod,
                  fmt::format("cannot assign {} to field {} of type {}",
                              v.str(), s.field, b.fields()[*i].str()),
                  s.span);
    }
  }

  void check_cond(SlotId cond, SourceSpan span) {
    const LatticeType& t = type_of(cond);
    if (t.is_concrete() && !t.type().is_bool()) {
      throw Error(ErrorKind::kNoMethod,
                  fmt::format("condition must be Bool, got {}", t.type().str()),
                  span);
    }
  }

  void block(std::vector<Stmt>& body) {
    for (Stmt& s : body) {
      switch (s.kind) {
        case StmtKind::kAssign: {
          LatticeType t = eval(s.rhs, s.span);
          if (!t.is_bottom()) join_into(s.dst, t);
          break;
        }
        case StmtKind::kStoreIndex:
        case StmtKind::kStoreField:
          check_store(s);
          break;
        case StmtKind::kIf:
          check_cond(s.cond, s.span);
          block(s.body);
          block(s.else_body);
          break;
        case StmtKind::kWhile:
          block(s.cond_body);
          check_cond(s.cond, s.span);
          block(s.body);
          break;
        case StmtKind::kReturn:
          break;
      }
    }
  }

  void collect_returns(const std::vector<Stmt>& body, LatticeType& ret,
                       std::vector<Type>& observed) {
    for (const Stmt& s : body) {
      if (s.kind == StmtKind::kReturn) {
        LatticeType t =
            s.ret ? type_of(*s.ret) : LatticeType::of(Type::nothing());
        if (t.is_concrete() &&
            std::find(observed.begin(), observed.end(), t.type()) ==
                observed.end()) {
          observed.push_back(t.type());
        }
        ret = ret.join(t);
      }
      collect_returns(s.cond_body, ret, observed);
      collect_returns(s.body, ret, observed);
      collect_returns(s.else_body, ret, observed);
    }
  }

  void require_typed(SlotId id, SourceSpan span) const {
    if (!type_of(id).is_bottom()) return;
    const Slot& s = fn_.slots[id];
    std::string what = s.kind == SlotKind::kTemp
                           ? std::string("a value")
                           : fmt::format("variable {}", s.name);
    throw Error(ErrorKind::kLowering,
                fmt::format("{} is used before it is assigned (in {})", what,
                            fn_.signature()),
                span);
  }

  void check_reads(const std::vector<Stmt>& body) const {
    for (const Stmt& s : body) {
      switch (s.kind) {
        case StmtKind::kAssign:
          for (SlotId a : s.rhs.args) require_typed(a, s.span);
          if (s.rhs.callee_slot) require_typed(*s.rhs.callee_slot, s.span);
          break;
        case StmtKind::kStoreIndex:
          require_typed(s.index, s.span);
          [[fallthrough]];
        case StmtKind::kStoreField:
          require_typed(s.base, s.span);
          require_typed(s.value, s.span);
          break;
        case StmtKind::kIf:
          require_typed(s.cond, s.span);
          break;
        case StmtKind::kWhile:
          check_reads(s.cond_body);
          require_typed(s.cond, s.span);
          break;
        case StmtKind::kReturn:
          if (s.ret) require_typed(*s.ret, s.span);
          break;
      }
      check_reads(s.body);
      check_reads(s.else_body);
    }
  }

  void report_instability(const std::vector<Type>& ret_observed) {
    const InferenceHooks& hooks = spec_.hooks();
    const Slot* culprit = nullptr;
    for (const Slot& s : fn_.slots) {
      if (!s.type.is_any()) continue;
      if (hooks.on_unstable) hooks.on_unstable(fn_, s);
      if (!culprit || (culprit->observed.size() < 2 && s.observed.size() >= 2)) {
        culprit = &s;
      }
    }
    if (spec_.params().allow_any) return;
    auto describe = [](const std::vector<Type>& obs) {
      if (obs.size() < 2) return std::string("depends on a dynamic value");
      return fmt::format("joins {} to Any", join_types(obs));
    };
    if (culprit && culprit->kind != SlotKind::kTemp) {
      throw Error(ErrorKind::kInstability,
                  fmt::format("type instability in {}: variable {} {}",
                              fn_.signature(), culprit->name,
                              describe(culprit->observed)),
                  culprit->span);
    }
    if (fn_.return_type.is_any()) {
      throw Error(ErrorKind::kInstability,
                  fmt::format("type instability in {}: return value {}",
                              fn_.signature(), describe(ret_observed)),
                  fn_.method->def->span);
    }
    if (culprit) {
      throw Error(ErrorKind::kInstability,
                  fmt::format("type instability in {}: expression value {}",
                              fn_.signature(), describe(culprit->observed)),
                  culprit->span);
    }
  }

  HirFunction& fn_;
  Specializer& spec_;
  bool changed_ = false;
  std::vector<Dependency> deps_;
};

}  // namespace

void infer(HirFunction& fn, Specializer& spec) {
  compiler_counters().inference_runs++;
  Inferencer(fn, spec).run();
}

void infer(HirFunction& fn, const InferenceParams& params,
           const InferenceHooks& hooks, const MethodTable& table) {
  Specializer spec(table, params, hooks);
  infer(fn, spec);
}

bool Specializer::KeyLess::operator()(const Key& a, const Key& b) const {
  if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
  if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
  const auto& ta = std::get<2>(a);
  const auto& tb = std::get<2>(b);
  if (ta.size() != tb.size()) return ta.size() < tb.size();
  for (size_t i = 0; i < ta.size(); ++i) {
    if (ta[i] == tb[i]) continue;
    if (ta[i].hash() != tb[i].hash()) return ta[i].hash() < tb[i].hash();
    return ta[i].str() < tb[i].str();
  }
  return false;
}

Specializer::Specializer(const MethodTable& table, InferenceParams params,
                         InferenceHooks hooks)
    : table_(table), params_(params), hooks_(std::move(hooks)) {}

MethodPtr Specializer::resolve_method(std::string_view name,
                                      const std::vector<Type>& types,
                                      SourceSpan span) const {
  if (hooks_.resolve_call) {
    if (MethodPtr m = hooks_.resolve_call(name, types)) {
      if (!m->applicable(types) || m->name != name) {
        throw Error(ErrorKind::kNoMethod,
                    fmt::format("resolve_call hook returned {} for {}({})",
                                m->signature(), name, join_types(types)),
                    span);
      }
      return m;
    }
  }
  return table_.find(name, types, span);
}

bool Specializer::deps_current(const std::vector<Dependency>& deps) const {
  for (const auto& d : deps) {
    MethodPtr m;
    try {
      m = resolve_method(d.name, d.arg_types);
    } catch (const Error&) {
      return false;
    }
    uint64_t id = m ? m->id : 0;
    uint64_t age = m ? m->age : 0;
    if (id != d.method_id || age != d.age) return false;
  }
  return true;
}

std::shared_ptr<const HirFunction> Specializer::specialize(
    std::string_view name, const std::vector<Type>& types, SourceSpan span) {
  MethodPtr m = resolve_method(name, types, span);
  if (!m) {
    throw Error(ErrorKind::kNoMethod,
                fmt::format("no method {}({})", name, join_types(types)), span);
  }
  return specialize_method(m, types, span);
}

std::shared_ptr<const HirFunction> Specializer::specialize_method(
    MethodPtr method, const std::vector<Type>& types, SourceSpan span) {
  Key key{method->id, method->age, types};
  if (std::find(in_progress_.begin(), in_progress_.end(), key) !=
      in_progress_.end()) {
    return nullptr;
  }
  if (in_progress_.empty() && !params_.specialization_cache_enabled) {
    memo_.clear();
  }
  auto it = memo_.find(key);
  if (it != memo_.end()) {
    if (deps_current(it->second->deps)) return it->second;
    memo_.erase(it);
  }
  in_progress_.push_back(key);
  struct Pop {
    std::vector<Key>& v;
    ~Pop() { v.pop_back(); }
  } pop{in_progress_};
  auto fn = std::make_shared<HirFunction>(
      lower_ast(method, types, table_, hooks_));
  infer(*fn, *this);
  memo_[key] = fn;
  return fn;
}

}  // namespace kf::hir
