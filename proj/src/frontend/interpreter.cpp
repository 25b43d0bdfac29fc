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

#include "kf/frontend/interpreter.hpp"

#include <fmt/format.h>

#include <unordered_map>

#include "kf/frontend/builtins.hpp"

namespace kf {

namespace {

constexpr int kMaxDepth = 2000;

std::vector<Type> types_of(const std::vector<Value>& args) {
  std::vector<Type> out;
  for (const auto& a : args) out.push_back(a.type);
  return out;
}

int64_t index_of(const Value& idx, SourceSpan span) {
  if (!idx.type.is_integer()) {
    throw Error(ErrorKind::kNoMethod,
                fmt::format("array index must be an integer, got {}",
                            idx.type.str()),
                span);
  }
  return idx.as_i64();
}

void check_bounds(const ArrayObject& a, int64_t i, SourceSpan span) {
  if (i < 1 || i > a.length) {
    throw Error(ErrorKind::kBounds,
                fmt::format("index {} out of bounds for array of length {}", i,
                            a.length),
                span);
  }
}

bool require_bool(const Value& v, SourceSpan span) {
  if (!v.type.is_bool()) {
    throw Error(ErrorKind::kNoMethod,
                fmt::format("condition must be Bool, got {}", v.type.str()),
                span);
  }
  return v.as_bool();
}

}  // namespace

struct Interpreter::Frame {
  const Method* method = nullptr;
  std::unordered_map<std::string, Value> vars;
  Value result;
};

Interpreter::Interpreter(const MethodTable& table, InterpreterOptions options)
    : table_(table), options_(std::move(options)) {}

void Interpreter::tick(SourceSpan span) {
  ++steps_;
  if (options_.step_limit && steps_ > options_.step_limit) {
    throw Error(ErrorKind::kRuntime,
                fmt::format("step limit of {} exceeded", options_.step_limit),
                span);
  }
}

Value Interpreter::call(std::string_view name, const std::vector<Value>& args,
                        SourceSpan span) {
  return resolve_and_call(name, args, span, nullptr);
}

std::shared_ptr<const RecordDecl> Interpreter::find_record(
    std::string_view name, const Frame* f) const {
  if (f && f->method && f->method->records) {
    if (auto r = f->method->records->find(name)) return r;
  }
  if (auto r = table_.records().find(name)) return r;
  if (options_.overlay) return options_.overlay->records().find(name);
  return nullptr;
}

bool Interpreter::names_function(std::string_view name, const Frame* f) const {
  return (options_.overlay && options_.overlay->has_function(name)) ||
         table_.has_function(name) || find_record(name, f) ||
         builtins::is_builtin(name) || is_type_name(name, nullptr) ||
         name == "Array" || name == "Nothing";
}

Value Interpreter::resolve_and_call(std::string_view name,
                                    const std::vector<Value>& args,
                                    SourceSpan span, const Frame* f) {
  std::vector<Type> types = types_of(args);
  MethodPtr m;
  if (options_.overlay) m = options_.overlay->find(name, types, span);
  if (!m) m = table_.find(name, types, span);
  if (m) return invoke(*m, args);
  if (auto decl = find_record(name, f)) {
    Type t = instantiate_record(decl, types, span);
    return Value::new_record(t, args);
  }
  if (options_.builtin_hook) {
    if (auto v = options_.builtin_hook(name, args, span)) return *v;
  }
  if (builtins::is_builtin(name)) return builtins::evaluate(name, args, span);
  if ((options_.overlay && options_.overlay->has_function(name)) ||
      table_.has_function(name)) {
    throw Error(ErrorKind::kNoMethod,
                fmt::format("no method {}({})", name, join_types(types)), span);
  }
  throw Error(ErrorKind::kNoMethod, fmt::format("undefined function {}", name),
              span);
}

Value Interpreter::invoke(const Method& m, const std::vector<Value>& args) {
  struct DepthGuard {
    int& d;
    ~DepthGuard() { --d; }
  } guard{++depth_};
  if (depth_ > kMaxDepth) {
    throw Error(ErrorKind::kRuntime,
                fmt::format("call depth limit exceeded in {}", m.name),
                m.def->span);
  }
  Frame frame;
  frame.method = &m;
  for (size_t i = 0; i < args.size(); ++i) {
    frame.vars[m.param_names[i]] = args[i];
  }
  exec_block(m.def->body, frame);
  return frame.result;
}

Interpreter::Flow Interpreter::exec_block(const std::vector<ast::Stmt>& body,
                                          Frame& f) {
  for (const auto& s : body) {
    if (exec(s, f) == Flow::kReturn) return Flow::kReturn;
  }
  return Flow::kNormal;
}

Interpreter::Flow Interpreter::exec(const ast::Stmt& s, Frame& f) {
  tick(s.span);
  switch (s.kind) {
    case ast::StmtKind::kExpr:
      eval(*s.value, f);
      return Flow::kNormal;
    case ast::StmtKind::kAssign:
      assign(*s.target, eval(*s.value, f), f);
      return Flow::kNormal;
    case ast::StmtKind::kReturn:
      f.result = s.value ? eval(*s.value, f) : Value::nothing();
      return Flow::kReturn;
    case ast::StmtKind::kIf:
      if (require_bool(eval(*s.cond, f), s.cond->span)) {
        return exec_block(s.body, f);
      }
      return exec_block(s.else_body, f);
    case ast::StmtKind::kWhile:
      while (require_bool(eval(*s.cond, f), s.cond->span)) {
        if (exec_block(s.body, f) == Flow::kReturn) return Flow::kReturn;
        tick(s.span);
      }
      return Flow::kNormal;
  }
  return Flow::kNormal;
}

void Interpreter::assign(const ast::Expr& target, Value v, Frame& f) {
  switch (target.kind) {
    case ast::ExprKind::kVar:
      f.vars[target.name] = std::move(v);
      return;
    case ast::ExprKind::kIndex: {
      Value base = eval(*target.args[0], f);
      Value idx = eval(*target.args[1], f);
      if (!base.type.is_array()) {
        throw Error(ErrorKind::kNoMethod,
                    fmt::format("cannot index-assign into {}", base.type.str()),
                    target.span);
      }
      int64_t i = index_of(idx, target.args[1]->span);
      check_bounds(*base.array, i, target.span);
      Type elem = base.array->element;
      if (!builtins::assignable(v.type, elem)) {
        throw Error(ErrorKind::kNoMethod,
                    fmt::format("cannot store {} into an array of {}",
                                v.type.str(), elem.str()),
                    target.span);
      }
      base.array->set(i - 1, builtins::coerce(v, elem));
      return;
    }
    case ast::ExprKind::kField: {
      Value base = eval(*target.args[0], f);
      if (!base.type.is_mutable_record()) {
        throw Error(ErrorKind::kNoMethod,
                    fmt::format("cannot assign field {} of immutable {}",
                                target.name, base.type.str()),
                    target.span);
      }
      auto idx = base.type.field_index(target.name);
      if (!idx) {
        throw Error(ErrorKind::kNoMethod,
                    fmt::format("{} has no field {}", base.type.str(),
                                target.name),
                    target.span);
      }
      Type ft = base.type.fields()[*idx];
      if (!builtins::assignable(v.type, ft)) {
        throw Error(ErrorKind::kNoMethod,
                    fmt::format("cannot assign {} to field {} of type {}",
                                v.type.str(), target.name, ft.str()),
                    target.span);
      }
      base.record->fields[*idx] = builtins::coerce(v, ft);
      return;
    }
    default:
      throw Error(ErrorKind::kSyntax, "invalid assignment target", target.span);
  }
}

Value Interpreter::eval(const ast::Expr& e, Frame& f) {
  switch (e.kind) {
    case ast::ExprKind::kIntLit:
      return Value::of_i64(e.int_value);
    case ast::ExprKind::kFloatLit:
      return e.literal_kind == ScalarKind::kFloat32
                 ? Value::of_f32(static_cast<float>(e.float_value))
                 : Value::of_f64(e.float_value);
    case ast::ExprKind::kBoolLit:
      return Value::of_bool(e.bool_value);
    case ast::ExprKind::kNothingLit:
      return Value::nothing();
    case ast::ExprKind::kVar: {
      auto it = f.vars.find(e.name);
      if (it != f.vars.end()) return it->second;
      if (names_function(e.name, &f)) return Value::symbol(e.name);
      throw Error(ErrorKind::kLowering,
                  fmt::format("undefined variable {}", e.name), e.span);
    }
    case ast::ExprKind::kUnary:
      return builtins::unary(e.unary_op, eval(*e.args[0], f), e.span);
    case ast::ExprKind::kBinary: {
      if (e.binary_op == ast::BinaryOp::kAnd ||
          e.binary_op == ast::BinaryOp::kOr) {
        bool lhs = require_bool(eval(*e.args[0], f), e.args[0]->span);
        if (e.binary_op == ast::BinaryOp::kAnd ? !lhs : lhs) {
          return Value::of_bool(lhs);
        }
        return Value::of_bool(require_bool(eval(*e.args[1], f), e.args[1]->span));
      }
      Value a = eval(*e.args[0], f);
      Value b = eval(*e.args[1], f);
      if (e.binary_op != ast::BinaryOp::kPow &&
          builtins::binary_type(e.binary_op, a.type, b.type)) {
        return builtins::binary(e.binary_op, a, b, e.span);
      }
      return resolve_and_call(ast::operator_method_name(e.binary_op), {a, b},
                              e.span, &f);
    }
    case ast::ExprKind::kCall:
      return eval_call(e, f);
    case ast::ExprKind::kIndex: {
      Value base = eval(*e.args[0], f);
      Value idx = eval(*e.args[1], f);
      if (!base.type.is_array()) {
        throw Error(ErrorKind::kNoMethod,
                    fmt::format("cannot index into {}", base.type.str()),
                    e.span);
      }
      int64_t i = index_of(idx, e.args[1]->span);
      check_bounds(*base.array, i, e.span);
      return base.array->get(i - 1);
    }
    case ast::ExprKind::kField: {
      Value base = eval(*e.args[0], f);
      if (!base.type.is_record()) {
        throw Error(ErrorKind::kNoMethod,
                    fmt::format("{} has no fields", base.type.str()), e.span);
      }
      auto idx = base.type.field_index(e.name);
      if (!idx) {
        throw Error(ErrorKind::kNoMethod,
                    fmt::format("{} has no field {}", base.type.str(), e.name),
                    e.span);
      }
      return base.record->fields[*idx];
    }
    case ast::ExprKind::kDotCall:
    case ast::ExprKind::kDotBinary:
      return broadcast(e, f);
  }
  throw Error(ErrorKind::kUnsupported, "unknown expression", e.span);
}

Value Interpreter::eval_call(const ast::Expr& e, Frame& f) {
  std::string name = e.name;
  auto local = f.vars.find(name);
  if (local != f.vars.end()) {
    if (local->second.type.kind() != TypeKind::kFunction) {
      throw Error(ErrorKind::kNoMethod,
                  fmt::format("{} of type {} is not callable", name,
                              local->second.type.str()),
                  e.span);
    }
    name = local->second.type.symbol();
  }
  std::vector<Value> args;
  args.reserve(e.args.size());
  for (const auto& a : e.args) args.push_back(eval(*a, f));
  return resolve_and_call(name, args, e.span, &f);
}

Value Interpreter::broadcast(const ast::Expr& e, Frame& f) {
  std::vector<Value> args;
  for (const auto& a : e.args) args.push_back(eval(*a, f));
  int64_t n = -1;
  Type first_elem;
  for (const auto& a : args) {
    if (!a.type.is_array()) continue;
    if (n < 0) {
      n = a.array->length;
      first_elem = a.array->element;
    } else if (a.array->length != n) {
      throw Error(ErrorKind::kRuntime,
                  fmt::format("broadcast length mismatch: {} vs {}", n,
                              a.array->length),
                  e.span);
    }
  }
  std::string name = e.kind == ast::ExprKind::kDotCall
                         ? e.name
                         : std::string(ast::operator_method_name(e.binary_op));
  auto element = [&](int64_t i) {
    std::vector<Value> xs;
    for (const auto& a : args) {
      xs.push_back(a.type.is_array() ? a.array->get(i) : a);
    }
    if (e.kind == ast::ExprKind::kDotBinary &&
        e.binary_op != ast::BinaryOp::kPow &&
        builtins::binary_type(e.binary_op, xs[0].type, xs[1].type)) {
      return builtins::binary(e.binary_op, xs[0], xs[1], e.span);
    }
    return resolve_and_call(name, xs, e.span, &f);
  };
  if (n < 0) return element(0);
  if (n == 0) return Value::new_array(first_elem, 0);
  Value v0 = element(0);
  Value out = Value::new_array(v0.type, n);
  out.array->set(0, v0);
  for (int64_t i = 1; i < n; ++i) {
    Value vi = element(i);
    if (!(vi.type == v0.type)) {
      throw Error(ErrorKind::kNoMethod,
                  fmt::format("broadcast produced both {} and {}",
                              v0.type.str(), vi.type.str()),
                  e.span);
    }
    out.array->set(i, vi);
  }
  return out;
}

Value interpret_reference(const MethodTable& table, std::string_view entry,
                          const std::vector<Value>& args,
                          InterpreterOptions options) {
  Interpreter interp(table, std::move(options));
  return interp.call(entry, args);
}

}  // namespace kf
