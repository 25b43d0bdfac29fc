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

#include <map>
#include <set>

#include "kf/hir/inference.hpp"
#include "kf/support/instrumentation.hpp"

namespace kf::hir {

namespace {

void collect_assigned(const std::vector<ast::Stmt>& body,
                      std::vector<std::string>& names) {
  for (const auto& s : body) {
    if (s.kind == ast::StmtKind::kAssign &&
        s.target->kind == ast::ExprKind::kVar) {
      names.push_back(s.target->name);
    }
    collect_assigned(s.body, names);
    collect_assigned(s.else_body, names);
  }
}

bool falls_through(const std::vector<Stmt>& body) {
  if (body.empty()) return true;
  const Stmt& last = body.back();
  if (last.kind == StmtKind::kReturn) return false;
  if (last.kind == StmtKind::kIf) {
    return falls_through(last.body) || falls_through(last.else_body);
  }
  return true;
}

class Lowerer {
 public:
  Lowerer(MethodPtr method, const std::vector<Type>& arg_types,
          const MethodTable& table, const InferenceHooks& hooks)
      : table_(table), hooks_(hooks) {
    fn_.method = method;
    fn_.name = method->name;
    fn_.arg_types = arg_types;
  }

  HirFunction run() {
    const Method& m = *fn_.method;
    if (fn_.arg_types.size() != m.arity()) {
      throw Error(ErrorKind::kLowering,
                  fmt::format("{} takes {} arguments, got {}", m.name,
                              m.arity(), fn_.arg_types.size()),
                  m.def->span);
    }
    for (size_t i = 0; i < m.arity(); ++i) {
      SlotId id = add_slot(SlotKind::kParam, m.param_names[i],
                           m.def->params[i].span);
      fn_.slots[id].type = LatticeType::of(fn_.arg_types[i]);
      fn_.slots[id].observed.push_back(fn_.arg_types[i]);
      fn_.params.push_back(id);
      vars_[m.param_names[i]] = id;
    }
    std::vector<std::string> assigned;
    collect_assigned(m.def->body, assigned);
    for (const auto& name : assigned) {
      if (!vars_.count(name)) {
        vars_[name] = add_slot(SlotKind::kLocal, name, m.def->span);
      }
    }
    lower_block(m.def->body, fn_.body);
    fn_.may_fall_through = falls_through(fn_.body);
    return std::move(fn_);
  }

 private:
  SlotId add_slot(SlotKind kind, std::string name, SourceSpan span) {
    Slot s;
    s.kind = kind;
    s.name = std::move(name);
    s.span = span;
    fn_.slots.push_back(std::move(s));
    return static_cast<SlotId>(fn_.slots.size() - 1);
  }

  SlotId temp(SourceSpan span) { return add_slot(SlotKind::kTemp, "", span); }

  SlotId emit(Rhs rhs, SourceSpan span, std::vector<Stmt>& out,
              std::optional<SlotId> dst) {
    Stmt s;
    s.kind = StmtKind::kAssign;
    s.span = span;
    s.dst = dst ? *dst : temp(span);
    s.rhs = std::move(rhs);
    out.push_back(std::move(s));
    return out.back().dst;
  }

  bool known_global(const std::string& name) const {
    const Method& m = *fn_.method;
    return table_.has_function(name) || table_.records().find(name) ||
           (m.records && m.records->find(name)) ||
           builtins::is_builtin(name) || scalar_from_name(name) ||
           name == "Array" || name == "Nothing" ||
           (hooks_.knows_name && hooks_.knows_name(name));
  }

  SlotId lower_expr(const ast::Expr& e, std::vector<Stmt>& out,
                    std::optional<SlotId> dst = std::nullopt) {
    Rhs rhs;
    switch (e.kind) {
      case ast::ExprKind::kIntLit:
        rhs.constant = Value::of_i64(e.int_value);
        return emit(std::move(rhs), e.span, out, dst);
      case ast::ExprKind::kFloatLit:
        rhs.constant = e.literal_kind == ScalarKind::kFloat32
                           ? Value::of_f32(static_cast<float>(e.float_value))
                           : Value::of_f64(e.float_value);
        return emit(std::move(rhs), e.span, out, dst);
      case ast::ExprKind::kBoolLit:
        rhs.constant = Value::of_bool(e.bool_value);
        return emit(std::move(rhs), e.span, out, dst);
      case ast::ExprKind::kNothingLit:
        return emit(std::move(rhs), e.span, out, dst);
      case ast::ExprKind::kVar: {
        auto it = vars_.find(e.name);
        if (it != vars_.end()) {
          if (!dst) return it->second;
          rhs.kind = RhsKind::kCopy;
          rhs.args = {it->second};
          return emit(std::move(rhs), e.span, out, dst);
        }
        if (!known_global(e.name)) {
          throw Error(ErrorKind::kLowering,
                      fmt::format("undefined variable {}", e.name), e.span);
        }
        rhs.constant = Value::symbol(e.name);
        return emit(std::move(rhs), e.span, out, dst);
      }
      case ast::ExprKind::kUnary:
        rhs.kind = RhsKind::kUnary;
        rhs.unary_op = e.unary_op;
        rhs.args = {lower_expr(*e.args[0], out)};
        return emit(std::move(rhs), e.span, out, dst);
      case ast::ExprKind::kBinary: {
        if (e.binary_op == ast::BinaryOp::kAnd ||
            e.binary_op == ast::BinaryOp::kOr) {
          return lower_logical(e, out, dst);
        }
        SlotId a = lower_expr(*e.args[0], out);
        SlotId b = lower_expr(*e.args[1], out);
        if (e.binary_op == ast::BinaryOp::kPow) {
          rhs.kind = RhsKind::kCall;
          rhs.name = "pow";
        } else {
          rhs.kind = RhsKind::kBinary;
          rhs.binary_op = e.binary_op;
        }
        rhs.args = {a, b};
        return emit(std::move(rhs), e.span, out, dst);
      }
      case ast::ExprKind::kCall: {
        rhs.kind = RhsKind::kCall;
        rhs.name = e.name;
        auto it = vars_.find(e.name);
        if (it != vars_.end()) rhs.callee_slot = it->second;
        for (const auto& a : e.args) rhs.args.push_back(lower_expr(*a, out));
        return emit(std::move(rhs), e.span, out, dst);
      }
      case ast::ExprKind::kIndex: {
        SlotId base = lower_expr(*e.args[0], out);
        SlotId idx = lower_expr(*e.args[1], out);
        rhs.kind = RhsKind::kIndex;
        rhs.args = {base, idx};
        return emit(std::move(rhs), e.span, out, dst);
      }
      case ast::ExprKind::kField:
        rhs.kind = RhsKind::kField;
        rhs.name = e.name;
        rhs.args = {lower_expr(*e.args[0], out)};
        return emit(std::move(rhs), e.span, out, dst);
      case ast::ExprKind::kDotCall:
      case ast::ExprKind::kDotBinary:
        throw Error(ErrorKind::kUnsupported,
                    "broadcast expressions are only supported over device "
                    "arrays in host scripts",
                    e.span);
    }
    throw Error(ErrorKind::kLowering, "unknown expression", e.span);
  }

  // a && b  =>  t = a; if t { t = b }      a || b  =>  t = a; if !t { t = b }
  SlotId lower_logical(const ast::Expr& e, std::vector<Stmt>& out,
                       std::optional<SlotId> dst) {
    SlotId t = temp(e.span);
    lower_expr(*e.args[0], out, t);
    Stmt branch;
    branch.kind = StmtKind::kIf;
    branch.span = e.span;
    branch.cond = t;
    auto& rhs_side = e.binary_op == ast::BinaryOp::kAnd ? branch.body
                                                        : branch.else_body;
    lower_expr(*e.args[1], rhs_side, t);
    out.push_back(std::move(branch));
    if (!dst) return t;
    Rhs copy;
    copy.kind = RhsKind::kCopy;
    copy.args = {t};
    return emit(std::move(copy), e.span, out, dst);
  }

  void lower_block(const std::vector<ast::Stmt>& body, std::vector<Stmt>& out) {
    for (const auto& s : body) lower_stmt(s, out);
  }

  void lower_stmt(const ast::Stmt& s, std::vector<Stmt>& out) {
    switch (s.kind) {
      case ast::StmtKind::kExpr:
        lower_expr(*s.value, out);
        return;
      case ast::StmtKind::kAssign: {
        const ast::Expr& target = *s.target;
        if (target.kind == ast::ExprKind::kVar) {
          lower_expr(*s.value, out, vars_.at(target.name));
          return;
        }
        Stmt st;
        st.span = s.span;
        st.value = lower_expr(*s.value, out);
        st.base = lower_expr(*target.args[0], out);
        if (target.kind == ast::ExprKind::kIndex) {
          st.kind = StmtKind::kStoreIndex;
          st.index = lower_expr(*target.args[1], out);
        } else {
          st.kind = StmtKind::kStoreField;
          st.field = target.name;
        }
        out.push_back(std::move(st));
        return;
      }
      case ast::StmtKind::kIf: {
        Stmt st;
        st.kind = StmtKind::kIf;
        st.span = s.span;
        st.cond = lower_expr(*s.cond, out);
        lower_block(s.body, st.body);
        lower_block(s.else_body, st.else_body);
        out.push_back(std::move(st));
        return;
      }
      case ast::StmtKind::kWhile: {
        Stmt st;
        st.kind = StmtKind::kWhile;
        st.span = s.span;
        st.cond = lower_expr(*s.cond, st.cond_body);
        lower_block(s.body, st.body);
        out.push_back(std::move(st));
        return;
      }
      case ast::StmtKind::kReturn: {
        Stmt st;
        st.kind = StmtKind::kReturn;
        st.span = s.span;
        if (s.value) st.ret = lower_expr(*s.value, out);
        out.push_back(std::move(st));
        return;
      }
    }
  }

  HirFunction fn_;
  const MethodTable& table_;
  const InferenceHooks& hooks_;
  std::map<std::string, SlotId> vars_;
};

}  // namespace

HirFunction lower_ast(MethodPtr method, const std::vector<Type>& arg_types,
                      const MethodTable& table, const InferenceHooks& hooks) {
  compiler_counters().lowering_runs++;
  return Lowerer(std::move(method), arg_types, table, hooks).run();
}

}  // namespace kf::hir
