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

#include "kf/frontend/ast.hpp"

#include <fmt/format.h>

namespace kf::ast {

std::string_view binary_op_token(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return "+";
    case BinaryOp::kSub: return "-";
    case BinaryOp::kMul: return "*";
    case BinaryOp::kDiv: return "/";
    case BinaryOp::kRem: return "%";
    case BinaryOp::kPow: return "^";
    case BinaryOp::kEq: return "==";
    case BinaryOp::kNe: return "!=";
    case BinaryOp::kLt: return "<";
    case BinaryOp::kLe: return "<=";
    case BinaryOp::kGt: return ">";
    case BinaryOp::kGe: return ">=";
    case BinaryOp::kAnd: return "&&";
    case BinaryOp::kOr: return "||";
  }
  return "?";
}

std::string_view unary_op_token(UnaryOp op) {
  return op == UnaryOp::kNeg ? "-" : "!";
}

bool is_arithmetic(BinaryOp op) {
  return op == BinaryOp::kAdd || op == BinaryOp::kSub ||
         op == BinaryOp::kMul || op == BinaryOp::kDiv ||
         op == BinaryOp::kRem || op == BinaryOp::kPow;
}

bool is_comparison(BinaryOp op) {
  return op == BinaryOp::kEq || op == BinaryOp::kNe || op == BinaryOp::kLt ||
         op == BinaryOp::kLe || op == BinaryOp::kGt || op == BinaryOp::kGe;
}

std::string_view operator_method_name(BinaryOp op) {
  if (op == BinaryOp::kPow) return "pow";
  return binary_op_token(op);
}

ExprPtr Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->span = span;
  e->int_value = int_value;
  e->float_value = float_value;
  e->bool_value = bool_value;
  e->literal_kind = literal_kind;
  e->name = name;
  e->unary_op = unary_op;
  e->binary_op = binary_op;
  for (const auto& a : args) e->args.push_back(a->clone());
  return e;
}

std::string TypeExpr::str() const {
  if (params.empty()) return name;
  std::string out = name + "{";
  for (size_t i = 0; i < params.size(); ++i) {
    if (i) out += ",";
    out += params[i].str();
  }
  return out + "}";
}

std::vector<std::shared_ptr<const FunctionDef>> Program::functions() const {
  std::vector<std::shared_ptr<const FunctionDef>> out;
  for (const auto& item : items) {
    if (auto* f = std::get_if<std::shared_ptr<const FunctionDef>>(&item)) {
      out.push_back(*f);
    }
  }
  return out;
}

std::vector<const RecordDef*> Program::records() const {
  std::vector<const RecordDef*> out;
  for (const auto& item : items) {
    if (auto* r = std::get_if<RecordDef>(&item)) out.push_back(r);
  }
  return out;
}

namespace {

std::string float_text(double v, ScalarKind kind) {
  std::string s = kind == ScalarKind::kFloat32
                      ? fmt::format("{}", static_cast<float>(v))
                      : fmt::format("{}", v);
  size_t e = s.find('e');
  if (kind == ScalarKind::kFloat32) {
    if (e != std::string::npos) {
      s[e] = 'f';
      if (s.find('.') == std::string::npos) s.insert(e, ".0");
      return s;
    }
    if (s.find('.') == std::string::npos) s += ".0";
    return s + "f0";
  }
  if (s.find('.') == std::string::npos) {
    if (e == std::string::npos) return s + ".0";
    s.insert(e, ".0");
  }
  return s;
}

void sexpr(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::kIntLit:
      out += fmt::format("(int {})", e.int_value);
      return;
    case ExprKind::kFloatLit:
      out += fmt::format("({} {})", scalar_name(e.literal_kind),
                         float_text(e.float_value, e.literal_kind));
      return;
    case ExprKind::kBoolLit:
      out += e.bool_value ? "true" : "false";
      return;
    case ExprKind::kNothingLit:
      out += "nothing";
      return;
    case ExprKind::kVar:
      out += e.name;
      return;
    case ExprKind::kUnary:
      out += fmt::format("({} ", unary_op_token(e.unary_op));
      break;
    case ExprKind::kBinary:
      out += fmt::format("({} ", binary_op_token(e.binary_op));
      break;
    case ExprKind::kDotBinary:
      out += fmt::format("(.{} ", binary_op_token(e.binary_op));
      break;
    case ExprKind::kCall:
      out += fmt::format("(call {}", e.name);
      if (!e.args.empty()) out += " ";
      break;
    case ExprKind::kDotCall:
      out += fmt::format("(dotcall {}", e.name);
      if (!e.args.empty()) out += " ";
      break;
    case ExprKind::kIndex:
      out += "(index ";
      break;
    case ExprKind::kField:
      out += "(field ";
      break;
  }
  for (size_t i = 0; i < e.args.size(); ++i) {
    if (i) out += " ";
    sexpr(*e.args[i], out);
  }
  if (e.kind == ExprKind::kField) out += " " + e.name;
  out += ")";
}

void sexpr_block(const std::vector<Stmt>& body, int indent, std::string& out);

void sexpr_stmt(const Stmt& s, int indent, std::string& out) {
  std::string pad(indent * 2, ' ');
  switch (s.kind) {
    case StmtKind::kExpr:
      out += pad + "(expr ";
      sexpr(*s.value, out);
      out += ")\n";
      return;
    case StmtKind::kAssign:
      out += pad + "(= ";
      sexpr(*s.target, out);
      out += " ";
      sexpr(*s.value, out);
      out += ")\n";
      return;
    case StmtKind::kReturn:
      out += pad + "(return";
      if (s.value) {
        out += " ";
        sexpr(*s.value, out);
      }
      out += ")\n";
      return;
    case StmtKind::kWhile:
      out += pad + "(while ";
      sexpr(*s.cond, out);
      out += "\n";
      sexpr_block(s.body, indent + 1, out);
      out += pad + ")\n";
      return;
    case StmtKind::kIf:
      out += pad + "(if ";
      sexpr(*s.cond, out);
      out += "\n";
      sexpr_block(s.body, indent + 1, out);
      if (!s.else_body.empty()) {
        out += pad + " else\n";
        sexpr_block(s.else_body, indent + 1, out);
      }
      out += pad + ")\n";
      return;
  }
}

void sexpr_block(const std::vector<Stmt>& body, int indent, std::string& out) {
  for (const auto& s : body) sexpr_stmt(s, indent, out);
}

void source(const Expr& e, std::string& out) {
  auto list = [&](size_t from) {
    for (size_t i = from; i < e.args.size(); ++i) {
      if (i > from) out += ", ";
      source(*e.args[i], out);
    }
  };
  switch (e.kind) {
    case ExprKind::kIntLit:
      out += std::to_string(e.int_value);
      return;
    case ExprKind::kFloatLit:
      out += float_text(e.float_value, e.literal_kind);
      return;
    case ExprKind::kBoolLit:
      out += e.bool_value ? "true" : "false";
      return;
    case ExprKind::kNothingLit:
      out += "nothing";
      return;
    case ExprKind::kVar:
      out += e.name;
      return;
    case ExprKind::kUnary:
      out += "(";
      out += unary_op_token(e.unary_op);
      source(*e.args[0], out);
      out += ")";
      return;
    case ExprKind::kBinary:
    case ExprKind::kDotBinary:
      out += "(";
      source(*e.args[0], out);
      out += e.kind == ExprKind::kDotBinary ? " ." : " ";
      out += binary_op_token(e.binary_op);
      out += " ";
      source(*e.args[1], out);
      out += ")";
      return;
    case ExprKind::kCall:
      out += e.name + "(";
      list(0);
      out += ")";
      return;
    case ExprKind::kDotCall:
      out += e.name + ".(";
      list(0);
      out += ")";
      return;
    case ExprKind::kIndex:
      source(*e.args[0], out);
      out += "[";
      source(*e.args[1], out);
      out += "]";
      return;
    case ExprKind::kField:
      source(*e.args[0], out);
      out += "." + e.name;
      return;
  }
}

void source_block(const std::vector<Stmt>& body, int indent, std::string& out);

void source_stmt(const Stmt& s, int indent, std::string& out) {
  std::string pad(indent * 2, ' ');
  switch (s.kind) {
    case StmtKind::kExpr:
      out += pad;
      source(*s.value, out);
      out += "\n";
      return;
    case StmtKind::kAssign:
      out += pad;
      source(*s.target, out);
      out += " = ";
      source(*s.value, out);
      out += "\n";
      return;
    case StmtKind::kReturn:
      out += pad + "return";
      if (s.value) {
        out += " ";
        source(*s.value, out);
      }
      out += "\n";
      return;
    case StmtKind::kWhile:
      out += pad + "while ";
      source(*s.cond, out);
      out += "\n";
      source_block(s.body, indent + 1, out);
      out += pad + "end\n";
      return;
    case StmtKind::kIf:
      out += pad + "if ";
      source(*s.cond, out);
      out += "\n";
      source_block(s.body, indent + 1, out);
      if (!s.else_body.empty()) {
        out += pad + "else\n";
        source_block(s.else_body, indent + 1, out);
      }
      out += pad + "end\n";
      return;
  }
}

void source_block(const std::vector<Stmt>& body, int indent, std::string& out) {
  for (const auto& s : body) source_stmt(s, indent, out);
}

}  // namespace

std::string dump_sexpr(const Expr& expr) {
  std::string out;
  sexpr(expr, out);
  return out;
}

std::string dump_sexpr(const Program& program) {
  std::string out;
  for (const auto& item : program.items) {
    if (auto* r = std::get_if<RecordDef>(&item)) {
      out += fmt::format("({}record {}", r->is_mutable ? "mutable " : "",
                         r->name);
      for (size_t i = 0; i < r->fields.size(); ++i) {
        out += " " + r->fields[i];
        if (r->field_types[i]) out += ":" + r->field_types[i]->str();
      }
      out += ")\n";
      continue;
    }
    const auto& f = *std::get<std::shared_ptr<const FunctionDef>>(item);
    out += "(function " + f.name + " (";
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i) out += " ";
      out += f.params[i].name;
      if (f.params[i].type) out += ":" + f.params[i].type->str();
    }
    out += ")\n";
    sexpr_block(f.body, 1, out);
    out += ")\n";
  }
  return out;
}

std::string to_source(const Expr& expr) {
  std::string out;
  source(expr, out);
  return out;
}

std::string to_source(const Program& program) {
  std::string out;
  for (const auto& item : program.items) {
    if (auto* r = std::get_if<RecordDef>(&item)) {
      out += fmt::format("{}record {}\n", r->is_mutable ? "mutable " : "",
                         r->name);
      for (size_t i = 0; i < r->fields.size(); ++i) {
        out += "  " + r->fields[i];
        if (r->field_types[i]) out += ": " + r->field_types[i]->str();
        out += "\n";
      }
      out += "end\n\n";
      continue;
    }
    const auto& f = *std::get<std::shared_ptr<const FunctionDef>>(item);
    out += "function " + f.name + "(";
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i) out += ", ";
      out += f.params[i].name;
      if (f.params[i].type) out += ": " + f.params[i].type->str();
    }
    out += ")\n";
    source_block(f.body, 1, out);
    out += "end\n\n";
  }
  return out;
}

}  // namespace kf::ast
