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

#ifndef KF_FRONTEND_AST_HPP_
#define KF_FRONTEND_AST_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kf/frontend/types.hpp"
#include "kf/support/error.hpp"

namespace kf::ast {

enum class ExprKind : uint8_t {
  kIntLit,
  kFloatLit,
  kBoolLit,
  kNothingLit,
  kVar,
  kUnary,
  kBinary,
  kCall,
  kIndex,
  kField,
  kDotCall,    // f.(args...)
  kDotBinary,  // a .+ b
};

enum class UnaryOp : uint8_t { kNeg, kNot };

enum class BinaryOp : uint8_t {
  kAdd, kSub, kMul, kDiv, kRem, kPow,
  kEq, kNe, kLt, kLe, kGt, kGe,
  kAnd, kOr,
};

std::string_view binary_op_token(BinaryOp op);
std::string_view unary_op_token(UnaryOp op);
bool is_arithmetic(BinaryOp op);
bool is_comparison(BinaryOp op);
// Method name an operator dispatches to for non-numeric operands.
std::string_view operator_method_name(BinaryOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::kNothingLit;
  SourceSpan span;
  int64_t int_value = 0;
  double float_value = 0;
  bool bool_value = false;
  ScalarKind literal_kind = ScalarKind::kInt64;
  std::string name;  // variable, callee or field
  UnaryOp unary_op = UnaryOp::kNeg;
  BinaryOp binary_op = BinaryOp::kAdd;
  // Unary/binary operands, call arguments, [base, index] for kIndex and
  // [base] for kField.
  std::vector<ExprPtr> args;

  ExprPtr clone() const;
};

enum class StmtKind : uint8_t { kExpr, kAssign, kIf, kWhile, kReturn };

struct Stmt {
  StmtKind kind = StmtKind::kExpr;
  SourceSpan span;
  ExprPtr target;  // kAssign: kVar, kIndex or kField
  ExprPtr value;   // kExpr, kAssign, optional for kReturn
  ExprPtr cond;    // kIf, kWhile
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;  // elseif chains nest here
};

struct TypeExpr {
  std::string name;
  std::vector<TypeExpr> params;
  SourceSpan span;

  std::string str() const;
};

struct ParamDecl {
  std::string name;
  std::optional<TypeExpr> type;
  SourceSpan span;
};

struct FunctionDef {
  std::string name;
  std::vector<ParamDecl> params;
  std::vector<Stmt> body;
  SourceSpan span;
};

struct RecordDef {
  std::string name;
  std::vector<std::string> fields;
  std::vector<std::optional<TypeExpr>> field_types;
  bool is_mutable = false;
  SourceSpan span;
};

using Item = std::variant<RecordDef, std::shared_ptr<const FunctionDef>>;

struct Program {
  std::vector<Item> items;

  std::vector<std::shared_ptr<const FunctionDef>> functions() const;
  std::vector<const RecordDef*> records() const;
};

// Indented s-expression dump without spans; structural equality of two
// trees is equality of their dumps.
std::string dump_sexpr(const Program& program);
std::string dump_sexpr(const Expr& expr);

// KSL source text that parses back to a structurally identical tree.
std::string to_source(const Program& program);
std::string to_source(const Expr& expr);

}  // namespace kf::ast

#endif  // KF_FRONTEND_AST_HPP_
