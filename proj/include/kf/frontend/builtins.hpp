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

#ifndef KF_FRONTEND_BUILTINS_HPP_
#define KF_FRONTEND_BUILTINS_HPP_

#include <optional>
#include <string_view>
#include <vector>

#include "kf/frontend/ast.hpp"
#include "kf/frontend/types.hpp"
#include "kf/frontend/value.hpp"

// Core builtins and primitive operators. Typing rules here are the single
// source of truth for the interpreter, inference and codegen.
namespace kf::builtins {

enum class Builtin : uint8_t {
  kConvert,  // Bool/Int32/Int64/Float32/Float64(x)
  kLength,
  kIsa,
  kZeros,
  kThrow,
  kAbs,
  kSqrt,
  kPow,
  kMin,
  kMax,
};

std::optional<Builtin> lookup(std::string_view name);
bool is_builtin(std::string_view name);

// Result type, or nullopt if the builtin does not accept these types.
std::optional<Type> result_type(std::string_view name,
                                const std::vector<Type>& args);
Value evaluate(std::string_view name, const std::vector<Value>& args,
               SourceSpan span = {});

// isa(x, name) on a value of type `t`; decided by types alone.
bool isa_type(Type t, std::string_view name);

// Primitive operators on scalars. nullopt means the operator is not
// primitive for these operands and dispatches to a method instead.
std::optional<Type> binary_type(ast::BinaryOp op, Type a, Type b);
std::optional<Type> unary_type(ast::UnaryOp op, Type a);
Value binary(ast::BinaryOp op, const Value& a, const Value& b,
             SourceSpan span = {});
Value unary(ast::UnaryOp op, const Value& a, SourceSpan span = {});

// Kind both operands convert to before an arithmetic or comparison op.
std::optional<ScalarKind> operand_kind(ast::BinaryOp op, Type a, Type b);

// Element store conversion: numeric scalars convert implicitly, anything
// else must match exactly.
bool assignable(Type from, Type to);
Value coerce(const Value& v, Type to);

// Error raised by throw(code); thrown_code recovers the code.
Error thrown_error(int64_t code, SourceSpan span);
std::optional<int64_t> thrown_code(const Error& e);

}  // namespace kf::builtins

#endif  // KF_FRONTEND_BUILTINS_HPP_
