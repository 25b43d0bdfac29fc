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

#include "kf/frontend/builtins.hpp"

#include <fmt/format.h>

#include <charconv>

namespace kf::builtins {

namespace {

using ast::BinaryOp;
using ast::UnaryOp;

constexpr std::string_view kThrowPrefix = "throw(";

[[noreturn]] void no_method(std::string_view name,
                            const std::vector<Type>& types, SourceSpan span) {
  throw Error(ErrorKind::kNoMethod,
              fmt::format("no method {}({})", name, join_types(types)), span);
}

std::vector<Type> types_of(const std::vector<Value>& args) {
  std::vector<Type> out;
  for (const auto& a : args) out.push_back(a.type);
  return out;
}

bool is_arith_scalar(Type t) { return t.is_scalar() && !t.is_bool(); }

std::optional<ScalarKind> symbol_scalar(Type t) {
  if (t.kind() != TypeKind::kFunction) return std::nullopt;
  return scalar_from_name(t.symbol());
}

scalar::ArithOp arith_of(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return scalar::ArithOp::kAdd;
    case BinaryOp::kSub: return scalar::ArithOp::kSub;
    case BinaryOp::kMul: return scalar::ArithOp::kMul;
    case BinaryOp::kDiv: return scalar::ArithOp::kDiv;
    default: return scalar::ArithOp::kRem;
  }
}

scalar::CmpOp cmp_of(BinaryOp op) {
  switch (op) {
    case BinaryOp::kEq: return scalar::CmpOp::kEq;
    case BinaryOp::kNe: return scalar::CmpOp::kNe;
    case BinaryOp::kLt: return scalar::CmpOp::kLt;
    case BinaryOp::kLe: return scalar::CmpOp::kLe;
    case BinaryOp::kGt: return scalar::CmpOp::kGt;
    default: return scalar::CmpOp::kGe;
  }
}

Value convert_to(const Value& v, ScalarKind to) {
  return Value::scalar(to, scalar::convert(v.kind(), to, v.bits));
}

}  // namespace

std::optional<Builtin> lookup(std::string_view name) {
  if (scalar_from_name(name)) return Builtin::kConvert;
  if (name == "length") return Builtin::kLength;
  if (name == "isa") return Builtin::kIsa;
  if (name == "zeros") return Builtin::kZeros;
  if (name == "throw") return Builtin::kThrow;
  if (name == "abs") return Builtin::kAbs;
  if (name == "sqrt") return Builtin::kSqrt;
  if (name == "pow") return Builtin::kPow;
  if (name == "min") return Builtin::kMin;
  if (name == "max") return Builtin::kMax;
  return std::nullopt;
}

bool is_builtin(std::string_view name) { return lookup(name).has_value(); }

std::optional<Type> result_type(std::string_view name,
                                const std::vector<Type>& args) {
  auto b = lookup(name);
  if (!b) return std::nullopt;
  switch (*b) {
    case Builtin::kConvert:
      if (args.size() == 1 && args[0].is_scalar()) {
        return Type::scalar(*scalar_from_name(name));
      }
      return std::nullopt;
    case Builtin::kLength:
      if (args.size() == 1 && (args[0].is_array() || args[0].is_device_array())) {
        return Type::int64();
      }
      return std::nullopt;
    case Builtin::kIsa:
      if (args.size() == 2 && args[1].kind() == TypeKind::kFunction) {
        return Type::boolean();
      }
      return std::nullopt;
    case Builtin::kZeros:
      if (args.size() == 2 && symbol_scalar(args[0]) && args[1].is_integer()) {
        return Type::array(Type::scalar(*symbol_scalar(args[0])));
      }
      return std::nullopt;
    case Builtin::kThrow:
      if (args.size() == 1 && args[0].is_integer()) return Type::nothing();
      return std::nullopt;
    case Builtin::kAbs:
      if (args.size() == 1 && is_arith_scalar(args[0])) return args[0];
      return std::nullopt;
    case Builtin::kSqrt:
      if (args.size() == 1 && args[0].is_float()) return args[0];
      return std::nullopt;
    case Builtin::kPow:
    case Builtin::kMin:
    case Builtin::kMax:
      if (args.size() == 2 && is_arith_scalar(args[0]) &&
          is_arith_scalar(args[1])) {
        return Type::scalar(
            *scalar::promote(args[0].scalar_kind(), args[1].scalar_kind()));
      }
      return std::nullopt;
  }
  return std::nullopt;
}

Error thrown_error(int64_t code, SourceSpan span) {
  return Error(ErrorKind::kRuntime, fmt::format("{}{})", kThrowPrefix, code),
               span);
}

std::optional<int64_t> thrown_code(const Error& e) {
  const std::string& m = e.message();
  if (e.kind() != ErrorKind::kRuntime || m.rfind(kThrowPrefix, 0) != 0) {
    return std::nullopt;
  }
  int64_t code = 0;
  const char* begin = m.data() + kThrowPrefix.size();
  auto res = std::from_chars(begin, m.data() + m.size(), code);
  if (res.ec != std::errc()) return std::nullopt;
  return code;
}

Value evaluate(std::string_view name, const std::vector<Value>& args,
               SourceSpan span) {
  auto rt = result_type(name, types_of(args));
  if (!rt) no_method(name, types_of(args), span);
  switch (*lookup(name)) {
    case Builtin::kConvert:
      return convert_to(args[0], rt->scalar_kind());
    case Builtin::kLength:
      return Value::of_i64(args[0].array->length);
    case Builtin::kIsa:
      return Value::of_bool(isa_type(args[0].type, args[1].type.symbol()));
    case Builtin::kZeros:
      return Value::new_array(rt->element(), args[1].as_i64());
    case Builtin::kThrow:
      throw thrown_error(args[0].as_i64(), span);
    case Builtin::kAbs:
      return Value::scalar(rt->scalar_kind(),
                           scalar::math(scalar::MathOp::kAbs, rt->scalar_kind(),
                                        args[0].bits));
    case Builtin::kSqrt:
      return Value::scalar(rt->scalar_kind(),
                           scalar::math(scalar::MathOp::kSqrt,
                                        rt->scalar_kind(), args[0].bits));
    case Builtin::kPow:
    case Builtin::kMin:
    case Builtin::kMax: {
      ScalarKind k = rt->scalar_kind();
      Value a = convert_to(args[0], k);
      Value b = convert_to(args[1], k);
      Builtin which = *lookup(name);
      if (which == Builtin::kPow) {
        return Value::scalar(k, scalar::math(scalar::MathOp::kPow, k, a.bits,
                                             b.bits));
      }
      bool less = scalar::compare(scalar::CmpOp::kLt, k, b.bits, a.bits);
      if (which == Builtin::kMin) return less ? b : a;
      return less ? a : b;
    }
  }
  no_method(name, types_of(args), span);
}

bool isa_type(Type t, std::string_view name) {
  if (auto k = scalar_from_name(name)) {
    return t.is_scalar() && t.scalar_kind() == *k;
  }
  if (name == "Array") return t.is_array() || t.is_device_array();
  if (name == "Nothing") return t.is_nothing();
  return t.is_record() && t.record_decl().name == name;
}

std::optional<ScalarKind> operand_kind(BinaryOp op, Type a, Type b) {
  if (!a.is_scalar() || !b.is_scalar()) return std::nullopt;
  if (a.is_bool() || b.is_bool()) {
    if ((op == BinaryOp::kEq || op == BinaryOp::kNe) && a.is_bool() &&
        b.is_bool()) {
      return ScalarKind::kBool;
    }
    return std::nullopt;
  }
  if (op == BinaryOp::kAnd || op == BinaryOp::kOr) return std::nullopt;
  return scalar::promote(a.scalar_kind(), b.scalar_kind());
}

std::optional<Type> binary_type(BinaryOp op, Type a, Type b) {
  if (op == BinaryOp::kAnd || op == BinaryOp::kOr) {
    if (a.is_bool() && b.is_bool()) return Type::boolean();
    return std::nullopt;
  }
  auto k = operand_kind(op, a, b);
  if (!k) return std::nullopt;
  if (ast::is_comparison(op)) return Type::boolean();
  return Type::scalar(*k);
}

std::optional<Type> unary_type(UnaryOp op, Type a) {
  if (op == UnaryOp::kNot) {
    if (a.is_bool()) return a;
    return std::nullopt;
  }
  if (is_arith_scalar(a)) return a;
  return std::nullopt;
}

Value binary(BinaryOp op, const Value& a, const Value& b, SourceSpan span) {
  auto rt = binary_type(op, a.type, b.type);
  if (!rt) {
    no_method(ast::operator_method_name(op), {a.type, b.type}, span);
  }
  if (op == BinaryOp::kAnd) return Value::of_bool(a.as_bool() && b.as_bool());
  if (op == BinaryOp::kOr) return Value::of_bool(a.as_bool() || b.as_bool());
  ScalarKind k = *operand_kind(op, a.type, b.type);
  Value x = convert_to(a, k);
  Value y = convert_to(b, k);
  if (ast::is_comparison(op)) {
    return Value::of_bool(scalar::compare(cmp_of(op), k, x.bits, y.bits));
  }
  if (op == BinaryOp::kPow) {
    return Value::scalar(k, scalar::math(scalar::MathOp::kPow, k, x.bits,
                                         y.bits));
  }
  auto r = scalar::arith(arith_of(op), k, x.bits, y.bits);
  if (!r) throw Error(ErrorKind::kDivide, "integer division by zero", span);
  return Value::scalar(k, *r);
}

Value unary(UnaryOp op, const Value& a, SourceSpan span) {
  if (!unary_type(op, a.type)) {
    throw Error(ErrorKind::kNoMethod,
                fmt::format("no method {}({})", ast::unary_op_token(op),
                            a.type.str()),
                span);
  }
  if (op == UnaryOp::kNot) return Value::of_bool(!a.as_bool());
  return Value::scalar(a.kind(), scalar::negate(a.kind(), a.bits));
}

bool assignable(Type from, Type to) {
  if (from == to) return true;
  return is_arith_scalar(from) && is_arith_scalar(to);
}

Value coerce(const Value& v, Type to) {
  if (v.type == to) return v;
  return convert_to(v, to.scalar_kind());
}

}  // namespace kf::builtins
