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

#include "kf/hir/hir.hpp"

#include <fmt/format.h>

#include <cctype>

namespace kf::hir {

LatticeType LatticeType::join(const LatticeType& other) const {
  if (is_bottom()) return other;
  if (other.is_bottom()) return *this;
  if (is_any() || other.is_any()) return any();
  return type_ == other.type_ ? *this : any();
}

bool LatticeType::leq(const LatticeType& other) const {
  return join(other) == other;
}

std::string LatticeType::str() const {
  switch (kind_) {
    case Kind::kBottom:
      return "Bottom";
    case Kind::kAny:
      return "Any";
    case Kind::kConcrete:
      return type_.str();
  }
  return "?";
}

std::string Slot::ref(SlotId id) const {
  if (kind == SlotKind::kTemp) return fmt::format("%{}", id);
  return "%" + name;
}

std::string HirFunction::signature() const {
  return fmt::format("{}({})", name, join_types(arg_types));
}

std::string HirFunction::mangled_name() const {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      out += c;
    } else {
      out += fmt::format("op{:02x}", static_cast<unsigned char>(c));
    }
  }
  for (Type t : arg_types) out += "_" + t.mangled();
  return out;
}

namespace {

class Dumper {
 public:
  explicit Dumper(const HirFunction& fn) : fn_(fn) {}

  std::string run() {
    std::string params;
    for (size_t i = 0; i < fn_.params.size(); ++i) {
      if (i) params += ", ";
      SlotId p = fn_.params[i];
      params += fmt::format("{}: {}", ref(p), fn_.slots[p].type.str());
    }
    out_ = fmt::format("hir {}({}) -> {}\n", fn_.name, params,
                       fn_.return_type.str());
    block(fn_.body, 1);
    out_ += "end\n";
    return out_;
  }

 private:
  std::string ref(SlotId id) const { return fn_.slots[id].ref(id); }

  std::string list(const std::vector<SlotId>& args, size_t from = 0) const {
    std::string s;
    for (size_t i = from; i < args.size(); ++i) {
      if (i > from) s += ", ";
      s += ref(args[i]);
    }
    return s;
  }

  static std::string target(const CallTarget& t) {
    switch (t.kind) {
      case CallKind::kBuiltin:
        return " [builtin]";
      case CallKind::kMethod:
        return t.callee ? fmt::format(" [method {}]", t.callee->signature())
                        : " [method recursive]";
      case CallKind::kIntrinsic:
        return " [intrinsic]";
      case CallKind::kRecordCtor:
        return fmt::format(" [new {}]", t.record.str());
      case CallKind::kDynamic:
        return " [dynamic]";
      case CallKind::kUnresolved:
        break;
    }
    return "";
  }

  std::string rhs(const Rhs& r) const {
    switch (r.kind) {
      case RhsKind::kConst:
        return "const " + r.constant.str();
      case RhsKind::kCopy:
        return "copy " + ref(r.args[0]);
      case RhsKind::kUnary:
        return fmt::format("{} {}{}", ast::unary_op_token(r.unary_op),
                           ref(r.args[0]), target(r.target));
      case RhsKind::kBinary:
        return fmt::format("{} {}, {}{}", ast::binary_op_token(r.binary_op),
                           ref(r.args[0]), ref(r.args[1]), target(r.target));
      case RhsKind::kCall:
        if (r.callee_slot) {
          return fmt::format("call {}({}){}", ref(*r.callee_slot), list(r.args),
                             target(r.target));
        }
        return fmt::format("call {}({}){}", r.name, list(r.args),
                           target(r.target));
      case RhsKind::kIndex:
        return fmt::format("index {}[{}]", ref(r.args[0]), ref(r.args[1]));
      case RhsKind::kField:
        return fmt::format("field {}.{}", ref(r.args[0]), r.name);
    }
    return "?";
  }

  void block(const std::vector<Stmt>& body, int indent) {
    std::string pad(indent * 2, ' ');
    for (const Stmt& s : body) {
      switch (s.kind) {
        case StmtKind::kAssign:
          out_ += fmt::format("{}{}: {} = {}\n", pad, ref(s.dst),
                              fn_.slots[s.dst].type.str(), rhs(s.rhs));
          break;
        case StmtKind::kStoreIndex:
          out_ += fmt::format("{}store {}[{}] = {}\n", pad, ref(s.base),
                              ref(s.index), ref(s.value));
          break;
        case StmtKind::kStoreField:
          out_ += fmt::format("{}store {}.{} = {}\n", pad, ref(s.base),
                              s.field, ref(s.value));
          break;
        case StmtKind::kIf:
          out_ += fmt::format("{}if {}\n", pad, ref(s.cond));
          block(s.body, indent + 1);
          if (!s.else_body.empty()) {
            out_ += pad + "else\n";
            block(s.else_body, indent + 1);
          }
          out_ += pad + "end\n";
          break;
        case StmtKind::kWhile:
          out_ += pad + "while\n";
          block(s.cond_body, indent + 1);
          out_ += fmt::format("{}do {}\n", pad, ref(s.cond));
          block(s.body, indent + 1);
          out_ += pad + "end\n";
          break;
        case StmtKind::kReturn:
          out_ += pad + "return";
          if (s.ret) out_ += " " + ref(*s.ret);
          out_ += "\n";
          break;
      }
    }
  }

  const HirFunction& fn_;
  std::string out_;
};

}  // namespace

std::string dump(const HirFunction& fn) { return Dumper(fn).run(); }

}  // namespace kf::hir
