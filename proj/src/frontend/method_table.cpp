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

#include "kf/frontend/method_table.hpp"

#include <fmt/format.h>

#include <atomic>
#include <set>

#include "kf/frontend/parser.hpp"

namespace kf {

namespace {

std::atomic<uint64_t> next_method_id{1};

bool element_matches(const ParamConstraint& c, Type elem) {
  if (c.record) {
    return elem.is_record() && elem.record_decl_ptr() == c.record;
  }
  return elem.is_scalar() && elem.scalar_kind() == c.scalar;
}

}  // namespace

bool ParamConstraint::matches(Type t) const {
  switch (kind) {
    case Kind::kNone:
      return true;
    case Kind::kScalar:
      return t.is_scalar() && t.scalar_kind() == scalar;
    case Kind::kRecord:
      return t.is_record() && t.record_decl_ptr() == record;
    case Kind::kArray:
      return t.is_array() || t.is_device_array();
    case Kind::kArrayOf:
      return (t.is_array() || t.is_device_array()) &&
             element_matches(*this, t.element());
  }
  return false;
}

std::string ParamConstraint::str() const {
  switch (kind) {
    case Kind::kNone:
      return "";
    case Kind::kScalar:
      return std::string(scalar_name(scalar));
    case Kind::kRecord:
      return record->name;
    case Kind::kArray:
      return "Array";
    case Kind::kArrayOf:
      return fmt::format("Array{{{}}}",
                         record ? record->name : scalar_name(scalar));
  }
  return "";
}

bool Method::applicable(const std::vector<Type>& types) const {
  if (types.size() != constraints.size()) return false;
  for (size_t i = 0; i < types.size(); ++i) {
    if (!constraints[i].matches(types[i])) return false;
  }
  return true;
}

std::pair<int, int> Method::specificity() const {
  int count = 0;
  int exact = 0;
  for (const auto& c : constraints) {
    if (c.constrained()) ++count;
    if (c.exact()) ++exact;
  }
  return {count, exact};
}

std::string Method::signature() const {
  std::string out = name + "(";
  for (size_t i = 0; i < param_names.size(); ++i) {
    if (i) out += ", ";
    out += param_names[i];
    if (constraints[i].constrained()) out += ": " + constraints[i].str();
  }
  return out + ")";
}

MethodTable::MethodTable() : records_(std::make_shared<RecordScope>()) {}

std::vector<MethodPtr> MethodTable::load(const ast::Program& program) {
  for (const ast::RecordDef* r : program.records()) define_record(*r);
  std::vector<MethodPtr> out;
  for (const auto& f : program.functions()) out.push_back(define(f));
  return out;
}

std::vector<MethodPtr> MethodTable::load_source(std::string_view source) {
  return load(parse(source));
}

std::shared_ptr<const RecordDecl> MethodTable::define_record(
    const ast::RecordDef& def) {
  RecordDecl decl;
  decl.name = def.name;
  decl.field_names = def.fields;
  decl.is_mutable = def.is_mutable;
  decl.span = def.span;
  for (const auto& ft : def.field_types) {
    if (!ft) {
      decl.field_annotations.push_back(std::nullopt);
      continue;
    }
    auto s = scalar_from_name(ft->name);
    if (!s || !ft->params.empty()) {
      throw Error(ErrorKind::kDefinition,
                  fmt::format("field annotation {} must be a scalar type",
                              ft->str()),
                  ft->span);
    }
    decl.field_annotations.push_back(*s);
  }
  if (has_function(def.name)) {
    throw Error(ErrorKind::kDefinition,
                fmt::format("record {} clashes with a function of that name",
                            def.name),
                def.span);
  }
  return records_->declare(std::move(decl));
}

ParamConstraint MethodTable::resolve_constraint(const ast::TypeExpr& t) const {
  ParamConstraint c;
  auto element_of = [&](const ast::TypeExpr& e) {
    if (!e.params.empty()) {
      throw Error(ErrorKind::kDefinition,
                  fmt::format("type {} takes no parameters", e.name), e.span);
    }
    if (auto s = scalar_from_name(e.name)) {
      c.scalar = *s;
    } else if (auto r = records_->find(e.name)) {
      c.record = r;
    } else {
      throw Error(ErrorKind::kDefinition,
                  fmt::format("unknown type {}", e.name), e.span);
    }
  };
  if (t.name == "Array") {
    if (t.params.empty()) {
      c.kind = ParamConstraint::Kind::kArray;
      return c;
    }
    if (t.params.size() != 1) {
      throw Error(ErrorKind::kDefinition,
                  fmt::format("Array takes 1 type parameter, got {}",
                              t.params.size()),
                  t.span);
    }
    c.kind = ParamConstraint::Kind::kArrayOf;
    element_of(t.params[0]);
    return c;
  }
  element_of(t);
  c.kind = c.record ? ParamConstraint::Kind::kRecord
                    : ParamConstraint::Kind::kScalar;
  return c;
}

MethodPtr MethodTable::define(std::shared_ptr<const ast::FunctionDef> def,
                              bool inline_always) {
  auto m = std::make_shared<Method>();
  m->name = def->name;
  if (records_->find(def->name)) {
    throw Error(ErrorKind::kDefinition,
                fmt::format("function {} clashes with a record of that name",
                            def->name),
                def->span);
  }
  std::set<std::string> seen;
  for (const auto& p : def->params) {
    if (!seen.insert(p.name).second) {
      throw Error(ErrorKind::kDefinition,
                  fmt::format("duplicate parameter name {} in {}", p.name,
                              def->name),
                  p.span);
    }
    m->param_names.push_back(p.name);
    m->constraints.push_back(p.type ? resolve_constraint(*p.type)
                                    : ParamConstraint{});
  }
  m->def = def;
  m->records = records_;
  m->inline_always = inline_always;
  m->age = ++world_age_;

  auto& list = methods_[def->name];
  for (auto& existing : list) {
    if (existing->constraints == m->constraints) {
      m->id = existing->id;
      existing = m;
      by_id_[m->id] = m;
      return m;
    }
  }
  m->id = next_method_id.fetch_add(1);
  list.push_back(m);
  by_id_[m->id] = m;
  return m;
}

MethodPtr MethodTable::find(std::string_view name,
                            const std::vector<Type>& types,
                            SourceSpan span) const {
  auto it = methods_.find(name);
  if (it == methods_.end()) return nullptr;
  std::vector<MethodPtr> best;
  std::pair<int, int> best_score{-1, -1};
  for (const auto& m : it->second) {
    if (!m->applicable(types)) continue;
    auto score = m->specificity();
    if (score > best_score) {
      best = {m};
      best_score = score;
    } else if (score == best_score) {
      best.push_back(m);
    }
  }
  if (best.empty()) return nullptr;
  if (best.size() > 1) {
    std::string cands;
    for (const auto& m : best) {
      if (!cands.empty()) cands += ", ";
      cands += m->signature();
    }
    throw Error(ErrorKind::kAmbiguity,
                fmt::format("call {}({}) is ambiguous between {}", name,
                            join_types(types), cands),
                span);
  }
  return best.front();
}

MethodPtr MethodTable::dispatch(std::string_view name,
                                const std::vector<Type>& types,
                                SourceSpan span) const {
  MethodPtr m = find(name, types, span);
  if (!m) {
    throw Error(ErrorKind::kNoMethod,
                fmt::format("no method {}({})", name, join_types(types)),
                span);
  }
  return m;
}

bool MethodTable::has_function(std::string_view name) const {
  return methods_.find(name) != methods_.end();
}

const std::vector<MethodPtr>& MethodTable::methods(std::string_view name) const {
  static const std::vector<MethodPtr> kEmpty;
  auto it = methods_.find(name);
  return it == methods_.end() ? kEmpty : it->second;
}

std::vector<MethodPtr> MethodTable::all_methods() const {
  std::vector<MethodPtr> out;
  for (const auto& [name, list] : methods_) {
    out.insert(out.end(), list.begin(), list.end());
  }
  return out;
}

MethodPtr MethodTable::by_id(uint64_t id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : it->second;
}

}  // namespace kf
