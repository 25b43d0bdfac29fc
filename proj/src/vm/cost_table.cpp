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

#include "kf/vm/cost_table.hpp"

#include <fstream>

#include <fmt/format.h>

#include "kf/support/error.hpp"

namespace kf::vm {
namespace {

struct Field {
  const char* key;
  uint64_t CostTable::*member;
};

constexpr Field kFields[] = {
    {"arithmetic", &CostTable::arithmetic},
    {"local", &CostTable::local},
    {"param", &CostTable::param},
    {"shared", &CostTable::shared},
    {"global", &CostTable::global},
    {"generic_surcharge", &CostTable::generic_surcharge},
    {"shuffle_per_word", &CostTable::shuffle_per_word},
    {"barrier_per_warp", &CostTable::barrier_per_warp},
    {"launch", &CostTable::launch},
};

}  // namespace

uint64_t CostTable::memory(AddressSpace resolved, bool generic_tag) const {
  uint64_t base = 0;
  switch (resolved) {
    case AddressSpace::kLocal: base = local; break;
    case AddressSpace::kParam: base = param; break;
    case AddressSpace::kShared: base = shared; break;
    case AddressSpace::kGlobal:
    case AddressSpace::kGeneric: base = global; break;
  }
  return generic_tag ? base + generic_surcharge : base;
}

nlohmann::json CostTable::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const Field& f : kFields) j[f.key] = this->*f.member;
  return j;
}

CostTable CostTable::from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kUsage, "cost table must be a JSON object");
  }
  CostTable t;
  for (const auto& [key, value] : j.items()) {
    const Field* field = nullptr;
    for (const Field& f : kFields) {
      if (key == f.key) field = &f;
    }
    if (!field) {
      throw Error(ErrorKind::kUsage, fmt::format("unknown cost table key {}", key));
    }
    if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<int64_t>() >= 0)) {
      throw Error(ErrorKind::kUsage,
                  fmt::format("cost {} must be a non-negative integer", key));
    }
    t.*(field->member) = value.get<uint64_t>();
  }
  return t;
}

CostTable CostTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kUsage, fmt::format("cannot open cost table {}", path));
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kUsage,
                fmt::format("cost table {}: {}", path, e.what()));
  }
  return from_json(j);
}

}  // namespace kf::vm
