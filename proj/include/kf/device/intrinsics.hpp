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

#ifndef KF_DEVICE_INTRINSICS_HPP_
#define KF_DEVICE_INTRINSICS_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "kf/lir/lir.hpp"

namespace kf::device {

// Leaf operations of the virtual device. Source-visible intrinsics can be
// called by name from KSL; the others only appear in lowered LIR.
struct IntrinsicInfo {
  std::string_view name;
  std::vector<lir::LirType> params;
  lir::LirType result;
  bool pure = false;  // deletable when unused
  bool source_visible = true;
};

const std::vector<IntrinsicInfo>& intrinsics();
const IntrinsicInfo* find_intrinsic(std::string_view name);

// KSL-level type of a source-visible intrinsic applied to `args`, or
// nullopt when `name` is not one or the argument types do not match.
std::optional<Type> intrinsic_source_type(std::string_view name,
                                          const std::vector<Type>& args);

// Evaluates the math intrinsics (abs, fabs, sqrt, pow) on scalar bits.
// nullopt for every other intrinsic.
std::optional<uint64_t> eval_math_intrinsic(std::string_view name,
                                            const std::vector<uint64_t>& args);

// Thread geometry read by the index intrinsics. Indices are zero-based.
struct Dim3i {
  int64_t x = 1, y = 1, z = 1;
};

}  // namespace kf::device

#endif  // KF_DEVICE_INTRINSICS_HPP_
