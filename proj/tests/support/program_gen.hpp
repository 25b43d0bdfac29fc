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

#ifndef KF_TESTS_SUPPORT_PROGRAM_GEN_HPP_
#define KF_TESTS_SUPPORT_PROGRAM_GEN_HPP_

#include <fmt/format.h>

#include <random>
#include <string>

namespace kf::testing {

// Random structured kernels over Int64: straight-line code, nested
// if/else and bounded while loops whose conditions depend on the lane.
class ProgramGen {
 public:
  explicit ProgramGen(uint64_t seed) : rng_(seed) {}

  std::string kernel() {
    std::string s = "function rnd(a, out)\n";
    s += "  i = (blockIdx().x - 1) * blockDim().x + threadIdx().x\n";
    s += "  x = a[i]\n  y = i\n  z = 3\n";
    s += block(1, 3);
    s += "  out[i] = x + y * 7 + z * 13\nend\n";
    return s;
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string var() { return std::string(1, "xyz"[pick(3)]); }

  std::string expr(int depth) {
    if (depth == 0 || pick(3) == 0) {
      return pick(2) ? var() : std::to_string(pick(19) - 9);
    }
    static const char* ops[] = {"+", "-", "*"};
    return "(" + expr(depth - 1) + " " + ops[pick(3)] + " " + expr(depth - 1) + ")";
  }

  std::string block(int indent, int depth) {
    std::string pad(indent * 2, ' ');
    std::string s;
    int n = 1 + pick(3);
    for (int k = 0; k < n; ++k) {
      int kind = depth > 0 ? pick(4) : 0;
      if (kind <= 1) {
        s += pad + var() + " = " + expr(2) + "\n";
      } else if (kind == 2) {
        s += pad + "if " + expr(1) + " < " + expr(1) + "\n";
        s += block(indent + 1, depth - 1);
        if (pick(2)) s += pad + "else\n" + block(indent + 1, depth - 1);
        s += pad + "end\n";
      } else {
        std::string c = fmt::format("c{}", counter_++);
        s += pad + c + " = 0\n";
        s += pad + "while " + c + " < abs(" + expr(1) + ") % 4\n";
        s += pad + "  " + c + " = " + c + " + 1\n";
        s += block(indent + 1, depth - 1);
        s += pad + "end\n";
      }
    }
    return s;
  }

  std::mt19937_64 rng_;
  int counter_ = 0;
};

}  // namespace kf::testing

#endif  // KF_TESTS_SUPPORT_PROGRAM_GEN_HPP_
