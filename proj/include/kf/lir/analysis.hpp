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

#ifndef KF_LIR_ANALYSIS_HPP_
#define KF_LIR_ANALYSIS_HPP_

#include <vector>

#include "kf/lir/lir.hpp"

namespace kf::lir {

inline constexpr BlockId kNoBlock = 0xffffffffu;

struct DomTree {
  std::vector<BlockId> idom;  // kNoBlock for the entry and unreachable blocks
  std::vector<bool> reachable;
  std::vector<BlockId> rpo;   // reverse post-order of reachable blocks
  std::vector<std::vector<BlockId>> children;

  bool dominates(BlockId a, BlockId b) const;
};

DomTree compute_dominators(const Function& fn);

// Immediate post-dominator per block; kNoBlock when the block's nearest
// post-dominator is the virtual exit (or it cannot reach an exit). With
// `aborts_exit` false, blocks ending in trap or unreachable are dead ends
// rather than exits, so a bounds check does not hide the join after it.
std::vector<BlockId> compute_post_dominators(const Function& fn,
                                             bool aborts_exit = true);

std::vector<std::vector<BlockId>> dominance_frontiers(const Function& fn,
                                                      const DomTree& dom);

// True if every retreating edge of a depth-first walk targets a dominator
// of its source.
bool is_reducible(const Function& fn, const DomTree& dom);

}  // namespace kf::lir

#endif  // KF_LIR_ANALYSIS_HPP_
