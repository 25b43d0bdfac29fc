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

#include "kf/lir/analysis.hpp"

#include <algorithm>
#include <functional>

namespace kf::lir {

namespace {

// Cooper, Harvey and Kennedy's iterative algorithm over an abstract graph.
std::vector<BlockId> iterative_idom(
    size_t n, BlockId root, const std::vector<std::vector<BlockId>>& succs,
    const std::vector<std::vector<BlockId>>& preds,
    std::vector<BlockId>& rpo_out) {
  std::vector<int> post(n, -1);
  std::vector<BlockId> order;
  std::vector<uint8_t> state(n, 0);
  std::vector<std::pair<BlockId, size_t>> stack{{root, 0}};
  state[root] = 1;
  while (!stack.empty()) {
    auto& [b, i] = stack.back();
    if (i < succs[b].size()) {
      BlockId s = succs[b][i++];
      if (!state[s]) {
        state[s] = 1;
        stack.push_back({s, 0});
      }
    } else {
      post[b] = static_cast<int>(order.size());
      order.push_back(b);
      stack.pop_back();
    }
  }
  rpo_out.assign(order.rbegin(), order.rend());
  std::vector<BlockId> idom(n, kNoBlock);
  idom[root] = root;
  auto intersect = [&](BlockId a, BlockId b) {
    while (a != b) {
      while (post[a] < post[b]) a = idom[a];
      while (post[b] < post[a]) b = idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (BlockId b : rpo_out) {
      if (b == root) continue;
      BlockId new_idom = kNoBlock;
      for (BlockId p : preds[b]) {
        if (post[p] < 0 || idom[p] == kNoBlock) continue;
        new_idom = new_idom == kNoBlock ? p : intersect(p, new_idom);
      }
      if (new_idom != idom[b]) {
        idom[b] = new_idom;
        changed = true;
      }
    }
  }
  return idom;
}

}  // namespace

bool DomTree::dominates(BlockId a, BlockId b) const {
  if (!reachable[b]) return true;
  if (!reachable[a]) return false;
  while (true) {
    if (a == b) return true;
    if (idom[b] == kNoBlock) return false;
    b = idom[b];
  }
}

DomTree compute_dominators(const Function& fn) {
  size_t n = fn.blocks.size();
  std::vector<std::vector<BlockId>> succs(n);
  for (BlockId b = 0; b < n; ++b) succs[b] = fn.successors(b);
  auto preds = fn.predecessors();
  DomTree dom;
  dom.idom = iterative_idom(n, 0, succs, preds, dom.rpo);
  dom.reachable.assign(n, false);
  for (BlockId b : dom.rpo) dom.reachable[b] = true;
  dom.idom[0] = kNoBlock;
  dom.children.assign(n, {});
  for (BlockId b : dom.rpo) {
    if (dom.idom[b] != kNoBlock) dom.children[dom.idom[b]].push_back(b);
  }
  return dom;
}

std::vector<BlockId> compute_post_dominators(const Function& fn,
                                             bool aborts_exit) {
  size_t n = fn.blocks.size();
  BlockId exit = static_cast<BlockId>(n);
  // Reverse graph: edges point from successor to predecessor; the virtual
  // exit links to every block ending in ret, trap or unreachable.
  std::vector<std::vector<BlockId>> rsuccs(n + 1);
  std::vector<std::vector<BlockId>> rpreds(n + 1);
  for (BlockId b = 0; b < n; ++b) {
    auto succ = fn.successors(b);
    bool returns = !fn.blocks[b].instrs.empty() &&
                   fn.blocks[b].instrs.back().op == Op::kRet;
    if (succ.empty() && (aborts_exit || returns)) {
      rsuccs[exit].push_back(b);
      rpreds[b].push_back(exit);
    }
    for (BlockId s : succ) {
      rsuccs[s].push_back(b);
      rpreds[b].push_back(s);
    }
  }
  std::vector<BlockId> rpo;
  auto idom = iterative_idom(n + 1, exit, rsuccs, rpreds, rpo);
  std::vector<BlockId> out(n, kNoBlock);
  for (BlockId b = 0; b < n; ++b) {
    if (idom[b] != kNoBlock && idom[b] != exit) out[b] = idom[b];
  }
  return out;
}

std::vector<std::vector<BlockId>> dominance_frontiers(const Function& fn,
                                                      const DomTree& dom) {
  size_t n = fn.blocks.size();
  std::vector<std::vector<BlockId>> df(n);
  auto preds = fn.predecessors();
  for (BlockId b = 0; b < n; ++b) {
    if (!dom.reachable[b] || preds[b].size() < 2) continue;
    for (BlockId p : preds[b]) {
      if (!dom.reachable[p]) continue;
      BlockId runner = p;
      while (runner != kNoBlock && runner != dom.idom[b]) {
        if (std::find(df[runner].begin(), df[runner].end(), b) ==
            df[runner].end()) {
          df[runner].push_back(b);
        }
        runner = dom.idom[runner];
      }
    }
  }
  return df;
}

bool is_reducible(const Function& fn, const DomTree& dom) {
  size_t n = fn.blocks.size();
  std::vector<uint8_t> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::pair<BlockId, size_t>> stack{{0, 0}};
  std::vector<std::vector<BlockId>> succs(n);
  for (BlockId b = 0; b < n; ++b) succs[b] = fn.successors(b);
  state[0] = 1;
  while (!stack.empty()) {
    auto& [b, i] = stack.back();
    if (i < succs[b].size()) {
      BlockId s = succs[b][i++];
      if (state[s] == 1 && !dom.dominates(s, b)) return false;
      if (state[s] == 0) {
        state[s] = 1;
        stack.push_back({s, 0});
      }
    } else {
      state[b] = 2;
      stack.pop_back();
    }
  }
  return true;
}

}  // namespace kf::lir
