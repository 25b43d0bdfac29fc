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

#include <algorithm>
#include <map>
#include <set>

#include "kf/lir/analysis.hpp"
#include "kf/lir/passes.hpp"

namespace kf::lir {

namespace {

struct Access {
  int64_t offset;
  LirType type;
};

struct Candidate {
  ValueId alloca = kNoValue;
  uint64_t size = 0;
  // Pointer values derived from the alloca with their constant offsets.
  std::map<ValueId, int64_t> pointers;
  // Distinct (offset, type) pairs; each becomes one promoted variable.
  std::vector<Access> vars;
  bool ok = true;
};

struct Location {
  BlockId block;
  size_t index;
};

// Index of the variable matching an access, or -1.
int find_var(const Candidate& c, int64_t offset, LirType type) {
  for (size_t i = 0; i < c.vars.size(); ++i) {
    if (c.vars[i].offset == offset && c.vars[i].type == type) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

class Promoter {
 public:
  explicit Promoter(Function& fn) : fn_(fn) {}

  void run() {
    remove_unreachable_blocks(fn_);
    index_definitions();
    std::vector<Candidate> cands;
    for (const Instr& in : fn_.blocks[0].instrs) {
      if (in.op != Op::kAlloca) continue;
      Candidate c = analyze(in.result, in.imm);
      if (c.ok && !c.vars.empty()) cands.push_back(std::move(c));
    }
    if (cands.empty()) return;
    for (Candidate& c : cands) {
      for (auto& [p, off] : c.pointers) owner_[p] = {&c, off};
    }
    dom_ = compute_dominators(fn_);
    replacement_.assign(fn_.value_types.size(), kNoValue);
    for (Candidate& c : cands) {
      for (size_t v = 0; v < c.vars.size(); ++v) promote_var(c, static_cast<int>(v));
    }
    rewrite(cands);
  }

 private:
  void index_definitions() {
    users_.assign(fn_.value_types.size(), {});
    for (BlockId b = 0; b < fn_.blocks.size(); ++b) {
      const auto& instrs = fn_.blocks[b].instrs;
      for (size_t i = 0; i < instrs.size(); ++i) {
        for (size_t k = 0; k < instrs[i].operands.size(); ++k) {
          users_[instrs[i].operands[k]].push_back({b, i});
        }
      }
    }
  }

  Candidate analyze(ValueId root, uint64_t size) {
    Candidate c;
    c.alloca = root;
    c.size = size;
    std::vector<std::pair<ValueId, int64_t>> work{{root, 0}};
    c.pointers[root] = 0;
    while (!work.empty() && c.ok) {
      auto [p, off] = work.back();
      work.pop_back();
      for (const Location& u : users_[p]) {
        const Instr& in = fn_.blocks[u.block].instrs[u.index];
        switch (in.op) {
          case Op::kAddrSpaceCast:
            add_pointer(c, work, in.result, off);
            break;
          case Op::kGep:
            if (in.operands.size() != 1 || in.operands[0] != p) {
              c.ok = false;
            } else {
              add_pointer(c, work, in.result, off + in.offset);
            }
            break;
          case Op::kLoad:
            add_access(c, off, in.type);
            break;
          case Op::kStore:
            if (in.operands[1] != p || in.operands[0] == p) {
              c.ok = false;
            } else {
              add_access(c, off, in.type);
            }
            break;
          default:
            c.ok = false;
        }
        if (!c.ok) break;
      }
    }
    return c;
  }

  void add_pointer(Candidate& c,
                   std::vector<std::pair<ValueId, int64_t>>& work, ValueId v,
                   int64_t off) {
    if (c.pointers.count(v)) return;
    c.pointers[v] = off;
    work.push_back({v, off});
  }

  void add_access(Candidate& c, int64_t off, LirType type) {
    int64_t end = off + type.size();
    if (off < 0 || end > static_cast<int64_t>(c.size)) {
      c.ok = false;
      return;
    }
    for (const Access& a : c.vars) {
      int64_t a_end = a.offset + a.type.size();
      if (a.offset == off && a.type == type) return;
      if (off < a_end && a.offset < end) {
        c.ok = false;  // overlapping accesses of different shape
        return;
      }
    }
    c.vars.push_back({off, type});
  }

  // Variable index of a load/store address, or -1 if unrelated.
  std::pair<Candidate*, int> var_of(ValueId ptr, LirType type) const {
    auto it = owner_.find(ptr);
    if (it == owner_.end()) return {nullptr, -1};
    return {it->second.first,
            find_var(*it->second.first, it->second.second, type)};
  }

  void promote_var(Candidate& c, int var) {
    LirType type = c.vars[var].type;
    // Blocks that store to this variable.
    std::set<BlockId> def_blocks;
    for (BlockId b = 0; b < fn_.blocks.size(); ++b) {
      for (const Instr& in : fn_.blocks[b].instrs) {
        if (in.op == Op::kStore) {
          auto [cand, v] = var_of(in.operands[1], in.type);
          if (cand == &c && v == var) def_blocks.insert(b);
        }
      }
    }
    if (frontiers_.empty()) frontiers_ = dominance_frontiers(fn_, dom_);
    // Iterated dominance frontier.
    std::map<BlockId, ValueId> phis;
    std::vector<BlockId> work(def_blocks.begin(), def_blocks.end());
    while (!work.empty()) {
      BlockId b = work.back();
      work.pop_back();
      for (BlockId f : frontiers_[b]) {
        if (phis.count(f)) continue;
        phis[f] = fn_.new_value(type);
        replacement_.push_back(kNoValue);
        if (!def_blocks.count(f)) work.push_back(f);
      }
    }
    // Zero constant for reads before any store (local memory starts zeroed).
    Instr zero;
    zero.op = Op::kConst;
    zero.type = type;
    zero.result = fn_.new_value(type);
    replacement_.push_back(kNoValue);
    new_entry_.push_back(zero);

    std::map<BlockId, std::vector<std::pair<ValueId, BlockId>>> incoming;
    // Rename along the dominator tree.
    std::vector<std::pair<BlockId, ValueId>> stack{{0, zero.result}};
    while (!stack.empty()) {
      auto [b, current] = stack.back();
      stack.pop_back();
      auto pit = phis.find(b);
      if (pit != phis.end()) current = pit->second;
      for (const Instr& in : fn_.blocks[b].instrs) {
        if (in.op == Op::kLoad) {
          auto [cand, v] = var_of(in.operands[0], in.type);
          if (cand == &c && v == var) replacement_[in.result] = current;
        } else if (in.op == Op::kStore) {
          auto [cand, v] = var_of(in.operands[1], in.type);
          if (cand == &c && v == var) current = in.operands[0];
        }
      }
      for (BlockId s : fn_.successors(b)) {
        if (phis.count(s)) incoming[s].push_back({current, b});
      }
      for (BlockId child : dom_.children[b]) stack.push_back({child, current});
    }
    for (auto& [b, phi_value] : phis) {
      Instr phi;
      phi.op = Op::kPhi;
      phi.type = type;
      phi.result = phi_value;
      for (auto [v, from] : incoming[b]) {
        phi.operands.push_back(v);
        phi.targets.push_back(from);
      }
      new_phis_[b].push_back(std::move(phi));
    }
  }

  void rewrite(const std::vector<Candidate>& cands) {
    std::set<ValueId> dead_values;
    for (const Candidate& c : cands) {
      for (auto& [p, off] : c.pointers) dead_values.insert(p);
    }
    for (BlockId b = 0; b < fn_.blocks.size(); ++b) {
      auto& instrs = fn_.blocks[b].instrs;
      std::vector<Instr> out;
      if (b == 0) out = new_entry_;
      auto it = new_phis_.find(b);
      if (it != new_phis_.end()) {
        for (Instr& phi : it->second) out.push_back(std::move(phi));
      }
      for (Instr& in : instrs) {
        if (in.result != kNoValue && dead_values.count(in.result)) continue;
        if (in.op == Op::kLoad && replacement_[in.result] != kNoValue) continue;
        if (in.op == Op::kStore && owner_.count(in.operands[1])) continue;
        out.push_back(std::move(in));
      }
      instrs = std::move(out);
    }
    // Allocas must stay ahead of everything in the entry block.
    auto& entry = fn_.blocks[0].instrs;
    std::stable_partition(entry.begin(), entry.end(), [](const Instr& in) {
      return in.op == Op::kAlloca;
    });
    replace_uses(fn_, replacement_);
  }

  Function& fn_;
  std::vector<std::vector<Location>> users_;
  std::map<ValueId, std::pair<Candidate*, int64_t>> owner_;
  DomTree dom_;
  std::vector<std::vector<BlockId>> frontiers_;
  std::vector<ValueId> replacement_;
  std::vector<Instr> new_entry_;
  std::map<BlockId, std::vector<Instr>> new_phis_;
};

}  // namespace

void slot_promote(Function& fn) { Promoter(fn).run(); }

}  // namespace kf::lir
