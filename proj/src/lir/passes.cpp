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

#include "kf/lir/passes.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "kf/frontend/scalar_ops.hpp"
#include "kf/lir/analysis.hpp"

namespace kf::lir {

void replace_uses(Function& fn, const std::vector<ValueId>& replacement) {
  auto resolve = [&](ValueId v) {
    for (int guard = 0; v < replacement.size() && replacement[v] != kNoValue &&
                        replacement[v] != v && guard < 1 << 20;
         ++guard) {
      v = replacement[v];
    }
    return v;
  };
  for (Block& b : fn.blocks) {
    for (Instr& in : b.instrs) {
      for (ValueId& v : in.operands) v = resolve(v);
    }
  }
}

size_t count_ops(const Function& fn, Op op) {
  size_t n = 0;
  for (const Block& b : fn.blocks) {
    for (const Instr& in : b.instrs) n += in.op == op;
  }
  return n;
}

namespace {

// Drops blocks for which keep[b] is false and renumbers the rest, removing
// phi inputs that came from dropped blocks.
void drop_blocks(Function& fn, const std::vector<bool>& keep) {
  std::vector<BlockId> remap(fn.blocks.size(), kNoBlock);
  std::vector<Block> kept;
  for (BlockId b = 0; b < fn.blocks.size(); ++b) {
    if (!keep[b]) continue;
    remap[b] = static_cast<BlockId>(kept.size());
    kept.push_back(std::move(fn.blocks[b]));
  }
  for (Block& b : kept) {
    for (Instr& in : b.instrs) {
      if (in.op == Op::kPhi) {
        std::vector<ValueId> ops;
        std::vector<BlockId> preds;
        for (size_t i = 0; i < in.targets.size(); ++i) {
          if (remap[in.targets[i]] == kNoBlock) continue;
          ops.push_back(in.operands[i]);
          preds.push_back(remap[in.targets[i]]);
        }
        in.operands = std::move(ops);
        in.targets = std::move(preds);
      } else {
        for (BlockId& t : in.targets) t = remap[t];
      }
    }
  }
  fn.blocks = std::move(kept);
}

struct Use {
  BlockId block;
  size_t index;
  size_t operand;
};

std::vector<std::vector<Use>> collect_users(const Function& fn) {
  std::vector<std::vector<Use>> users(fn.value_types.size());
  for (BlockId b = 0; b < fn.blocks.size(); ++b) {
    const auto& instrs = fn.blocks[b].instrs;
    for (size_t i = 0; i < instrs.size(); ++i) {
      for (size_t k = 0; k < instrs[i].operands.size(); ++k) {
        ValueId v = instrs[i].operands[k];
        if (v < users.size()) users[v].push_back({b, i, k});
      }
    }
  }
  return users;
}

}  // namespace

void remove_unreachable_blocks(Function& fn) {
  DomTree dom = compute_dominators(fn);
  std::vector<bool> keep(dom.reachable.begin(), dom.reachable.end());
  if (std::all_of(keep.begin(), keep.end(), [](bool k) { return k; })) return;
  drop_blocks(fn, keep);
}

// ---------------------------------------------------------------- inline

namespace {

void inline_call(Function& caller, BlockId b, size_t k, const Function& callee) {
  Instr call = caller.blocks[b].instrs[k];
  BlockId post = static_cast<BlockId>(caller.blocks.size());
  {
    Block cont;
    cont.label = "inline.cont";
    auto& instrs = caller.blocks[b].instrs;
    cont.instrs.assign(instrs.begin() + static_cast<std::ptrdiff_t>(k) + 1,
                       instrs.end());
    instrs.resize(k);
    caller.blocks.push_back(std::move(cont));
  }
  for (BlockId s : caller.successors(post)) {
    for (Instr& in : caller.blocks[s].instrs) {
      if (in.op != Op::kPhi) break;
      for (BlockId& t : in.targets) {
        if (t == b) t = post;
      }
    }
  }
  BlockId base = static_cast<BlockId>(caller.blocks.size());
  std::vector<ValueId> vmap(callee.value_types.size(), kNoValue);
  for (size_t i = 0; i < callee.param_values.size(); ++i) {
    vmap[callee.param_values[i]] = call.operands[i];
  }
  for (const Block& cb : callee.blocks) {
    for (const Instr& in : cb.instrs) {
      if (in.result != kNoValue) {
        vmap[in.result] = caller.new_value(callee.value_types[in.result]);
      }
    }
  }
  std::vector<Instr> allocas;
  std::vector<std::pair<ValueId, BlockId>> returns;
  for (BlockId cb = 0; cb < callee.blocks.size(); ++cb) {
    Block nb;
    nb.label = callee.blocks[cb].label.empty()
                   ? callee.name
                   : fmt::format("{}.{}", callee.name, callee.blocks[cb].label);
    for (const Instr& src : callee.blocks[cb].instrs) {
      Instr in = src;
      for (ValueId& v : in.operands) v = vmap[v];
      if (in.result != kNoValue) in.result = vmap[in.result];
      for (BlockId& t : in.targets) t += base;
      if (in.op == Op::kAlloca) {
        allocas.push_back(std::move(in));
        continue;
      }
      if (in.op == Op::kRet) {
        BlockId here = base + cb;
        if (!in.operands.empty()) returns.push_back({in.operands[0], here});
        else returns.push_back({kNoValue, here});
        Instr br;
        br.op = Op::kBr;
        br.targets = {post};
        br.span = in.span;
        nb.instrs.push_back(std::move(br));
        continue;
      }
      nb.instrs.push_back(std::move(in));
    }
    caller.blocks.push_back(std::move(nb));
  }
  Instr br;
  br.op = Op::kBr;
  br.targets = {base};
  br.span = call.span;
  caller.blocks[b].instrs.push_back(std::move(br));

  if (call.result != kNoValue) {
    ValueId value;
    if (returns.size() == 1) {
      value = returns[0].first;
    } else {
      Instr head;
      head.result = caller.new_value(call.type);
      head.type = call.type;
      head.span = call.span;
      if (returns.empty()) {
        head.op = Op::kConst;
      } else {
        head.op = Op::kPhi;
        for (auto [v, from] : returns) {
          head.operands.push_back(v);
          head.targets.push_back(from);
        }
      }
      value = head.result;
      auto& instrs = caller.blocks[post].instrs;
      instrs.insert(instrs.begin(), std::move(head));
    }
    std::vector<ValueId> repl(caller.value_types.size(), kNoValue);
    repl[call.result] = value;
    replace_uses(caller, repl);
  }
  auto& entry = caller.blocks[0].instrs;
  entry.insert(entry.begin(), allocas.begin(), allocas.end());
}

}  // namespace

void inline_calls(Module& module, const PassOptions& options) {
  constexpr int kMaxRounds = 64;
  for (size_t f = 0; f < module.functions.size(); ++f) {
    for (int round = 0; round < kMaxRounds; ++round) {
      Function& fn = module.functions[f];
      std::vector<std::pair<BlockId, size_t>> sites;
      for (BlockId b = 0; b < fn.blocks.size(); ++b) {
        const auto& instrs = fn.blocks[b].instrs;
        for (size_t i = 0; i < instrs.size(); ++i) {
          if (instrs[i].op != Op::kCall) continue;
          const Function* callee = module.find(instrs[i].callee);
          if (!callee || callee->has(kAttrKernel)) continue;
          if (!callee->has(kAttrInlineAlways) &&
              round >= options.max_inline_depth) {
            continue;
          }
          sites.push_back({b, i});
        }
      }
      if (sites.empty()) break;
      // Hoisted callee allocas land at the top of the entry block and
      // shift the entry-block sites that are still pending.
      auto leading_allocas = [](const Function& fn) {
        size_t n = 0;
        for (const Instr& in : fn.blocks[0].instrs) {
          if (in.op != Op::kAlloca) break;
          ++n;
        }
        return n;
      };
      size_t shift = 0;
      for (auto it = sites.rbegin(); it != sites.rend(); ++it) {
        Function& caller = module.functions[f];
        size_t index = it->second + (it->first == 0 ? shift : 0);
        std::string name = caller.blocks[it->first].instrs[index].callee;
        Function callee = *module.find(name);
        size_t before = leading_allocas(caller);
        inline_call(caller, it->first, index, callee);
        shift += leading_allocas(caller) - before;
      }
    }
  }
  // Drop functions no longer reachable from the entry.
  std::set<std::string> live{module.entry};
  std::vector<std::string> work{module.entry};
  while (!work.empty()) {
    const Function* fn = module.find(work.back());
    work.pop_back();
    if (!fn) continue;
    for (const Block& b : fn->blocks) {
      for (const Instr& in : b.instrs) {
        if (in.op == Op::kCall && live.insert(in.callee).second) {
          work.push_back(in.callee);
        }
      }
    }
  }
  std::vector<Function> kept;
  for (Function& fn : module.functions) {
    if (live.count(fn.name)) kept.push_back(std::move(fn));
  }
  module.functions = std::move(kept);
}

// ---------------------------------------------------------------- constfold

namespace {

std::optional<uint64_t> const_of(const std::vector<const Instr*>& defs,
                                 ValueId v) {
  if (v >= defs.size() || !defs[v] || defs[v]->op != Op::kConst) {
    return std::nullopt;
  }
  return defs[v]->imm;
}

std::vector<const Instr*> definitions(const Function& fn) {
  std::vector<const Instr*> defs(fn.value_types.size(), nullptr);
  for (const Block& b : fn.blocks) {
    for (const Instr& in : b.instrs) {
      if (in.result != kNoValue) defs[in.result] = &in;
    }
  }
  return defs;
}

scalar::ArithOp arith_op(Op op) {
  switch (op) {
    case Op::kAdd: return scalar::ArithOp::kAdd;
    case Op::kSub: return scalar::ArithOp::kSub;
    case Op::kMul: return scalar::ArithOp::kMul;
    case Op::kDiv: return scalar::ArithOp::kDiv;
    default: return scalar::ArithOp::kRem;
  }
}

scalar::CmpOp cmp_op(Op op) {
  switch (op) {
    case Op::kCmpEq: return scalar::CmpOp::kEq;
    case Op::kCmpNe: return scalar::CmpOp::kNe;
    case Op::kCmpLt: return scalar::CmpOp::kLt;
    case Op::kCmpLe: return scalar::CmpOp::kLe;
    case Op::kCmpGt: return scalar::CmpOp::kGt;
    default: return scalar::CmpOp::kGe;
  }
}

void make_const(Instr& in, uint64_t bits) {
  in.op = Op::kConst;
  in.operands.clear();
  in.targets.clear();
  in.offset = 0;
  in.imm = scalar::canonical(in.type.scalar(), bits);
  if (in.type.is_ptr()) in.imm = bits;
}

}  // namespace

void constant_fold(Function& fn) {
  bool changed = true;
  while (changed) {
    changed = false;
    auto defs = definitions(fn);
    std::vector<ValueId> repl(fn.value_types.size(), kNoValue);
    bool any_repl = false;
    auto replace = [&](const Instr& in, ValueId v) {
      repl[in.result] = v;
      any_repl = true;
    };
    for (BlockId b = 0; b < fn.blocks.size(); ++b) {
      for (Instr& in : fn.blocks[b].instrs) {
        if (in.result != kNoValue && repl[in.result] != kNoValue) continue;
        auto c = [&](size_t i) { return const_of(defs, in.operands[i]); };
        switch (in.op) {
          case Op::kAdd:
          case Op::kSub:
          case Op::kMul:
          case Op::kDiv:
          case Op::kRem:
            if (c(0) && c(1)) {
              if (auto r = scalar::arith(arith_op(in.op), in.type.scalar(),
                                         *c(0), *c(1))) {
                make_const(in, *r);
                changed = true;
              }
            }
            break;
          case Op::kAnd:
          case Op::kOr:
          case Op::kXor:
            if (c(0) && c(1)) {
              uint64_t x = *c(0), y = *c(1);
              make_const(in, in.op == Op::kAnd  ? (x & y)
                             : in.op == Op::kOr ? (x | y)
                                                : (x ^ y));
              changed = true;
            }
            break;
          case Op::kNeg:
            if (c(0)) {
              make_const(in, scalar::negate(in.type.scalar(), *c(0)));
              changed = true;
            }
            break;
          case Op::kNot:
            if (c(0)) {
              make_const(in, in.type.kind == LirKind::kI1 ? (*c(0) ^ 1)
                                                          : ~*c(0));
              changed = true;
            }
            break;
          case Op::kCmpEq:
          case Op::kCmpNe:
          case Op::kCmpLt:
          case Op::kCmpLe:
          case Op::kCmpGt:
          case Op::kCmpGe:
            if (c(0) && c(1)) {
              LirType t = fn.value_types[in.operands[0]];
              make_const(in, scalar::compare(cmp_op(in.op), t.scalar(), *c(0),
                                             *c(1)));
              changed = true;
            }
            break;
          case Op::kConvert:
            if (c(0)) {
              LirType from = fn.value_types[in.operands[0]];
              make_const(in, scalar::convert(from.scalar(), in.type.scalar(),
                                             *c(0)));
              changed = true;
            }
            break;
          case Op::kSelect:
            if (c(0)) {
              replace(in, *c(0) ? in.operands[1] : in.operands[2]);
            } else if (in.operands[1] == in.operands[2]) {
              replace(in, in.operands[1]);
            }
            break;
          case Op::kPhi: {
            ValueId same = kNoValue;
            bool uniform = true;
            for (ValueId v : in.operands) {
              if (v == in.result || v == same) continue;
              if (same != kNoValue) uniform = false;
              same = v;
            }
            if (uniform && same != kNoValue) replace(in, same);
            break;
          }
          case Op::kGep: {
            if (in.operands.size() == 2 && c(1)) {
              in.offset += static_cast<int64_t>(*c(1) * in.imm);
              in.operands.resize(1);
              in.imm = 0;
              changed = true;
            }
            const Instr* base = defs[in.operands[0]];
            if (base && base->op == Op::kGep && base->operands.size() == 1) {
              in.offset += base->offset;
              in.operands[0] = base->operands[0];
              changed = true;
            }
            if (in.operands.size() == 1 && in.offset == 0) {
              replace(in, in.operands[0]);
            }
            break;
          }
          case Op::kAddrSpaceCast: {
            const Instr* inner = defs[in.operands[0]];
            if (inner && inner->op == Op::kAddrSpaceCast &&
                fn.value_types[inner->operands[0]] == in.type) {
              replace(in, inner->operands[0]);
            }
            break;
          }
          case Op::kCondBr:
            if (c(0)) {
              BlockId keep = *c(0) ? in.targets[0] : in.targets[1];
              BlockId drop = *c(0) ? in.targets[1] : in.targets[0];
              in.op = Op::kBr;
              in.operands.clear();
              in.targets = {keep};
              if (drop != keep) {
                for (Instr& phi : fn.blocks[drop].instrs) {
                  if (phi.op != Op::kPhi) break;
                  for (size_t i = 0; i < phi.targets.size(); ++i) {
                    if (phi.targets[i] == b) {
                      phi.targets.erase(phi.targets.begin() +
                                        static_cast<std::ptrdiff_t>(i));
                      phi.operands.erase(phi.operands.begin() +
                                         static_cast<std::ptrdiff_t>(i));
                      break;
                    }
                  }
                }
              }
              changed = true;
            }
            break;
          default:
            break;
        }
      }
    }
    if (any_repl) {
      replace_uses(fn, repl);
      // Drop the replaced instructions so they are not revisited.
      for (Block& blk : fn.blocks) {
        std::erase_if(blk.instrs, [&](const Instr& in) {
          return in.result != kNoValue && repl[in.result] != kNoValue;
        });
      }
      changed = true;
    }
  }
}

// ---------------------------------------------------------------- dce

namespace {

// Values derived from `root` through casts and address arithmetic.
std::vector<ValueId> derived_pointers(
    const Function& fn, const std::vector<std::vector<Use>>& users,
    ValueId root) {
  std::vector<ValueId> out{root};
  for (size_t i = 0; i < out.size(); ++i) {
    for (const Use& u : users[out[i]]) {
      const Instr& in = fn.blocks[u.block].instrs[u.index];
      if ((in.op == Op::kGep && u.operand == 0) ||
          in.op == Op::kAddrSpaceCast) {
        out.push_back(in.result);
      }
    }
  }
  return out;
}

bool remove_write_only_stores(Function& fn) {
  auto users = collect_users(fn);
  std::set<std::pair<BlockId, size_t>> dead;
  for (const Instr& a : fn.blocks[0].instrs) {
    if (a.op != Op::kAlloca) continue;
    auto ptrs = derived_pointers(fn, users, a.result);
    bool observed = false;
    std::vector<std::pair<BlockId, size_t>> stores;
    for (ValueId p : ptrs) {
      for (const Use& u : users[p]) {
        const Instr& in = fn.blocks[u.block].instrs[u.index];
        if ((in.op == Op::kGep && u.operand == 0) ||
            in.op == Op::kAddrSpaceCast) {
          continue;
        }
        if (in.op == Op::kStore && u.operand == 1) {
          stores.push_back({u.block, u.index});
          continue;
        }
        observed = true;
      }
    }
    if (!observed) dead.insert(stores.begin(), stores.end());
  }
  if (dead.empty()) return false;
  for (BlockId b = 0; b < fn.blocks.size(); ++b) {
    auto& instrs = fn.blocks[b].instrs;
    std::vector<Instr> kept;
    for (size_t i = 0; i < instrs.size(); ++i) {
      if (!dead.count({b, i})) kept.push_back(std::move(instrs[i]));
    }
    instrs = std::move(kept);
  }
  return true;
}

bool sweep_dead_values(Function& fn, const PassOptions& options) {
  auto effectful = [&](const Instr& in) {
    if (in.op == Op::kIntrinsic && options.pure_intrinsic &&
        options.pure_intrinsic(in.callee)) {
      return false;
    }
    return has_side_effects(in.op);
  };
  std::vector<const Instr*> defs = definitions(fn);
  std::vector<bool> live(fn.value_types.size(), false);
  std::vector<ValueId> work;
  auto mark = [&](ValueId v) {
    if (v < live.size() && !live[v]) {
      live[v] = true;
      work.push_back(v);
    }
  };
  for (const Block& b : fn.blocks) {
    for (const Instr& in : b.instrs) {
      if (effectful(in)) {
        if (in.result != kNoValue) mark(in.result);
        for (ValueId v : in.operands) mark(v);
      }
    }
  }
  while (!work.empty()) {
    ValueId v = work.back();
    work.pop_back();
    if (const Instr* d = defs[v]) {
      for (ValueId o : d->operands) mark(o);
    }
  }
  bool changed = false;
  for (Block& b : fn.blocks) {
    size_t before = b.instrs.size();
    std::erase_if(b.instrs, [&](const Instr& in) {
      return !effectful(in) && in.result != kNoValue &&
             !live[in.result];
    });
    changed = changed || b.instrs.size() != before;
  }
  return changed;
}

}  // namespace

void dead_code_eliminate(Function& fn, const PassOptions& options) {
  remove_unreachable_blocks(fn);
  bool changed = true;
  while (changed) {
    changed = remove_write_only_stores(fn);
    changed = sweep_dead_values(fn, options) || changed;
  }
}

// ---------------------------------------------------------------- cfg

void simplify_cfg(Function& fn) {
  remove_unreachable_blocks(fn);
  bool changed = true;
  while (changed) {
    changed = false;
    for (Block& blk : fn.blocks) {
      Instr& t = blk.instrs.back();
      if (t.op == Op::kCondBr && t.targets[0] == t.targets[1]) {
        t.op = Op::kBr;
        t.operands.clear();
        t.targets.resize(1);
        changed = true;
      }
    }
    auto preds = fn.predecessors();
    std::vector<bool> keep(fn.blocks.size(), true);
    std::vector<ValueId> repl(fn.value_types.size(), kNoValue);
    bool merged = false;
    for (BlockId b = 0; b < fn.blocks.size(); ++b) {
      if (!keep[b]) continue;
      while (true) {
        Instr& t = fn.blocks[b].instrs.back();
        if (t.op != Op::kBr) break;
        BlockId s = t.targets[0];
        if (s == b || s == 0 || preds[s].size() != 1 || !keep[s]) break;
        fn.blocks[b].instrs.pop_back();
        for (Instr& in : fn.blocks[s].instrs) {
          if (in.op == Op::kPhi) {
            repl[in.result] = in.operands[0];
            continue;
          }
          fn.blocks[b].instrs.push_back(std::move(in));
        }
        for (BlockId succ : fn.successors(b)) {
          for (Instr& in : fn.blocks[succ].instrs) {
            if (in.op != Op::kPhi) break;
            for (BlockId& p : in.targets) {
              if (p == s) p = b;
            }
          }
          for (BlockId& p : preds[succ]) {
            if (p == s) p = b;
          }
        }
        keep[s] = false;
        merged = true;
      }
    }
    if (merged) {
      replace_uses(fn, repl);
      drop_blocks(fn, keep);
      changed = true;
    }
  }
}

void renumber(Function& fn) {
  std::vector<ValueId> map(fn.value_types.size(), kNoValue);
  std::vector<LirType> types;
  auto assign = [&](ValueId v) {
    map[v] = static_cast<ValueId>(types.size());
    types.push_back(fn.value_types[v]);
  };
  for (ValueId v : fn.param_values) assign(v);
  for (const Block& b : fn.blocks) {
    for (const Instr& in : b.instrs) {
      if (in.result != kNoValue) assign(in.result);
    }
  }
  for (ValueId& v : fn.param_values) v = map[v];
  for (Block& b : fn.blocks) {
    for (Instr& in : b.instrs) {
      if (in.result != kNoValue) in.result = map[in.result];
      for (ValueId& v : in.operands) v = map[v];
    }
  }
  fn.value_types = std::move(types);
}

// ---------------------------------------------------------------- driver

const std::vector<std::string>& default_pipeline() {
  static const std::vector<std::string> kPipeline = {
      "inline", "simplify-cfg", "slot-promote", "constfold",
      "dce",    "simplify-cfg", "renumber"};
  return kPipeline;
}

void run_passes(Module& module, const std::vector<std::string>& pipeline,
                const PassOptions& options) {
  for (const std::string& pass : pipeline) {
    if (pass == "inline") {
      inline_calls(module, options);
    } else {
      std::function<void(Function&)> per_fn;
      if (pass == "slot-promote") per_fn = slot_promote;
      else if (pass == "constfold") per_fn = constant_fold;
      else if (pass == "dce") {
        per_fn = [&](Function& fn) { dead_code_eliminate(fn, options); };
      }
      else if (pass == "simplify-cfg") per_fn = simplify_cfg;
      else if (pass == "renumber") per_fn = renumber;
      else if (pass == "verify") per_fn = [](Function&) {};
      else throw Error(ErrorKind::kUsage, fmt::format("unknown pass {}", pass));
      for (Function& fn : module.functions) per_fn(fn);
    }
    verify(module, pass);
  }
}

}  // namespace kf::lir
