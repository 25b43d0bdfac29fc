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
#include <bit>
#include <cstring>
#include <map>

#include <fmt/format.h>

#include "kf/device/intrinsics.hpp"
#include "kf/lir/analysis.hpp"
#include "kf/vm/device.hpp"

namespace kf::vm {
namespace {

using lir::BlockId;
using lir::Instr;
using lir::LirType;
using lir::Op;
using lir::ValueId;

constexpr uint64_t kOffsetMask = (uint64_t{1} << kWindowShift) - 1;

struct FunctionInfo {
  const lir::Function* fn = nullptr;
  std::vector<BlockId> ipdom;
  std::vector<uint64_t> alloca_offset;  // by value id
  uint64_t frame_bytes = 0;
  std::vector<size_t> phi_count;
};

// One level of the reconvergence stack. Only the top entry executes; an
// entry that diverged waits at its rejoin block until its sub-paths return.
struct Entry {
  BlockId block = 0;
  BlockId reconv = lir::kNoBlock;
  uint64_t mask = 0;
  bool entered = false;
  bool waiting = false;
  uint64_t arrived = 0;  // lanes that reached `block` while waiting
};

struct Frame {
  const FunctionInfo* info = nullptr;
  std::vector<uint64_t> vals;  // value * warp_size + lane
  std::vector<BlockId> prev;   // per lane: block the lane came from
  std::vector<Entry> stack;
  size_t ip = 0;
  uint64_t returned = 0;
  uint64_t call_mask = 0;
  std::vector<uint64_t> ret_vals;
  std::vector<uint64_t> local_base;
  ValueId result = lir::kNoValue;  // in the caller
};

struct Warp {
  uint32_t index = 0;
  uint64_t exists = 0;
  std::vector<Dim3i> thread;
  std::vector<Frame> frames;
  std::vector<std::vector<uint8_t>> local;
  std::vector<uint64_t> sp;
  bool done = false;
  bool at_barrier = false;
  const Instr* barrier_site = nullptr;
};

std::string dim_str(const Dim3i& d) { return fmt::format("({},{},{})", d.x, d.y, d.z); }

int64_t volume(const Dim3i& d) { return d.x * d.y * d.z; }

class Executor {
 public:
  Executor(DeviceState& state, const device::CompiledKernel& kernel,
           const LaunchConfig& config, std::span<const uint8_t> params)
      : state_(state),
        kernel_(kernel),
        config_(config),
        params_(params.begin(), params.end()),
        costs_(state.costs()),
        limits_(state.limits()),
        width_(kernel.warp_size) {}

  ExecutionReport run() {
    check_launch();
    report_.kernel = kernel_.entry().name;
    report_.config = config_;
    report_.cycles = costs_.launch;
    Dim3i b;
    for (b.z = 0; b.z < config_.grid.z && !aborted_; ++b.z) {
      for (b.y = 0; b.y < config_.grid.y && !aborted_; ++b.y) {
        for (b.x = 0; b.x < config_.grid.x && !aborted_; ++b.x) {
          run_block(b);
          if (aborted_) break;
        }
      }
    }
    report_.events.traps = report_.traps.size();
    return std::move(report_);
  }

 private:
  [[noreturn]] void fail(ErrorKind kind, const std::string& msg) const {
    throw Error(kind, fmt::format("{} (kernel {}, block {})", msg,
                                  kernel_.entry().name, dim_str(block_)));
  }

  void check_launch() const {
    for (const Dim3i* d : {&config_.grid, &config_.block}) {
      if (d->x < 1 || d->y < 1 || d->z < 1) {
        throw Error(ErrorKind::kUsage,
                    fmt::format("launch dimensions must be >= 1, got {}",
                                dim_str(*d)));
      }
    }
    if (volume(config_.block) > limits_.max_threads_per_block) {
      throw Error(ErrorKind::kUsage,
                  fmt::format("block of {} threads exceeds the limit of {}",
                              volume(config_.block),
                              limits_.max_threads_per_block));
    }
    uint64_t shared = kernel_.shared_bytes + config_.shared_bytes;
    if (shared > limits_.max_shared_bytes) {
      throw Error(ErrorKind::kUsage,
                  fmt::format("{} bytes of shared memory exceed the limit of {}",
                              shared, limits_.max_shared_bytes));
    }
    if (params_.size() != kernel_.param_bytes) {
      throw Error(ErrorKind::kUsage,
                  fmt::format("param buffer has {} bytes, kernel expects {}",
                              params_.size(), kernel_.param_bytes));
    }
    if (width_ < 1 || width_ > 64) {
      throw Error(ErrorKind::kUsage,
                  fmt::format("warp size {} is outside 1..64", width_));
    }
  }

  const FunctionInfo& info(const lir::Function& fn) {
    auto it = infos_.find(&fn);
    if (it != infos_.end()) return it->second;
    FunctionInfo fi;
    fi.fn = &fn;
    fi.ipdom = lir::compute_post_dominators(fn, false);
    fi.alloca_offset.assign(fn.value_types.size(), 0);
    for (const Instr& in : fn.blocks[0].instrs) {
      if (in.op != Op::kAlloca) continue;
      fi.alloca_offset[in.result] = fi.frame_bytes;
      fi.frame_bytes += (in.imm + 7) / 8 * 8;
    }
    for (const lir::Block& b : fn.blocks) {
      size_t n = 0;
      while (n < b.instrs.size() && b.instrs[n].op == Op::kPhi) ++n;
      fi.phi_count.push_back(n);
    }
    return infos_.emplace(&fn, std::move(fi)).first->second;
  }

  uint64_t& val(Frame& f, ValueId v, int lane) {
    return f.vals[static_cast<size_t>(v) * width_ + lane];
  }

  template <typename Fn>
  void for_lanes(uint64_t mask, Fn&& fn) {
    while (mask) {
      int l = std::countr_zero(mask);
      fn(l);
      mask &= mask - 1;
    }
  }

  // ------------------------------------------------------------ blocks

  void run_block(Dim3i block) {
    block_ = block;
    shared_.assign(kernel_.shared_bytes + config_.shared_bytes, 0);
    int64_t threads = volume(config_.block);
    int64_t nwarps = (threads + width_ - 1) / width_;
    std::vector<Warp> warps(static_cast<size_t>(nwarps));
    for (int64_t wi = 0; wi < nwarps; ++wi) {
      Warp& w = warps[wi];
      w.index = static_cast<uint32_t>(wi);
      w.thread.resize(width_);
      w.local.resize(width_);
      w.sp.assign(width_, 0);
      for (int l = 0; l < width_; ++l) {
        int64_t linear = wi * width_ + l;
        if (linear >= threads) continue;
        w.exists |= uint64_t{1} << l;
        w.thread[l] = {linear % config_.block.x,
                       (linear / config_.block.x) % config_.block.y,
                       linear / (config_.block.x * config_.block.y)};
      }
      start_kernel(w);
    }
    while (true) {
      bool ran = false;
      for (Warp& w : warps) {
        if (w.done || w.at_barrier) continue;
        ran = true;
        step(w);
        if (aborted_) return;
      }
      if (ran) continue;
      std::vector<Warp*> waiting;
      const Warp* exited = nullptr;
      for (Warp& w : warps) {
        if (w.at_barrier) waiting.push_back(&w);
        else if (w.done && !exited) exited = &w;
      }
      if (waiting.empty()) return;
      if (exited) {
        fail(ErrorKind::kRuntime,
             fmt::format("barrier divergence: warp {} exited while warp {} "
                         "waits at the barrier at {}",
                         exited->index, waiting.front()->index,
                         waiting.front()->barrier_site->span.str()));
      }
      for (Warp* w : waiting) {
        if (w->barrier_site != waiting.front()->barrier_site) {
          fail(ErrorKind::kRuntime,
               fmt::format("barrier divergence: warp {} waits at {} but warp "
                           "{} at {}",
                           waiting.front()->index,
                           waiting.front()->barrier_site->span.str(), w->index,
                           w->barrier_site->span.str()));
        }
      }
      for (Warp* w : waiting) {
        w->at_barrier = false;
        w->frames.back().ip++;
      }
    }
  }

  void start_kernel(Warp& w) {
    const lir::Function& entry = kernel_.entry();
    std::vector<uint64_t> args(entry.params.size());
    for (size_t i = 0; i < entry.params.size(); ++i) {
      const device::ParamSlot& slot = kernel_.params.at(i);
      if (slot.kind == device::ParamSlot::Kind::kByValue) {
        args[i] = slot.offset;
      } else {
        uint64_t bits = 0;
        std::memcpy(&bits, params_.data() + slot.offset, slot.size);
        args[i] = bits;
      }
    }
    push_frame(w, entry, w.exists, lir::kNoValue,
               [&](size_t i, int) { return args[i]; });
  }

  template <typename ArgFn>
  void push_frame(Warp& w, const lir::Function& fn, uint64_t mask,
                  ValueId result, ArgFn&& arg) {
    if (w.frames.size() >= limits_.max_call_depth) {
      fail(ErrorKind::kRuntime,
           fmt::format("call depth limit {} exceeded calling @{}",
                       limits_.max_call_depth, fn.name));
    }
    const FunctionInfo& fi = info(fn);
    Frame f;
    f.info = &fi;
    f.vals.assign(fn.value_types.size() * width_, 0);
    f.prev.assign(width_, lir::kNoBlock);
    f.ret_vals.assign(width_, 0);
    f.local_base.assign(width_, 0);
    f.call_mask = mask;
    f.result = result;
    for_lanes(mask, [&](int l) {
      for (size_t i = 0; i < fn.param_values.size(); ++i) {
        val(f, fn.param_values[i], l) = arg(i, l);
      }
      uint64_t base = w.sp[l];
      uint64_t end = base + fi.frame_bytes;
      if (end > limits_.local_bytes_per_thread) {
        fail(ErrorKind::kMemory,
             fmt::format("local memory of thread {} exhausted in @{}",
                         dim_str(w.thread[l]), fn.name));
      }
      auto& local = w.local[l];
      if (local.size() < end) local.resize(end);
      std::fill(local.begin() + static_cast<std::ptrdiff_t>(base),
                local.begin() + static_cast<std::ptrdiff_t>(end), 0);
      f.local_base[l] = base;
      w.sp[l] = end;
    });
    f.stack.push_back(Entry{0, lir::kNoBlock, mask});
    w.frames.push_back(std::move(f));
  }

  void finish_frame(Warp& w) {
    Frame done = std::move(w.frames.back());
    w.frames.pop_back();
    if (limits_.check_masks && done.returned != done.call_mask) {
      fail(ErrorKind::kRuntime,
           fmt::format("mask conservation violated leaving @{}",
                       done.info->fn->name));
    }
    for_lanes(done.call_mask, [&](int l) { w.sp[l] = done.local_base[l]; });
    if (w.frames.empty()) {
      w.done = true;
      return;
    }
    Frame& caller = w.frames.back();
    if (done.result != lir::kNoValue) {
      for_lanes(done.call_mask, [&](int l) {
        val(caller, done.result, l) = done.ret_vals[l];
      });
    }
    caller.ip++;
  }

  // Parallel-copy semantics: every phi reads its inputs before any writes.
  void enter_block(Frame& f, const Entry& e) {
    const lir::Block& blk = f.info->fn->blocks[e.block];
    size_t n = f.info->phi_count[e.block];
    if (n == 0) return;
    std::vector<uint64_t> staged(n * width_);
    for (size_t i = 0; i < n; ++i) {
      const Instr& phi = blk.instrs[i];
      for_lanes(e.mask, [&](int l) {
        auto it = std::find(phi.targets.begin(), phi.targets.end(), f.prev[l]);
        if (it == phi.targets.end()) {
          fail(ErrorKind::kRuntime,
               fmt::format("phi in bb{} of @{} has no input from bb{}", e.block,
                           f.info->fn->name, f.prev[l]));
        }
        staged[i * width_ + l] = val(f, phi.operands[it - phi.targets.begin()], l);
      });
    }
    for (size_t i = 0; i < n; ++i) {
      for_lanes(e.mask, [&](int l) {
        val(f, blk.instrs[i].result, l) = staged[i * width_ + l];
      });
    }
  }

  // Pops finished entries, enters the next block, then runs one instruction.
  void step(Warp& w) {
    while (true) {
      if (w.frames.empty()) {
        w.done = true;
        return;
      }
      Frame& f = w.frames.back();
      if (f.stack.empty()) {
        finish_frame(w);
        continue;
      }
      Entry& e = f.stack.back();
      if (e.entered) break;
      e.mask &= ~f.returned;
      if (e.waiting && limits_.check_masks && e.mask != (e.arrived & ~f.returned)) {
        fail(ErrorKind::kRuntime,
             fmt::format("mask conservation violated at bb{} of @{}: waiting "
                         "{:#x}, arrived {:#x}",
                         e.block, f.info->fn->name, e.mask, e.arrived));
      }
      if (e.mask == 0) {
        f.stack.pop_back();
        continue;
      }
      if (e.block == e.reconv) {
        arrive(f, e);
        f.stack.pop_back();
        continue;
      }
      if (e.block == lir::kNoBlock) {
        fail(ErrorKind::kRuntime, "lanes left alive at function exit");
      }
      enter_block(f, e);
      e.entered = true;
      e.waiting = false;
      e.arrived = 0;
      f.ip = f.info->phi_count[e.block];
      break;
    }
    Frame& f = w.frames.back();
    Entry& e = f.stack.back();
    const Instr& in = f.info->fn->blocks[e.block].instrs[f.ip];
    if (limits_.step_limit && ++steps_ > limits_.step_limit) {
      fail(ErrorKind::kRuntime,
           fmt::format("step limit of {} warp instructions exceeded",
                       limits_.step_limit));
    }
    report_.events.warp_instructions++;
    report_.events.lane_instructions += std::popcount(e.mask);
    execute(w, f, in);
    report_.events.max_stack_depth =
        std::max<uint64_t>(report_.events.max_stack_depth, f.stack.size());
  }

  void arrive(Frame& f, const Entry& e) {
    for (size_t i = f.stack.size() - 1; i-- > 0;) {
      Entry& below = f.stack[i];
      if (below.waiting && below.block == e.block) {
        below.arrived |= e.mask;
        return;
      }
    }
    if (limits_.check_masks) {
      fail(ErrorKind::kRuntime,
           fmt::format("no waiting entry for lanes rejoining at bb{}", e.block));
    }
  }

  void jump(Frame& f, Entry& e, BlockId target) {
    for_lanes(e.mask, [&](int l) { f.prev[l] = e.block; });
    e.block = target;
    e.entered = false;
    f.ip = 0;
  }

  // ------------------------------------------------------------ memory

  struct Resolved {
    AddressSpace space;
    uint8_t* data;
  };

  Resolved resolve(Warp& w, int lane, uint64_t ptr, LirType ptr_type,
                   AddressSpace tag, uint64_t size, bool store) {
    AddressSpace space = ptr_type.space;
    uint64_t off = ptr;
    if (space == AddressSpace::kGeneric) {
      uint64_t window = ptr >> kWindowShift;
      if (window == 0 || window >= static_cast<uint64_t>(kNumAddressSpaces)) {
        fail(ErrorKind::kMemory,
             fmt::format("thread {} accesses unmapped address {:#x}",
                         dim_str(w.thread[lane]), ptr));
      }
      space = static_cast<AddressSpace>(window);
      off = ptr & kOffsetMask;
    }
    if (tag != AddressSpace::kGeneric && tag != space) {
      fail(ErrorKind::kMemory,
           fmt::format("{}-tagged access to {} address {:#x}", space_title(tag),
                       space_title(space), ptr));
    }
    auto bounded = [&](std::vector<uint8_t>& mem) -> uint8_t* {
      if (off + size < off || off + size > mem.size()) {
        fail(ErrorKind::kMemory,
             fmt::format("thread {} {} {} bytes at {} offset {:#x}, outside "
                         "{} bytes",
                         dim_str(w.thread[lane]), store ? "stores" : "loads",
                         size, space_title(space), off, mem.size()));
      }
      return mem.data() + off;
    };
    switch (space) {
      case AddressSpace::kGlobal:
        return {space, state_.global_span(off, size, store ? "store" : "load")};
      case AddressSpace::kShared:
        return {space, bounded(shared_)};
      case AddressSpace::kParam:
        if (store) fail(ErrorKind::kMemory, "store to read-only param space");
        return {space, bounded(params_)};
      case AddressSpace::kLocal:
        return {space, bounded(w.local[lane])};
      case AddressSpace::kGeneric:
        break;
    }
    fail(ErrorKind::kMemory, "unresolvable address");
  }

  void memory_op(Warp& w, Frame& f, const Instr& in) {
    const Entry& e = f.stack.back();
    bool store = in.op == Op::kStore;
    ValueId ptr_v = store ? in.operands[1] : in.operands[0];
    LirType ptr_type = f.info->fn->value_types[ptr_v];
    uint64_t size = in.type.size();
    uint64_t cost = 0;
    for_lanes(e.mask, [&](int l) {
      Resolved r = resolve(w, l, val(f, ptr_v, l), ptr_type, in.space, size, store);
      if (store) {
        uint64_t bits = val(f, in.operands[0], l);
        std::memcpy(r.data, &bits, size);
      } else {
        uint64_t bits = 0;
        std::memcpy(&bits, r.data, size);
        val(f, in.result, l) = bits;
      }
      cost = std::max(cost, costs_.memory(r.space, in.space == AddressSpace::kGeneric));
    });
    auto tag = static_cast<size_t>(in.space);
    (store ? report_.events.stores : report_.events.loads)[tag] +=
        std::popcount(e.mask);
    report_.events.warp_memory_ops[tag]++;
    report_.cycles += cost;
  }

  // ------------------------------------------------------------ execution

  void execute(Warp& w, Frame& f, const Instr& in) {
    Entry& e = f.stack.back();
    const lir::Function& fn = *f.info->fn;
    auto arg = [&](size_t i, int l) { return val(f, in.operands[i], l); };
    auto operand_type = [&](size_t i) { return fn.value_types[in.operands[i]]; };
    auto each = [&](auto&& compute) {
      for_lanes(e.mask, [&](int l) { val(f, in.result, l) = compute(l); });
    };
    switch (in.op) {
      case Op::kConst:
        each([&](int) { return in.imm; });
        f.ip++;
        return;
      case Op::kAlloca:
        each([&](int l) { return f.local_base[l] + f.info->alloca_offset[in.result]; });
        f.ip++;
        return;
      case Op::kAdd:
      case Op::kSub:
      case Op::kMul:
      case Op::kDiv:
      case Op::kRem: {
        scalar::ArithOp op =
            in.op == Op::kAdd   ? scalar::ArithOp::kAdd
            : in.op == Op::kSub ? scalar::ArithOp::kSub
            : in.op == Op::kMul ? scalar::ArithOp::kMul
            : in.op == Op::kDiv ? scalar::ArithOp::kDiv
                                : scalar::ArithOp::kRem;
        ScalarKind k = in.type.scalar();
        each([&](int l) {
          auto r = scalar::arith(op, k, arg(0, l), arg(1, l));
          if (!r) fail(ErrorKind::kDivide, "integer division by zero");
          return *r;
        });
        break;
      }
      case Op::kAnd:
      case Op::kOr:
      case Op::kXor: {
        ScalarKind k = in.type.scalar();
        each([&](int l) {
          uint64_t x = arg(0, l), y = arg(1, l);
          uint64_t r = in.op == Op::kAnd ? (x & y) : in.op == Op::kOr ? (x | y) : (x ^ y);
          return scalar::canonical(k, r);
        });
        break;
      }
      case Op::kNeg:
        each([&](int l) { return scalar::negate(in.type.scalar(), arg(0, l)); });
        break;
      case Op::kNot:
        each([&](int l) {
          return in.type.kind == lir::LirKind::kI1
                     ? arg(0, l) ^ 1
                     : scalar::canonical(in.type.scalar(), ~arg(0, l));
        });
        break;
      case Op::kCmpEq:
      case Op::kCmpNe:
      case Op::kCmpLt:
      case Op::kCmpLe:
      case Op::kCmpGt:
      case Op::kCmpGe: {
        scalar::CmpOp op =
            in.op == Op::kCmpEq   ? scalar::CmpOp::kEq
            : in.op == Op::kCmpNe ? scalar::CmpOp::kNe
            : in.op == Op::kCmpLt ? scalar::CmpOp::kLt
            : in.op == Op::kCmpLe ? scalar::CmpOp::kLe
            : in.op == Op::kCmpGt ? scalar::CmpOp::kGt
                                  : scalar::CmpOp::kGe;
        ScalarKind k = operand_type(0).scalar();
        each([&](int l) {
          return static_cast<uint64_t>(scalar::compare(op, k, arg(0, l), arg(1, l)));
        });
        break;
      }
      case Op::kConvert: {
        ScalarKind from = operand_type(0).scalar();
        each([&](int l) { return scalar::convert(from, in.type.scalar(), arg(0, l)); });
        break;
      }
      case Op::kSelect:
        each([&](int l) { return (arg(0, l) & 1) ? arg(1, l) : arg(2, l); });
        break;
      case Op::kGep:
        each([&](int l) {
          uint64_t p = arg(0, l) + static_cast<uint64_t>(in.offset);
          if (in.operands.size() > 1) p += arg(1, l) * in.imm;
          return p;
        });
        break;
      case Op::kAddrSpaceCast: {
        AddressSpace from = operand_type(0).space;
        AddressSpace to = in.space;
        each([&](int l) {
          uint64_t p = arg(0, l);
          if (from == AddressSpace::kGeneric && to != AddressSpace::kGeneric) {
            if ((p >> kWindowShift) != static_cast<uint64_t>(to)) {
              fail(ErrorKind::kMemory,
                   fmt::format("cast of address {:#x} to {} space", p,
                               space_title(to)));
            }
            return p & kOffsetMask;
          }
          if (from != AddressSpace::kGeneric && to == AddressSpace::kGeneric) {
            return window_base(from) + p;
          }
          return p;
        });
        break;
      }
      case Op::kLoad:
      case Op::kStore:
        memory_op(w, f, in);
        f.ip++;
        return;
      case Op::kPhi:
        fail(ErrorKind::kRuntime, "phi after the start of a block");
      case Op::kCall: {
        const lir::Function* callee = kernel_.module.find(in.callee);
        if (!callee) fail(ErrorKind::kRuntime, "call to unknown @" + in.callee);
        report_.cycles += costs_.arithmetic;
        push_frame(w, *callee, e.mask, in.result,
                   [&](size_t i, int l) { return arg(i, l); });
        return;  // the caller resumes after the callee returns
      }
      case Op::kCallRuntime:
        fail(ErrorKind::kRuntime, "host runtime call @" + in.callee + " on the device");
      case Op::kIntrinsic:
        intrinsic(w, f, in);
        return;
      case Op::kBr:
        report_.cycles += costs_.arithmetic;
        jump(f, e, in.targets[0]);
        return;
      case Op::kCondBr:
        report_.cycles += costs_.arithmetic;
        branch(f, in);
        return;
      case Op::kRet:
        if (!in.operands.empty()) {
          for_lanes(e.mask, [&](int l) { f.ret_vals[l] = arg(0, l); });
        }
        f.returned |= e.mask;
        f.stack.pop_back();
        f.ip = 0;
        return;
      case Op::kTrap:
        for_lanes(e.mask, [&](int l) {
          report_.traps.push_back(
              {block_, w.thread[l], static_cast<int64_t>(arg(0, l))});
        });
        aborted_ = true;
        return;
      case Op::kUnreachable:
        fail(ErrorKind::kRuntime, "reached unreachable code in @" + fn.name);
    }
    report_.cycles += costs_.arithmetic;
    f.ip++;
  }

  void branch(Frame& f, const Instr& in) {
    Entry& e = f.stack.back();
    uint64_t taken = 0;
    for_lanes(e.mask, [&](int l) {
      if (val(f, in.operands[0], l) & 1) taken |= uint64_t{1} << l;
    });
    uint64_t fallthrough = e.mask & ~taken;
    if (fallthrough == 0) return jump(f, e, in.targets[0]);
    if (taken == 0) return jump(f, e, in.targets[1]);
    report_.events.divergent_branches++;
    BlockId here = e.block;
    BlockId rejoin = f.info->ipdom[here];
    for_lanes(e.mask, [&](int l) { f.prev[l] = here; });
    Entry t{in.targets[0], rejoin, taken};
    Entry n{in.targets[1], rejoin, fallthrough};
    if (rejoin == e.reconv) {
      // Someone below already waits at the rejoin block.
      e = n;
    } else {
      e.block = rejoin;
      e.entered = false;
      e.waiting = true;
      e.arrived = 0;
      f.stack.push_back(n);
    }
    f.stack.push_back(t);
    f.ip = 0;
    if (f.stack.size() > limits_.max_reconvergence_depth) {
      fail(ErrorKind::kRuntime,
           fmt::format("reconvergence stack overflow (depth {}) in @{}",
                       f.stack.size(), f.info->fn->name));
    }
  }

  void intrinsic(Warp& w, Frame& f, const Instr& in) {
    Entry& e = f.stack.back();
    const std::string& name = in.callee;
    auto set = [&](auto&& compute) {
      for_lanes(e.mask, [&](int l) { val(f, in.result, l) = compute(l); });
    };
    auto axis = [&](std::string_view prefix, auto&& dim) -> bool {
      if (name.size() != prefix.size() + 1 || name.compare(0, prefix.size(), prefix) != 0) {
        return false;
      }
      char c = name.back();
      set([&](int l) {
        Dim3i d = dim(l);
        int64_t v = c == 'x' ? d.x : c == 'y' ? d.y : d.z;
        return scalar::from_i64(ScalarKind::kInt32, v);
      });
      return true;
    };
    report_.cycles += costs_.arithmetic;
    if (axis("thread_idx_", [&](int l) { return w.thread[l]; }) ||
        axis("block_idx_", [&](int) { return block_; }) ||
        axis("block_dim_", [&](int) { return config_.block; }) ||
        axis("grid_dim_", [&](int) { return config_.grid; })) {
      f.ip++;
      return;
    }
    if (name == "warpsize") {
      set([&](int) { return static_cast<uint64_t>(width_); });
    } else if (name == "barrier") {
      report_.cycles += costs_.barrier_per_warp - costs_.arithmetic;
      if (e.mask != w.exists) {
        fail(ErrorKind::kRuntime,
             fmt::format("barrier divergence: only lanes {:#x} of warp {} "
                         "(lanes {:#x}) reach the barrier at {}",
                         e.mask, w.index, w.exists, in.span.str()));
      }
      report_.events.barriers++;
      w.at_barrier = true;
      w.barrier_site = &in;
      return;  // released by the block scheduler
    } else if (name == "shfl_down_u32") {
      report_.cycles += costs_.shuffle_per_word - costs_.arithmetic;
      report_.events.shuffles++;
      std::vector<uint64_t> words(width_, 0);
      for_lanes(e.mask, [&](int l) { words[l] = val(f, in.operands[0], l); });
      set([&](int l) {
        auto delta = static_cast<int32_t>(val(f, in.operands[1], l));
        if (delta < 0 || delta >= width_) {
          fail(ErrorKind::kRuntime,
               fmt::format("shfl_down delta {} outside 0..{}", delta, width_ - 1));
        }
        int src = l + delta;
        return src < width_ ? words[src] : words[l];
      });
    } else if (name == "atomic_add_i32" || name == "atomic_add_i64") {
      ScalarKind k = in.type.scalar();
      uint64_t size = in.type.size();
      LirType ptr_type = f.info->fn->value_types[in.operands[0]];
      report_.cycles += costs_.global - costs_.arithmetic;
      for_lanes(e.mask, [&](int l) {
        Resolved r = resolve(w, l, val(f, in.operands[0], l), ptr_type,
                             AddressSpace::kGlobal, size, true);
        uint64_t old = 0;
        std::memcpy(&old, r.data, size);
        uint64_t sum = *scalar::arith(scalar::ArithOp::kAdd, k, old,
                                      val(f, in.operands[1], l));
        std::memcpy(r.data, &sum, size);
        val(f, in.result, l) = old;
      });
      report_.events.atomics += std::popcount(e.mask);
    } else {
      bool handled = true;
      set([&](int l) {
        std::vector<uint64_t> args;
        for (ValueId v : in.operands) args.push_back(val(f, v, l));
        auto r = device::eval_math_intrinsic(name, args);
        if (!r) handled = false;
        return r.value_or(0);
      });
      if (!handled || e.mask == 0) {
        if (!device::eval_math_intrinsic(name, std::vector<uint64_t>(in.operands.size(), 0))) {
          fail(ErrorKind::kRuntime, "unknown intrinsic @" + name);
        }
      }
    }
    f.ip++;
  }

  DeviceState& state_;
  const device::CompiledKernel& kernel_;
  LaunchConfig config_;
  std::vector<uint8_t> params_;
  CostTable costs_;
  DeviceLimits limits_;
  int width_;
  std::map<const lir::Function*, FunctionInfo> infos_;
  std::vector<uint8_t> shared_;
  Dim3i block_;
  ExecutionReport report_;
  uint64_t steps_ = 0;
  bool aborted_ = false;
};

}  // namespace

ExecutionReport launch(DeviceState& state, const device::CompiledKernel& kernel,
                       const LaunchConfig& config,
                       std::span<const uint8_t> param_bytes) {
  ExecutionReport report = Executor(state, kernel, config, param_bytes).run();
  state.lifetime_ += report.events;
  state.lifetime_cycles_ += report.cycles;
  state.launches_++;
  return report;
}

}  // namespace kf::vm
