// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "evm_internal.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace srvscan::evm {

std::string_view terminator_name(Terminator t) {
    switch (t) {
        case Terminator::Jump: return "JUMP";
        case Terminator::JumpI: return "JUMPI";
        case Terminator::Stop: return "STOP";
        case Terminator::Return: return "RETURN";
        case Terminator::Revert: return "REVERT";
        case Terminator::SelfDestruct: return "SELFDESTRUCT";
        case Terminator::Invalid: return "INVALID";
        case Terminator::Fallthrough: return "fallthrough";
    }
    return "?";
}

std::string_view edge_kind_name(EdgeKind k) {
    switch (k) {
        case EdgeKind::Jump: return "jump";
        case EdgeKind::BranchTaken: return "branch-taken";
        case EdgeKind::BranchFallthrough: return "branch-fallthrough";
        case EdgeKind::Sequential: return "sequential";
    }
    return "?";
}

std::optional<BlockId> Cfg::block_at(std::size_t offset) const {
    auto it = std::lower_bound(blocks.begin(), blocks.end(), offset,
                               [](const BasicBlock& b, std::size_t o) { return b.start < o; });
    if (it == blocks.end() || it->start != offset) return std::nullopt;
    return it->id;
}

std::vector<BlockId> Cfg::successors(BlockId b, bool include_conservative) const {
    std::vector<BlockId> out;
    for (const auto& e : edges)
        if (e.from == b && (include_conservative || !e.conservative)) out.push_back(e.to);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<BlockId> Cfg::predecessors(BlockId b, bool include_conservative) const {
    std::vector<BlockId> out;
    for (const auto& e : edges)
        if (e.to == b && (include_conservative || !e.conservative)) out.push_back(e.from);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool Cfg::is_unresolved(BlockId b) const {
    return std::binary_search(unresolved_jumps.begin(), unresolved_jumps.end(), b);
}

namespace {

bool ends_block(std::uint8_t opc) {
    switch (opc) {
        case op::JUMP:
        case op::JUMPI:
        case op::STOP:
        case op::RETURN:
        case op::REVERT:
        case op::INVALID:
        case op::SELFDESTRUCT: return true;
        default: return !op_info(opc).defined;
    }
}

Terminator terminator_for(std::uint8_t opc) {
    switch (opc) {
        case op::JUMP: return Terminator::Jump;
        case op::JUMPI: return Terminator::JumpI;
        case op::STOP: return Terminator::Stop;
        case op::RETURN: return Terminator::Return;
        case op::REVERT: return Terminator::Revert;
        case op::SELFDESTRUCT: return Terminator::SelfDestruct;
        case op::INVALID: return Terminator::Invalid;
        default: return op_info(opc).defined ? Terminator::Fallthrough : Terminator::Invalid;
    }
}

std::vector<BasicBlock> split_blocks(std::span<const Instruction> instrs) {
    std::vector<BasicBlock> blocks;
    for (const auto& in : instrs) {
        bool fresh = blocks.empty() || in.opcode == op::JUMPDEST ||
                     ends_block(blocks.back().instructions.back().opcode);
        if (fresh) {
            BasicBlock b;
            b.id = static_cast<BlockId>(blocks.size());
            b.start = in.offset;
            blocks.push_back(std::move(b));
        }
        blocks.back().instructions.push_back(in);
    }
    for (auto& b : blocks) {
        b.end = b.instructions.back().offset;
        b.terminator = terminator_for(b.instructions.back().opcode);
    }
    return blocks;
}

struct Step {
    std::vector<std::pair<BlockId, EdgeKind>> succ;
    bool unresolved = false;
};

Step successors_of(const Cfg& cfg, const BasicBlock& b, const BlockEval& ev) {
    Step s;
    const bool has_next = b.id + 1 < cfg.blocks.size();
    switch (b.terminator) {
        case Terminator::Jump:
        case Terminator::JumpI: {
            auto kind = b.terminator == Terminator::Jump ? EdgeKind::Jump : EdgeKind::BranchTaken;
            if (is_const(ev.jump_target)) {
                if (auto t = detail::jump_block(cfg, ev.jump_target)) s.succ.emplace_back(*t, kind);
            } else {
                s.unresolved = true;
            }
            if (b.terminator == Terminator::JumpI && has_next) s.succ.emplace_back(b.id + 1, EdgeKind::BranchFallthrough);
            break;
        }
        case Terminator::Fallthrough:
            if (has_next) s.succ.emplace_back(b.id + 1, EdgeKind::Sequential);
            break;
        default: break;
    }
    return s;
}

}  // namespace

namespace detail {

std::optional<BlockId> jump_block(const Cfg& cfg, const SymRef& target) {
    if (!is_const(target) || !fits_bits(target->value, 48)) return std::nullopt;
    auto b = cfg.block_at(static_cast<std::size_t>(low_u64(target->value)));
    if (!b || !cfg.blocks[*b].starts_with_jumpdest()) return std::nullopt;
    return b;
}

}  // namespace detail

Cfg build_cfg(std::span<const Instruction> instrs, const Deadline& deadline) {
    Cfg cfg;
    cfg.blocks = split_blocks(instrs);
    const std::size_t n = cfg.blocks.size();
    cfg.entry_states.assign(n, std::nullopt);
    if (n == 0) return cfg;

    std::set<std::size_t> pushed;
    for (const auto& in : instrs) {
        if (!in.is_push() || in.immediate.empty() || in.immediate.size() > 6) continue;
        auto v = static_cast<std::size_t>(low_u64(in.push_value()));
        if (auto b = cfg.block_at(v); b && cfg.blocks[*b].starts_with_jumpdest()) pushed.insert(v);
    }
    cfg.pushed_jumpdests.assign(pushed.begin(), pushed.end());

    std::vector<std::optional<BlockEval>> evals(n);
    std::vector<Step> steps(n);
    std::vector<std::set<BlockId>> preds(n);
    std::vector<int> visits(n, 0);
    std::vector<bool> seeded(n, false);
    seeded[cfg.entry] = true;
    std::set<BlockId> work{cfg.entry};

    auto process = [&](BlockId b) {
        std::optional<SymStack> in;
        if (seeded[b]) in = SymStack{};
        for (auto p : preds[b]) {
            if (!evals[p]) continue;
            in = in ? meet(*in, evals[p]->exit) : evals[p]->exit;
        }
        if (!in) return;
        if (evals[b] && cfg.entry_states[b] && stack_equal(*cfg.entry_states[b], *in)) return;
        if (visits[b] >= kFixpointIterationCap) return;
        ++visits[b];
        cfg.entry_states[b] = *in;
        evals[b] = evaluate_block(cfg.blocks[b], *in);
        Step next = successors_of(cfg, cfg.blocks[b], *evals[b]);
        for (const auto& [t, k] : steps[b].succ) {
            preds[t].erase(b);
            work.insert(t);
        }
        for (const auto& [t, k] : next.succ) {
            preds[t].insert(b);
            work.insert(t);
        }
        steps[b] = std::move(next);
    };

    for (;;) {
        while (!work.empty()) {
            deadline.check();
            BlockId b = *work.begin();
            work.erase(work.begin());
            process(b);
        }
        // Targets of unresolved jumps get evaluated from an unknown stack.
        for (BlockId b = 0; b < n; ++b) {
            if (!evals[b] || !steps[b].unresolved) continue;
            for (auto off : cfg.pushed_jumpdests) {
                auto t = *cfg.block_at(off);
                if (!evals[t] && !seeded[t]) {
                    seeded[t] = true;
                    work.insert(t);
                }
            }
        }
        if (work.empty()) break;
    }

    for (BlockId b = 0; b < n; ++b) {
        deadline.check();
        const auto& blk = cfg.blocks[b];
        Step st;
        if (evals[b]) {
            st = steps[b];
        } else {
            st = successors_of(cfg, blk, evaluate_block(blk, SymStack{}));
            st.unresolved = false;
        }
        for (const auto& [t, k] : st.succ) cfg.edges.push_back({b, t, k, false});
        if (st.unresolved) {
            cfg.unresolved_jumps.push_back(b);
            auto kind = blk.terminator == Terminator::Jump ? EdgeKind::Jump : EdgeKind::BranchTaken;
            for (auto off : cfg.pushed_jumpdests) cfg.edges.push_back({b, *cfg.block_at(off), kind, true});
        }
    }
    return cfg;
}

std::string cfg_to_dot(const Cfg& cfg) {
    std::ostringstream os;
    os << "digraph cfg {\n  node [shape=box, fontname=monospace];\n";
    char buf[64];
    for (const auto& b : cfg.blocks) {
        std::snprintf(buf, sizeof buf, "0x%04zx", b.start);
        os << "  b" << b.id << " [label=\"" << b.id << " @" << buf << " " << terminator_name(b.terminator) << "\"";
        if (cfg.is_unresolved(b.id)) os << ", color=orange";
        os << "];\n";
    }
    for (const auto& e : cfg.edges) {
        os << "  b" << e.from << " -> b" << e.to << " [label=\"" << edge_kind_name(e.kind) << "\"";
        if (e.conservative) os << ", style=dashed";
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Dominators and natural loops

std::vector<std::optional<BlockId>> immediate_dominators(std::size_t node_count, BlockId entry,
                                                         const std::vector<std::vector<BlockId>>& successors) {
    std::vector<std::optional<BlockId>> idom(node_count);
    if (entry >= node_count) return idom;
    // Reverse postorder by iterative DFS.
    std::vector<int> order(node_count, -1);
    std::vector<BlockId> post;
    std::vector<std::pair<BlockId, std::size_t>> stack{{entry, 0}};
    std::vector<bool> seen(node_count, false);
    seen[entry] = true;
    while (!stack.empty()) {
        auto& [v, i] = stack.back();
        if (i < successors[v].size()) {
            BlockId w = successors[v][i++];
            if (!seen[w]) {
                seen[w] = true;
                stack.emplace_back(w, 0);
            }
        } else {
            post.push_back(v);
            stack.pop_back();
        }
    }
    std::vector<BlockId> rpo(post.rbegin(), post.rend());
    for (std::size_t i = 0; i < rpo.size(); ++i) order[rpo[i]] = static_cast<int>(i);
    std::vector<std::vector<BlockId>> preds(node_count);
    for (BlockId v = 0; v < node_count; ++v)
        if (seen[v])
            for (auto w : successors[v]) preds[w].push_back(v);

    idom[entry] = entry;
    auto intersect = [&](BlockId a, BlockId b) {
        while (a != b) {
            while (order[a] > order[b]) a = *idom[a];
            while (order[b] > order[a]) b = *idom[b];
        }
        return a;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 1; i < rpo.size(); ++i) {
            BlockId v = rpo[i];
            std::optional<BlockId> cand;
            for (auto p : preds[v]) {
                if (!idom[p]) continue;
                cand = cand ? intersect(*cand, p) : p;
            }
            if (cand && idom[v] != cand) {
                idom[v] = cand;
                changed = true;
            }
        }
    }
    return idom;
}

std::vector<Loop> find_natural_loops(std::size_t node_count, BlockId entry,
                                     const std::vector<std::vector<BlockId>>& successors) {
    auto idom = immediate_dominators(node_count, entry, successors);
    auto dominates = [&](BlockId a, BlockId b) {
        for (BlockId x = b;; x = *idom[x]) {
            if (x == a) return true;
            if (x == entry) return false;
        }
    };
    std::vector<std::vector<BlockId>> preds(node_count);
    for (BlockId v = 0; v < node_count; ++v)
        if (idom[v])
            for (auto w : successors[v]) preds[w].push_back(v);

    std::vector<Loop> loops;
    for (BlockId u = 0; u < node_count; ++u) {
        if (!idom[u]) continue;
        std::set<BlockId> targets(successors[u].begin(), successors[u].end());
        for (auto h : targets) {
            if (!dominates(h, u)) continue;
            std::set<BlockId> body{h, u};
            std::vector<BlockId> work;
            if (u != h) work.push_back(u);
            while (!work.empty()) {
                BlockId v = work.back();
                work.pop_back();
                for (auto p : preds[v])
                    if (body.insert(p).second) work.push_back(p);
            }
            loops.push_back({h, u, {body.begin(), body.end()}});
        }
    }
    std::sort(loops.begin(), loops.end(),
              [](const Loop& a, const Loop& b) { return std::tie(a.header, a.latch) < std::tie(b.header, b.latch); });
    return loops;
}

std::vector<Loop> find_loops(const Cfg& cfg) {
    std::vector<std::vector<BlockId>> succ(cfg.blocks.size());
    for (const auto& e : cfg.edges)
        if (!e.conservative) succ[e.from].push_back(e.to);
    for (auto& s : succ) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return find_natural_loops(cfg.blocks.size(), cfg.entry, succ);
}

std::vector<BlockAccesses> classify_accesses(const Cfg& cfg) {
    std::vector<BlockAccesses> out;
    for (const auto& b : cfg.blocks) {
        const auto& in = cfg.entry_states[b.id];
        auto ev = evaluate_block(b, in ? *in : SymStack{});
        BlockAccesses acc;
        acc.block = b.id;
        for (const auto& e : ev.events) {
            if (e.type == BlockEvent::Type::StorageRead || e.type == BlockEvent::Type::StorageWrite) {
                acc.storage.push_back({e.offset,
                                       e.type == BlockEvent::Type::StorageRead ? AccessMode::Read : AccessMode::Write,
                                       e.slot});
            } else if (e.type == BlockEvent::Type::EnvRead) {
                if (std::find(acc.env_reads.begin(), acc.env_reads.end(), e.atom) == acc.env_reads.end())
                    acc.env_reads.push_back(e.atom);
            }
        }
        if (!acc.storage.empty() || !acc.env_reads.empty()) out.push_back(std::move(acc));
    }
    return out;
}

}  // namespace srvscan::evm
