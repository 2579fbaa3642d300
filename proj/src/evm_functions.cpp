// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "evm_internal.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace srvscan::evm {

namespace detail {

namespace {

using Signature = std::vector<std::pair<std::uint32_t, std::size_t>>;

const Signature kCollapsed{{~std::uint32_t{0}, 0}};

Signature signature_of(const Cfg& cfg, const SymStack& st) {
    Signature sig;
    for (std::uint32_t d = 0; d < st.items.size(); ++d) {
        const auto& v = st.peek(d);
        if (jump_block(cfg, v)) sig.emplace_back(d, static_cast<std::size_t>(low_u64(v->value)));
    }
    return sig;
}

}  // namespace

Exploration explore(const Cfg& cfg, BlockId entry, const Deadline& deadline) {
    Exploration x;
    std::map<std::pair<BlockId, Signature>, std::uint32_t> index;
    std::map<BlockId, std::size_t> contexts;
    std::set<std::uint32_t> work;

    auto node_for = [&](BlockId b, const SymStack& st) -> std::optional<std::uint32_t> {
        Signature sig = signature_of(cfg, st);
        auto it = index.find({b, sig});
        if (it != index.end()) return it->second;
        if (contexts[b] >= kMaxContextsPerBlock) {
            sig = kCollapsed;
            it = index.find({b, sig});
            if (it != index.end()) return it->second;
        }
        if (x.nodes.size() >= kMaxNodes) {
            x.incomplete = true;
            return std::nullopt;
        }
        auto id = static_cast<std::uint32_t>(x.nodes.size());
        XNode n;
        n.block = b;
        n.signature = sig;
        n.in = st;
        n.visits = -1;  // marks "never evaluated"
        x.nodes.push_back(std::move(n));
        index[{b, sig}] = id;
        ++contexts[b];
        work.insert(id);
        return id;
    };

    const auto& seed = cfg.entry_states[entry];
    node_for(entry, seed ? *seed : SymStack{});

    while (!work.empty()) {
        deadline.check();
        std::uint32_t id = *work.begin();
        work.erase(work.begin());
        if (x.nodes[id].visits >= kFixpointIterationCap) continue;
        x.nodes[id].visits = std::max(x.nodes[id].visits, 0) + 1;
        const auto& blk = cfg.blocks[x.nodes[id].block];
        BlockEval ev = evaluate_block(blk, x.nodes[id].in);

        std::vector<std::pair<BlockId, EdgeKind>> targets;
        bool unresolved = false;
        if (blk.terminator == Terminator::Jump || blk.terminator == Terminator::JumpI) {
            auto kind = blk.terminator == Terminator::Jump ? EdgeKind::Jump : EdgeKind::BranchTaken;
            if (is_const(ev.jump_target)) {
                if (auto t = jump_block(cfg, ev.jump_target)) targets.emplace_back(*t, kind);
            } else {
                unresolved = true;
            }
            if (blk.terminator == Terminator::JumpI && blk.id + 1 < cfg.blocks.size())
                targets.emplace_back(blk.id + 1, EdgeKind::BranchFallthrough);
        } else if (blk.terminator == Terminator::Fallthrough && blk.id + 1 < cfg.blocks.size()) {
            targets.emplace_back(blk.id + 1, EdgeKind::Sequential);
        }

        std::vector<std::uint32_t> succ;
        std::vector<EdgeKind> kinds;
        for (const auto& [t, k] : targets) {
            auto before = x.nodes.size();
            auto nid = node_for(t, ev.exit);
            if (!nid) continue;
            auto& inc = x.nodes[*nid];
            if (std::none_of(inc.incoming.begin(), inc.incoming.end(),
                             [&](const SymStack& s) { return stack_equal(s, ev.exit); })) {
                if (inc.incoming.size() < kMaxIncoming) inc.incoming.push_back(ev.exit);
                else inc.incoming_overflow = true;
            }
            if (*nid < before) {
                auto& tn = x.nodes[*nid];
                SymStack merged = meet(tn.in, ev.exit);
                if (!stack_equal(merged, tn.in)) {
                    tn.in = std::move(merged);
                    work.insert(*nid);
                }
            }
            succ.push_back(*nid);
            kinds.push_back(k);
        }
        auto& node = x.nodes[id];
        node.eval = std::move(ev);
        node.succ = std::move(succ);
        node.succ_kind = std::move(kinds);
        node.unresolved = unresolved;
    }

    // Drop nodes only reachable through edges that later evaluations retracted.
    std::vector<int> remap(x.nodes.size(), -1);
    std::vector<std::uint32_t> order{0};
    remap[0] = 0;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (auto s : x.nodes[order[i]].succ)
            if (remap[s] < 0) {
                remap[s] = static_cast<int>(order.size());
                order.push_back(s);
            }
    std::vector<XNode> kept;
    kept.reserve(order.size());
    for (auto id : order) {
        XNode n = std::move(x.nodes[id]);
        for (auto& s : n.succ) s = static_cast<std::uint32_t>(remap[s]);
        if (n.unresolved) {
            x.incomplete = true;
            x.unresolved_offsets.push_back(cfg.blocks[n.block].end);
        }
        kept.push_back(std::move(n));
    }
    x.nodes = std::move(kept);
    std::sort(x.unresolved_offsets.begin(), x.unresolved_offsets.end());
    x.unresolved_offsets.erase(std::unique(x.unresolved_offsets.begin(), x.unresolved_offsets.end()),
                               x.unresolved_offsets.end());
    return x;
}

std::vector<std::vector<BlockId>> successor_lists(const Exploration& x) {
    std::vector<std::vector<BlockId>> out(x.nodes.size());
    for (std::size_t i = 0; i < x.nodes.size(); ++i) {
        out[i] = x.nodes[i].succ;
        std::sort(out[i].begin(), out[i].end());
        out[i].erase(std::unique(out[i].begin(), out[i].end()), out[i].end());
    }
    return out;
}

}  // namespace detail

namespace {

bool mentions_calldata(const SymRef& s, int budget = 32) {
    if (!s || budget <= 0) return false;
    if (s->kind == Sym::Kind::Env && s->env == EnvAtom::CallData) return true;
    for (const auto& a : s->args)
        if (mentions_calldata(a, budget - 1)) return true;
    return false;
}

struct Compare {
    std::uint32_t selector;
    BlockId target;
};

/// Matches `DUP1 PUSH4 s EQ PUSHn d JUMPI` or `PUSH4 s DUP2 EQ PUSHn d JUMPI` at the block tail.
std::optional<Compare> match_compare(const Cfg& cfg, const BasicBlock& b) {
    const auto& ins = b.instructions;
    if (ins.size() < 5 || b.terminator != Terminator::JumpI) return std::nullopt;
    const std::size_t n = ins.size();
    const auto& push_dest = ins[n - 2];
    const auto& eq = ins[n - 3];
    if (!push_dest.is_push() || push_dest.immediate.empty() || eq.opcode != op::EQ) return std::nullopt;
    const Instruction* sel = nullptr;
    if (ins[n - 4].opcode == op::PUSH4 && ins[n - 5].opcode == op::DUP1) sel = &ins[n - 4];
    else if (ins[n - 4].opcode == op::DUP2 && ins[n - 5].opcode == op::PUSH4) sel = &ins[n - 5];
    if (!sel) return std::nullopt;
    auto target = detail::jump_block(cfg, sym_const(push_dest.push_value()));
    if (!target) return std::nullopt;

    // The compared value must plausibly be the calldata selector.
    BasicBlock prefix = b;
    prefix.instructions.resize(n - 5);
    const auto& in = cfg.entry_states[b.id];
    auto ev = evaluate_block(prefix, in ? *in : SymStack{});
    const auto& top = ev.exit.peek(0);
    if (top && !mentions_calldata(top)) return std::nullopt;
    return Compare{static_cast<std::uint32_t>(low_u64(sel->push_value())), *target};
}

}  // namespace

std::vector<FunctionEntry> recover_functions(const Cfg& cfg, const Deadline& deadline) {
    std::vector<FunctionEntry> out;
    if (cfg.blocks.empty()) return out;
    std::set<std::uint32_t> seen;
    std::optional<BlockId> last_compare;
    for (const auto& b : cfg.blocks) {
        if (!cfg.entry_states[b.id]) continue;
        auto c = match_compare(cfg, b);
        if (!c) continue;
        last_compare = b.id;
        if (!seen.insert(c->selector).second) continue;
        out.push_back({c->selector, c->target, {}});
    }
    FunctionEntry fallback{std::nullopt, cfg.entry, {}};
    if (last_compare && *last_compare + 1 < cfg.blocks.size()) fallback.entry = *last_compare + 1;
    out.push_back(fallback);

    for (auto& f : out) {
        auto x = detail::explore(cfg, f.entry, deadline);
        std::set<BlockId> exits;
        for (const auto& n : x.nodes) {
            auto t = cfg.blocks[n.block].terminator;
            if (t == Terminator::Stop || t == Terminator::Return || t == Terminator::Revert) exits.insert(n.block);
        }
        f.exits.assign(exits.begin(), exits.end());
    }
    return out;
}

std::string lifted_function_name(const FunctionEntry& e) {
    return e.selector ? selector_to_hex(*e.selector) : std::string("fallback");
}

}  // namespace srvscan::evm
