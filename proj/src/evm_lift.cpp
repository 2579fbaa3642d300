// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "evm_internal.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace srvscan::evm {

VarKey unknown_slot_var() { return {~U256(0), VarKind::Scalar}; }

namespace {

using detail::Exploration;
using detail::XNode;

VarKey key_of(const SlotRef& s) {
    if (s.kind == SlotKind::Unknown) return unknown_slot_var();
    return {s.slot, s.kind == SlotKind::MappingBase ? VarKind::MappingBase : VarKind::Scalar};
}

bool is_boolean(const Expr& e) {
    return std::holds_alternative<Compare>(e.node) || std::holds_alternative<Logic>(e.node);
}

Expr negate(Expr e) {
    if (auto* l = std::get_if<Logic>(&e.node); l && l->op == BoolOp::Not) return l->args.front();
    return Expr::logic(BoolOp::Not, {std::move(e)});
}

class ExprBuilder {
public:
    std::set<VarKey> vars;
    std::optional<std::uint32_t> max_param;

    Expr build(const SymRef& s) {
        if (!s) return Expr::opaque();
        switch (s->kind) {
            case Sym::Kind::Const: return Expr::constant(s->value);
            case Sym::Kind::Env: return Expr::env(s->env);
            case Sym::Kind::Param:
                max_param = std::max(max_param.value_or(0), s->index);
                return Expr::param(s->index);
            case Sym::Kind::Storage: {
                auto k = key_of(s->slot);
                vars.insert(k);
                return Expr::var(k);
            }
            case Sym::Kind::CallResult: return Expr::call_result();
            case Sym::Kind::MapSlot: return Expr::opaque();
            case Sym::Kind::Op: break;
        }
        std::vector<Expr> a;
        for (const auto& c : s->args) a.push_back(build(c));
        switch (s->opcode) {
            case op::ADD: return Expr::arith(ArithOp::Add, std::move(a));
            case op::SUB: return Expr::arith(ArithOp::Sub, std::move(a));
            case op::MUL: return Expr::arith(ArithOp::Mul, std::move(a));
            case op::DIV:
            case op::SDIV: return Expr::arith(ArithOp::Div, std::move(a));
            case op::MOD:
            case op::SMOD: return Expr::arith(ArithOp::Mod, std::move(a));
            case op::SHR:
            case op::SAR: return Expr::arith(ArithOp::Shr, {std::move(a[1]), std::move(a[0])});
            case op::SHL: return Expr::arith(ArithOp::Shl, {std::move(a[1]), std::move(a[0])});
            case op::AND: return Expr::arith(ArithOp::AndBits, std::move(a));
            case op::XOR: return Expr::arith(ArithOp::Xor, std::move(a));
            case op::OR: return Expr::logic(BoolOp::Or, std::move(a));
            case op::EQ: return Expr::cmp(CmpOp::Eq, std::move(a[0]), std::move(a[1]));
            case op::LT:
            case op::SLT: return Expr::cmp(CmpOp::Lt, std::move(a[0]), std::move(a[1]));
            case op::GT:
            case op::SGT: return Expr::cmp(CmpOp::Gt, std::move(a[0]), std::move(a[1]));
            case op::ISZERO:
                if (is_boolean(a[0])) return negate(std::move(a[0]));
                return Expr::cmp(CmpOp::Eq, std::move(a[0]), Expr::constant(0));
            case op::NOT: return Expr::arith(ArithOp::Xor, {std::move(a[0]), Expr::constant(~U256(0))});
            default:
                // No model operator (hashes, EXP, BYTE, ...): keep operands as a mix.
                return Expr::arith(ArithOp::Xor, std::move(a));
        }
    }
};

struct Reach {
    std::vector<bool> revert;
    std::vector<bool> normal;
};

Reach reach_outcomes(const Cfg& cfg, const Exploration& x) {
    const std::size_t n = x.nodes.size();
    Reach r{std::vector<bool>(n, false), std::vector<bool>(n, false)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = x.nodes[i];
        switch (cfg.blocks[node.block].terminator) {
            case Terminator::Revert:
            case Terminator::Invalid: r.revert[i] = true; break;
            case Terminator::Stop:
            case Terminator::Return:
            case Terminator::SelfDestruct: r.normal[i] = true; break;
            case Terminator::Jump:
                if (node.unresolved) r.normal[i] = true;
                else if (node.succ.empty()) r.revert[i] = true;  // constant jump to a non-JUMPDEST
                break;
            default:
                if (node.unresolved || node.succ.empty()) r.normal[i] = true;
                break;
        }
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = n; i-- > 0;) {
            for (auto s : x.nodes[i].succ) {
                if (r.revert[s] && !r.revert[i]) r.revert[i] = changed = true;
                if (r.normal[s] && !r.normal[i]) r.normal[i] = changed = true;
            }
        }
    }
    return r;
}

struct Branch {
    std::uint32_t taken = 0;
    std::uint32_t fall = 0;
};

std::optional<Branch> branch_of(const XNode& n) {
    std::optional<std::uint32_t> t, f;
    for (std::size_t k = 0; k < n.succ.size(); ++k) {
        if (n.succ_kind[k] == EdgeKind::BranchTaken) t = n.succ[k];
        if (n.succ_kind[k] == EdgeKind::BranchFallthrough) f = n.succ[k];
    }
    if (!t || !f || *t == *f) return std::nullopt;
    return Branch{*t, *f};
}

std::vector<bool> reach_from(const Exploration& x, std::uint32_t start, std::uint32_t avoid) {
    std::vector<bool> seen(x.nodes.size(), false);
    if (start == avoid) return seen;
    std::vector<std::uint32_t> work{start};
    seen[start] = true;
    while (!work.empty()) {
        auto v = work.back();
        work.pop_back();
        for (auto s : x.nodes[v].succ)
            if (s != avoid && !seen[s]) {
                seen[s] = true;
                work.push_back(s);
            }
    }
    return seen;
}

std::vector<std::uint32_t> reverse_postorder(const Exploration& x) {
    std::vector<std::uint32_t> post;
    std::vector<bool> seen(x.nodes.size(), false);
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
    seen[0] = true;
    while (!stack.empty()) {
        auto& [v, i] = stack.back();
        if (i < x.nodes[v].succ.size()) {
            auto w = x.nodes[v].succ[i++];
            if (!seen[w]) {
                seen[w] = true;
                stack.emplace_back(w, 0);
            }
        } else {
            post.push_back(v);
            stack.pop_back();
        }
    }
    return {post.rbegin(), post.rend()};
}

struct NodeLoop {
    std::uint32_t header = 0;
    std::set<std::uint32_t> body;
    int parent = -1;
};

class FunctionLifter {
public:
    FunctionLifter(const Cfg& cfg, const Exploration& x, std::span<const Loop> cfg_loops, LiftResult& out,
                   std::string name)
        : cfg_(cfg), x_(x), out_(out), name_(std::move(name)) {
        rpo_ = reverse_postorder(x_);
        rank_.assign(x_.nodes.size(), 0);
        for (std::size_t i = 0; i < rpo_.size(); ++i) rank_[rpo_[i]] = i;
        reach_ = reach_outcomes(cfg_, x_);
        collect_loops(cfg_loops);
        classify_branches();
    }

    FunctionDef run(const FunctionEntry& e) {
        FunctionDef f;
        f.name = name_;
        f.selector = e.selector;
        f.visibility = e.selector ? Visibility::External : Visibility::Public;
        f.body = emit(-1);
        f.param_count = exprs_.max_param ? *exprs_.max_param + 1 : 0;
        return f;
    }

    const std::set<VarKey>& vars() const { return exprs_.vars; }

private:
    void collect_loops(std::span<const Loop> cfg_loops) {
        auto raw = find_natural_loops(x_.nodes.size(), 0, detail::successor_lists(x_));
        std::map<std::uint32_t, std::set<std::uint32_t>> by_header;
        for (const auto& l : raw) by_header[l.header].insert(l.body.begin(), l.body.end());
        // Loops the exploration could not close (unresolved jumps) fall back to the block CFG.
        if (x_.incomplete) {
            for (const auto& l : cfg_loops) {
                std::vector<std::uint32_t> heads;
                for (std::uint32_t i = 0; i < x_.nodes.size(); ++i)
                    if (x_.nodes[i].block == l.header) heads.push_back(i);
                if (heads.size() != 1 || by_header.count(heads[0])) continue;
                std::set<std::uint32_t> body;
                for (std::uint32_t i = 0; i < x_.nodes.size(); ++i)
                    if (std::binary_search(l.body.begin(), l.body.end(), x_.nodes[i].block)) body.insert(i);
                by_header[heads[0]] = std::move(body);
            }
        }
        for (auto& [h, body] : by_header) loops_.push_back({h, std::move(body), -1});
        std::sort(loops_.begin(), loops_.end(), [](const NodeLoop& a, const NodeLoop& b) {
            if (a.body.size() != b.body.size()) return a.body.size() > b.body.size();
            return a.header < b.header;
        });
        for (std::size_t i = 0; i < loops_.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (loops_[j].body.size() > loops_[i].body.size() &&
                    std::includes(loops_[j].body.begin(), loops_[j].body.end(), loops_[i].body.begin(),
                                  loops_[i].body.end()))
                    loops_[i].parent = static_cast<int>(j);  // later j = smaller container
        innermost_.assign(x_.nodes.size(), -1);
        for (std::size_t i = 0; i < loops_.size(); ++i)
            for (auto n : loops_[i].body) innermost_[n] = static_cast<int>(i);
    }

    void classify_branches() {
        guard_.assign(x_.nodes.size(), 0);
        for (std::uint32_t i = 0; i < x_.nodes.size(); ++i) {
            const auto& n = x_.nodes[i];
            if (cfg_.blocks[n.block].terminator != Terminator::JumpI) continue;
            auto br = branch_of(n);
            if (!br || is_const(n.eval.branch_cond)) continue;
            auto reverts = [&](std::uint32_t s) { return reach_.revert[s] && !reach_.normal[s]; };
            if (reverts(br->fall) && !reverts(br->taken) && reach_.normal[br->taken]) {
                guard_[i] = 1;
            } else if (reverts(br->taken) && !reverts(br->fall) && reach_.normal[br->fall]) {
                guard_[i] = -1;
            } else if (!is_loop_header(i)) {
                governing_.push_back({i, reach_from(x_, br->taken, i), reach_from(x_, br->fall, i)});
            }
        }
        std::sort(governing_.begin(), governing_.end(),
                  [&](const Governor& a, const Governor& b) { return rank_[a.node] < rank_[b.node]; });
    }

    bool is_loop_header(std::uint32_t n) const {
        return std::any_of(loops_.begin(), loops_.end(), [&](const NodeLoop& l) { return l.header == n; });
    }

    std::vector<Statement> emit(int container) {
        struct Item {
            std::size_t rank;
            int loop;  // -1: plain node
            std::uint32_t node;
        };
        std::vector<Item> items;
        for (auto n : rpo_)
            if (innermost_[n] == container) items.push_back({rank_[n], -1, n});
        for (std::size_t i = 0; i < loops_.size(); ++i)
            if (loops_[i].parent == container)
                items.push_back({rank_[loops_[i].header], static_cast<int>(i), loops_[i].header});
        std::sort(items.begin(), items.end(),
                  [](const Item& a, const Item& b) { return std::tie(a.rank, a.loop) < std::tie(b.rank, b.loop); });
        std::vector<Statement> out;
        for (const auto& it : items) {
            if (it.loop < 0) {
                emit_node(it.node, out);
                continue;
            }
            LoopStmt ls;
            ls.bound = loop_bound(loops_[static_cast<std::size_t>(it.loop)]);
            ls.body = emit(it.loop);
            out.push_back({std::move(ls)});
        }
        return out;
    }

    std::optional<Expr> loop_bound(const NodeLoop& l) {
        const auto& h = x_.nodes[l.header];
        if (cfg_.blocks[h.block].terminator != Terminator::JumpI) return std::nullopt;
        auto br = branch_of(h);
        if (!br) return std::nullopt;
        bool taken_in = l.body.count(br->taken) > 0, fall_in = l.body.count(br->fall) > 0;
        if (taken_in == fall_in) return std::nullopt;
        Expr c = branch_expr(l.header);
        return taken_in ? c : negate(std::move(c));
    }

    void emit_node(std::uint32_t id, std::vector<Statement>& out) {
        const auto& n = x_.nodes[id];
        for (const auto& e : n.eval.events) {
            switch (e.type) {
                case BlockEvent::Type::StorageRead:
                    if (e.slot.kind == SlotKind::Unknown) break;
                    exprs_.vars.insert(key_of(e.slot));
                    out.push_back({ReadStmt{key_of(e.slot)}});
                    break;
                case BlockEvent::Type::StorageWrite: {
                    if (e.slot.kind == SlotKind::Unknown)
                        out_.warnings.push_back({name_, e.offset, "unresolved storage slot"});
                    auto k = key_of(e.slot);
                    exprs_.vars.insert(k);
                    out.push_back({WriteStmt{k, governed_value(id, exprs_.build(e.value))}});
                    out_.lifted_sstores.push_back(e.offset);
                    break;
                }
                case BlockEvent::Type::ExternalCall:
                    out.push_back({ExternalCallStmt{e.call_kind, exprs_.build(e.target), e.result_used}});
                    break;
                case BlockEvent::Type::EnvRead: break;
            }
        }
        if (guard_[id] != 0) {
            Expr c = branch_expr(id);
            out.push_back({AssertStmt{guard_[id] > 0 ? std::move(c) : negate(std::move(c))}});
        }
    }

    /// Branch condition; a value merged from short-circuit paths becomes the
    /// disjunction of the per-path conditions.
    Expr branch_expr(std::uint32_t id) {
        const auto& n = x_.nodes[id];
        if (n.eval.branch_cond || n.incoming.size() < 2 || n.incoming_overflow)
            return exprs_.build(n.eval.branch_cond);
        std::vector<Expr> alts;
        for (const auto& in : n.incoming) {
            auto ev = evaluate_block(cfg_.blocks[n.block], in);
            if (!ev.branch_cond) return Expr::opaque();
            Expr c = exprs_.build(ev.branch_cond);
            if (std::find(alts.begin(), alts.end(), c) == alts.end()) alts.push_back(std::move(c));
        }
        if (alts.size() == 1) return std::move(alts.front());
        return Expr::logic(BoolOp::Or, std::move(alts));
    }

    /// Folds in the conditions of branches this write is control dependent on.
    Expr governed_value(std::uint32_t node, Expr value) {
        std::vector<Expr> conds;
        for (const auto& g : governing_)
            if (g.from_taken[node] != g.from_fall[node])
                conds.push_back(branch_expr(g.node));
        if (conds.empty()) return value;
        constexpr std::size_t kMaxConds = 4;
        if (conds.size() > kMaxConds) conds.erase(conds.begin(), conds.end() - kMaxConds);
        std::vector<Expr> args{std::move(value)};
        for (auto& c : conds) args.push_back(std::move(c));
        return Expr::arith(ArithOp::Xor, std::move(args));
    }

    struct Governor {
        std::uint32_t node;
        std::vector<bool> from_taken;
        std::vector<bool> from_fall;
    };

    const Cfg& cfg_;
    const Exploration& x_;
    LiftResult& out_;
    std::string name_;
    std::vector<std::uint32_t> rpo_;
    std::vector<std::size_t> rank_;
    Reach reach_;
    std::vector<NodeLoop> loops_;
    std::vector<int> innermost_;
    std::vector<int> guard_;
    std::vector<Governor> governing_;
    ExprBuilder exprs_;
};

}  // namespace

LiftResult lift_to_model(const Cfg& cfg, std::span<const FunctionEntry> entries, std::span<const Loop> loops,
                         std::span<const BlockAccesses> accesses, const Deadline& deadline) {
    LiftResult res;
    res.model.provenance = Provenance::LiftedFromBytecode;
    std::set<VarKey> vars;
    for (const auto& e : entries) {
        deadline.check();
        auto name = lifted_function_name(e);
        auto x = detail::explore(cfg, e.entry, deadline);
        if (x.incomplete) {
            res.low_confidence_functions.push_back(name);
            for (auto off : x.unresolved_offsets) res.warnings.push_back({name, off, "unresolved jump"});
            if (x.unresolved_offsets.empty()) res.warnings.push_back({name, cfg.blocks[e.entry].start, "exploration budget exhausted"});
        }
        FunctionLifter lifter(cfg, x, loops, res, name);
        res.model.functions.push_back(lifter.run(e));
        vars.insert(lifter.vars().begin(), lifter.vars().end());
    }

    // Every SSTORE must surface as a Write; stores no exploration reached go to the fallback.
    std::set<std::size_t> lifted(res.lifted_sstores.begin(), res.lifted_sstores.end());
    if (!res.model.functions.empty()) {
        for (const auto& b : cfg.blocks) {
            for (const auto& in : b.instructions) {
                if (in.opcode != op::SSTORE || lifted.count(in.offset)) continue;
                VarKey k = unknown_slot_var();
                for (const auto& a : accesses)
                    if (a.block == b.id)
                        for (const auto& s : a.storage)
                            if (s.offset == in.offset) k = key_of(s.slot);
                vars.insert(k);
                res.model.functions.back().body.push_back({WriteStmt{k, Expr::opaque()}});
                res.lifted_sstores.push_back(in.offset);
                res.warnings.push_back({res.model.functions.back().name, in.offset, "store outside explored paths"});
            }
        }
    }
    std::sort(res.lifted_sstores.begin(), res.lifted_sstores.end());
    res.lifted_sstores.erase(std::unique(res.lifted_sstores.begin(), res.lifted_sstores.end()),
                             res.lifted_sstores.end());

    for (const auto& k : vars) {
        StateVarId v{k.slot, k.kind, std::nullopt};
        if (k == unknown_slot_var()) v.name = "unknown_slot";
        res.model.state_vars.push_back(std::move(v));
    }
    return res;
}

FrontendResult analyze_bytecode(std::span<const std::uint8_t> code, const Deadline& deadline) {
    FrontendResult r;
    r.code = prepare_runtime(code);
    r.instructions = disassemble_raw(r.code.runtime);
    r.cfg = build_cfg(r.instructions, deadline);
    r.functions = recover_functions(r.cfg, deadline);
    r.loops = find_loops(r.cfg);
    r.accesses = classify_accesses(r.cfg);
    r.lifted = lift_to_model(r.cfg, r.functions, r.loops, r.accesses, deadline);
    return r;
}

}  // namespace srvscan::evm
