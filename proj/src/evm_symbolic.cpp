// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/evm.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace srvscan::evm {

namespace {

constexpr std::uint32_t kMaxSymDepth = 16;

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

std::size_t u256_hash(const U256& v) { return std::hash<std::uint64_t>{}(low_u64(v) ^ low_u64(v >> 64) * 31); }

std::shared_ptr<Sym> leaf(Sym::Kind k) {
    auto s = std::make_shared<Sym>();
    s->kind = k;
    return s;
}

SymRef finish(std::shared_ptr<Sym> s) {
    std::size_t h = static_cast<std::size_t>(s->kind);
    h = mix(h, u256_hash(s->value));
    h = mix(h, static_cast<std::size_t>(s->env));
    h = mix(h, s->index);
    h = mix(h, static_cast<std::size_t>(s->slot.kind));
    h = mix(h, u256_hash(s->slot.slot));
    h = mix(h, s->opcode);
    for (const auto& a : s->args) h = mix(h, a ? a->hash : 0x51);
    s->hash = h;
    return s;
}

bool is_negative(const U256& v) { return bit_test(v, 255); }

U256 negate(const U256& v) { return ~v + 1; }

std::optional<U256> fold(std::uint8_t opc, const std::vector<U256>& a) {
    using namespace op;
    switch (opc) {
        case ADD: return a[0] + a[1];
        case SUB: return a[0] - a[1];
        case MUL: return a[0] * a[1];
        case DIV: return a[1] == 0 ? U256(0) : a[0] / a[1];
        case MOD: return a[1] == 0 ? U256(0) : a[0] % a[1];
        case EXP: {
            U256 r = 1, b = a[0], e = a[1];
            while (e != 0) {
                if (bit_test(e, 0)) r *= b;
                b *= b;
                e >>= 1;
            }
            return r;
        }
        case LT: return U256(a[0] < a[1] ? 1 : 0);
        case GT: return U256(a[0] > a[1] ? 1 : 0);
        case SLT:
        case SGT: {
            bool na = is_negative(a[0]), nb = is_negative(a[1]);
            bool lt = na != nb ? na : a[0] < a[1];
            bool gt = na != nb ? nb : a[0] > a[1];
            return U256((opc == SLT ? lt : gt) ? 1 : 0);
        }
        case EQ: return U256(a[0] == a[1] ? 1 : 0);
        case ISZERO: return U256(a[0] == 0 ? 1 : 0);
        case AND: return a[0] & a[1];
        case OR: return a[0] | a[1];
        case XOR: return a[0] ^ a[1];
        case NOT: return ~a[0];
        case SHL: return a[0] >= 256 ? U256(0) : U256(a[1] << static_cast<unsigned>(low_u64(a[0])));
        case SHR: return a[0] >= 256 ? U256(0) : U256(a[1] >> static_cast<unsigned>(low_u64(a[0])));
        case BYTE: {
            if (a[0] >= 32) return U256(0);
            unsigned shift = static_cast<unsigned>(8 * (31 - low_u64(a[0])));
            return U256((a[1] >> shift) & 0xff);
        }
        case op::SDIV: {
            if (a[1] == 0) return U256(0);
            bool na = is_negative(a[0]), nb = is_negative(a[1]);
            U256 q = (na ? negate(a[0]) : a[0]) / (nb ? negate(a[1]) : a[1]);
            return na != nb ? negate(q) : q;
        }
        default: return std::nullopt;
    }
}

U256 low_mask(unsigned bits) { return (U256(1) << bits) - 1; }

}  // namespace

SymRef sym_const(const U256& v) {
    auto s = leaf(Sym::Kind::Const);
    s->value = v;
    return finish(s);
}

SymRef sym_env(EnvAtom a) {
    auto s = leaf(Sym::Kind::Env);
    s->env = a;
    return finish(s);
}

SymRef sym_param(std::uint32_t index) {
    auto s = leaf(Sym::Kind::Param);
    s->index = index;
    return finish(s);
}

SymRef sym_storage(const SlotRef& slot) {
    auto s = leaf(Sym::Kind::Storage);
    s->slot = slot;
    return finish(s);
}

SymRef sym_call_result(std::size_t call_offset) {
    auto s = leaf(Sym::Kind::CallResult);
    s->index = static_cast<std::uint32_t>(call_offset);
    return finish(s);
}

SymRef sym_map_slot(const U256& base) {
    auto s = leaf(Sym::Kind::MapSlot);
    s->slot = SlotRef{SlotKind::MappingBase, base};
    return finish(s);
}

SymRef sym_op(std::uint8_t opcode, std::vector<SymRef> args) {
    if (!args.empty() && std::all_of(args.begin(), args.end(), [](const SymRef& a) { return is_const(a); })) {
        std::vector<U256> v;
        for (const auto& a : args) v.push_back(a->value);
        if (auto r = fold(opcode, v)) return sym_const(*r);
    }
    if (opcode == op::AND && args.size() == 2) {
        // Address and selector masks do not change the dependency structure.
        for (int k = 0; k < 2; ++k) {
            const auto& m = args[k];
            const auto& other = args[1 - k];
            if (is_const(m) && (m->value == low_mask(160) || m->value == low_mask(256)) && other) return other;
        }
    }
    std::uint32_t depth = 0;
    for (const auto& a : args)
        if (a) depth = std::max(depth, a->depth);
    if (depth + 1 > kMaxSymDepth) return nullptr;
    auto s = leaf(Sym::Kind::Op);
    s->opcode = opcode;
    s->args = std::move(args);
    s->depth = depth + 1;
    return finish(s);
}

bool sym_equal(const SymRef& a, const SymRef& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->hash != b->hash || a->kind != b->kind) return false;
    if (a->value != b->value || a->env != b->env || a->index != b->index || !(a->slot == b->slot) ||
        a->opcode != b->opcode || a->args.size() != b->args.size())
        return false;
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!sym_equal(a->args[i], b->args[i])) return false;
    return true;
}

void SymStack::push(SymRef v) {
    items.push_back(std::move(v));
    if (items.size() > kMaxDepth) items.erase(items.begin());
}

SymRef SymStack::pop() {
    if (items.empty()) return nullptr;
    SymRef v = std::move(items.back());
    items.pop_back();
    return v;
}

const SymRef& SymStack::peek(std::size_t depth_from_top) const {
    static const SymRef unknown;
    if (depth_from_top >= items.size()) return unknown;
    return items[items.size() - 1 - depth_from_top];
}

void SymStack::dup(std::size_t n) { push(peek(n - 1)); }

void SymStack::swap(std::size_t n) {
    if (items.size() < n + 1) items.insert(items.begin(), n + 1 - items.size(), nullptr);
    std::swap(items.back(), items[items.size() - 1 - n]);
    while (items.size() > kMaxDepth) items.erase(items.begin());
}

SymStack meet(const SymStack& a, const SymStack& b) {
    SymStack r;
    std::size_t n = std::min(a.items.size(), b.items.size());
    r.items.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& x = a.items[a.items.size() - n + i];
        const auto& y = b.items[b.items.size() - n + i];
        r.items[i] = sym_equal(x, y) ? x : nullptr;
    }
    return r;
}

bool stack_equal(const SymStack& a, const SymStack& b) {
    if (a.items.size() != b.items.size()) return false;
    for (std::size_t i = 0; i < a.items.size(); ++i)
        if (!sym_equal(a.items[i], b.items[i])) return false;
    return true;
}

namespace {

std::optional<EnvAtom> env_opcode(std::uint8_t opc) {
    switch (opc) {
        case op::CALLER: return EnvAtom::Caller;
        case op::ORIGIN: return EnvAtom::Origin;
        case op::CALLVALUE: return EnvAtom::CallValue;
        case op::CALLDATASIZE: return EnvAtom::CallData;
        case op::TIMESTAMP: return EnvAtom::Timestamp;
        case op::NUMBER: return EnvAtom::Number;
        case op::PREVRANDAO: return EnvAtom::PrevRandao;
        case op::COINBASE: return EnvAtom::Coinbase;
        case op::GASLIMIT: return EnvAtom::GasLimit;
        case op::SELFBALANCE: return EnvAtom::Balance;
        case op::ADDRESS: return EnvAtom::Address;
        default: return std::nullopt;
    }
}

bool contains_constant(const SymRef& s, const U256& v, int budget = 64) {
    if (!s || budget <= 0) return false;
    if (is_const(s)) return s->value == v;
    for (const auto& a : s->args)
        if (contains_constant(a, v, budget - 1)) return true;
    return false;
}

SlotRef slot_of(const SymRef& s) {
    if (is_const(s)) return {SlotKind::Constant, s->value};
    if (s && s->kind == Sym::Kind::MapSlot) return s->slot;
    // Struct members and array elements: base keccak plus an offset.
    if (s && s->kind == Sym::Kind::Op && s->opcode == op::ADD && s->args.size() == 2) {
        for (int k = 0; k < 2; ++k)
            if (s->args[k] && s->args[k]->kind == Sym::Kind::MapSlot) return s->args[k]->slot;
    }
    return {};
}

}  // namespace

BlockEval evaluate_block(const BasicBlock& block, SymStack st) {
    BlockEval ev;
    std::map<U256, SymRef> mem;
    std::vector<SymRef> stored;
    const auto& ins = block.instructions;
    for (std::size_t k = 0; k < ins.size(); ++k) {
        const auto& in = ins[k];
        const auto opc = in.opcode;
        const auto& info = op_info(opc);
        if (in.is_push()) {
            st.push(sym_const(in.push_value()));
            continue;
        }
        if (opc >= op::DUP1 && opc <= op::DUP16) {
            st.dup(opc - op::DUP1 + 1);
            continue;
        }
        if (opc >= op::SWAP1 && opc <= op::SWAP16) {
            st.swap(opc - op::SWAP1 + 1);
            continue;
        }
        std::vector<SymRef> args;
        for (int p = 0; p < info.pops; ++p) args.push_back(st.pop());
        auto env = env_opcode(opc);
        if (env) {
            ev.events.push_back({BlockEvent::Type::EnvRead, in.offset, {}, nullptr, *env});
            st.push(sym_env(*env));
            continue;
        }
        switch (opc) {
            case op::JUMPDEST:
            case op::POP: break;
            case op::JUMP: ev.jump_target = args[0]; break;
            case op::JUMPI:
                ev.jump_target = args[0];
                ev.branch_cond = args[1];
                break;
            case op::CALLDATALOAD: {
                SymRef v;
                if (is_const(args[0]) && args[0]->value >= 4 && (args[0]->value - 4) % 32 == 0 &&
                    args[0]->value < 4 + 32 * 256)
                    v = sym_param(static_cast<std::uint32_t>(low_u64((args[0]->value - 4) / 32)));
                else
                    v = sym_env(EnvAtom::CallData);
                ev.events.push_back({BlockEvent::Type::EnvRead, in.offset, {}, nullptr, EnvAtom::CallData});
                st.push(v);
                break;
            }
            case op::CALLDATACOPY:
                ev.events.push_back({BlockEvent::Type::EnvRead, in.offset, {}, nullptr, EnvAtom::CallData});
                mem.clear();
                stored.push_back(sym_env(EnvAtom::CallData));
                break;
            case op::BLOCKHASH:
                ev.events.push_back({BlockEvent::Type::EnvRead, in.offset, {}, nullptr, EnvAtom::BlockHash});
                st.push(sym_env(EnvAtom::BlockHash));
                break;
            case op::BALANCE:
                ev.events.push_back({BlockEvent::Type::EnvRead, in.offset, {}, nullptr, EnvAtom::Balance});
                st.push(sym_env(EnvAtom::Balance));
                break;
            case op::SLOAD: {
                auto slot = slot_of(args[0]);
                ev.events.push_back({BlockEvent::Type::StorageRead, in.offset, slot});
                st.push(slot.kind == SlotKind::Unknown ? nullptr : sym_storage(slot));
                break;
            }
            case op::SSTORE: {
                BlockEvent e{BlockEvent::Type::StorageWrite, in.offset, slot_of(args[0])};
                e.value = args[1];
                ev.events.push_back(std::move(e));
                break;
            }
            case op::MSTORE:
            case op::MSTORE8:
                if (is_const(args[0]) && opc == op::MSTORE) mem[args[0]->value] = args[1];
                else mem.clear();
                if (args[1]) stored.push_back(args[1]);
                break;
            case op::MLOAD: {
                SymRef v;
                if (is_const(args[0])) {
                    auto it = mem.find(args[0]->value);
                    if (it != mem.end()) v = it->second;
                }
                st.push(v);
                break;
            }
            case op::KECCAK256: {
                SymRef v;
                if (is_const(args[0]) && is_const(args[1])) {
                    const U256& off = args[0]->value;
                    const U256& len = args[1]->value;
                    const U256 slot_word = len == 64 ? off + 32 : off;
                    auto it = mem.find(slot_word);
                    if ((len == 64 || len == 32) && it != mem.end() && is_const(it->second))
                        v = sym_map_slot(it->second->value);
                }
                if (!v) {
                    // Hash of data built elsewhere: keep whatever this block stored so
                    // that entropy sources stay visible to the lifter.
                    std::vector<SymRef> keep;
                    for (auto it = stored.rbegin(); it != stored.rend() && keep.size() < 4; ++it)
                        keep.push_back(*it);
                    std::reverse(keep.begin(), keep.end());
                    v = keep.empty() ? nullptr : sym_op(op::KECCAK256, std::move(keep));
                }
                st.push(v);
                break;
            }
            case op::CALL:
            case op::CALLCODE:
            case op::DELEGATECALL:
            case op::STATICCALL: {
                BlockEvent e{BlockEvent::Type::ExternalCall, in.offset};
                e.call_kind = opc == op::CALL         ? CallKind::Call
                              : opc == op::CALLCODE   ? CallKind::CallCode
                              : opc == op::STATICCALL ? CallKind::StaticCall
                                                      : CallKind::DelegateCall;
                // Solidity's transfer/send forward a 2300 stipend only when value is non-zero.
                if (opc == op::CALL && contains_constant(args[0], U256(0x8fc))) e.call_kind = CallKind::Transfer;
                e.target = args[1];
                e.result_used = !(k + 1 < ins.size() && ins[k + 1].opcode == op::POP);
                ev.events.push_back(std::move(e));
                mem.clear();
                st.push(sym_call_result(in.offset));
                break;
            }
            case op::RETURNDATACOPY:
            case op::CODECOPY:
            case op::EXTCODECOPY:
            case op::MCOPY: mem.clear(); break;
            case op::ADD:
            case op::SUB:
            case op::MUL:
            case op::DIV:
            case op::SDIV:
            case op::MOD:
            case op::SMOD:
            case op::EXP:
            case op::LT:
            case op::GT:
            case op::SLT:
            case op::SGT:
            case op::EQ:
            case op::ISZERO:
            case op::AND:
            case op::OR:
            case op::XOR:
            case op::NOT:
            case op::BYTE:
            case op::SHL:
            case op::SHR:
            case op::SAR:
            case op::SIGNEXTEND:
            case op::ADDMOD:
            case op::MULMOD:
                st.push(sym_op(opc, std::move(args)));
                break;
            default:
                for (int p = 0; p < info.pushes; ++p) st.push(nullptr);
                break;
        }
    }
    ev.exit = std::move(st);
    return ev;
}

}  // namespace srvscan::evm
