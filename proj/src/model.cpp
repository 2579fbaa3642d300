// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/model.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace srvscan {

namespace {

constexpr std::pair<EnvAtom, std::string_view> kEnvNames[] = {
    {EnvAtom::Caller, "CALLER"},       {EnvAtom::Origin, "ORIGIN"},         {EnvAtom::CallValue, "CALLVALUE"},
    {EnvAtom::CallData, "CALLDATA"},   {EnvAtom::Timestamp, "TIMESTAMP"},   {EnvAtom::Number, "NUMBER"},
    {EnvAtom::PrevRandao, "PREVRANDAO"}, {EnvAtom::Difficulty, "DIFFICULTY"}, {EnvAtom::BlockHash, "BLOCKHASH"},
    {EnvAtom::Coinbase, "COINBASE"},   {EnvAtom::GasLimit, "GASLIMIT"},     {EnvAtom::Balance, "BALANCE"},
    {EnvAtom::Address, "ADDRESS"},
};

constexpr std::pair<CallKind, std::string_view> kCallNames[] = {
    {CallKind::Call, "CALL"},
    {CallKind::CallCode, "CALLCODE"},
    {CallKind::StaticCall, "STATICCALL"},
    {CallKind::DelegateCall, "DELEGATECALL"},
    {CallKind::Transfer, "TRANSFER"},
};

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void walk_impl(const std::vector<Statement>& body, StmtPath& path,
               const std::function<void(const StmtPath&, const Statement&)>& fn) {
    for (std::uint32_t i = 0; i < body.size(); ++i) {
        path.push_back(i);
        fn(path, body[i]);
        if (auto* loop = std::get_if<LoopStmt>(&body[i].node)) walk_impl(loop->body, path, fn);
        path.pop_back();
    }
}

std::string hex_byte_string(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out = "0x";
    for (auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xf]);
    }
    return out;
}

}  // namespace

std::string var_label(const StateVarId& v) {
    if (v.name) return *v.name;
    return (v.kind == VarKind::Scalar ? "slot_" : "map_") + to_hex(v.slot);
}

std::string_view env_atom_name(EnvAtom a) {
    for (auto& [atom, name] : kEnvNames)
        if (atom == a) return name;
    return "?";
}

std::optional<EnvAtom> env_atom_from_name(std::string_view s) {
    for (auto& [atom, name] : kEnvNames)
        if (name == s) return atom;
    return std::nullopt;
}

bool is_randomness_atom(EnvAtom a) {
    switch (a) {
        case EnvAtom::Timestamp:
        case EnvAtom::Number:
        case EnvAtom::PrevRandao:
        case EnvAtom::Difficulty:
        case EnvAtom::BlockHash:
        case EnvAtom::Coinbase:
        case EnvAtom::GasLimit:
            return true;
        default:
            return false;
    }
}

std::string_view cmp_op_name(CmpOp op) {
    static constexpr std::string_view kNames[] = {"==", "!=", "<", ">", "<=", ">="};
    return kNames[static_cast<int>(op)];
}

std::string_view bool_op_name(BoolOp op) {
    static constexpr std::string_view kNames[] = {"and", "or", "not"};
    return kNames[static_cast<int>(op)];
}

std::string_view arith_op_name(ArithOp op) {
    static constexpr std::string_view kNames[] = {"add", "sub", "mul", "div", "shr", "shl", "and-bits", "xor", "mod"};
    return kNames[static_cast<int>(op)];
}

Expr Expr::cmp(CmpOp op, Expr a, Expr b) {
    std::vector<Expr> args;
    args.push_back(std::move(a));
    args.push_back(std::move(b));
    return {Compare{op, std::move(args)}};
}

const std::vector<Expr>* Expr::children() const {
    return std::visit(Overloaded{
                          [](const Compare& c) -> const std::vector<Expr>* { return &c.args; },
                          [](const Logic& c) -> const std::vector<Expr>* { return &c.args; },
                          [](const Arith& c) -> const std::vector<Expr>* { return &c.args; },
                          [](const auto&) -> const std::vector<Expr>* { return nullptr; },
                      },
                      node);
}

std::size_t Expr::depth() const {
    const auto* kids = children();
    if (!kids) return 1;
    std::size_t d = 0;
    for (const auto& k : *kids) d = std::max(d, k.depth());
    return d + 1;
}

bool operator==(const Compare& a, const Compare& b) { return a.op == b.op && a.args == b.args; }
bool operator==(const Logic& a, const Logic& b) { return a.op == b.op && a.args == b.args; }
bool operator==(const Arith& a, const Arith& b) { return a.op == b.op && a.args == b.args; }
bool operator==(const Expr& a, const Expr& b) { return a.node == b.node; }

void visit_expr(const Expr& e, const std::function<void(const Expr&)>& fn) {
    fn(e);
    if (const auto* kids = e.children())
        for (const auto& k : *kids) visit_expr(k, fn);
}

std::vector<VarKey> vars_read(const Expr& e) {
    std::vector<VarKey> out;
    visit_expr(e, [&](const Expr& n) {
        if (const auto* r = std::get_if<StateRead>(&n.node))
            if (std::find(out.begin(), out.end(), r->var) == out.end()) out.push_back(r->var);
    });
    return out;
}

std::vector<EnvAtom> env_atoms(const Expr& e) {
    std::vector<EnvAtom> out;
    visit_expr(e, [&](const Expr& n) {
        if (const auto* r = std::get_if<EnvRead>(&n.node))
            if (std::find(out.begin(), out.end(), r->atom) == out.end()) out.push_back(r->atom);
    });
    return out;
}

bool contains_call_result(const Expr& e) {
    bool found = false;
    visit_expr(e, [&](const Expr& n) { found = found || std::holds_alternative<CallResult>(n.node); });
    return found;
}

std::string_view call_kind_name(CallKind k) {
    for (auto& [kind, name] : kCallNames)
        if (kind == k) return name;
    return "?";
}

std::optional<CallKind> call_kind_from_name(std::string_view s) {
    for (auto& [kind, name] : kCallNames)
        if (name == s) return kind;
    return std::nullopt;
}

bool operator==(const WriteStmt& a, const WriteStmt& b) { return a.var == b.var && a.value == b.value; }
bool operator==(const AssertStmt& a, const AssertStmt& b) { return a.cond == b.cond; }
bool operator==(const ExternalCallStmt& a, const ExternalCallStmt& b) {
    return a.kind == b.kind && a.target == b.target && a.result_used == b.result_used;
}
bool operator==(const InternalCallStmt& a, const InternalCallStmt& b) {
    return a.callee == b.callee && a.args == b.args;
}
bool operator==(const LoopStmt& a, const LoopStmt& b) { return a.body == b.body && a.bound == b.bound; }
bool operator==(const Statement& a, const Statement& b) { return a.node == b.node; }

std::string path_to_string(const StmtPath& p) {
    std::string out = "[";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(p[i]);
    }
    return out + "]";
}

void walk_statements(const std::vector<Statement>& body,
                     const std::function<void(const StmtPath&, const Statement&)>& fn) {
    StmtPath path;
    walk_impl(body, path, fn);
}

const Statement* statement_at(const std::vector<Statement>& body, const StmtPath& path) {
    const std::vector<Statement>* cur = &body;
    const Statement* s = nullptr;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] >= cur->size()) return nullptr;
        s = &(*cur)[path[i]];
        if (i + 1 < path.size()) {
            const auto* loop = std::get_if<LoopStmt>(&s->node);
            if (!loop) return nullptr;
            cur = &loop->body;
        }
    }
    return s;
}

std::vector<const Expr*> statement_exprs(const Statement& s) {
    return std::visit(Overloaded{
                          [](const ReadStmt&) { return std::vector<const Expr*>{}; },
                          [](const WriteStmt& w) { return std::vector<const Expr*>{&w.value}; },
                          [](const AssertStmt& a) { return std::vector<const Expr*>{&a.cond}; },
                          [](const ExternalCallStmt& c) { return std::vector<const Expr*>{&c.target}; },
                          [](const InternalCallStmt& c) {
                              std::vector<const Expr*> out;
                              for (const auto& a : c.args) out.push_back(&a);
                              return out;
                          },
                          [](const LoopStmt& l) {
                              return l.bound ? std::vector<const Expr*>{&*l.bound} : std::vector<const Expr*>{};
                          },
                          [](const ReturnStmt&) { return std::vector<const Expr*>{}; },
                      },
                      s.node);
}

std::string_view visibility_name(Visibility v) {
    static constexpr std::string_view kNames[] = {"public", "external", "internal", "private"};
    return kNames[static_cast<int>(v)];
}

std::string selector_to_hex(std::uint32_t selector) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out = "0x";
    for (int shift = 28; shift >= 0; shift -= 4) out.push_back(kDigits[(selector >> shift) & 0xf]);
    return out;
}

bool is_fallback_name(std::string_view name) { return name == "fallback" || name == "receive"; }

std::string address_to_hex(const Address& a) { return hex_byte_string(a.bytes); }

std::optional<Address> parse_address(std::string_view text) {
    if (text.size() != 42 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) return std::nullopt;
    Address a;
    for (std::size_t i = 0; i < 20; ++i) {
        auto hi = parse_u256_hex(text.substr(2 + 2 * i, 1));
        auto lo = parse_u256_hex(text.substr(3 + 2 * i, 1));
        if (!hi || !lo) return std::nullopt;
        a.bytes[i] = static_cast<std::uint8_t>(low_u64(*hi) * 16 + low_u64(*lo));
    }
    return a;
}

const FunctionDef* ContractModel::find_function(std::string_view name) const {
    for (const auto& f : functions)
        if (f.name == name) return &f;
    return nullptr;
}

const StateVarId* ContractModel::find_var(const VarKey& key) const {
    int i = var_index(key);
    return i < 0 ? nullptr : &state_vars[static_cast<std::size_t>(i)];
}

int ContractModel::var_index(const VarKey& key) const {
    for (std::size_t i = 0; i < state_vars.size(); ++i)
        if (state_vars[i].slot == key.slot && state_vars[i].kind == key.kind) return static_cast<int>(i);
    return -1;
}

bool operator==(const ContractModel& a, const ContractModel& b) {
    return a.address == b.address && a.functions == b.functions && a.state_vars == b.state_vars;
}

std::string_view violation_code_name(ViolationCode c) {
    switch (c) {
        case ViolationCode::DuplicateFunction: return "DuplicateFunction";
        case ViolationCode::DuplicateSelector: return "DuplicateSelector";
        case ViolationCode::MissingSelector: return "MissingSelector";
        case ViolationCode::DuplicateStateVar: return "DuplicateStateVar";
        case ViolationCode::DuplicateVarName: return "DuplicateVarName";
        case ViolationCode::UnknownStateVar: return "UnknownStateVar";
        case ViolationCode::UnknownCallee: return "UnknownCallee";
        case ViolationCode::ParamOutOfRange: return "ParamOutOfRange";
        case ViolationCode::ArityMismatch: return "ArityMismatch";
        case ViolationCode::DepthExceeded: return "DepthExceeded";
    }
    return "Unknown";
}

namespace {

class Validator {
public:
    explicit Validator(const ContractModel& m) : m_(m) {}

    std::vector<Violation> run() {
        check_vars();
        check_functions();
        return std::move(out_);
    }

private:
    void add(ViolationCode code, std::string loc, std::string detail) {
        out_.push_back({code, std::move(loc), std::move(detail)});
    }

    void check_vars() {
        std::set<VarKey> seen;
        std::set<std::string> names;
        for (std::size_t i = 0; i < m_.state_vars.size(); ++i) {
            const auto& v = m_.state_vars[i];
            std::string loc = "/state_vars/" + std::to_string(i);
            if (!seen.insert(v.key()).second) add(ViolationCode::DuplicateStateVar, loc, to_hex(v.slot));
            if (v.name && !names.insert(*v.name).second) add(ViolationCode::DuplicateVarName, loc + "/name", *v.name);
            known_.insert(v.key());
        }
    }

    void check_functions() {
        std::set<std::string> names;
        std::set<std::uint32_t> selectors;
        for (std::size_t i = 0; i < m_.functions.size(); ++i) {
            const auto& f = m_.functions[i];
            std::string loc = "/functions/" + std::to_string(i);
            if (!names.insert(f.name).second) add(ViolationCode::DuplicateFunction, loc + "/name", f.name);
            if (f.selector && !selectors.insert(*f.selector).second)
                add(ViolationCode::DuplicateSelector, loc + "/selector", f.name);
            if (is_entry_visibility(f.visibility) && !f.selector && !is_fallback_name(f.name))
                add(ViolationCode::MissingSelector, loc + "/selector", f.name);
            check_body(f, f.body, loc + "/body");
        }
    }

    void check_body(const FunctionDef& f, const std::vector<Statement>& body, const std::string& loc) {
        for (std::size_t i = 0; i < body.size(); ++i) {
            std::string sloc = loc + "/" + std::to_string(i);
            std::visit(Overloaded{
                           [&](const ReadStmt& r) { check_var(r.var, sloc + "/var"); },
                           [&](const WriteStmt& w) {
                               check_var(w.var, sloc + "/var");
                               check_expr(f, w.value, sloc + "/value");
                           },
                           [&](const AssertStmt& a) { check_expr(f, a.cond, sloc + "/cond"); },
                           [&](const ExternalCallStmt& c) { check_expr(f, c.target, sloc + "/target"); },
                           [&](const InternalCallStmt& c) {
                               if (!m_.find_function(c.callee)) add(ViolationCode::UnknownCallee, sloc + "/callee", c.callee);
                               for (std::size_t k = 0; k < c.args.size(); ++k)
                                   check_expr(f, c.args[k], sloc + "/args/" + std::to_string(k));
                           },
                           [&](const LoopStmt& l) {
                               if (l.bound) check_expr(f, *l.bound, sloc + "/bound");
                               check_body(f, l.body, sloc + "/body");
                           },
                           [](const ReturnStmt&) {},
                       },
                       body[i].node);
        }
    }

    void check_var(const VarKey& k, const std::string& loc) {
        if (!known_.count(k)) add(ViolationCode::UnknownStateVar, loc, to_hex(k.slot));
    }

    void check_expr(const FunctionDef& f, const Expr& e, const std::string& loc) {
        if (e.depth() > kMaxExprDepth) {
            add(ViolationCode::DepthExceeded, loc, std::to_string(e.depth()));
            return;
        }
        check_node(f, e, loc);
    }

    void check_node(const FunctionDef& f, const Expr& e, const std::string& loc) {
        std::visit(Overloaded{
                       [&](const StateRead& r) { check_var(r.var, loc); },
                       [&](const ParamRef& p) {
                           if (p.index >= f.param_count)
                               add(ViolationCode::ParamOutOfRange, loc, std::to_string(p.index));
                       },
                       [&](const Compare& c) {
                           if (c.args.size() != 2) add(ViolationCode::ArityMismatch, loc, std::string(cmp_op_name(c.op)));
                       },
                       [&](const Logic& c) {
                           bool ok = c.op == BoolOp::Not ? c.args.size() == 1 : !c.args.empty();
                           if (!ok) add(ViolationCode::ArityMismatch, loc, std::string(bool_op_name(c.op)));
                       },
                       [&](const Arith& c) {
                           if (c.args.empty()) add(ViolationCode::ArityMismatch, loc, std::string(arith_op_name(c.op)));
                       },
                       [](const auto&) {},
                   },
                   e.node);
        if (const auto* kids = e.children())
            for (std::size_t k = 0; k < kids->size(); ++k) check_node(f, (*kids)[k], loc + "/args/" + std::to_string(k));
    }

    const ContractModel& m_;
    std::set<VarKey> known_;
    std::vector<Violation> out_;
};

}  // namespace

std::vector<Violation> validate_model(const ContractModel& m) { return Validator(m).run(); }

}  // namespace srvscan
