// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// Canonical contract model: the program representation shared by the JSON
// loader, the bytecode lifter and every analysis downstream of them.

#pragma once

#include "srvscan/u256.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace srvscan {

enum class VarKind : std::uint8_t { Scalar, MappingBase };

/// Identity of a state variable inside one model: (slot, kind).
struct VarKey {
    U256 slot;
    VarKind kind = VarKind::Scalar;

    friend bool operator==(const VarKey& a, const VarKey& b) { return a.slot == b.slot && a.kind == b.kind; }
    friend bool operator<(const VarKey& a, const VarKey& b) {
        if (a.slot != b.slot) return a.slot < b.slot;
        return a.kind < b.kind;
    }
};

struct StateVarId {
    U256 slot;
    VarKind kind = VarKind::Scalar;
    std::optional<std::string> name;

    VarKey key() const { return {slot, kind}; }
    friend bool operator==(const StateVarId&, const StateVarId&) = default;
};

/// Name when present, otherwise `slot_0x..` / `map_0x..`.
std::string var_label(const StateVarId& v);

enum class EnvAtom : std::uint8_t {
    Caller,
    Origin,
    CallValue,
    CallData,
    Timestamp,
    Number,
    PrevRandao,
    Difficulty,
    BlockHash,
    Coinbase,
    GasLimit,
    Balance,
    Address,
};

std::string_view env_atom_name(EnvAtom a);
std::optional<EnvAtom> env_atom_from_name(std::string_view s);

/// On-chain entropy sources treated as randomness.
bool is_randomness_atom(EnvAtom a);

enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Gt, Le, Ge };
enum class BoolOp : std::uint8_t { And, Or, Not };
enum class ArithOp : std::uint8_t { Add, Sub, Mul, Div, Shr, Shl, AndBits, Xor, Mod };

std::string_view cmp_op_name(CmpOp op);
std::string_view bool_op_name(BoolOp op);
std::string_view arith_op_name(ArithOp op);

struct Expr;

struct StateRead {
    VarKey var;
    friend bool operator==(const StateRead&, const StateRead&) = default;
};
struct EnvRead {
    EnvAtom atom;
    friend bool operator==(const EnvRead&, const EnvRead&) = default;
};
struct ParamRef {
    std::uint32_t index = 0;
    friend bool operator==(const ParamRef&, const ParamRef&) = default;
};
struct Constant {
    U256 value;
    friend bool operator==(const Constant&, const Constant&) = default;
};
/// Value produced by an external call (success flag or decoded return).
struct CallResult {
    friend bool operator==(const CallResult&, const CallResult&) = default;
};
/// A value the lifter could not reconstruct.
struct Opaque {
    friend bool operator==(const Opaque&, const Opaque&) = default;
};
struct Compare {
    CmpOp op;
    std::vector<Expr> args;
};
struct Logic {
    BoolOp op;
    std::vector<Expr> args;
};
struct Arith {
    ArithOp op;
    std::vector<Expr> args;
};

struct Expr {
    using Node = std::variant<StateRead, EnvRead, ParamRef, Constant, CallResult, Opaque, Compare, Logic, Arith>;
    Node node;

    static Expr var(VarKey k) { return {StateRead{std::move(k)}}; }
    static Expr env(EnvAtom a) { return {EnvRead{a}}; }
    static Expr param(std::uint32_t i) { return {ParamRef{i}}; }
    static Expr constant(U256 v) { return {Constant{std::move(v)}}; }
    static Expr call_result() { return {CallResult{}}; }
    static Expr opaque() { return {Opaque{}}; }
    static Expr cmp(CmpOp op, Expr a, Expr b);
    static Expr logic(BoolOp op, std::vector<Expr> args) { return {Logic{op, std::move(args)}}; }
    static Expr arith(ArithOp op, std::vector<Expr> args) { return {Arith{op, std::move(args)}}; }

    /// Children of an interior node; empty for leaves.
    const std::vector<Expr>* children() const;
    std::size_t depth() const;
};

bool operator==(const Expr& a, const Expr& b);
bool operator==(const Compare& a, const Compare& b);
bool operator==(const Logic& a, const Logic& b);
bool operator==(const Arith& a, const Arith& b);

/// Pre-order visit of every node.
void visit_expr(const Expr& e, const std::function<void(const Expr&)>& fn);

/// State variables read anywhere in the tree, in first-occurrence order.
std::vector<VarKey> vars_read(const Expr& e);
std::vector<EnvAtom> env_atoms(const Expr& e);
bool contains_call_result(const Expr& e);

enum class CallKind : std::uint8_t { Call, CallCode, StaticCall, DelegateCall, Transfer };
std::string_view call_kind_name(CallKind k);
std::optional<CallKind> call_kind_from_name(std::string_view s);

struct Statement;

struct ReadStmt {
    VarKey var;
    friend bool operator==(const ReadStmt&, const ReadStmt&) = default;
};
struct WriteStmt {
    VarKey var;
    Expr value;
};
struct AssertStmt {
    Expr cond;
};
struct ExternalCallStmt {
    CallKind kind;
    Expr target;
    bool result_used = false;
};
struct InternalCallStmt {
    std::string callee;
    std::vector<Expr> args;
};
struct LoopStmt {
    std::vector<Statement> body;
    std::optional<Expr> bound;
};
struct ReturnStmt {
    friend bool operator==(const ReturnStmt&, const ReturnStmt&) = default;
};

struct Statement {
    using Node = std::variant<ReadStmt, WriteStmt, AssertStmt, ExternalCallStmt, InternalCallStmt, LoopStmt, ReturnStmt>;
    Node node;
};

bool operator==(const WriteStmt& a, const WriteStmt& b);
bool operator==(const AssertStmt& a, const AssertStmt& b);
bool operator==(const ExternalCallStmt& a, const ExternalCallStmt& b);
bool operator==(const InternalCallStmt& a, const InternalCallStmt& b);
bool operator==(const LoopStmt& a, const LoopStmt& b);
bool operator==(const Statement& a, const Statement& b);

/// Index path from a function body down through nested loop bodies.
using StmtPath = std::vector<std::uint32_t>;

std::string path_to_string(const StmtPath& p);

/// Pre-order walk over a statement list, descending into loop bodies.
void walk_statements(const std::vector<Statement>& body,
                     const std::function<void(const StmtPath&, const Statement&)>& fn);

/// Statement at `path`, or nullptr.
const Statement* statement_at(const std::vector<Statement>& body, const StmtPath& path);

/// Expressions carried directly by one statement (not by nested loop bodies).
std::vector<const Expr*> statement_exprs(const Statement& s);

enum class Visibility : std::uint8_t { Public, External, Internal, Private };
std::string_view visibility_name(Visibility v);
inline bool is_entry_visibility(Visibility v) { return v == Visibility::Public || v == Visibility::External; }

struct FunctionDef {
    std::string name;
    std::optional<std::uint32_t> selector;
    Visibility visibility = Visibility::Public;
    std::uint32_t param_count = 0;
    std::vector<Statement> body;

    friend bool operator==(const FunctionDef&, const FunctionDef&) = default;
};

/// `0x` plus exactly eight lowercase hex digits.
std::string selector_to_hex(std::uint32_t selector);

/// Names accepted for a public function that has no selector.
bool is_fallback_name(std::string_view name);

struct Address {
    std::array<std::uint8_t, 20> bytes{};
    friend bool operator==(const Address&, const Address&) = default;
};
std::string address_to_hex(const Address& a);
std::optional<Address> parse_address(std::string_view text);

enum class Provenance : std::uint8_t { LiftedFromBytecode, LoadedFromJson };

struct ContractModel {
    std::optional<Address> address;
    std::vector<FunctionDef> functions;
    std::vector<StateVarId> state_vars;
    Provenance provenance = Provenance::LoadedFromJson;

    const FunctionDef* find_function(std::string_view name) const;
    const StateVarId* find_var(const VarKey& key) const;
    /// Position in state_vars, or -1.
    int var_index(const VarKey& key) const;
};

/// Structural equality; provenance is bookkeeping and does not participate.
bool operator==(const ContractModel& a, const ContractModel& b);

enum class ViolationCode {
    DuplicateFunction,
    DuplicateSelector,
    MissingSelector,
    DuplicateStateVar,
    DuplicateVarName,
    UnknownStateVar,
    UnknownCallee,
    ParamOutOfRange,
    ArityMismatch,
    DepthExceeded,
};

std::string_view violation_code_name(ViolationCode c);

struct Violation {
    ViolationCode code;
    /// JSON pointer into the serialized model.
    std::string location;
    std::string detail;

    friend bool operator==(const Violation&, const Violation&) = default;
};

inline constexpr std::size_t kMaxExprDepth = 64;

std::vector<Violation> validate_model(const ContractModel& m);

/// Parses and validates; throws Error{MalformedJson | SchemaViolation}.
ContractModel load_model(std::string_view json_text);

/// Canonical serialization: sorted keys, no insignificant whitespace.
std::string save_model(const ContractModel& m);

}  // namespace srvscan
