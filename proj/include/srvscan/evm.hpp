// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// Bytecode frontend: recovers instructions, basic blocks, control flow,
// dispatcher entries, loops and storage accesses from EVM runtime code and
// lifts them into a ContractModel.

#pragma once

#include "srvscan/deadline.hpp"
#include "srvscan/model.hpp"
#include "srvscan/u256.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace srvscan::evm {

namespace op {
inline constexpr std::uint8_t STOP = 0x00, ADD = 0x01, MUL = 0x02, SUB = 0x03, DIV = 0x04, SDIV = 0x05, MOD = 0x06,
                              SMOD = 0x07, ADDMOD = 0x08, MULMOD = 0x09, SIGNEXTEND = 0x0b,
                              EXTCODECOPY = 0x3c, RETURNDATACOPY = 0x3e, MCOPY = 0x5e, MSTORE8 = 0x53,
                              EXP = 0x0a, LT = 0x10, GT = 0x11, SLT = 0x12, SGT = 0x13, EQ = 0x14, ISZERO = 0x15,
                              AND = 0x16, OR = 0x17, XOR = 0x18, NOT = 0x19, BYTE = 0x1a, SHL = 0x1b, SHR = 0x1c,
                              SAR = 0x1d, KECCAK256 = 0x20, ADDRESS = 0x30, BALANCE = 0x31, ORIGIN = 0x32,
                              CALLER = 0x33, CALLVALUE = 0x34, CALLDATALOAD = 0x35, CALLDATASIZE = 0x36,
                              CALLDATACOPY = 0x37, CODECOPY = 0x39, BLOCKHASH = 0x40, COINBASE = 0x41,
                              TIMESTAMP = 0x42, NUMBER = 0x43, PREVRANDAO = 0x44, GASLIMIT = 0x45,
                              SELFBALANCE = 0x47, POP = 0x50, MLOAD = 0x51, MSTORE = 0x52, SLOAD = 0x54,
                              SSTORE = 0x55, JUMP = 0x56, JUMPI = 0x57, JUMPDEST = 0x5b, PUSH0 = 0x5f, PUSH1 = 0x60,
                              PUSH4 = 0x63, PUSH32 = 0x7f, DUP1 = 0x80, DUP2 = 0x81, DUP16 = 0x8f, SWAP1 = 0x90,
                              SWAP16 = 0x9f, CALL = 0xf1, CALLCODE = 0xf2, RETURN = 0xf3, DELEGATECALL = 0xf4,
                              STATICCALL = 0xfa, REVERT = 0xfd, INVALID = 0xfe, SELFDESTRUCT = 0xff;
}  // namespace op

struct OpInfo {
    std::string_view mnemonic;
    std::uint8_t immediate = 0;
    std::uint8_t pops = 0;
    std::uint8_t pushes = 0;
    bool defined = false;
};

const OpInfo& op_info(std::uint8_t opcode);

struct Instruction {
    std::size_t offset = 0;
    std::uint8_t opcode = 0;
    std::vector<std::uint8_t> immediate;

    /// Mnemonic; undefined opcodes render as `UNKNOWN_0x..`.
    std::string mnemonic() const;
    std::size_t size() const { return 1 + immediate.size(); }
    bool is_push() const { return opcode >= op::PUSH0 && opcode <= op::PUSH32; }
    U256 push_value() const { return u256_from_be(immediate); }

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Length of a trailing solc CBOR metadata section (including its 2-byte length), or 0.
std::size_t metadata_length(std::span<const std::uint8_t> code);

/// Strips trailing metadata, then decodes. Throws Error{TruncatedPush}.
std::vector<Instruction> disassemble(std::span<const std::uint8_t> code);

/// Decodes every byte; `lenient` stops at a truncated PUSH instead of throwing.
std::vector<Instruction> disassemble_raw(std::span<const std::uint8_t> code, bool lenient = false);

std::vector<std::uint8_t> assemble(std::span<const Instruction> instrs);

/// One instruction per line: `0x0000: MNEMONIC 0xIMM`.
std::string format_listing(std::span<const Instruction> instrs);

/// Hex text (optional 0x, whitespace tolerated) or raw binary.
std::vector<std::uint8_t> decode_code_input(std::string_view content);

struct CodeImage {
    std::vector<std::uint8_t> runtime;
    bool from_creation = false;
    std::size_t metadata_bytes = 0;
};

/// Extracts the runtime segment from creation code when the constructor
/// returns a CODECOPY'd tail; strips metadata from what remains.
CodeImage prepare_runtime(std::span<const std::uint8_t> code);

// ---------------------------------------------------------------------------
// Symbolic stack values

enum class SlotKind : std::uint8_t { Constant, MappingBase, Unknown };

struct SlotRef {
    SlotKind kind = SlotKind::Unknown;
    U256 slot;

    friend bool operator==(const SlotRef&, const SlotRef&) = default;
};

struct Sym;
/// nullptr means "unknown".
using SymRef = std::shared_ptr<const Sym>;

struct Sym {
    enum class Kind : std::uint8_t { Const, Env, Param, Storage, CallResult, MapSlot, Op };
    Kind kind = Kind::Const;
    U256 value;
    EnvAtom env = EnvAtom::CallData;
    std::uint32_t index = 0;
    SlotRef slot;
    std::uint8_t opcode = 0;
    std::vector<SymRef> args;
    std::uint32_t depth = 1;
    std::size_t hash = 0;
};

SymRef sym_const(const U256& v);
SymRef sym_env(EnvAtom a);
SymRef sym_param(std::uint32_t index);
SymRef sym_storage(const SlotRef& slot);
SymRef sym_call_result(std::size_t call_offset);
SymRef sym_map_slot(const U256& base);
/// Folds constants; returns nullptr when the tree would exceed the depth cap.
SymRef sym_op(std::uint8_t opcode, std::vector<SymRef> args);

bool sym_equal(const SymRef& a, const SymRef& b);
inline bool is_const(const SymRef& s) { return s && s->kind == Sym::Kind::Const; }

struct SymStack {
    static constexpr std::size_t kMaxDepth = 32;
    /// Top of stack is back(). Entries below the tracked window are unknown.
    std::vector<SymRef> items;

    void push(SymRef v);
    SymRef pop();
    const SymRef& peek(std::size_t depth_from_top) const;
    void dup(std::size_t n);
    void swap(std::size_t n);
};

/// Element-wise meet aligned at the top; the result is never deeper than either input.
SymStack meet(const SymStack& a, const SymStack& b);
bool stack_equal(const SymStack& a, const SymStack& b);

enum class Terminator : std::uint8_t { Jump, JumpI, Stop, Return, Revert, SelfDestruct, Invalid, Fallthrough };
std::string_view terminator_name(Terminator t);

using BlockId = std::uint32_t;

struct BasicBlock {
    BlockId id = 0;
    std::size_t start = 0;
    /// Offset of the last instruction.
    std::size_t end = 0;
    std::vector<Instruction> instructions;
    Terminator terminator = Terminator::Fallthrough;

    bool starts_with_jumpdest() const { return !instructions.empty() && instructions.front().opcode == op::JUMPDEST; }
};

struct BlockEvent {
    enum class Type : std::uint8_t { StorageRead, StorageWrite, EnvRead, ExternalCall };
    Type type;
    std::size_t offset = 0;
    SlotRef slot;
    SymRef value;
    EnvAtom atom = EnvAtom::CallData;
    CallKind call_kind = CallKind::Call;
    SymRef target;
    bool result_used = false;
};

struct BlockEval {
    SymStack exit;
    SymRef jump_target;
    SymRef branch_cond;
    std::vector<BlockEvent> events;
};

/// Abstract execution of one block over the symbolic stack, with a
/// block-local memory model that only tracks the keccak mapping pattern.
BlockEval evaluate_block(const BasicBlock& block, SymStack entry);

enum class EdgeKind : std::uint8_t { Jump, BranchTaken, BranchFallthrough, Sequential };
std::string_view edge_kind_name(EdgeKind k);

struct CfgEdge {
    BlockId from = 0;
    BlockId to = 0;
    EdgeKind kind = EdgeKind::Sequential;
    /// Added for an unresolved dynamic jump.
    bool conservative = false;

    friend bool operator==(const CfgEdge&, const CfgEdge&) = default;
};

struct Cfg {
    std::vector<BasicBlock> blocks;
    std::vector<CfgEdge> edges;
    BlockId entry = 0;
    std::vector<BlockId> unresolved_jumps;
    /// JUMPDEST offsets that also appear as PUSH immediates.
    std::vector<std::size_t> pushed_jumpdests;
    /// Fixpoint stack state at each block entry (nullopt: not reached by resolved edges).
    std::vector<std::optional<SymStack>> entry_states;

    /// Block whose first instruction sits at `offset`.
    std::optional<BlockId> block_at(std::size_t offset) const;
    std::vector<BlockId> successors(BlockId b, bool include_conservative = true) const;
    std::vector<BlockId> predecessors(BlockId b, bool include_conservative = true) const;
    bool is_unresolved(BlockId b) const;
};

inline constexpr int kFixpointIterationCap = 64;

Cfg build_cfg(std::span<const Instruction> instrs, const Deadline& deadline = Deadline::none());

std::string cfg_to_dot(const Cfg& cfg);

struct FunctionEntry {
    /// nullopt marks the fallback entry.
    std::optional<std::uint32_t> selector;
    BlockId entry = 0;
    std::vector<BlockId> exits;

    bool is_fallback() const { return !selector; }
};

std::vector<FunctionEntry> recover_functions(const Cfg& cfg, const Deadline& deadline = Deadline::none());

struct Loop {
    BlockId header = 0;
    BlockId latch = 0;
    /// Sorted block ids, header included.
    std::vector<BlockId> body;

    friend bool operator==(const Loop&, const Loop&) = default;
};

/// Natural loops of a plain digraph, one per back edge, ordered by (header, latch).
std::vector<Loop> find_natural_loops(std::size_t node_count, BlockId entry,
                                     const std::vector<std::vector<BlockId>>& successors);

/// Immediate dominators of nodes reachable from `entry`; unreachable nodes map to nullopt.
std::vector<std::optional<BlockId>> immediate_dominators(std::size_t node_count, BlockId entry,
                                                         const std::vector<std::vector<BlockId>>& successors);

/// Natural loops over resolved edges (conservative edges excluded), ordered by header offset.
std::vector<Loop> find_loops(const Cfg& cfg);

enum class AccessMode : std::uint8_t { Read, Write };

struct StorageAccess {
    std::size_t offset = 0;
    AccessMode mode = AccessMode::Read;
    SlotRef slot;
};

struct BlockAccesses {
    BlockId block = 0;
    std::vector<StorageAccess> storage;
    std::vector<EnvAtom> env_reads;
};

/// Per-block storage and environment accesses; blocks with none are omitted.
std::vector<BlockAccesses> classify_accesses(const Cfg& cfg);

struct LiftWarning {
    std::string function;
    std::size_t offset = 0;
    std::string reason;
};

struct LiftResult {
    ContractModel model;
    std::vector<LiftWarning> warnings;
    /// Functions whose exploration hit a jump it could not resolve.
    std::vector<std::string> low_confidence_functions;
    /// Offsets of every SSTORE that produced a Write.
    std::vector<std::size_t> lifted_sstores;
};

/// Slot used for writes whose target slot could not be resolved.
VarKey unknown_slot_var();

LiftResult lift_to_model(const Cfg& cfg, std::span<const FunctionEntry> entries, std::span<const Loop> loops,
                         std::span<const BlockAccesses> accesses, const Deadline& deadline = Deadline::none());

/// Name given to a lifted function.
std::string lifted_function_name(const FunctionEntry& e);

struct FrontendResult {
    CodeImage code;
    std::vector<Instruction> instructions;
    Cfg cfg;
    std::vector<FunctionEntry> functions;
    std::vector<Loop> loops;
    std::vector<BlockAccesses> accesses;
    LiftResult lifted;
};

/// The whole frontend pipeline on raw code bytes.
FrontendResult analyze_bytecode(std::span<const std::uint8_t> code, const Deadline& deadline = Deadline::none());

}  // namespace srvscan::evm
