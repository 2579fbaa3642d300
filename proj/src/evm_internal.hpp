// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// Context-sensitive exploration shared by function recovery and lifting.

#pragma once

#include "srvscan/evm.hpp"

#include <utility>
#include <vector>

namespace srvscan::evm::detail {

/// A block analysed under one calling context. The context is the set of
/// stack positions holding jump destinations (pending return addresses).
struct XNode {
    BlockId block = 0;
    std::vector<std::pair<std::uint32_t, std::size_t>> signature;
    SymStack in;
    /// Distinct incoming stacks, kept while few enough to join branch conditions per path.
    std::vector<SymStack> incoming;
    bool incoming_overflow = false;
    BlockEval eval;
    std::vector<std::uint32_t> succ;
    std::vector<EdgeKind> succ_kind;
    bool unresolved = false;
    int visits = 0;
};

struct Exploration {
    std::vector<XNode> nodes;  // node 0 is the entry; every node is reachable from it
    bool incomplete = false;
    std::vector<std::size_t> unresolved_offsets;
};

inline constexpr std::size_t kMaxContextsPerBlock = 8;
inline constexpr std::size_t kMaxNodes = 4096;
inline constexpr std::size_t kMaxIncoming = 4;

/// Valid JUMPDEST block for a constant target, if any.
std::optional<BlockId> jump_block(const Cfg& cfg, const SymRef& target);

Exploration explore(const Cfg& cfg, BlockId entry, const Deadline& deadline);

std::vector<std::vector<BlockId>> successor_lists(const Exploration& x);

}  // namespace srvscan::evm::detail
