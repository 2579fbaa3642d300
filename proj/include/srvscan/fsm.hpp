// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// Finite-state machines mined from per-sender transaction traces, and the
// temporal-ordered dependencies (TSD) they imply.

#pragma once

#include "srvscan/deadline.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace srvscan {

struct TxRecord {
    std::string sender;  // 0x + 40 lowercase hex digits
    std::string function;
    std::uint64_t block = 0;
    std::uint64_t index = 0;
    std::optional<std::int64_t> timestamp;
};

struct TransactionTrace {
    std::string sender;
    std::vector<std::string> calls;

    friend bool operator==(const TransactionTrace&, const TransactionTrace&) = default;
};

/// Parses a JSON-Lines trace file. Blank lines are ignored.
/// Throws Error{MalformedLine | DuplicateOrderKey}.
std::vector<TxRecord> parse_trace_records(std::string_view jsonl);

/// Groups by sender (ascending), each group ordered by (block, index).
std::vector<TransactionTrace> group_traces(std::vector<TxRecord> records);

inline std::vector<TransactionTrace> ingest_traces(std::string_view jsonl) {
    return group_traces(parse_trace_records(jsonl));
}

using FsmState = std::uint32_t;

struct FsmTransition {
    FsmState from = 0;
    std::string label;
    FsmState to = 0;
    std::uint64_t support = 0;

    friend bool operator==(const FsmTransition&, const FsmTransition&) = default;
};

struct Fsm {
    /// Sorted ids. After merging, a state keeps the lowest id of its class.
    std::vector<FsmState> states;
    FsmState initial = 0;
    /// Sorted by (from, label); deterministic: one target per (from, label).
    std::vector<FsmTransition> transitions;
    /// Sorted label alphabet M.
    std::vector<std::string> labels;
    /// Original prefix-tree states folded into each surviving state (sorted, includes itself).
    std::map<FsmState, std::vector<FsmState>> members;

    std::optional<FsmState> next(FsmState s, std::string_view label) const;
    bool accepts(const std::vector<std::string>& calls) const;
    std::uint64_t label_support(std::string_view label) const;

    friend bool operator==(const Fsm&, const Fsm&) = default;
};

/// Prefix-tree acceptor; states numbered in insertion order. Throws Error{EmptyInput}.
Fsm build_initial_fsm(const std::vector<TransactionTrace>& traces);

/// k-tails of every state: label sequences of length k, or shorter ones ending where no transition leaves.
std::map<FsmState, std::vector<std::vector<std::string>>> k_tails(const Fsm& fsm, unsigned k);

/// Equivalence merging (equal k-tails) then subsumption merging (outgoing
/// label set of a non-leaf state contained in another's), to a fixpoint.
/// Every merge folds successors under shared labels so the result stays deterministic.
Fsm merge_states(const Fsm& fsm, unsigned k = 2, const Deadline& deadline = Deadline::none());

struct TsdEdge {
    std::string dependent;
    std::string prerequisite;

    friend bool operator==(const TsdEdge&, const TsdEdge&) = default;
    friend bool operator<(const TsdEdge& a, const TsdEdge& b) {
        return a.dependent != b.dependent ? a.dependent < b.dependent : a.prerequisite < b.prerequisite;
    }
};

/// e_t(dependent, prerequisite) when every path from the initial state to a
/// `dependent` transition passes a `prerequisite` transition first.
std::vector<TsdEdge> extract_tsd(const Fsm& fsm, std::uint64_t min_support = 1);

std::string fsm_to_dot(const Fsm& fsm);
std::string fsm_to_json(const Fsm& fsm);
std::string tsd_to_json(const std::vector<TsdEdge>& edges);

}  // namespace srvscan
