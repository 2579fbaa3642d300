// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// State-dependency graph: state variables and statement blocks joined by
// control-flow, read/write, assertion and temporal edges.

#pragma once

#include "srvscan/deps.hpp"
#include "srvscan/fsm.hpp"
#include "srvscan/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace srvscan {

enum class EdgeLabel : std::uint8_t { C, RwRead, RwWrite, Asd, Tsd };

std::string_view edge_label_name(EdgeLabel l);

/// Bit set over EdgeLabel.
class LabelSet {
public:
    constexpr LabelSet() = default;
    constexpr LabelSet(std::initializer_list<EdgeLabel> ls) {
        for (auto l : ls) bits_ |= bit(l);
    }
    static constexpr LabelSet all() { return {EdgeLabel::C, EdgeLabel::RwRead, EdgeLabel::RwWrite, EdgeLabel::Asd, EdgeLabel::Tsd}; }

    constexpr bool contains(EdgeLabel l) const { return bits_ & bit(l); }
    constexpr LabelSet without(EdgeLabel l) const {
        LabelSet s = *this;
        s.bits_ &= static_cast<std::uint8_t>(~bit(l));
        return s;
    }
    constexpr bool empty() const { return bits_ == 0; }

private:
    static constexpr std::uint8_t bit(EdgeLabel l) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(l)); }
    std::uint8_t bits_ = 0;
};

using NodeId = std::uint32_t;

struct SdgNode {
    enum class Kind : std::uint8_t { StateVar, Block } kind = Kind::Block;
    /// "var:<label>" or "<function>#<k>".
    std::string name;
    std::optional<VarKey> var;
    std::string function;
    std::uint32_t block = 0;
    bool is_function_start = false;
    bool is_function_end = false;
    /// Statements grouped into this block, in statement order.
    std::vector<StmtPath> statements;
};

struct SdgEdge {
    NodeId from = 0;
    NodeId to = 0;
    EdgeLabel label = EdgeLabel::C;
    /// Variable that justifies an ASD edge.
    std::optional<VarKey> var;

    friend bool operator==(const SdgEdge&, const SdgEdge&) = default;
};

/// Immutable after build_sdg. Node ids are positions in `nodes()`: state
/// variables in model order, then blocks in function order.
class Sdg {
public:
    const std::vector<SdgNode>& nodes() const { return nodes_; }
    const std::vector<SdgEdge>& edges() const { return edges_; }

    std::optional<NodeId> find(std::string_view name) const;
    NodeId var_node(const VarKey& v) const;
    /// Block holding `path` in `function`.
    NodeId block_of(const std::string& function, const StmtPath& path) const;
    NodeId start_block(const std::string& function) const;
    std::vector<NodeId> end_blocks(const std::string& function) const;

    /// Id-sorted, deduplicated. Throws Error{UnknownNode}.
    std::vector<NodeId> successors(NodeId n, LabelSet labels) const;
    std::vector<NodeId> predecessors(NodeId n, LabelSet labels) const;
    /// Outgoing edges in insertion order.
    const std::vector<std::size_t>& out_edges(NodeId n) const;

    /// Forward closure including the sources. Throws Error{UnknownNode}.
    std::vector<NodeId> reachable(const std::vector<NodeId>& from, LabelSet labels) const;

private:
    friend Sdg build_sdg(const ContractModel&, const std::vector<RwEdge>&, const std::vector<AsdEdge>&,
                         const std::vector<TsdEdge>&);
    friend Sdg sdg_from_parts(std::vector<SdgNode>, std::vector<SdgEdge>);
    void index();
    void check(NodeId n) const;

    std::vector<SdgNode> nodes_;
    std::vector<SdgEdge> edges_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
    std::map<std::string, NodeId, std::less<>> by_name_;
    std::map<std::pair<std::string, StmtPath>, NodeId> by_stmt_;
    std::map<std::string, NodeId> start_;
    std::map<std::string, std::vector<NodeId>> ends_;
};

/// Statement list of each function is cut into blocks after every Assert,
/// ExternalCall, InternalCall and Return; a Loop gets its own header block and
/// the code after it starts a fresh block. An InternalCall adds C edges to the
/// callee's start block and from the callee's end blocks back to the block
/// after the call. Throws Error{InconsistentInputs}.
Sdg build_sdg(const ContractModel& m, const std::vector<RwEdge>& rw, const std::vector<AsdEdge>& asd,
              const std::vector<TsdEdge>& tsd);

/// Raw graph for property tests; nodes are taken as given.
Sdg sdg_from_parts(std::vector<SdgNode> nodes, std::vector<SdgEdge> edges);

std::string sdg_to_dot(const Sdg& g);
std::string sdg_to_json(const Sdg& g);

}  // namespace srvscan
