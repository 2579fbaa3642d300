// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/sdg.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace srvscan {

std::string_view edge_label_name(EdgeLabel l) {
    switch (l) {
        case EdgeLabel::C: return "C";
        case EdgeLabel::RwRead: return "RW-read";
        case EdgeLabel::RwWrite: return "RW-write";
        case EdgeLabel::Asd: return "ASD";
        case EdgeLabel::Tsd: return "TSD";
    }
    return "?";
}

std::optional<NodeId> Sdg::find(std::string_view name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

void Sdg::check(NodeId n) const {
    if (n >= nodes_.size()) throw Error(ErrorCode::UnknownNode, "no SDG node " + std::to_string(n));
}

NodeId Sdg::var_node(const VarKey& v) const {
    for (NodeId i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].var && *nodes_[i].var == v) return i;
    throw Error(ErrorCode::UnknownNode, "no SDG node for variable " + to_hex(v.slot));
}

NodeId Sdg::block_of(const std::string& function, const StmtPath& path) const {
    auto it = by_stmt_.find({function, path});
    if (it == by_stmt_.end())
        throw Error(ErrorCode::UnknownNode, "no block for " + function + " statement " + path_to_string(path));
    return it->second;
}

NodeId Sdg::start_block(const std::string& function) const {
    auto it = start_.find(function);
    if (it == start_.end()) throw Error(ErrorCode::UnknownNode, "no blocks for function " + function);
    return it->second;
}

std::vector<NodeId> Sdg::end_blocks(const std::string& function) const {
    auto it = ends_.find(function);
    if (it == ends_.end()) throw Error(ErrorCode::UnknownNode, "no blocks for function " + function);
    return it->second;
}

std::vector<NodeId> Sdg::successors(NodeId n, LabelSet labels) const {
    check(n);
    std::vector<NodeId> out;
    for (auto e : out_[n])
        if (labels.contains(edges_[e].label)) out.push_back(edges_[e].to);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<NodeId> Sdg::predecessors(NodeId n, LabelSet labels) const {
    check(n);
    std::vector<NodeId> out;
    for (auto e : in_[n])
        if (labels.contains(edges_[e].label)) out.push_back(edges_[e].from);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const std::vector<std::size_t>& Sdg::out_edges(NodeId n) const {
    check(n);
    return out_[n];
}

std::vector<NodeId> Sdg::reachable(const std::vector<NodeId>& from, LabelSet labels) const {
    std::vector<bool> seen(nodes_.size(), false);
    std::deque<NodeId> work;
    for (auto n : from) {
        check(n);
        if (!seen[n]) {
            seen[n] = true;
            work.push_back(n);
        }
    }
    while (!work.empty()) {
        const auto n = work.front();
        work.pop_front();
        for (auto e : out_[n]) {
            const auto& edge = edges_[e];
            if (!labels.contains(edge.label) || seen[edge.to]) continue;
            seen[edge.to] = true;
            work.push_back(edge.to);
        }
    }
    std::vector<NodeId> out;
    for (NodeId i = 0; i < seen.size(); ++i)
        if (seen[i]) out.push_back(i);
    return out;
}

void Sdg::index() {
    out_.assign(nodes_.size(), {});
    in_.assign(nodes_.size(), {});
    by_name_.clear();
    for (NodeId i = 0; i < nodes_.size(); ++i) by_name_.emplace(nodes_[i].name, i);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        check(edges_[e].from);
        check(edges_[e].to);
        out_[edges_[e].from].push_back(e);
        in_[edges_[e].to].push_back(e);
    }
}

namespace {

struct Segment {
    std::vector<StmtPath> statements;
    bool has_return = false;
};

/// Cuts one function body into blocks and the C edges between them.
class Segmenter {
public:
    std::vector<Segment> blocks;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    /// Block following each block that ends in an InternalCall.
    std::map<std::uint32_t, std::uint32_t> continuation;

    void run(const std::vector<Statement>& body) {
        new_block();
        StmtPath prefix;
        walk(body, prefix);
    }

private:
    std::optional<std::uint32_t> open_;
    std::vector<std::uint32_t> preds_;
    std::set<std::uint32_t> calls_;

    void new_block() {
        const auto id = static_cast<std::uint32_t>(blocks.size());
        blocks.emplace_back();
        for (auto p : preds_) {
            edges.emplace_back(p, id);
            if (calls_.count(p)) continuation[p] = id;
        }
        preds_.clear();
        open_ = id;
    }

    void close() {
        preds_ = {*open_};
        open_.reset();
    }

    void walk(const std::vector<Statement>& body, StmtPath& prefix) {
        for (std::uint32_t i = 0; i < body.size(); ++i) {
            prefix.push_back(i);
            const auto& s = body[i];
            if (const auto* loop = std::get_if<LoopStmt>(&s.node)) {
                if (open_ && !blocks[*open_].statements.empty()) close();
                if (!open_) new_block();
                const auto header = *open_;
                blocks[header].statements.push_back(prefix);
                close();
                walk(loop->body, prefix);
                if (open_) preds_.push_back(*open_);
                for (auto p : preds_) edges.emplace_back(p, header);
                preds_ = {header};
                new_block();
            } else {
                if (!open_) new_block();
                blocks[*open_].statements.push_back(prefix);
                if (std::holds_alternative<ReturnStmt>(s.node)) {
                    blocks[*open_].has_return = true;
                    open_.reset();
                    preds_.clear();
                } else if (std::holds_alternative<InternalCallStmt>(s.node)) {
                    calls_.insert(*open_);
                    close();
                } else if (std::holds_alternative<AssertStmt>(s.node) ||
                           std::holds_alternative<ExternalCallStmt>(s.node)) {
                    close();
                }
            }
            prefix.pop_back();
        }
    }
};

[[noreturn]] void inconsistent(const std::string& what) { throw Error(ErrorCode::InconsistentInputs, what); }

}  // namespace

Sdg build_sdg(const ContractModel& m, const std::vector<RwEdge>& rw, const std::vector<AsdEdge>& asd,
              const std::vector<TsdEdge>& tsd) {
    Sdg g;
    for (const auto& v : m.state_vars) {
        SdgNode n;
        n.kind = SdgNode::Kind::StateVar;
        n.name = "var:" + var_label(v);
        n.var = v.key();
        g.nodes_.push_back(std::move(n));
    }

    std::set<std::tuple<NodeId, NodeId, EdgeLabel, std::optional<VarKey>>> seen;
    auto add_edge = [&](NodeId from, NodeId to, EdgeLabel label, std::optional<VarKey> var = std::nullopt) {
        if (seen.insert({from, to, label, var}).second) g.edges_.push_back({from, to, label, var});
    };

    struct Call {
        NodeId block;
        const InternalCallStmt* stmt;
        std::optional<NodeId> resume;
    };
    std::vector<Call> calls;
    for (const auto& f : m.functions) {
        Segmenter seg;
        seg.run(f.body);
        const auto base = static_cast<NodeId>(g.nodes_.size());
        for (std::uint32_t k = 0; k < seg.blocks.size(); ++k) {
            SdgNode n;
            n.kind = SdgNode::Kind::Block;
            n.name = f.name + "#" + std::to_string(k);
            n.function = f.name;
            n.block = k;
            n.is_function_start = k == 0;
            n.is_function_end = k + 1 == seg.blocks.size() || seg.blocks[k].has_return;
            n.statements = seg.blocks[k].statements;
            for (const auto& p : n.statements) {
                g.by_stmt_[{f.name, p}] = base + k;
                if (const auto* c = std::get_if<InternalCallStmt>(&statement_at(f.body, p)->node)) {
                    auto it = seg.continuation.find(k);
                    calls.push_back({base + k, c, it == seg.continuation.end() ? std::nullopt : std::optional<NodeId>(base + it->second)});
                }
            }
            if (n.is_function_end) g.ends_[f.name].push_back(base + k);
            g.nodes_.push_back(std::move(n));
        }
        g.start_[f.name] = base;
        for (auto [a, b] : seg.edges) add_edge(base + a, base + b, EdgeLabel::C);
    }
    for (const auto& c : calls) {
        auto it = g.start_.find(c.stmt->callee);
        if (it == g.start_.end()) inconsistent("internal call to unknown function " + c.stmt->callee);
        add_edge(c.block, it->second, EdgeLabel::C);
        if (c.resume)
            for (auto end : g.ends_[c.stmt->callee]) add_edge(end, *c.resume, EdgeLabel::C);
    }

    auto var_of = [&](const VarKey& v) -> NodeId {
        const int i = m.var_index(v);
        if (i < 0) inconsistent("edge references unknown state variable " + to_hex(v.slot));
        return static_cast<NodeId>(i);
    };
    auto function_known = [&](const std::string& f) {
        if (!g.start_.count(f)) inconsistent("edge references unknown function " + f);
    };

    for (const auto& e : rw) {
        function_known(e.accessor);
        auto it = g.by_stmt_.find({e.accessor, e.site});
        if (it == g.by_stmt_.end())
            inconsistent("edge references missing statement " + e.accessor + " " + path_to_string(e.site));
        const NodeId v = var_of(e.var);
        if (e.mode == AccessMode::Write) add_edge(it->second, v, EdgeLabel::RwWrite);
        else add_edge(v, it->second, EdgeLabel::RwRead);
    }
    for (const auto& e : asd) {
        function_known(e.reader);
        function_known(e.writer);
        var_of(e.var);
        for (auto end : g.ends_[e.writer]) add_edge(end, g.start_[e.reader], EdgeLabel::Asd, e.var);
    }
    for (const auto& e : tsd) {
        function_known(e.dependent);
        function_known(e.prerequisite);
        for (auto end : g.ends_[e.prerequisite]) add_edge(end, g.start_[e.dependent], EdgeLabel::Tsd);
    }
    g.index();
    return g;
}

Sdg sdg_from_parts(std::vector<SdgNode> nodes, std::vector<SdgEdge> edges) {
    Sdg g;
    g.nodes_ = std::move(nodes);
    g.edges_ = std::move(edges);
    g.index();
    return g;
}

std::string sdg_to_dot(const Sdg& g) {
    auto color = [](EdgeLabel l) {
        switch (l) {
            case EdgeLabel::C: return "gray";
            case EdgeLabel::RwRead:
            case EdgeLabel::RwWrite: return "black";
            case EdgeLabel::Asd: return "red";
            case EdgeLabel::Tsd: return "blue";
        }
        return "black";
    };
    std::ostringstream os;
    os << "digraph sdg {\n";
    for (NodeId i = 0; i < g.nodes().size(); ++i) {
        const auto& n = g.nodes()[i];
        os << "  n" << i << " [label=\"" << n.name << "\", shape="
           << (n.kind == SdgNode::Kind::StateVar ? "ellipse" : "box") << "];\n";
    }
    for (const auto& e : g.edges())
        os << "  n" << e.from << " -> n" << e.to << " [label=\"" << edge_label_name(e.label) << "\", color="
           << color(e.label) << "];\n";
    os << "}\n";
    return os.str();
}

std::string sdg_to_json(const Sdg& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (NodeId i = 0; i < g.nodes().size(); ++i) {
        const auto& n = g.nodes()[i];
        nlohmann::json j{{"id", n.name}};
        if (n.kind == SdgNode::Kind::StateVar) {
            j["kind"] = "var";
        } else {
            j["kind"] = "block";
            j["function"] = n.function;
            j["start"] = n.is_function_start;
            j["end"] = n.is_function_end;
            auto& st = j["statements"] = nlohmann::json::array();
            for (const auto& p : n.statements) st.push_back(p);
        }
        nodes.push_back(std::move(j));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges()) {
        nlohmann::json j{{"from", g.nodes()[e.from].name},
                         {"to", g.nodes()[e.to].name},
                         {"label", std::string(edge_label_name(e.label))}};
        if (e.var) {
            for (const auto& n : g.nodes())
                if (n.var && *n.var == *e.var) j["var"] = n.name.substr(4);
        }
        edges.push_back(std::move(j));
    }
    return nlohmann::json{{"nodes", nodes}, {"edges", edges}}.dump() + "\n";
}

}  // namespace srvscan
