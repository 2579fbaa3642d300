// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/deps.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <tuple>

namespace srvscan {

namespace {

void add_reads(std::vector<RwEdge>& out, const std::string& fn, const StmtPath& path, const Expr& e, bool in_assert,
               std::vector<VarKey>& seen) {
    for (const auto& v : vars_read(e)) {
        if (std::find(seen.begin(), seen.end(), v) != seen.end()) continue;
        seen.push_back(v);
        out.push_back({fn, v, AccessMode::Read, path, in_assert});
    }
}

}  // namespace

std::vector<RwEdge> extract_rw(const ContractModel& m) {
    std::vector<RwEdge> out;
    for (const auto& f : m.functions) {
        walk_statements(f.body, [&](const StmtPath& path, const Statement& s) {
            std::vector<VarKey> seen;
            const bool is_assert = std::holds_alternative<AssertStmt>(s.node);
            if (const auto* w = std::get_if<WriteStmt>(&s.node)) out.push_back({f.name, w->var, AccessMode::Write, path});
            if (const auto* r = std::get_if<ReadStmt>(&s.node)) {
                seen.push_back(r->var);
                out.push_back({f.name, r->var, AccessMode::Read, path});
            }
            for (const Expr* e : statement_exprs(s)) add_reads(out, f.name, path, *e, is_assert, seen);
        });
    }
    return out;
}

std::vector<AsdEdge> extract_asd(const ContractModel& m) {
    std::vector<std::set<VarKey>> writes(m.functions.size());
    for (std::size_t i = 0; i < m.functions.size(); ++i)
        walk_statements(m.functions[i].body, [&](const StmtPath&, const Statement& s) {
            if (const auto* w = std::get_if<WriteStmt>(&s.node)) writes[i].insert(w->var);
        });

    std::vector<AsdEdge> out;
    std::set<std::tuple<std::string, std::string, VarKey>> emitted;
    for (const auto& reader : m.functions) {
        walk_statements(reader.body, [&](const StmtPath& path, const Statement& s) {
            const auto* a = std::get_if<AssertStmt>(&s.node);
            if (!a) return;
            for (const auto& v : vars_read(a->cond)) {
                for (std::size_t w = 0; w < m.functions.size(); ++w) {
                    if (!writes[w].count(v)) continue;
                    const auto& writer = m.functions[w].name;
                    if (!emitted.insert({reader.name, writer, v}).second) continue;
                    out.push_back({reader.name, writer, v, path});
                }
            }
        });
    }
    return out;
}

std::string asd_to_json(const ContractModel& m, const std::vector<AsdEdge>& edges) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : edges) {
        const auto* v = m.find_var(e.var);
        arr.push_back({{"reader", e.reader},
                       {"writer", e.writer},
                       {"var", v ? var_label(*v) : var_label({e.var.slot, e.var.kind, std::nullopt})},
                       {"site", e.assert_site}});
    }
    return arr.dump() + "\n";
}

}  // namespace srvscan
