// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include "srvscan/detector.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <tuple>

namespace srvscan {

namespace {

/// Assert at `a` runs before `s` on every path: same or enclosing statement list, earlier index.
bool precedes(const StmtPath& a, const StmtPath& s) {
    if (a.empty() || s.size() < a.size()) return false;
    if (!std::equal(a.begin(), a.end() - 1, s.begin())) return false;
    return a.back() < s[a.size() - 1];
}

std::optional<EnvAtom> first_randomness(const Expr& e) {
    std::optional<EnvAtom> best;
    for (auto a : env_atoms(e))
        if (is_randomness_atom(a) && (!best || a < *best)) best = a;
    return best;
}

void keep_min(std::optional<EnvAtom>& best, std::optional<EnvAtom> a) {
    if (a && (!best || *a < *best)) best = a;
}

const FunctionDef& require_function(const ContractModel& m, const std::string& name) {
    const auto* f = m.find_function(name);
    if (!f) throw Error(ErrorCode::UnknownFunction, "unknown function " + name);
    return *f;
}

enum class Leaf { Origin, Caller, Constant, Storage, Other };

Leaf classify(const Expr& e) {
    if (const auto* a = std::get_if<Arith>(&e.node); a && a->op == ArithOp::AndBits && a->args.size() == 2) {
        // Address masking: and(x, 0xff..ff)
        for (int i = 0; i < 2; ++i)
            if (std::holds_alternative<Constant>(a->args[i].node)) return classify(a->args[1 - i]);
    }
    if (const auto* r = std::get_if<EnvRead>(&e.node)) {
        if (r->atom == EnvAtom::Origin) return Leaf::Origin;
        if (r->atom == EnvAtom::Caller) return Leaf::Caller;
    }
    if (std::holds_alternative<Constant>(e.node)) return Leaf::Constant;
    if (std::holds_alternative<StateRead>(e.node)) return Leaf::Storage;
    return Leaf::Other;
}

std::optional<AccessShape> match_shape(const Expr& e) {
    if (const auto* l = std::get_if<Logic>(&e.node); l && l->op == BoolOp::And) {
        for (const auto& a : l->args)
            if (auto s = match_shape(a)) return s;
        return std::nullopt;
    }
    const auto* c = std::get_if<Compare>(&e.node);
    if (!c || c->op != CmpOp::Eq || c->args.size() != 2) return std::nullopt;
    const Leaf a = classify(c->args[0]);
    const Leaf b = classify(c->args[1]);
    auto sender = [](Leaf x) { return x == Leaf::Origin || x == Leaf::Caller; };
    if ((a == Leaf::Origin && b == Leaf::Caller) || (a == Leaf::Caller && b == Leaf::Origin))
        return AccessShape::OriginEqCaller;
    for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
        if (!sender(x)) continue;
        if (y == Leaf::Constant) return AccessShape::SenderEqConstant;
        if (y == Leaf::Storage) return AccessShape::SenderEqStorage;
    }
    return std::nullopt;
}

/// Guards anywhere at the top level of `f`, following internal calls.
void callee_guard(const ContractModel& m, const FunctionDef& f, std::set<std::string>& visited, AccessControl& out) {
    if (!visited.insert(f.name).second) return;
    for (std::uint32_t i = 0; i < f.body.size() && !out.present; ++i) {
        const auto& s = f.body[i];
        if (const auto* a = std::get_if<AssertStmt>(&s.node)) {
            if (auto shape = match_shape(a->cond)) out = {true, shape, f.name, {i}};
        } else if (const auto* c = std::get_if<InternalCallStmt>(&s.node)) {
            if (const auto* callee = m.find_function(c->callee)) callee_guard(m, *callee, visited, out);
        } else if (std::holds_alternative<ReturnStmt>(s.node)) {
            return;
        }
    }
}

}  // namespace

bool has_taint_source(const FunctionDef& f, const TaintSpec& spec) {
    if (!is_entry_visibility(f.visibility)) return false;
    // Invoking an entry function at all means supplying calldata.
    if (spec.source_atoms.count(EnvAtom::CallData)) return true;
    if (spec.entry_params_are_sources && f.param_count > 0) return true;
    bool found = false;
    walk_statements(f.body, [&](const StmtPath&, const Statement& s) {
        for (const Expr* e : statement_exprs(s))
            for (auto a : env_atoms(*e))
                if (spec.source_atoms.count(a)) found = true;
    });
    return found;
}

std::optional<EnvAtom> write_randomness(const FunctionDef& f, const StmtPath& site) {
    const Statement* s = statement_at(f.body, site);
    if (!s) return std::nullopt;
    const auto* w = std::get_if<WriteStmt>(&s->node);
    if (!w) return std::nullopt;
    std::optional<EnvAtom> best = first_randomness(w->value);
    walk_statements(f.body, [&](const StmtPath& p, const Statement& st) {
        if (const auto* a = std::get_if<AssertStmt>(&st.node)) {
            if (precedes(p, site)) keep_min(best, first_randomness(a->cond));
        } else if (const auto* l = std::get_if<LoopStmt>(&st.node)) {
            const bool encloses = p.size() < site.size() && std::equal(p.begin(), p.end(), site.begin());
            if (encloses && l->bound) keep_min(best, first_randomness(*l->bound));
        }
    });
    return best;
}

Uncertainty is_uncertain(const ContractModel& m, const Sdg& g, const VarKey& var) {
    if (m.var_index(var) < 0) throw Error(ErrorCode::UnknownVar, "unknown state variable " + to_hex(var.slot));

    std::map<VarKey, Uncertainty> direct;
    for (const auto& f : m.functions)
        walk_statements(f.body, [&](const StmtPath& p, const Statement& s) {
            const auto* w = std::get_if<WriteStmt>(&s.node);
            if (!w || direct.count(w->var)) return;
            if (auto atom = write_randomness(f, p)) direct[w->var] = {true, atom, w->var, f.name, p, {}};
        });
    if (auto it = direct.find(var); it != direct.end()) return it->second;

    const LabelSet deps{EdgeLabel::RwRead, EdgeLabel::RwWrite, EdgeLabel::Asd, EdgeLabel::Tsd};
    const NodeId origin = g.var_node(var);
    for (bool forward : {true, false}) {
        std::map<NodeId, NodeId> parent{{origin, origin}};
        std::deque<NodeId> work{origin};
        while (!work.empty()) {
            const auto n = work.front();
            work.pop_front();
            const auto& node = g.nodes()[n];
            if (n != origin && node.var) {
                if (auto it = direct.find(*node.var); it != direct.end()) {
                    Uncertainty u = it->second;
                    for (NodeId at = n; at != origin; at = parent[at]) u.path.push_back(at);
                    u.path.push_back(origin);
                    if (forward) std::reverse(u.path.begin(), u.path.end());
                    return u;
                }
            }
            for (auto s : forward ? g.successors(n, deps) : g.predecessors(n, deps))
                if (parent.emplace(s, n).second) work.push_back(s);
        }
    }
    return {};
}

std::string_view access_shape_name(AccessShape s) {
    switch (s) {
        case AccessShape::OriginEqCaller: return "origin-eq-caller";
        case AccessShape::SenderEqConstant: return "sender-eq-constant";
        case AccessShape::SenderEqStorage: return "sender-eq-storage";
    }
    return "?";
}

AccessControl has_access_control(const ContractModel& m, const std::string& fname, const StmtPath& site) {
    const auto& f = require_function(m, fname);
    AccessControl out;
    std::set<std::string> visited{f.name};
    walk_statements(f.body, [&](const StmtPath& p, const Statement& s) {
        if (out.present || !precedes(p, site)) return;
        if (const auto* a = std::get_if<AssertStmt>(&s.node)) {
            if (auto shape = match_shape(a->cond)) out = {true, shape, f.name, p};
        } else if (const auto* c = std::get_if<InternalCallStmt>(&s.node)) {
            if (const auto* callee = m.find_function(c->callee)) callee_guard(m, *callee, visited, out);
        }
    });
    return out;
}

std::string_view rule_name(Rule r) { return r == Rule::R1 ? "R1" : "R2"; }

std::vector<Indicator> find_indicators(const ContractModel& m) {
    std::vector<Indicator> out;
    for (const auto& f : m.functions) {
        bool writes = false;
        std::set<VarKey> r1_vars;
        walk_statements(f.body, [&](const StmtPath& p, const Statement& s) {
            const auto* w = std::get_if<WriteStmt>(&s.node);
            if (!w) return;
            writes = true;
            if (r1_vars.count(w->var)) return;
            auto atom = write_randomness(f, p);
            if (!atom || has_access_control(m, f.name, p).present) return;
            r1_vars.insert(w->var);
            out.push_back({Rule::R1, f.name, p, w->var, atom, std::nullopt});
        });
        if (!writes) continue;

        std::optional<StmtPath> inside;  // loop already reported; nested loops are skipped
        walk_statements(f.body, [&](const StmtPath& p, const Statement& s) {
            const auto* loop = std::get_if<LoopStmt>(&s.node);
            if (!loop) return;
            if (inside && p.size() > inside->size() && std::equal(inside->begin(), inside->end(), p.begin())) return;
            std::optional<StmtPath> call;
            walk_statements(loop->body, [&](const StmtPath& q, const Statement& t) {
                if (call) return;
                const auto* a = std::get_if<AssertStmt>(&t.node);
                if (std::holds_alternative<ExternalCallStmt>(t.node) || (a && contains_call_result(a->cond))) {
                    StmtPath full = p;
                    full.insert(full.end(), q.begin(), q.end());
                    call = full;
                }
            });
            if (!call || has_access_control(m, f.name, p).present) return;
            inside = p;
            out.push_back({Rule::R2, f.name, p, std::nullopt, std::nullopt, call});
        });
    }
    auto key = [&](const Indicator& i) {
        std::string var;
        if (i.var) {
            const auto* v = m.find_var(*i.var);
            var = v ? var_label(*v) : to_hex(i.var->slot);
        }
        return std::tuple(i.rule, i.function, var, i.site);
    };
    std::stable_sort(out.begin(), out.end(), [&](const Indicator& a, const Indicator& b) { return key(a) < key(b); });
    return out;
}

std::optional<std::vector<std::string>> entry_trace(const ContractModel& m, const std::string& function,
                                                    const TaintSpec& spec) {
    if (!m.find_function(function)) return std::nullopt;
    std::map<std::string, std::vector<std::string>> callees;
    for (const auto& f : m.functions) {
        auto& cs = callees[f.name];
        walk_statements(f.body, [&](const StmtPath&, const Statement& s) {
            if (const auto* c = std::get_if<InternalCallStmt>(&s.node)) cs.push_back(c->callee);
        });
        std::sort(cs.begin(), cs.end());
        cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    }

    std::vector<const FunctionDef*> entries;
    for (const auto& f : m.functions)
        if (has_taint_source(f, spec)) entries.push_back(&f);
    std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->name < b->name; });

    std::optional<std::vector<std::string>> best;
    for (const auto* e : entries) {
        std::map<std::string, std::string> parent{{e->name, ""}};
        std::deque<std::string> work{e->name};
        while (!work.empty() && !parent.count(function)) {
            const auto n = work.front();
            work.pop_front();
            for (const auto& c : callees[n])
                if (parent.emplace(c, n).second) work.push_back(c);
        }
        if (!parent.count(function)) continue;
        std::vector<std::string> chain;
        for (std::string at = function; !at.empty(); at = parent[at]) chain.push_back(at);
        std::reverse(chain.begin(), chain.end());
        if (!best || chain.size() < best->size() || (chain.size() == best->size() && chain < *best))
            best = std::move(chain);
    }
    return best;
}

std::vector<TaintedVar> propagate_taint(const ContractModel& m, const Sdg& g, const std::vector<NodeId>& starts,
                                        LabelSet labels) {
    const NodeId none = static_cast<NodeId>(-1);
    std::vector<NodeId> parent(g.nodes().size(), none);
    std::vector<bool> seen(g.nodes().size(), false);
    std::vector<NodeId> sorted = starts;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::deque<NodeId> work;
    for (auto s : sorted) {
        (void)g.successors(s, {});  // validates the id
        seen[s] = true;
        work.push_back(s);
    }
    std::vector<NodeId> vars;
    while (!work.empty()) {
        const auto n = work.front();
        work.pop_front();
        if (g.nodes()[n].var) vars.push_back(n);
        for (auto s : g.successors(n, labels)) {
            if (seen[s]) continue;
            seen[s] = true;
            parent[s] = n;
            work.push_back(s);
        }
    }
    std::vector<TaintedVar> out;
    for (auto v : vars) {
        TaintedVar t{*g.nodes()[v].var, {}};
        for (NodeId at = v; at != none; at = parent[at]) t.path.push_back(at);
        std::reverse(t.path.begin(), t.path.end());
        out.push_back(std::move(t));
    }
    auto label = [&](const TaintedVar& t) {
        const auto* v = m.find_var(t.var);
        return v ? var_label(*v) : to_hex(t.var.slot);
    };
    std::sort(out.begin(), out.end(), [&](const TaintedVar& a, const TaintedVar& b) { return label(a) < label(b); });
    return out;
}

Detection detect(const ContractModel& m, const Sdg& g, const DetectOptions& opts) {
    Detection d;
    const LabelSet labels = opts.use_tsd ? LabelSet::all() : LabelSet::all().without(EdgeLabel::Tsd);
    const auto indicators = find_indicators(m);

    std::vector<Finding> groups;
    for (const auto& ind : indicators) {
        if (groups.empty() || groups.back().rule != ind.rule || groups.back().function != ind.function)
            groups.push_back({ind.rule, ind.function, {}, {}, {}, {}, Confidence::High});
        groups.back().indicators.push_back(ind);
    }

    for (auto& f : groups) {
        auto entry = entry_trace(m, f.function, opts.spec);
        if (!entry) {
            d.unreachable.insert(d.unreachable.end(), f.indicators.begin(), f.indicators.end());
            continue;
        }
        f.entry_trace = std::move(*entry);
        std::vector<NodeId> starts;
        for (const auto& ind : f.indicators) starts.push_back(g.block_of(ind.function, ind.site));
        f.tainted = propagate_taint(m, g, starts, labels);

        std::set<std::string> touched(f.entry_trace.begin(), f.entry_trace.end());
        std::map<std::vector<std::string>, std::vector<std::string>> by_route;
        for (const auto& t : f.tainted) {
            std::vector<std::string> route;
            for (auto n : t.path) {
                const auto& node = g.nodes()[n];
                if (node.var) continue;
                touched.insert(node.function);
                if (route.empty() || route.back() != node.function) route.push_back(node.function);
            }
            by_route[route].push_back(g.nodes()[t.path.back()].name.substr(4));
        }
        for (auto& [route, vars] : by_route) f.traces.push_back({route, vars});
        std::stable_sort(f.traces.begin(), f.traces.end(), [](const TaintTrace& a, const TaintTrace& b) {
            return a.functions.size() != b.functions.size() ? a.functions.size() < b.functions.size()
                                                            : a.functions < b.functions;
        });
        for (const auto& fn : touched)
            if (opts.low_confidence_functions.count(fn)) f.confidence = Confidence::Low;
        d.findings.push_back(std::move(f));
    }
    return d;
}

std::string trace_to_text(const TaintTrace& t) {
    std::string out;
    for (const auto& f : t.functions) out += f + " → ";
    out += "{";
    for (std::size_t i = 0; i < t.vars.size(); ++i) out += (i ? ", " : "") + t.vars[i];
    return out + "}";
}

}  // namespace srvscan
