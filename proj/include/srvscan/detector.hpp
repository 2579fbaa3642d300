// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// Indicator rules, entry traces and taint propagation over the SDG.

#pragma once

#include "srvscan/model.hpp"
#include "srvscan/sdg.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace srvscan {

struct TaintSpec {
    std::set<EnvAtom> source_atoms{EnvAtom::CallData, EnvAtom::Caller, EnvAtom::Origin, EnvAtom::CallValue};
    bool entry_params_are_sources = true;
    std::set<CallKind> sink_calls{CallKind::Call, CallKind::CallCode, CallKind::StaticCall, CallKind::DelegateCall};
    std::set<EnvAtom> sink_atoms{EnvAtom::Balance, EnvAtom::Address};
    bool storage_writes_are_sinks = true;
};

/// True when `f` reads a taint source: a parameter of an entry function or a source atom.
bool has_taint_source(const FunctionDef& f, const TaintSpec& spec = {});

struct Uncertainty {
    bool uncertain = false;
    /// Randomness atom behind the verdict.
    std::optional<EnvAtom> atom;
    /// Variable whose write depends on `atom` directly (the queried one or a neighbour).
    std::optional<VarKey> root;
    std::string function;
    StmtPath site;
    /// SDG node path linking the queried variable and `root`, empty when they coincide.
    std::vector<NodeId> path;
};

/// Randomness behind the first such Write of `var` in `f`: in the value, in a
/// dominating Assert, or in an enclosing loop bound.
std::optional<EnvAtom> write_randomness(const FunctionDef& f, const StmtPath& write_site);

/// Throws Error{UnknownVar}.
Uncertainty is_uncertain(const ContractModel& m, const Sdg& g, const VarKey& var);

enum class AccessShape : std::uint8_t { OriginEqCaller, SenderEqConstant, SenderEqStorage };
std::string_view access_shape_name(AccessShape s);

struct AccessControl {
    bool present = false;
    std::optional<AccessShape> shape;
    /// Function holding the Assert (f itself, or an internal callee invoked before the site).
    std::string function;
    StmtPath assert_site;
};

/// An Assert before `site` (in `f` or an internal callee invoked earlier) with
/// an access-control shape. Throws Error{UnknownFunction}.
AccessControl has_access_control(const ContractModel& m, const std::string& f, const StmtPath& site);

enum class Rule : std::uint8_t { R1, R2 };
std::string_view rule_name(Rule r);

struct Indicator {
    Rule rule = Rule::R1;
    std::string function;
    StmtPath site;
    /// R1: the uncertain variable and its randomness atom.
    std::optional<VarKey> var;
    std::optional<EnvAtom> atom;
    /// R2: the triggering external call or call-result Assert inside the loop.
    std::optional<StmtPath> call_site;
};

/// R1 per (function, var), R2 per (function, loop); ordered by rule, function, var, site.
std::vector<Indicator> find_indicators(const ContractModel& m);

/// Shortest InternalCall chain from an entry function to `function`; ties
/// broken lexicographically.
std::optional<std::vector<std::string>> entry_trace(const ContractModel& m, const std::string& function,
                                                    const TaintSpec& spec = {});

struct TaintedVar {
    VarKey var;
    std::vector<NodeId> path;
};

/// Forward closure from `starts`; tainted vars sorted by label, each with a BFS witness path.
std::vector<TaintedVar> propagate_taint(const ContractModel& m, const Sdg& g, const std::vector<NodeId>& starts,
                                        LabelSet labels = LabelSet::all());

struct TaintTrace {
    /// Functions along the witness path, consecutive repeats collapsed.
    std::vector<std::string> functions;
    std::vector<std::string> vars;
};

enum class Confidence : std::uint8_t { High, Low };

/// Indicators of one rule in one function, reported together.
struct Finding {
    Rule rule = Rule::R1;
    std::string function;
    std::vector<Indicator> indicators;
    std::vector<std::string> entry_trace;
    std::vector<TaintedVar> tainted;
    std::vector<TaintTrace> traces;
    Confidence confidence = Confidence::High;
};

struct Detection {
    std::vector<Finding> findings;
    std::vector<Indicator> unreachable;
};

struct DetectOptions {
    bool use_tsd = true;
    TaintSpec spec;
    /// Functions whose recovery was incomplete; findings touching them get low confidence.
    std::set<std::string> low_confidence_functions;
};

Detection detect(const ContractModel& m, const Sdg& g, const DetectOptions& opts = {});

/// "MintToken → Withdraw → {Balance}"
std::string trace_to_text(const TaintTrace& t);

}  // namespace srvscan
