// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// Shared helpers for the test binaries: fixture access and random generators.

#pragma once

#include "srvscan/evm.hpp"
#include "srvscan/model.hpp"
#include "srvscan/sdg.hpp"

#include <fstream>
#include <stdexcept>
#include <random>
#include <sstream>
#include <string>

#ifndef SRVSCAN_SOURCE_DIR
#error "SRVSCAN_SOURCE_DIR must be defined"
#endif

namespace testing {

inline std::string source_path(const std::string& rel) { return std::string(SRVSCAN_SOURCE_DIR) + "/" + rel; }

inline std::string read_file(const std::string& rel) {
    std::ifstream in(source_path(rel), std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture " + rel);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline srvscan::ContractModel load_fixture(const std::string& rel) { return srvscan::load_model(read_file(rel)); }

/// Random valid models: at most 6 functions, 4 state vars, 8 top-level statements each.
class ModelGen {
public:
    explicit ModelGen(std::uint32_t seed) : rng_(seed) {}

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
    std::mt19937& rng() { return rng_; }

    srvscan::ContractModel model(int max_functions = 6, int max_vars = 4, int max_statements = 8) {
        using namespace srvscan;
        ContractModel m;
        const int nv = uniform(0, max_vars);
        for (int i = 0; i < nv; ++i) {
            StateVarId v;
            v.slot = coin(0.7) ? U256(i) : (U256(uniform(1, 1 << 30)) << uniform(0, 200)) + i;
            v.kind = coin() ? VarKind::Scalar : VarKind::MappingBase;
            if (coin(0.7)) v.name = "v" + std::to_string(i);
            bool clash = false;
            for (const auto& o : m.state_vars) clash = clash || o.key() == v.key();
            if (!clash) m.state_vars.push_back(v);
        }
        if (coin(0.3)) {
            Address a{};
            for (auto& b : a.bytes) b = static_cast<std::uint8_t>(uniform(0, 255));
            m.address = a;
        }
        const int nf = uniform(0, max_functions);
        for (int i = 0; i < nf; ++i) names_.push_back("f" + std::to_string(i));
        for (int i = 0; i < nf; ++i) {
            FunctionDef f;
            f.name = names_[i];
            f.visibility = static_cast<Visibility>(uniform(0, 3));
            if (is_entry_visibility(f.visibility)) f.selector = 0x10000000u + static_cast<std::uint32_t>(i) * 0x01010101u;
            else if (coin(0.2)) f.selector = 0xa0000000u + static_cast<std::uint32_t>(i);
            f.param_count = static_cast<std::uint32_t>(uniform(0, 3));
            params_ = f.param_count;
            f.body = body(m, uniform(0, max_statements), 2);
            m.functions.push_back(std::move(f));
        }
        names_.clear();
        return m;
    }

    srvscan::Expr expr(const srvscan::ContractModel& m, int depth) {
        using namespace srvscan;
        if (depth <= 0 || coin(0.45)) {
            switch (uniform(0, 5)) {
                case 0:
                    if (!m.state_vars.empty())
                        return Expr::var(m.state_vars[uniform(0, static_cast<int>(m.state_vars.size()) - 1)].key());
                    [[fallthrough]];
                case 1: return Expr::env(static_cast<EnvAtom>(uniform(0, 12)));
                case 2:
                    if (params_ > 0) return Expr::param(static_cast<std::uint32_t>(uniform(0, static_cast<int>(params_) - 1)));
                    [[fallthrough]];
                case 3: return Expr::constant(U256(uniform(0, 1000)) << uniform(0, 250));
                case 4: return Expr::call_result();
                default: return Expr::opaque();
            }
        }
        switch (uniform(0, 2)) {
            case 0: return Expr::cmp(static_cast<CmpOp>(uniform(0, 5)), expr(m, depth - 1), expr(m, depth - 1));
            case 1: {
                const auto op = static_cast<BoolOp>(uniform(0, 2));
                if (op == BoolOp::Not) return Expr::logic(op, {expr(m, depth - 1)});
                std::vector<Expr> args;
                for (int i = uniform(1, 3); i > 0; --i) args.push_back(expr(m, depth - 1));
                return Expr::logic(op, std::move(args));
            }
            default: {
                std::vector<Expr> args;
                for (int i = uniform(1, 3); i > 0; --i) args.push_back(expr(m, depth - 1));
                return Expr::arith(static_cast<ArithOp>(uniform(0, 8)), std::move(args));
            }
        }
    }

private:
    std::vector<srvscan::Statement> body(const srvscan::ContractModel& m, int n, int loop_depth) {
        using namespace srvscan;
        std::vector<Statement> out;
        for (int i = 0; i < n; ++i) {
            const int pick = uniform(0, loop_depth > 0 ? 6 : 5);
            auto any_var = [&] { return m.state_vars[uniform(0, static_cast<int>(m.state_vars.size()) - 1)].key(); };
            if ((pick == 0 || pick == 1) && !m.state_vars.empty()) {
                if (pick == 0) out.push_back({ReadStmt{any_var()}});
                else out.push_back({WriteStmt{any_var(), expr(m, 3)}});
            } else if (pick == 2) {
                out.push_back({AssertStmt{expr(m, 3)}});
            } else if (pick == 3) {
                out.push_back({ExternalCallStmt{static_cast<CallKind>(uniform(0, 4)), expr(m, 1), coin()}});
            } else if (pick == 4 && !names_.empty()) {
                std::vector<Expr> args;
                for (int k = uniform(0, 2); k > 0; --k) args.push_back(expr(m, 1));
                out.push_back({InternalCallStmt{names_[uniform(0, static_cast<int>(names_.size()) - 1)], std::move(args)}});
            } else if (pick == 6) {
                LoopStmt l;
                l.body = body(m, uniform(0, 3), loop_depth - 1);
                if (coin()) l.bound = expr(m, 2);
                out.push_back({std::move(l)});
            } else if (coin(0.2)) {
                out.push_back({ReturnStmt{}});
            } else if (!m.state_vars.empty()) {
                out.push_back({WriteStmt{any_var(), expr(m, 2)}});
            }
        }
        return out;
    }

    std::mt19937 rng_;
    std::vector<std::string> names_;
    std::uint32_t params_ = 0;
};

/// Random labeled graph of `n` var-or-block nodes.
inline srvscan::Sdg random_sdg(std::mt19937& rng, int max_nodes = 14, int max_edges = 30) {
    using namespace srvscan;
    std::uniform_int_distribution<int> nn(1, max_nodes);
    const int n = nn(rng);
    std::vector<SdgNode> nodes;
    for (int i = 0; i < n; ++i) {
        SdgNode node;
        if (rng() % 3 == 0) {
            node.kind = SdgNode::Kind::StateVar;
            node.var = VarKey{U256(i), VarKind::Scalar};
            node.name = "var:v" + std::to_string(i);
        } else {
            node.function = "f" + std::to_string(rng() % 3);
            node.block = static_cast<std::uint32_t>(i);
            node.name = node.function + "#" + std::to_string(i);
        }
        nodes.push_back(std::move(node));
    }
    std::vector<SdgEdge> edges;
    const int ne = std::uniform_int_distribution<int>(0, max_edges)(rng);
    for (int i = 0; i < ne; ++i)
        edges.push_back({static_cast<NodeId>(rng() % n), static_cast<NodeId>(rng() % n),
                         static_cast<EdgeLabel>(rng() % 5), std::nullopt});
    return sdg_from_parts(std::move(nodes), std::move(edges));
}

/// Random valid instruction stream; immediates always complete.
inline std::vector<std::uint8_t> random_code(std::mt19937& rng, std::size_t max_len) {
    std::vector<std::uint8_t> out;
    const std::size_t n = rng() % (max_len + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto opcode = static_cast<std::uint8_t>(rng() % 256);
        out.push_back(opcode);
        for (int k = 0; k < srvscan::evm::op_info(opcode).immediate; ++k) out.push_back(static_cast<std::uint8_t>(rng() % 256));
    }
    return out;
}

}  // namespace testing
