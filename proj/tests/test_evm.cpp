// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include <doctest.h>
#include "oracles/oracles.hpp"
#include "support.hpp"

#include "srvscan/error.hpp"
#include "srvscan/evm.hpp"
#include "srvscan/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <set>

using namespace srvscan;
using namespace srvscan::evm;

namespace {

std::vector<std::uint8_t> bytes(std::initializer_list<int> xs) {
    std::vector<std::uint8_t> out;
    for (int x : xs) out.push_back(static_cast<std::uint8_t>(x));
    return out;
}

std::vector<std::uint8_t> fixture_code(const std::string& name) {
    return decode_code_input(testing::read_file("tests/fixtures/bytecode/" + name));
}

ErrorCode error_of(const std::function<void()>& fn, std::string* message = nullptr) {
    try {
        fn();
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

/// Two-selector dispatcher. `shared` routes both selectors to the first body.
std::vector<std::uint8_t> dispatcher(bool shared) {
    const int second = shared ? 0x1e : 0x25;
    return bytes({0x60, 0x00, 0x35, 0x60, 0xe0, 0x1c,                          // selector
                  0x80, 0x63, 0x11, 0x11, 0x11, 0x11, 0x14, 0x60, 0x1e, 0x57,  // 0x06
                  0x80, 0x63, 0x22, 0x22, 0x22, 0x22, 0x14, 0x60, second, 0x57,
                  0x60, 0x00, 0x80, 0xfd,                                      // 0x1a revert
                  0x5b, 0x60, 0x01, 0x60, 0x00, 0x55, 0x00,                    // 0x1e
                  0x5b, 0x60, 0x02, 0x60, 0x01, 0x55, 0x00});                  // 0x25
}

bool mentions(const Expr& e, EnvAtom a) {
    const auto atoms = env_atoms(e);
    return std::find(atoms.begin(), atoms.end(), a) != atoms.end();
}

bool has_eq(const Expr& e) {
    bool found = false;
    visit_expr(e, [&](const Expr& x) {
        if (const auto* c = std::get_if<Compare>(&x.node)) found = found || c->op == CmpOp::Eq;
    });
    return found;
}

oracle::Graph resolved_graph(const Cfg& cfg) {
    oracle::Graph g(cfg.blocks.size());
    for (const auto& e : cfg.edges)
        if (!e.conservative) g[e.from].push_back(e.to);
    return g;
}

std::vector<std::uint8_t> pathological(int blocks) {
    std::vector<std::uint8_t> code;
    for (int i = 0; i < blocks; ++i) {
        const std::size_t off = code.size() + 9;
        code.insert(code.end(), {0x5b, 0x61, static_cast<std::uint8_t>(off >> 8), static_cast<std::uint8_t>(off & 0xff),
                                 0x50, 0x60, 0x00, 0x35, 0x56});
    }
    return code;
}

}  // namespace

TEST_SUITE("disassembler") {
    TEST_CASE("examples") {
        CHECK(disassemble({}).empty());
        const auto code = bytes({0x60, 0x01, 0x60, 0x01, 0x55, 0x00});
        const auto ins = disassemble(code);
        REQUIRE(ins.size() == 4);
        CHECK(format_listing(ins) == "0x0000: PUSH1 0x01\n0x0002: PUSH1 0x01\n0x0004: SSTORE\n0x0005: STOP\n");
        CHECK(ins[1].offset == 2);
        CHECK(ins[1].push_value() == 1);
        CHECK(assemble(ins) == code);
    }

    TEST_CASE("truncated PUSH") {
        std::string msg;
        CHECK(error_of([] { disassemble(bytes({0x61})); }, &msg) == ErrorCode::TruncatedPush);
        CHECK(msg.find("offset 0") != std::string::npos);
        CHECK(error_of([] { disassemble(bytes({0x00, 0x7f, 0x01})); }, &msg) == ErrorCode::TruncatedPush);
        CHECK(msg.find("offset 1") != std::string::npos);
        CHECK(disassemble_raw(bytes({0x00, 0x62, 0x01}), true).size() == 1);
    }

    TEST_CASE("undefined opcodes are kept") {
        const auto ins = disassemble(bytes({0x0c, 0xef}));
        REQUIRE(ins.size() == 2);
        CHECK(ins[0].mnemonic() == "UNKNOWN_0x0c");
        CHECK_FALSE(op_info(0xef).defined);
    }

    TEST_CASE("PUSH0 and PREVRANDAO") {
        const auto ins = disassemble(bytes({0x5f, 0x44}));
        CHECK(ins[0].mnemonic() == "PUSH0");
        CHECK(ins[0].immediate.empty());
        CHECK(ins[1].mnemonic() == "PREVRANDAO");
    }

    TEST_CASE("round trip on random sequences") {
        std::mt19937 rng(1234);
        for (int i = 0; i < 1000; ++i) {
            const auto code = testing::random_code(rng, 64);
            const auto ins = disassemble(code);
            const std::size_t keep = code.size() - metadata_length(code);
            CHECK(assemble(ins) == std::vector<std::uint8_t>(code.begin(), code.begin() + static_cast<long>(keep)));
            for (std::size_t k = 1; k < ins.size(); ++k) CHECK(ins[k].offset == ins[k - 1].offset + ins[k - 1].size());
        }
    }

    TEST_CASE("truncation is deterministic") {
        std::mt19937 rng(99);
        for (int i = 0; i < 200; ++i) {
            auto code = testing::random_code(rng, 20);
            const std::size_t at = code.size();
            const auto width = static_cast<int>(1 + rng() % 32);
            code.push_back(static_cast<std::uint8_t>(0x5f + width));
            for (int k = static_cast<int>(rng() % width); k > 0; --k) code.push_back(0xaa);
            std::string a, b;
            CHECK(error_of([&] { disassemble_raw(code); }, &a) == ErrorCode::TruncatedPush);
            CHECK(error_of([&] { disassemble_raw(code); }, &b) == ErrorCode::TruncatedPush);
            CHECK(a == b);
            CHECK(a.find("offset " + std::to_string(at)) != std::string::npos);
        }
    }

    TEST_CASE("creation code yields the runtime segment") {
        const auto image = prepare_runtime(fixture_code("Toy.creation.hex"));
        CHECK(image.from_creation);
        const auto runtime = prepare_runtime(fixture_code("Toy.runtime.hex"));
        CHECK_FALSE(runtime.from_creation);
        CHECK(image.runtime == runtime.runtime);
        CHECK(runtime.metadata_bytes > 0);
    }

    TEST_CASE("hex input decoding") {
        CHECK(decode_code_input("0x6001") == bytes({0x60, 0x01}));
        CHECK(decode_code_input(" 60 01\n") == bytes({0x60, 0x01}));
    }
}

TEST_SUITE("cfg") {
    TEST_CASE("single STOP") {
        const auto cfg = build_cfg(disassemble(bytes({0x00})));
        CHECK(cfg.blocks.size() == 1);
        CHECK(cfg.edges.empty());
    }

    TEST_CASE("constant jump") {
        const auto cfg = build_cfg(disassemble(bytes({0x60, 0x04, 0x56, 0xfe, 0x5b, 0x00})));
        REQUIRE(cfg.blocks.size() == 3);
        REQUIRE(cfg.edges.size() == 1);
        CHECK(cfg.edges[0].from == 0);
        CHECK(cfg.blocks[cfg.edges[0].to].start == 4);
        CHECK(cfg.edges[0].kind == EdgeKind::Jump);
        CHECK(cfg.unresolved_jumps.empty());
    }

    TEST_CASE("conditional jump") {
        const auto cfg = build_cfg(disassemble(bytes({0x60, 0x00, 0x35, 0x60, 0x07, 0x57, 0x00, 0x5b, 0x00})));
        REQUIRE(cfg.blocks.size() == 3);
        std::set<std::pair<std::size_t, EdgeKind>> edges;
        for (const auto& e : cfg.edges) edges.insert({cfg.blocks[e.to].start, e.kind});
        CHECK(edges == std::set<std::pair<std::size_t, EdgeKind>>{{6, EdgeKind::BranchFallthrough},
                                                                    {7, EdgeKind::BranchTaken}});
    }

    TEST_CASE("dynamic jump gets conservative edges") {
        // PUSH1 0x09 POP CALLDATALOAD JUMP ... JUMPDEST STOP
        const auto cfg = build_cfg(disassemble(bytes({0x60, 0x09, 0x50, 0x60, 0x00, 0x35, 0x56, 0x00, 0x00, 0x5b, 0x00})));
        REQUIRE(cfg.unresolved_jumps.size() == 1);
        CHECK(cfg.is_unresolved(cfg.unresolved_jumps[0]));
        const auto succ = cfg.successors(cfg.unresolved_jumps[0]);
        REQUIRE(succ.size() == 1);
        CHECK(cfg.blocks[succ[0]].start == 9);
        CHECK(cfg.successors(cfg.unresolved_jumps[0], false).empty());
    }

    TEST_CASE("partition and jump-target invariants on fixtures") {
        for (const char* name : {"Toy.runtime.hex", "Lotto.runtime.hex", "TokenGame.runtime.hex"}) {
            INFO(name);
            const auto ins = disassemble(prepare_runtime(fixture_code(name)).runtime);
            const auto cfg = build_cfg(ins);
            std::size_t count = 0;
            std::size_t next = 0;
            for (const auto& b : cfg.blocks) {
                REQUIRE_FALSE(b.instructions.empty());
                CHECK(b.start == next);
                CHECK(b.instructions.front().offset == b.start);
                CHECK(b.instructions.back().offset == b.end);
                for (std::size_t k = 1; k < b.instructions.size(); ++k)
                    CHECK(b.instructions[k].opcode != op::JUMPDEST);
                count += b.instructions.size();
                next = b.end + b.instructions.back().size();
            }
            CHECK(count == ins.size());
            for (const auto& e : cfg.edges)
                if (e.kind == EdgeKind::Jump || e.kind == EdgeKind::BranchTaken)
                    CHECK(cfg.blocks[e.to].starts_with_jumpdest());
            CHECK(cfg.blocks[cfg.entry].start == 0);
        }
    }
}

TEST_SUITE("accesses") {
    TEST_CASE("no storage or env opcodes") {
        const auto cfg = build_cfg(disassemble(bytes({0x60, 0x01, 0x50, 0x00})));
        CHECK(classify_accesses(cfg).empty());
    }

    TEST_CASE("constant slot read") {
        const auto acc = classify_accesses(build_cfg(disassemble(bytes({0x60, 0x00, 0x54, 0x00}))));
        REQUIRE(acc.size() == 1);
        REQUIRE(acc[0].storage.size() == 1);
        CHECK(acc[0].storage[0].mode == evm::AccessMode::Read);
        CHECK(acc[0].storage[0].slot == SlotRef{SlotKind::Constant, U256(0)});
    }

    TEST_CASE("keccak mapping slot") {
        // mstore(0, caller) mstore(0x20, 2) sload(keccak256(0, 0x40))
        const auto code = bytes({0x33, 0x60, 0x00, 0x52, 0x60, 0x02, 0x60, 0x20, 0x52, 0x60, 0x40, 0x60, 0x00, 0x20,
                                 0x54, 0x00});
        const auto acc = classify_accesses(build_cfg(disassemble(code)));
        REQUIRE(acc.size() == 1);
        REQUIRE(acc[0].storage.size() == 1);
        CHECK(acc[0].storage[0].slot == SlotRef{SlotKind::MappingBase, U256(2)});
        CHECK(acc[0].env_reads == std::vector<EnvAtom>{EnvAtom::Caller});
    }
}

TEST_SUITE("functions") {
    TEST_CASE("no dispatcher gives a fallback") {
        const auto fns = recover_functions(build_cfg(disassemble(bytes({0x60, 0x01, 0x60, 0x01, 0x55, 0x00}))));
        REQUIRE(fns.size() == 1);
        CHECK(fns[0].is_fallback());
        CHECK(fns[0].entry == 0);
    }

    TEST_CASE("handcrafted dispatcher") {
        const auto cfg = build_cfg(disassemble(dispatcher(false)));
        const auto fns = recover_functions(cfg);
        REQUIRE(fns.size() == 3);
        CHECK(fns[0].selector == 0x11111111u);
        CHECK(fns[1].selector == 0x22222222u);
        CHECK(fns[2].is_fallback());
        CHECK(cfg.blocks[fns[0].entry].start == 0x1e);
        CHECK(cfg.blocks[fns[1].entry].start == 0x25);
    }

    TEST_CASE("selectors sharing one entry block") {
        const auto cfg = build_cfg(disassemble(dispatcher(true)));
        const auto fns = recover_functions(cfg);
        REQUIRE(fns.size() == 3);
        CHECK(fns[0].entry == fns[1].entry);
        CHECK(cfg.blocks[fns[0].entry].start == 0x1e);
    }

    TEST_CASE("compiled fixtures match their ABI") {
        for (const char* name : {"Toy", "Lotto", "TokenGame"}) {
            INFO(name);
            const auto abi = nlohmann::json::parse(testing::read_file(std::string("tests/fixtures/bytecode/") + name +
                                                                      ".selectors.json"));
            std::set<std::uint32_t> expected;
            for (const auto& [sig, sel] : abi.items())
                expected.insert(static_cast<std::uint32_t>(std::stoul(sel.get<std::string>(), nullptr, 16)));
            const auto fr = analyze_bytecode(fixture_code(std::string(name) + ".runtime.hex"));
            std::set<std::uint32_t> got;
            for (const auto& f : fr.functions)
                if (f.selector) got.insert(*f.selector);
            CHECK(got == expected);
        }
    }
}

TEST_SUITE("loops") {
    TEST_CASE("acyclic and self loop") {
        CHECK(find_natural_loops(3, 0, {{1}, {2}, {}}).empty());
        const auto self = find_natural_loops(2, 0, {{1}, {1}});
        REQUIRE(self.size() == 1);
        CHECK(self[0] == Loop{1, 1, {1}});
    }

    TEST_CASE("natural loops match the path-enumeration oracle") {
        std::mt19937 rng(5150);
        for (int i = 0; i < 300; ++i) {
            const std::size_t n = 1 + rng() % 12;
            std::vector<std::vector<BlockId>> succ(n);
            for (std::size_t u = 0; u < n; ++u) {
                std::set<BlockId> s;
                for (int k = static_cast<int>(rng() % 3); k > 0; --k) s.insert(static_cast<BlockId>(rng() % n));
                succ[u].assign(s.begin(), s.end());
            }
            std::vector<oracle::Loop> got;
            for (const auto& l : find_natural_loops(n, 0, succ)) got.push_back({l.header, l.latch, l.body});
            INFO("instance " << i);
            CHECK(got == oracle::natural_loops(succ, 0));

            const auto dom = oracle::dominators(succ, 0);
            const auto idom = immediate_dominators(n, 0, succ);
            for (std::size_t v = 0; v < n; ++v) {
                if (!idom[v]) continue;
                CHECK(dom[*idom[v]][v]);
            }
        }
    }

    TEST_CASE("fixture loops are dominated by their headers") {
        for (const char* name : {"Toy.runtime.hex", "Lotto.runtime.hex", "TokenGame.runtime.hex"}) {
            const auto fr = analyze_bytecode(fixture_code(name));
            const auto dom = oracle::dominators(resolved_graph(fr.cfg), fr.cfg.entry);
            for (const auto& l : fr.loops) {
                CHECK(std::find(l.body.begin(), l.body.end(), l.latch) != l.body.end());
                for (auto b : l.body) CHECK(dom[l.header][b]);
            }
            for (std::size_t k = 1; k < fr.loops.size(); ++k)
                CHECK(fr.cfg.blocks[fr.loops[k - 1].header].start <= fr.cfg.blocks[fr.loops[k].header].start);
        }
        // solc routes the loop increment through an internal return jump, so
        // the loop only appears in the lifted model.
        const auto lotto = analyze_bytecode(fixture_code("Lotto.runtime.hex")).lifted.model;
        const auto* refund = lotto.find_function("0x590e1ae3");
        REQUIRE(refund);
        bool loop = false;
        for (const auto& s : refund->body) loop = loop || std::holds_alternative<LoopStmt>(s.node);
        CHECK(loop);
    }
}

TEST_SUITE("lifting") {
    TEST_CASE("store 1 to slot 1") {
        const auto fr = analyze_bytecode(bytes({0x60, 0x01, 0x60, 0x01, 0x55, 0x00}));
        const auto& m = fr.lifted.model;
        REQUIRE(m.functions.size() == 1);
        CHECK(m.functions[0].visibility == Visibility::Public);
        CHECK(m.functions[0].name == "fallback");
        REQUIRE(m.functions[0].body.size() == 1);
        const auto* w = std::get_if<WriteStmt>(&m.functions[0].body[0].node);
        REQUIRE(w);
        CHECK(w->var == VarKey{U256(1), VarKind::Scalar});
        CHECK(validate_model(m).empty());
    }

    TEST_CASE("dispatcher functions are external") {
        const auto m = analyze_bytecode(dispatcher(false)).lifted.model;
        REQUIRE(m.find_function("0x11111111"));
        CHECK(m.find_function("0x11111111")->visibility == Visibility::External);
        CHECK(m.find_function("0x22222222"));
        CHECK(validate_model(m).empty());
    }

    TEST_CASE("Lotto refund guard compares ORIGIN and CALLER") {
        const auto m = analyze_bytecode(fixture_code("Lotto.runtime.hex")).lifted.model;
        const auto* refund = m.find_function("0x590e1ae3");
        REQUIRE(refund);
        bool found = false;
        walk_statements(refund->body, [&](const StmtPath&, const Statement& s) {
            if (const auto* a = std::get_if<AssertStmt>(&s.node))
                found = found || (mentions(a->cond, EnvAtom::Origin) && mentions(a->cond, EnvAtom::Caller) && has_eq(a->cond));
        });
        CHECK(found);
    }

    TEST_CASE("every SSTORE becomes a Write") {
        for (const char* name : {"Toy.runtime.hex", "Lotto.runtime.hex", "TokenGame.runtime.hex"}) {
            INFO(name);
            const auto fr = analyze_bytecode(fixture_code(name));
            std::size_t sstores = 0;
            for (const auto& in : fr.instructions) sstores += in.opcode == op::SSTORE;
            CHECK(fr.lifted.lifted_sstores.size() == sstores);
            std::size_t writes = 0;
            for (const auto& f : fr.lifted.model.functions)
                walk_statements(f.body, [&](const StmtPath&, const Statement& s) { writes += std::holds_alternative<WriteStmt>(s.node); });
            CHECK(writes >= sstores);
            CHECK(validate_model(fr.lifted.model).empty());
        }
    }

    TEST_CASE("lifting is deterministic") {
        for (const char* name : {"Toy.runtime.hex", "Lotto.creation.hex", "TokenGame.runtime.hex"}) {
            const auto a = save_model(analyze_bytecode(fixture_code(name)).lifted.model);
            const auto b = save_model(analyze_bytecode(fixture_code(name)).lifted.model);
            CHECK(a == b);
        }
    }

    TEST_CASE("pathological CFG honours the budget") {
        AnalysisConfig cfg;
        cfg.kind = InputKind::Bytecode;
        const auto code = pathological(6000);
        cfg.input.assign(code.begin(), code.end());
        cfg.timeout = std::chrono::milliseconds(200);
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = run_analysis(cfg);
        const auto elapsed = std::chrono::steady_clock::now() - t0;
        CHECK(r.timed_out);
        CHECK(exit_code_for(r) == 3);
        CHECK(elapsed < std::chrono::seconds(5));
    }
}
