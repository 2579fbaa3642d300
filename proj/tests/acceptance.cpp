// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "corpus_support.hpp"
#include "oracles/oracles.hpp"

#include "srvscan/error.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace srvscan;
using Clock = std::chrono::steady_clock;

namespace {

/// Collects the first failed expectation of a criterion.
struct Check {
    std::ostringstream why;
    bool ok = true;

    bool operator()(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why << what;
        }
        return cond;
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const testing::CorpusEntry& entry(const std::vector<testing::CorpusEntry>& all, const std::string& name) {
    for (const auto& e : all)
        if (e.name == name) return e;
    throw std::runtime_error("no corpus fixture " + name);
}

std::vector<std::string> texts(const Finding& f) {
    std::vector<std::string> out;
    for (const auto& t : f.traces) out.push_back(trace_to_text(t));
    return out;
}

void corpus_exactness(Check& c) {
    const auto all = testing::corpus_entries();
    auto timed = [&](const std::string& name) {
        const auto t0 = Clock::now();
        auto r = run_analysis(entry(all, name).config);
        const double s = seconds_since(t0);
        c(s < 10.0, name + " took " + std::to_string(s) + " s");
        c(!r.timed_out && r.detection.has_value(), name + " did not complete");
        return r;
    };

    {
        const auto r = timed("TokenGame");
        const auto& fs = r.detection->findings;
        if (c(fs.size() == 1, "TokenGame: expected one finding")) {
            c(fs[0].rule == Rule::R1 && fs[0].function == "MintToken", "TokenGame: expected R1 in MintToken");
            c(texts(fs[0]) == std::vector<std::string>{"MintToken → {SheepToken, WolfToken}",
                                                       "MintToken → PlaytoEarn → {Earning}",
                                                       "MintToken → Withdraw → {Balance}"},
              "TokenGame: traces differ");
        }
    }
    {
        const auto r = timed("BsktToken");
        const auto& fs = r.detection->findings;
        if (c(fs.size() == 1, "BsktToken: expected one finding")) {
            c(fs[0].rule == Rule::R2 && fs[0].function == "redeem", "BsktToken: expected R2 in redeem");
            // Some ASD edge leaves a tainted redeem block for transferFrom and still reaches `allowed`.
            const auto& g = *r.sdg;
            std::vector<NodeId> starts;
            for (const auto& ind : fs[0].indicators) starts.push_back(g.block_of(ind.function, ind.site));
            const auto tainted = g.reachable(starts, LabelSet::all());
            const auto allowed = g.find("var:allowed");
            bool via_asd = false;
            for (const auto& e : g.edges()) {
                if (e.label != EdgeLabel::Asd || g.nodes()[e.from].function != "redeem" ||
                    g.nodes()[e.to].function != "transferFrom" ||
                    !std::binary_search(tainted.begin(), tainted.end(), e.from) || !allowed)
                    continue;
                const auto on = g.reachable({e.to}, LabelSet::all());
                via_asd = via_asd || std::binary_search(on.begin(), on.end(), *allowed);
            }
            c(via_asd, "BsktToken: no ASD edge carries taint from redeem to transferFrom");
            c(testing::tainted_labels(*r.model, fs[0]) == std::set<std::string>{"allowed", "balances", "totalSupply"},
              "BsktToken: tainted set differs");
        }
    }
    {
        const auto r = timed("Lotto");
        c(r.detection->findings.empty(), "Lotto: expected no findings");
    }
    {
        const auto r = timed("Barn");
        const auto& fs = r.detection->findings;
        if (c(fs.size() == 1, "Barn: expected one finding")) {
            c(fs[0].rule == Rule::R1, "Barn: expected R1");
            c(fs[0].entry_trace == std::vector<std::string>{"claimManyFromBarn", "_claimSheepFromBarn"},
              "Barn: entry trace differs");
        }
    }
}

void fsm_fidelity(Check& c) {
    const auto mined = merge_states(build_initial_fsm(ingest_traces(testing::read_file("tests/fixtures/traces/mint_play_withdraw.jsonl"))));
    const auto tsd = extract_tsd(mined);
    c(std::find(tsd.begin(), tsd.end(), TsdEdge{"PlaytoEarn", "MintToken"}) != tsd.end(),
      "mint/play traces: missing TSD (PlaytoEarn, MintToken)");

    const auto init = build_initial_fsm(ingest_traces(testing::read_file("tests/fixtures/traces/shared_suffix.jsonl")));
    const auto m = merge_states(init);
    std::set<std::vector<FsmState>> groups;
    for (const auto& [s, members] : m.members)
        if (members.size() > 1) groups.insert(members);
    c(groups == std::set<std::vector<FsmState>>{{2, 6}, {3, 7}, {4, 8}}, "shared-suffix traces: merged groups differ");
    c(m.states.size() == init.states.size() - 3, "shared-suffix traces: state count differs");
}

void asd_oracle(Check& c) {
    testing::ModelGen gen(0xa5d);
    const auto t0 = Clock::now();
    for (int i = 0; i < 500; ++i) {
        const auto m = gen.model();
        std::set<std::tuple<std::string, std::string, VarKey>> got;
        for (const auto& e : extract_asd(m)) got.insert({e.reader, e.writer, e.var});
        c(got == oracle::asd(m), "model " + std::to_string(i) + " disagrees with the oracle");
    }
    const double s = seconds_since(t0);
    c(s < 60.0, "took " + std::to_string(s) + " s");
}

void disassembler(Check& c) {
    std::mt19937 rng(0xd15a);
    const auto t0 = Clock::now();
    for (int i = 0; i < 1000; ++i) {
        const auto code = testing::random_code(rng, 64);
        const auto keep = static_cast<long>(code.size() - evm::metadata_length(code));
        c(evm::assemble(evm::disassemble(code)) == std::vector<std::uint8_t>(code.begin(), code.begin() + keep),
          "round trip " + std::to_string(i) + " differs");
    }
    for (int i = 0; i < 200; ++i) {
        auto code = testing::random_code(rng, 20);
        const auto width = static_cast<int>(1 + rng() % 32);
        code.push_back(static_cast<std::uint8_t>(0x5f + width));
        for (int k = static_cast<int>(rng() % width); k > 0; --k) code.push_back(0xaa);
        std::string first, second;
        for (auto* msg : {&first, &second}) {
            try {
                evm::disassemble_raw(code);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::TruncatedPush) *msg = e.what();
            }
        }
        c(!first.empty() && first == second, "truncated PUSH " + std::to_string(i) + " not reported deterministically");
    }
    const double s = seconds_since(t0);
    c(s < 10.0, "took " + std::to_string(s) + " s");
}

void loops(Check& c) {
    std::mt19937 rng(0x100b);
    for (int i = 0; i < 300; ++i) {
        const std::size_t n = 1 + rng() % 12;
        std::vector<std::vector<evm::BlockId>> succ(n);
        for (auto& s : succ) {
            std::set<evm::BlockId> out;
            for (int k = static_cast<int>(rng() % 3); k > 0; --k) out.insert(static_cast<evm::BlockId>(rng() % n));
            s.assign(out.begin(), out.end());
        }
        std::vector<oracle::Loop> got;
        for (const auto& l : evm::find_natural_loops(n, 0, succ)) got.push_back({l.header, l.latch, l.body});
        c(got == oracle::natural_loops(succ, 0), "CFG " + std::to_string(i) + " disagrees with the oracle");
    }
}

void reachability(Check& c) {
    std::mt19937 rng(0x5d6);
    for (int i = 0; i < 200; ++i) {
        const auto g = testing::random_sdg(rng);
        const auto n = static_cast<NodeId>(g.nodes().size());
        const std::vector<NodeId> from{static_cast<NodeId>(rng() % n)};
        for (const auto& ls : {LabelSet::all(), LabelSet::all().without(EdgeLabel::Tsd), LabelSet{EdgeLabel::C}}) {
            const auto r = g.reachable(from, ls);
            c(std::set<NodeId>(r.begin(), r.end()) == oracle::bfs(g, from, ls),
              "graph " + std::to_string(i) + " disagrees with BFS");
            auto more = from;
            more.push_back(static_cast<NodeId>(rng() % n));
            const auto bigger = g.reachable(more, ls);
            const auto wider = g.reachable(from, LabelSet::all());
            c(std::includes(bigger.begin(), bigger.end(), r.begin(), r.end()) &&
                  std::includes(wider.begin(), wider.end(), r.begin(), r.end()),
              "graph " + std::to_string(i) + " is not monotone");
        }
    }
}

void metamorphic(Check& c) {
    int flagged = 0;
    for (const auto& e : testing::corpus_entries()) {
        const auto r = run_analysis(e.config);
        if (!c(r.model && r.detection, e.name + " did not complete")) continue;
        if (r.detection->findings.empty()) continue;
        ++flagged;
        const auto guarded = testing::guard_indicators(*r.model);
        c(testing::detect_on(guarded, r.tsd).findings.empty(), e.name + " still reports a finding once guarded");
    }
    c(flagged > 0, "no corpus fixture has findings");
}

void ablation(Check& c) {
    auto cfg = entry(testing::corpus_entries(), "TokenGame").config;
    const auto with = run_analysis(cfg);
    cfg.use_tsd = false;
    const auto without = run_analysis(cfg);
    if (!c(with.has_findings() && without.has_findings(), "TokenGame must report in both modes")) return;
    const auto a = testing::tainted_labels(*with.model, with.detection->findings[0]);
    const auto b = testing::tainted_labels(*without.model, without.detection->findings[0]);
    c(std::includes(a.begin(), a.end(), b.begin(), b.end()), "tainted set without TSD is not a subset");
    c(a.count("Earning") && !b.count("Earning"), "Earning does not depend on TSD");
}

void determinism(Check& c) {
    const auto dir = testing::source_path("corpus");
    const auto expected = testing::read_file("corpus/expected.json");
    const auto a = run_corpus(dir, expected, {4, std::chrono::seconds(60)});
    const auto b = run_corpus(dir, expected, {1, std::chrono::seconds(60)});
    c(a.json == b.json, "corpus JSON differs between runs");
    c(a.all_passed, "corpus expectations not met");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
        {"corpus fixtures report exactly the expected findings", corpus_exactness},
        {"trace FSM yields the expected TSD and merges", fsm_fidelity},
        {"ASD agrees with the brute-force oracle", asd_oracle},
        {"disassembler round-trips and rejects truncated PUSH", disassembler},
        {"natural loops agree with the back-edge oracle", loops},
        {"SDG reachability agrees with BFS and is monotone", reachability},
        {"access-control guard removes every corpus finding", metamorphic},
        {"disabling TSD only shrinks the tainted set", ablation},
        {"corpus runs are byte-identical", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        const auto t0 = Clock::now();
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c(false, std::string("exception: ") + e.what());
        }
        char elapsed[32];
        std::snprintf(elapsed, sizeof elapsed, "%.2fs", seconds_since(t0));
        std::cout << "criterion " << i + 1 << ": " << (c.ok ? "PASS" : "FAIL") << "  " << criteria[i].first << " ("
                  << elapsed << ")";
        if (!c.ok) std::cout << ": " << c.why.str();
        std::cout << "\n";
        failed += c.ok ? 0 : 1;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << "\n";
    return failed ? 1 : 0;
}
