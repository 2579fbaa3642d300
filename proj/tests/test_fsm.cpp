// srvscan: state-reverting vulnerability scanner for EVM contracts
// Copyright 2026 The srvscan Authors.
// Licensed under the Apache License, Version 2.0.

#include <doctest.h>
#include "oracles/oracles.hpp"
#include "support.hpp"

#include "srvscan/error.hpp"
#include "srvscan/fsm.hpp"

#include <algorithm>
#include <random>
#include <sstream>

using namespace srvscan;

namespace {

using Calls = std::vector<std::string>;

std::vector<TransactionTrace> traces(std::initializer_list<Calls> seqs) {
    std::vector<TransactionTrace> out;
    int i = 0;
    for (const auto& s : seqs) {
        std::ostringstream sender;
        sender << "0x" << std::string(39, '0') << i++;
        out.push_back({sender.str(), s});
    }
    return out;
}

ErrorCode ingest_error(const std::string& text, std::string* msg = nullptr) {
    try {
        ingest_traces(text);
    } catch (const Error& e) {
        if (msg) *msg = e.what();
        return e.code();
    }
    FAIL("expected ingest_traces to throw");
    return ErrorCode::Io;
}

std::string line(const std::string& sender, const std::string& fn, int block, int index) {
    return R"({"sender":")" + sender + R"(","function":")" + fn + R"(","block":)" + std::to_string(block) +
           R"(,"index":)" + std::to_string(index) + "}\n";
}

const std::string kA = "0x00000000000000000000000000000000000000aa";
const std::string kB = "0x00000000000000000000000000000000000000bb";

std::vector<TransactionTrace> random_traces(std::mt19937& rng) {
    const std::vector<std::string> alphabet{"A", "B", "C", "D"};
    std::vector<TransactionTrace> out;
    const int n = 1 + static_cast<int>(rng() % 6);
    const int labels = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
        TransactionTrace t;
        t.sender = "0x" + std::string(39, '0') + std::to_string(i);
        const int len = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < len; ++k) t.calls.push_back(alphabet[rng() % labels]);
        out.push_back(t);
    }
    return out;
}

bool precedes_everywhere(const std::vector<TransactionTrace>& ts, const std::string& dep, const std::string& pre) {
    for (const auto& t : ts) {
        const auto d = std::find(t.calls.begin(), t.calls.end(), dep);
        const auto p = std::find(t.calls.begin(), t.calls.end(), pre);
        if (d != t.calls.end() && (p == t.calls.end() || p > d)) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("ingest") {
    TEST_CASE("empty file") { CHECK(ingest_traces("").empty()); }

    TEST_CASE("one sender, two blocks") {
        const auto ts = ingest_traces(line("0x146a3c1e2f6b0d9e8c7a5b4f3e2d1c0b9a8f7e6d", "MintToken", 1, 0) +
                                      line("0x146a3c1e2f6b0d9e8c7a5b4f3e2d1c0b9a8f7e6d", "PlaytoEarn", 2, 0));
        REQUIRE(ts.size() == 1);
        CHECK(ts[0].calls == Calls{"MintToken", "PlaytoEarn"});
    }

    TEST_CASE("shuffled lines from two senders") {
        const auto text = line(kB, "Y", 5, 1) + line(kA, "Q", 9, 0) + "\n" + line(kB, "X", 5, 0);
        const auto ts = ingest_traces(text);
        REQUIRE(ts.size() == 2);
        CHECK(ts[0] == TransactionTrace{kA, {"Q"}});
        CHECK(ts[1] == TransactionTrace{kB, {"X", "Y"}});
    }

    TEST_CASE("sender case is normalized and labels are kept verbatim") {
        std::string upper = kA;
        std::transform(upper.begin() + 2, upper.end(), upper.begin() + 2, ::toupper);
        const auto ts = ingest_traces(line(upper, "0xDEADBEEF", 1, 0));
        REQUIRE(ts.size() == 1);
        CHECK(ts[0].sender == kA);
        CHECK(ts[0].calls == Calls{"0xDEADBEEF"});
    }

    TEST_CASE("line order does not matter") {
        const auto text = testing::read_file("tests/fixtures/traces/mint_play_withdraw.jsonl");
        std::vector<std::string> lines;
        std::istringstream in(text);
        for (std::string l; std::getline(in, l);) lines.push_back(l);
        const auto base = ingest_traces(text);
        std::mt19937 rng(3);
        for (int i = 0; i < 20; ++i) {
            std::shuffle(lines.begin(), lines.end(), rng);
            std::string joined;
            for (const auto& l : lines) joined += l + "\n";
            CHECK(ingest_traces(joined) == base);
            CHECK(merge_states(build_initial_fsm(ingest_traces(joined))) == merge_states(build_initial_fsm(base)));
        }
    }

    TEST_CASE("errors") {
        std::string msg;
        CHECK(ingest_error(line(kA, "A", 1, 0) + "{nope\n", &msg) == ErrorCode::MalformedLine);
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(ingest_error(line("0x12", "A", 1, 0)) == ErrorCode::MalformedLine);
        CHECK(ingest_error(line(kA, "", 1, 0)) == ErrorCode::MalformedLine);
        CHECK(ingest_error(line(kA, "A", -1, 0)) == ErrorCode::MalformedLine);
        CHECK(ingest_error(R"({"sender":")" + kA + R"(","function":"A","block":1.5,"index":0})") ==
              ErrorCode::MalformedLine);
        CHECK(ingest_error(R"({"sender":")" + kA + R"(","function":"A","index":0})") == ErrorCode::MalformedLine);
        CHECK(ingest_error(line(kA, "A", 1, 0) + line(kA, "B", 1, 0), &msg) == ErrorCode::DuplicateOrderKey);
        CHECK(msg.find(kA) != std::string::npos);
    }
}

TEST_SUITE("initial fsm") {
    TEST_CASE("empty input") {
        try {
            build_initial_fsm({});
            FAIL("expected EmptyInput");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyInput);
        }
    }

    TEST_CASE("single trace") {
        const auto f = build_initial_fsm(traces({{"A"}}));
        CHECK(f.states.size() == 2);
        REQUIRE(f.transitions.size() == 1);
        CHECK(f.transitions[0] == FsmTransition{0, "A", 1, 1});
    }

    TEST_CASE("shared prefix") {
        const auto f = build_initial_fsm(traces({{"A", "B"}, {"A", "C"}}));
        CHECK(f.states.size() == 4);
        CHECK(f.label_support("A") == 2);
        CHECK(f.next(0, "A") == FsmState{1});
        CHECK(f.labels == Calls{"A", "B", "C"});
    }

    TEST_CASE("prefix tree has one branch per distinct prefix") {
        const auto ts = ingest_traces(testing::read_file("tests/fixtures/traces/mint_play_withdraw.jsonl"));
        const auto f = build_initial_fsm(ts);
        std::set<Calls> prefixes;
        for (const auto& t : ts)
            for (std::size_t k = 1; k <= t.calls.size(); ++k) prefixes.insert(Calls(t.calls.begin(), t.calls.begin() + k));
        CHECK(f.transitions.size() == prefixes.size());
        CHECK(f.states.size() == prefixes.size() + 1);
        for (const auto& t : ts) CHECK(f.accepts(t.calls));
    }
}

TEST_SUITE("merging") {
    TEST_CASE("nothing to merge") {
        const auto f = build_initial_fsm(traces({{"A"}}));
        CHECK(merge_states(f) == f);
    }

    TEST_CASE("shared suffixes merge") {
        const auto ts = ingest_traces(testing::read_file("tests/fixtures/traces/shared_suffix.jsonl"));
        const auto init = build_initial_fsm(ts);
        REQUIRE(init.states.size() == 9);
        // Register path s1..s4, Approve path s5..s8.
        CHECK(init.next(0, "Register") == FsmState{1});
        CHECK(init.next(0, "Approve") == FsmState{5});
        const auto m = merge_states(init);
        CHECK(m.states.size() == 6);
        CHECK(m.members.at(2) == std::vector<FsmState>{2, 6});
        CHECK(m.members.at(3) == std::vector<FsmState>{3, 7});
        CHECK(m.members.at(4) == std::vector<FsmState>{4, 8});
        for (const auto& t : ts) CHECK(m.accepts(t.calls));
    }

    TEST_CASE("merged machine keeps PlaytoEarn after MintToken") {
        const auto m = merge_states(build_initial_fsm(ingest_traces(testing::read_file("tests/fixtures/traces/mint_play_withdraw.jsonl"))));
        const auto tsd = extract_tsd(m);
        CHECK(std::find(tsd.begin(), tsd.end(), TsdEdge{"PlaytoEarn", "MintToken"}) != tsd.end());
        CHECK(std::is_sorted(tsd.begin(), tsd.end()));
    }

    TEST_CASE("random trace sets: language kept, shrinks, idempotent, deterministic") {
        std::mt19937 rng(808);
        for (int i = 0; i < 300; ++i) {
            const auto ts = random_traces(rng);
            const auto init = build_initial_fsm(ts);
            const auto m = merge_states(init);
            INFO("instance " << i);
            for (const auto& t : ts) CHECK(m.accepts(t.calls));
            CHECK(m.states.size() <= init.states.size());
            CHECK(merge_states(m) == m);
            CHECK(merge_states(init) == m);
            std::set<std::pair<FsmState, std::string>> keys;
            for (const auto& t : m.transitions) CHECK(keys.insert({t.from, t.label}).second);
            std::uint64_t members = 0;
            for (const auto& [s, ms] : m.members) members += ms.size();
            CHECK(members == init.states.size());
        }
    }

    TEST_CASE("k-tails") {
        const auto f = build_initial_fsm(traces({{"A", "B", "C"}}));
        const auto tails = k_tails(f, 2);
        CHECK(tails.at(0) == std::vector<Calls>{{"A", "B"}});
        CHECK(tails.at(2) == std::vector<Calls>{{"C"}});
        CHECK(tails.at(3) == std::vector<Calls>{{}});
    }
}

TEST_SUITE("tsd") {
    TEST_CASE("single label") { CHECK(extract_tsd(merge_states(build_initial_fsm(traces({{"A", "A"}})))).empty()); }

    TEST_CASE("B without prior A gives no edge") {
        const auto tsd = extract_tsd(merge_states(build_initial_fsm(traces({{"A", "B"}, {"B"}}))));
        CHECK(std::find(tsd.begin(), tsd.end(), TsdEdge{"B", "A"}) == tsd.end());
    }

    TEST_CASE("min support") {
        const auto m = merge_states(build_initial_fsm(traces({{"A", "B"}})));
        CHECK(extract_tsd(m, 1) == std::vector<TsdEdge>{{"B", "A"}});
        CHECK(extract_tsd(m, 2).empty());
    }

    TEST_CASE("random trace sets: oracle agreement and soundness on raw traces") {
        std::mt19937 rng(4242);
        for (int i = 0; i < 300; ++i) {
            const auto ts = random_traces(rng);
            const auto m = merge_states(build_initial_fsm(ts));
            const auto tsd = extract_tsd(m);
            INFO("instance " << i);
            std::set<std::pair<std::string, std::string>> got;
            for (const auto& e : tsd) {
                got.insert({e.dependent, e.prerequisite});
                CHECK(e.dependent != e.prerequisite);
                CHECK(std::binary_search(m.labels.begin(), m.labels.end(), e.dependent));
                CHECK(std::binary_search(m.labels.begin(), m.labels.end(), e.prerequisite));
                CHECK(precedes_everywhere(ts, e.dependent, e.prerequisite));
            }
            CHECK(got == oracle::tsd(m));
            CHECK(got == oracle::tsd(m, 1));
            CHECK(std::is_sorted(tsd.begin(), tsd.end()));
        }
    }
}

TEST_CASE("exports") {
    const auto m = merge_states(build_initial_fsm(traces({{"A", "B"}})));
    CHECK(fsm_to_dot(m).find("digraph") != std::string::npos);
    CHECK(fsm_to_json(m).find(R"("label":"A")") != std::string::npos);
    CHECK(tsd_to_json(extract_tsd(m)).find(R"("dependent":"B")") != std::string::npos);
}
